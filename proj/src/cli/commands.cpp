#include "pmarl/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "pmarl/cli/plot.hpp"
#include "pmarl/cli/presets.hpp"
#include "pmarl/common/error.hpp"
#include "pmarl/train/trainer.hpp"

namespace pmarl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out.exceptions(std::ios::badbit);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
  if (!out) throw ConfigError("failed while writing '" + path.string() + "'");
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir.string() + "'");
}

json eval_json(const train::EvalReport& r) {
  json j;
  j["episodes"] = r.episodes;
  j["mean_control_reward"] = r.mean_control_reward;
  j["mean_penalty"] = r.mean_penalty;
  j["episode_control_rewards"] = r.episode_control_rewards;
  return j;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  if (const char* root = std::getenv(kOutputRootVar); root && *root) c.output_dir = root;
  return c;
}

RunConfig resolve_train_config(const TrainArgs& args) {
  if (args.preset && args.config_path) throw ConfigError("use either --preset or --config, not both");
  if (!args.preset && !args.config_path) throw ConfigError("one of --preset or --config is required");

  std::optional<net::CommMode> mode;
  if (args.mode) mode = net::parse_mode(*args.mode);

  RunConfig c;
  if (args.preset) {
    c = expand_preset(*args.preset, mode);
    c.output_dir = default_run_config().output_dir;
  } else {
    c = load_run_config(*args.config_path, default_run_config());
    if (mode) c.network.mode = *mode;
  }
  for (const std::string& o : args.overrides) apply_override(c, o);
  if (args.seeds) c.seeds = parse_seed_list(*args.seeds);
  if (args.output_dir) c.output_dir = *args.output_dir;
  if (args.run_name) c.run_name = *args.run_name;
  c.validate();
  return c;
}

std::string seed_dir(const RunConfig& config, std::uint64_t seed) {
  return (fs::path(config.output_dir) / config.run_name / ("seed_" + std::to_string(seed))).string();
}

int cmd_train(const TrainArgs& args, std::ostream& log, std::ostream& err) {
  return run_guarded(
      [&] {
        const RunConfig resolved = resolve_train_config(args);
        for (std::uint64_t seed : resolved.seeds) {
          RunConfig c = resolved;
          c.seeds = {seed};
          c.train.seed = seed;
          const fs::path dir = seed_dir(c, seed);
          make_dir(dir);
          write_text(dir / "config.ini", to_text(c));

          std::ofstream metrics = open_output(dir / "metrics.csv");
          std::ofstream episodes = open_output(dir / "episodes.csv");
          std::optional<std::ofstream> comm;
          if (c.comm_log) comm.emplace(open_output(dir / "comm_log.csv"));

          train::Trainer trainer(c.env, c.network, c.train);
          train::TrainSinks sinks;
          sinks.metrics = &metrics;
          sinks.episodes = &episodes;
          sinks.comm_log = comm ? &*comm : nullptr;
          sinks.label = "run=" + c.run_name + " seed=" + std::to_string(seed) + " mode=" + net::to_string(c.network.mode);
          log << c.run_name << " seed " << seed << ": training " << c.train.total_steps << " steps -> " << dir.string()
              << std::endl;

          train::TrainSummary summary;
          try {
            summary = train::run_training(trainer, sinks);
          } catch (const NumericError& e) {
            throw NumericError(c.run_name + " seed " + std::to_string(seed) + ": " + e.what());
          }

          trainer.checkpoint().save((dir / "checkpoint.txt").string());
          write_text(dir / "bandwidth.json", trainer.bandwidth().to_json() + "\n");
          json s;
          s["run"] = c.run_name;
          s["seed"] = seed;
          s["mode"] = net::to_string(c.network.mode);
          s["rollouts"] = summary.rollouts;
          s["env_steps"] = trainer.env_steps();
          s["initial_eval"] = eval_json(summary.initial_eval);
          s["final_eval"] = eval_json(summary.final_eval);
          write_text(dir / "train_summary.json", s.dump(2) + "\n");
          log << c.run_name << " seed " << seed << ": eval control reward " << summary.initial_eval.mean_control_reward
              << " -> " << summary.final_eval.mean_control_reward << std::endl;
        }
        return static_cast<int>(kExitOk);
      },
      err);
}

int cmd_eval(const EvalArgs& args, std::ostream& log, std::ostream& err) {
  return run_guarded(
      [&] {
        if (args.episodes < 1) throw ConfigError("--episodes must be >= 1");
        fs::path config_path, ckpt_path;
        if (args.run_dir) {
          config_path = fs::path(*args.run_dir) / "config.ini";
          ckpt_path = fs::path(*args.run_dir) / "checkpoint.txt";
        }
        if (args.config_path) config_path = *args.config_path;
        if (args.checkpoint_path) ckpt_path = *args.checkpoint_path;
        if (config_path.empty() || ckpt_path.empty()) {
          throw ConfigError("eval needs --run or both --config and --checkpoint");
        }
        if (!fs::exists(config_path)) throw ConfigError("missing config snapshot '" + config_path.string() + "'");
        if (!fs::exists(ckpt_path)) throw ConfigError("missing checkpoint '" + ckpt_path.string() + "'");

        const RunConfig c = load_run_config(config_path.string(), default_run_config());
        c.validate();
        train::Trainer trainer(c.env, c.network, c.train);
        trainer.load_checkpoint(nn::Checkpoint::load(ckpt_path.string()));
        const train::EvalReport report = trainer.evaluate(args.episodes, args.seed);

        const fs::path out_dir = args.output_dir ? fs::path(*args.output_dir)
                                 : args.run_dir  ? fs::path(*args.run_dir)
                                                 : fs::current_path();
        make_dir(out_dir);
        json s = eval_json(report);
        s["seed"] = args.seed;
        s["mode"] = net::to_string(c.network.mode);
        s["checkpoint"] = ckpt_path.string();
        write_text(out_dir / "eval_summary.json", s.dump(2) + "\n");
        std::ofstream trace = open_output(out_dir / "priority_trace.csv");
        train::write_eval_trace(trace, report, c.env.n_agents, c.network.mode);
        log << "eval: " << report.episodes << " episodes, mean control reward " << report.mean_control_reward
            << " -> " << out_dir.string() << std::endl;
        return static_cast<int>(kExitOk);
      },
      err);
}

int cmd_plot(const PlotArgs& args, std::ostream& log, std::ostream& err) {
  return run_guarded(
      [&] {
        if (args.inputs.empty()) throw ConfigError("plot needs at least one metrics CSV");
        std::vector<MetricsSeries> series;
        for (const std::string& path : args.inputs) series.push_back(read_metrics_series(path, args.column));
        const auto groups = aggregate_curves(series);
        write_text(args.output, render_svg(groups, args.title, args.column));
        for (const CurveGroup& g : groups) {
          log << g.label << ": runs " << g.runs << ", final " << args.column << " mean " << g.mean.back() << " std "
              << g.stddev.back() << std::endl;
        }
        log << "wrote " << args.output << std::endl;
        return static_cast<int>(kExitOk);
      },
      err);
}

int cmd_presets(std::ostream& log) {
  for (const ExperimentPreset& p : presets()) log << p.name << "  " << p.description << '\n';
  return kExitOk;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << std::endl;
    return kExitNumeric;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const InputError& e) {
    err << "error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << std::endl;
    return kExitFailure;
  }
}

}  // namespace pmarl::cli
