#include <CLI11.hpp>
#include <iostream>

#include "pmarl/cli/commands.hpp"

using namespace pmarl::cli;

int main(int argc, char** argv) {
  CLI::App app{"Control-priority multi-agent PPO workbench"};
  app.require_subcommand(1);

  TrainArgs train;
  std::string preset, config, mode, seeds, out, name;
  auto* t = app.add_subcommand("train", "train one run per seed");
  t->add_option("--preset", preset, "named experiment (see `presets`)");
  t->add_option("--config", config, "INI run config");
  t->add_option("--mode", mode, "priority | roundrobin");
  t->add_option("--seeds", seeds, "comma-separated seed list");
  t->add_option("--set", train.overrides, "override section.key=value (repeatable)");
  t->add_option("--out", out, "output root (default $PMARL_OUTPUT_ROOT or ./runs)");
  t->add_option("--name", name, "run name");

  EvalArgs eval;
  std::string run_dir, eval_config, ckpt, eval_out;
  auto* e = app.add_subcommand("eval", "evaluate a trained checkpoint");
  e->add_option("--run", run_dir, "seed directory written by train");
  e->add_option("--config", eval_config, "config snapshot");
  e->add_option("--checkpoint", ckpt, "checkpoint file");
  e->add_option("--episodes", eval.episodes, "episodes")->capture_default_str();
  e->add_option("--seed", eval.seed, "evaluation seed")->capture_default_str();
  e->add_option("--out", eval_out, "output directory (default: the run directory)");

  PlotArgs plot;
  auto* p = app.add_subcommand("plot", "SVG learning curves from metrics CSVs");
  p->add_option("inputs", plot.inputs, "metrics.csv files")->required();
  p->add_option("-o,--output", plot.output, "SVG path")->capture_default_str();
  p->add_option("--column", plot.column, "metrics column")->capture_default_str();
  p->add_option("--title", plot.title, "plot title")->capture_default_str();

  auto* pr = app.add_subcommand("presets", "list experiment presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitConfig;
  }

  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
  if (t->parsed()) {
    train.preset = opt(preset);
    train.config_path = opt(config);
    train.mode = opt(mode);
    train.seeds = opt(seeds);
    train.output_dir = opt(out);
    train.run_name = opt(name);
    return cmd_train(train, std::cout, std::cerr);
  }
  if (e->parsed()) {
    eval.run_dir = opt(run_dir);
    eval.config_path = opt(eval_config);
    eval.checkpoint_path = opt(ckpt);
    eval.output_dir = opt(eval_out);
    return cmd_eval(eval, std::cout, std::cerr);
  }
  if (p->parsed()) return cmd_plot(plot, std::cout, std::cerr);
  if (pr->parsed()) return cmd_presets(std::cout);
  return kExitConfig;
}
