#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pmarl/cli/commands.hpp"
#include "pmarl/cli/plot.hpp"
#include "pmarl/cli/presets.hpp"
#include "pmarl/cli/run_config.hpp"
#include "pmarl/common/error.hpp"

using namespace pmarl;
using namespace pmarl::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pmarl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

TEST_CASE("config text parses and round-trips") {
  std::istringstream in(R"(# coverage with two slots
[run]
name = demo
seeds = 3, 4

[env]
task = formation
n_agents = 5
n_landmarks = 1

[network]
n_agents = 5
slots = 2
mode = roundrobin

[train]
xi = 0.125
hidden_sizes = 32,16
normalize_advantages = false
)");
  const RunConfig c = parse_run_config(in, "demo.ini");
  CHECK(c.run_name == "demo");
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(c.env.task == env::Task::Formation);
  CHECK(c.network.mode == net::CommMode::RoundRobin);
  CHECK(c.train.xi == 0.125);
  CHECK(c.train.hidden_sizes == std::vector<int>{32, 16});
  CHECK_FALSE(c.train.normalize_advantages);
  CHECK(c.train.gamma == train::TrainConfig{}.gamma);
  CHECK_NOTHROW(c.validate());

  std::istringstream again(to_text(c));
  const RunConfig d = parse_run_config(again, "snapshot");
  CHECK(to_text(d) == to_text(c));
}

TEST_CASE("snapshot preserves doubles exactly") {
  RunConfig c;
  c.train.init_log_std = std::log(0.5);
  c.train.actor_lr = 1.0 / 3.0;
  std::istringstream in(to_text(c));
  const RunConfig d = parse_run_config(in, "snap");
  CHECK(d.train.init_log_std == c.train.init_log_std);
  CHECK(d.train.actor_lr == c.train.actor_lr);
}

TEST_CASE("config errors name the field") {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_run_config(in, "bad.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[train]\ngamma = fast\n").find("train.gamma") != std::string::npos);
  CHECK(message("[train]\nlearning = 1\n").find("train.learning") != std::string::npos);
  CHECK(message("[env]\ntask = juggling\n").find("juggling") != std::string::npos);
  CHECK(message("[run]\nseeds =\n").find("run.seeds") != std::string::npos);

  RunConfig c;
  c.env.n_agents = 4;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("network.n_agents"), ConfigError);
  RunConfig e;
  e.seeds.clear();
  CHECK_THROWS_AS(e.validate(), ConfigError);
  RunConfig t;
  t.train.gamma = 1.5;
  CHECK_THROWS_WITH_AS(t.validate(), doctest::Contains("train.gamma"), ConfigError);
}

TEST_CASE("overrides") {
  RunConfig c;
  apply_override(c, "train.xi=0.2");
  apply_override(c, "network.mode = roundrobin");
  CHECK(c.train.xi == 0.2);
  CHECK(c.network.mode == net::CommMode::RoundRobin);
  CHECK_THROWS_AS(apply_override(c, "train.xi"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "nope.key=1"), ConfigError);
  CHECK(config_keys().size() > 30);
}

TEST_CASE("presets expand to complete configs with mode-specific slots") {
  for (const ExperimentPreset& p : presets()) {
    for (auto mode : {net::CommMode::Priority, net::CommMode::RoundRobin}) {
      const RunConfig c = expand_preset(p.name, mode);
      CHECK_NOTHROW(c.validate());
      CHECK(c.network.mode == mode);
    }
  }
  const RunConfig f = expand_preset("formation-n8-desk");
  CHECK(f.env.n_agents == 8);
  CHECK(f.network.slots == 1);
  CHECK(f.train.total_steps == 500000);
  CHECK(expand_preset("formation-n8-desk", net::CommMode::RoundRobin).network.slots == 2);
  const RunConfig c = expand_preset("coverage-n3-desk", net::CommMode::RoundRobin);
  CHECK(c.env.n_landmarks == 3);
  CHECK(c.network.slots == 1);
  CHECK(c.train.total_steps == 200000);
  CHECK(c.run_name == "coverage-n3-desk-roundrobin");
  CHECK_THROWS_WITH_AS(expand_preset("walker"), doctest::Contains("coverage-n3-desk"), ConfigError);
}

TEST_CASE("command-line values override the preset") {
  TrainArgs a;
  a.preset = "coverage-n3-desk";
  a.mode = "roundrobin";
  a.overrides = {"train.total_steps=1000", "train.xi=0.3"};
  a.seeds = "7";
  a.output_dir = "somewhere";
  a.run_name = "mine";
  const RunConfig c = resolve_train_config(a);
  CHECK(c.train.total_steps == 1000);
  CHECK(c.train.xi == 0.3);
  CHECK(c.seeds == std::vector<std::uint64_t>{7});
  CHECK(c.output_dir == "somewhere");
  CHECK(c.run_name == "mine");
  CHECK(c.network.mode == net::CommMode::RoundRobin);

  TrainArgs both = a;
  both.config_path = "x.ini";
  CHECK_THROWS_AS(resolve_train_config(both), ConfigError);
  CHECK_THROWS_AS(resolve_train_config(TrainArgs{}), ConfigError);
}

TEST_CASE("output root comes from the environment") {
  setenv(kOutputRootVar, "/tmp/pmarl_root", 1);
  CHECK(default_run_config().output_dir == "/tmp/pmarl_root");
  TrainArgs a;
  a.preset = "coverage-n3";
  CHECK(resolve_train_config(a).output_dir == "/tmp/pmarl_root");
  unsetenv(kOutputRootVar);
  CHECK(default_run_config().output_dir == "runs");
}

std::string metrics_csv(const std::string& run, const std::vector<double>& values) {
  std::string s = "# pmarl-metrics v1 run=" + run + " seed=0\nrollout,env_steps,episode_reward\n";
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::ostringstream row;
    row << k << ',' << 10 * k << ',' << values[k] << '\n';
    s += row.str();
  }
  return s;
}

TEST_CASE("plot band equals the sample standard deviation") {
  const fs::path dir = scratch_dir("plot");
  write_file(dir / "a.csv", metrics_csv("m", {1, 2, 3}));
  write_file(dir / "b.csv", metrics_csv("m", {2, 4, 6}));
  write_file(dir / "c.csv", metrics_csv("m", {3, 3, 3}));
  std::vector<MetricsSeries> s;
  for (const char* f : {"a.csv", "b.csv", "c.csv"}) s.push_back(read_metrics_series((dir / f).string(), "episode_reward"));
  const auto groups = aggregate_curves(s);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].label == "m");
  CHECK(groups[0].runs == 3);
  const double mean[3] = {2, 3, 4}, sd[3] = {1, 1, 1.7320508075688772};
  for (int k = 0; k < 3; ++k) {
    CHECK(groups[0].mean[k] == doctest::Approx(mean[k]));
    CHECK(groups[0].stddev[k] == doctest::Approx(sd[k]).epsilon(1e-14));
  }
}

TEST_CASE("identical or single runs have a zero-width band") {
  const fs::path dir = scratch_dir("plot_same");
  for (const char* f : {"a.csv", "b.csv", "c.csv"}) write_file(dir / f, metrics_csv("same", {-3, -2.5, -1}));
  write_file(dir / "d.csv", metrics_csv("solo", {0, 1}));
  std::vector<MetricsSeries> s;
  for (const char* f : {"a.csv", "b.csv", "c.csv", "d.csv"}) {
    s.push_back(read_metrics_series((dir / f).string(), "episode_reward"));
  }
  const auto groups = aggregate_curves(s);
  REQUIRE(groups.size() == 2);
  for (const auto& g : groups) {
    for (double v : g.stddev) CHECK(v == 0.0);
  }
  const std::string svg = render_svg(groups, "t", "episode_reward");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("solo (n=1)") != std::string::npos);
  CHECK(svg.find("same (n=3)") != std::string::npos);
}

TEST_CASE("runs on different step grids are interpolated") {
  const std::vector<double> xs{0, 10, 20}, ys{0, 1, 5};
  CHECK(interpolate(5, xs, ys) == doctest::Approx(0.5));
  CHECK(interpolate(15, xs, ys) == doctest::Approx(3.0));
  CHECK(interpolate(-1, xs, ys) == 0.0);
  CHECK(interpolate(25, xs, ys) == 5.0);
  MetricsSeries a{"a", "g", {0, 10, 20}, {0, 0, 0}}, b{"b", "g", {0, 20}, {2, 4}};
  const auto groups = aggregate_curves({a, b});
  CHECK(groups[0].mean[1] == doctest::Approx(1.5));
}

TEST_CASE("malformed metrics exit 2 naming file and line") {
  const fs::path dir = scratch_dir("plot_bad");
  write_file(dir / "bad.csv", "# pmarl-metrics v1 run=x\nrollout,env_steps,episode_reward\n0,0,1\n1,10\n");
  write_file(dir / "text.csv", "# pmarl-metrics v1 run=x\nrollout,env_steps,episode_reward\n0,0,abc\n");
  for (const char* f : {"bad.csv", "text.csv"}) {
    PlotArgs args;
    args.inputs = {(dir / f).string()};
    args.output = (dir / "out.svg").string();
    std::ostringstream log, err;
    CHECK(cmd_plot(args, log, err) == kExitConfig);
    CHECK(err.str().find(std::string(f) + ":") != std::string::npos);
  }
  std::ostringstream log, err;
  CHECK(cmd_plot(PlotArgs{}, log, err) == kExitConfig);
}

TEST_CASE("exit code mapping") {
  std::ostringstream err;
  CHECK(run_guarded([]() -> int { throw ConfigError("c"); }, err) == kExitConfig);
  CHECK(run_guarded([]() -> int { throw InputError("i"); }, err) == kExitConfig);
  CHECK(run_guarded([]() -> int { throw NumericError("n"); }, err) == kExitNumeric);
  CHECK(run_guarded([] { return 0; }, err) == kExitOk);
}

TEST_CASE("train, eval and reproduce from the snapshot") {
  const fs::path dir = scratch_dir("train");
  TrainArgs a;
  a.preset = "coverage-n3-desk";
  a.seeds = "0,1";
  a.output_dir = dir.string();
  a.overrides = {"train.total_steps=200", "train.rollout_length=100", "train.minibatch_size=50",
                 "train.eval_interval=1", "train.eval_episodes=2", "train.hidden_sizes=8,8"};
  std::ostringstream log, err;
  REQUIRE(cmd_train(a, log, err) == kExitOk);
  for (int s : {0, 1}) {
    const fs::path run = dir / "coverage-n3-desk-priority" / ("seed_" + std::to_string(s));
    for (const char* f : {"config.ini", "metrics.csv", "episodes.csv", "checkpoint.txt", "bandwidth.json",
                          "train_summary.json"}) {
      CHECK(fs::exists(run / f));
    }
  }
  const fs::path run0 = dir / "coverage-n3-desk-priority" / "seed_0";
  const std::string metrics = slurp(run0 / "metrics.csv");
  CHECK(metrics.rfind("# pmarl-metrics v1 run=coverage-n3-desk-priority seed=0", 0) == 0);

  // Re-running from the snapshot reproduces the metrics byte for byte.
  const fs::path again = scratch_dir("train_again");
  TrainArgs b;
  b.config_path = (run0 / "config.ini").string();
  b.output_dir = again.string();
  REQUIRE(cmd_train(b, log, err) == kExitOk);
  CHECK(slurp(again / "coverage-n3-desk-priority" / "seed_0" / "metrics.csv") == metrics);

  EvalArgs e;
  e.run_dir = run0.string();
  e.episodes = 3;
  e.seed = 11;
  REQUIRE(cmd_eval(e, log, err) == kExitOk);
  const std::string summary = slurp(run0 / "eval_summary.json");
  REQUIRE(cmd_eval(e, log, err) == kExitOk);
  CHECK(slurp(run0 / "eval_summary.json") == summary);
  const auto j = nlohmann::json::parse(summary);
  CHECK(j.at("episodes") == 3);

  // Trace rows = episodes * episode_length; selections match the logged argmax.
  std::ifstream trace(run0 / "priority_trace.csv");
  std::string line;
  std::getline(trace, line);
  CHECK(line == "# pmarl-eval-trace v1");
  std::getline(trace, line);
  int rows = 0;
  while (std::getline(trace, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    REQUIRE(f.size() == 9);
    if (f[2] == "priority") {
      int best = 0;
      for (int i = 1; i < 3; ++i) {
        if (std::stod(f[6 + i]) > std::stod(f[6 + best])) best = i;
      }
      CHECK(f[3] == std::to_string(best));
    }
  }
  CHECK(rows == 3 * 50);

  PlotArgs p;
  p.inputs = {(dir / "coverage-n3-desk-priority/seed_0/metrics.csv").string(),
              (dir / "coverage-n3-desk-priority/seed_1/metrics.csv").string()};
  p.output = (dir / "curve.svg").string();
  p.column = "eval_control_reward";
  std::ostringstream plog;
  CHECK(cmd_plot(p, plog, err) == kExitOk);
  CHECK(plog.str().find("coverage-n3-desk-priority: runs 2") != std::string::npos);
}

TEST_CASE("eval rejects missing or mismatched checkpoints") {
  const fs::path dir = scratch_dir("eval_bad");
  std::ostringstream log, err;
  EvalArgs e;
  e.run_dir = dir.string();
  CHECK(cmd_eval(e, log, err) == kExitConfig);

  RunConfig c = expand_preset("coverage-n3-desk");
  write_file(dir / "config.ini", to_text(c));
  write_file(dir / "checkpoint.txt", "pmarl-checkpoint 1\nentries 0\nend\n");
  CHECK(cmd_eval(e, log, err) == kExitConfig);
  CHECK(err.str().find("learners") != std::string::npos);
}

TEST_CASE("unknown preset exits 2 and lists the presets") {
  TrainArgs a;
  a.preset = "multiwalker";
  std::ostringstream log, err;
  CHECK(cmd_train(a, log, err) == kExitConfig);
  CHECK(err.str().find("formation-n8-desk") != std::string::npos);
  std::ostringstream list;
  CHECK(cmd_presets(list) == kExitOk);
  CHECK(list.str().find("coverage-n3-desk") != std::string::npos);
}

}  // namespace
