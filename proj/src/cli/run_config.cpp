#include "pmarl/cli/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "pmarl/common/csv.hpp"
#include "pmarl/common/error.hpp"

namespace pmarl::cli {

namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError(key + ": invalid value '" + value + "' (expected " + expected + ")");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  T out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, text, "an integer");
  return out;
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, text, "a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, text, "true|false");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_integer<int>(key, item));
  if (out.empty()) bad_value(key, text, "a comma-separated integer list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(values[k]);
  }
  return out;
}

std::string str(bool b) { return b ? "true" : "false"; }
std::string str(double d) { return csv::format(d); }
template <typename T>
  requires std::is_integral_v<T>
std::string str(T v) {
  return std::to_string(v);
}

// Binds a config member to a "section.key" name with the matching parser.
template <typename T>
Field member(std::string key, T RunConfig::*section_ptr, auto field_ptr) {
  using V = std::remove_cvref_t<decltype(std::declval<T&>().*field_ptr)>;
  Field f;
  f.key = key;
  f.set = [key, section_ptr, field_ptr](RunConfig& c, const std::string& text) {
    auto& target = (c.*section_ptr).*field_ptr;
    if constexpr (std::is_same_v<V, bool>) {
      target = parse_bool(key, text);
    } else if constexpr (std::is_same_v<V, double>) {
      target = parse_real(key, text);
    } else {
      target = parse_integer<V>(key, text);
    }
  };
  f.get = [section_ptr, field_ptr](const RunConfig& c) { return str((c.*section_ptr).*field_ptr); };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using env::EnvConfig;
    using net::NetworkConfig;
    using train::TrainConfig;
    std::vector<Field> t;
    t.push_back({"run.name", [](RunConfig& c, const std::string& v) { c.run_name = trim(v); },
                 [](const RunConfig& c) { return c.run_name; }});
    t.push_back({"run.output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); },
                 [](const RunConfig& c) { return c.output_dir; }});
    t.push_back({"run.seeds", [](RunConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); },
                 [](const RunConfig& c) { return join(c.seeds); }});
    t.push_back({"run.comm_log", [](RunConfig& c, const std::string& v) { c.comm_log = parse_bool("run.comm_log", v); },
                 [](const RunConfig& c) { return str(c.comm_log); }});

    t.push_back({"env.task", [](RunConfig& c, const std::string& v) { c.env.task = env::parse_task(trim(v)); },
                 [](const RunConfig& c) { return env::to_string(c.env.task); }});
    t.push_back(member("env.n_agents", &RunConfig::env, &EnvConfig::n_agents));
    t.push_back(member("env.n_landmarks", &RunConfig::env, &EnvConfig::n_landmarks));
    t.push_back(member("env.episode_length", &RunConfig::env, &EnvConfig::episode_length));
    t.push_back(member("env.dt", &RunConfig::env, &EnvConfig::dt));
    t.push_back(member("env.damping", &RunConfig::env, &EnvConfig::damping));
    t.push_back(member("env.accel_gain", &RunConfig::env, &EnvConfig::accel_gain));
    t.push_back(member("env.max_speed", &RunConfig::env, &EnvConfig::max_speed));
    t.push_back(member("env.world_half", &RunConfig::env, &EnvConfig::world_half));
    t.push_back(member("env.landmark_half", &RunConfig::env, &EnvConfig::landmark_half));
    t.push_back(member("env.noise_std", &RunConfig::env, &EnvConfig::noise_std));
    t.push_back(member("env.formation_radius", &RunConfig::env, &EnvConfig::formation_radius));
    t.push_back(member("env.angle_weight", &RunConfig::env, &EnvConfig::angle_weight));

    t.push_back({"network.mode", [](RunConfig& c, const std::string& v) { c.network.mode = net::parse_mode(trim(v)); },
                 [](const RunConfig& c) { return net::to_string(c.network.mode); }});
    t.push_back(member("network.n_agents", &RunConfig::network, &NetworkConfig::n_agents));
    t.push_back(member("network.slots", &RunConfig::network, &NetworkConfig::slots));
    t.push_back(member("network.loss_prob", &RunConfig::network, &NetworkConfig::loss_prob));
    t.push_back(member("network.delay_steps", &RunConfig::network, &NetworkConfig::delay_steps));
    t.push_back(member("network.priority_loss_prob", &RunConfig::network, &NetworkConfig::priority_loss_prob));
    t.push_back(member("network.priority_levels", &RunConfig::network, &NetworkConfig::priority_levels));

    t.push_back(member("train.gamma", &RunConfig::train, &TrainConfig::gamma));
    t.push_back(member("train.gae_lambda", &RunConfig::train, &TrainConfig::gae_lambda));
    t.push_back(member("train.clip_eps", &RunConfig::train, &TrainConfig::clip_eps));
    t.push_back(member("train.xi", &RunConfig::train, &TrainConfig::xi));
    t.push_back(member("train.rollout_length", &RunConfig::train, &TrainConfig::rollout_length));
    t.push_back(member("train.epochs", &RunConfig::train, &TrainConfig::epochs));
    t.push_back(member("train.minibatch_size", &RunConfig::train, &TrainConfig::minibatch_size));
    t.push_back(member("train.actor_lr", &RunConfig::train, &TrainConfig::actor_lr));
    t.push_back(member("train.critic_lr", &RunConfig::train, &TrainConfig::critic_lr));
    t.push_back(member("train.total_steps", &RunConfig::train, &TrainConfig::total_steps));
    t.push_back(member("train.entropy_coef", &RunConfig::train, &TrainConfig::entropy_coef));
    t.push_back(member("train.normalize_advantages", &RunConfig::train, &TrainConfig::normalize_advantages));
    t.push_back(member("train.max_grad_norm", &RunConfig::train, &TrainConfig::max_grad_norm));
    t.push_back({"train.hidden_sizes",
                 [](RunConfig& c, const std::string& v) { c.train.hidden_sizes = parse_int_list("train.hidden_sizes", v); },
                 [](const RunConfig& c) { return join(c.train.hidden_sizes); }});
    t.push_back(member("train.init_log_std", &RunConfig::train, &TrainConfig::init_log_std));
    t.push_back(member("train.actor_output_scale", &RunConfig::train, &TrainConfig::actor_output_scale));
    t.push_back(member("train.share_parameters", &RunConfig::train, &TrainConfig::share_parameters));
    t.push_back(member("train.eval_interval", &RunConfig::train, &TrainConfig::eval_interval));
    t.push_back(member("train.eval_episodes", &RunConfig::train, &TrainConfig::eval_episodes));
    t.push_back(member("train.seed", &RunConfig::train, &TrainConfig::seed));
    return t;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_integer<std::uint64_t>("run.seeds", item));
  if (out.empty()) bad_value("run.seeds", text, "a non-empty comma-separated list of seeds");
  return out;
}

void RunConfig::validate() const {
  env.validate();
  network.validate();
  train.validate();
  if (env.n_agents != network.n_agents) {
    throw ConfigError("network.n_agents (" + std::to_string(network.n_agents) + ") must equal env.n_agents (" +
                      std::to_string(env.n_agents) + ")");
  }
  if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
  if (run_name.empty() || run_name.find('/') != std::string::npos) {
    throw ConfigError("run.name must be a non-empty name without '/'");
  }
  if (output_dir.empty()) throw ConfigError("run.output_dir must not be empty");
}

RunConfig parse_run_config(std::istream& in, const std::string& source_name, RunConfig base) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) {
      throw ConfigError(source_name + ": key '" + section + "' must be inside a [section]");
    }
    for (const auto& [key, value] : keys) {
      const std::string full = section + "." + key;
      try {
        find_field(full).set(base, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(source_name + ": " + e.what());
      }
    }
  }
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_run_config(in, path, std::move(base));
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' must have the form section.key=value");
  find_field(trim(assignment.substr(0, eq))).set(config, assignment.substr(eq + 1));
}

std::string to_text(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string s = f.key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << '[' << s << "]\n";
      section = s;
    }
    out << f.key.substr(dot + 1) << " = " << f.get(config) << '\n';
  }
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace pmarl::cli
