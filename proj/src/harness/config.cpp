#include "macmarl/harness/config.hpp"

#include <iomanip>
#include <limits>
#include <sstream>

namespace macmarl::harness {

std::string to_string(LearnerMode mode) {
  switch (mode) {
    case LearnerMode::Decentralized: return "decentralized";
    case LearnerMode::CentralizedConditional: return "centralized-conditional";
    case LearnerMode::CentralizedUnconditional: return "centralized-unconditional";
  }
  return "?";
}

LearnerMode parse_learner_mode(const std::string& text) {
  if (text == "decentralized") return LearnerMode::Decentralized;
  if (text == "centralized-conditional") return LearnerMode::CentralizedConditional;
  if (text == "centralized-unconditional") return LearnerMode::CentralizedUnconditional;
  throw ConfigError("unknown learner mode '" + text + "'");
}

double RunConfig::discount() const {
  return env.discount < 0.0 ? envs::default_discount(env.env) : env.discount;
}

learners::TargetMode RunConfig::target_mode() const {
  switch (mode) {
    case LearnerMode::Decentralized: return learners::TargetMode::Decentralized;
    case LearnerMode::CentralizedConditional: return learners::TargetMode::CentralizedConditional;
    case LearnerMode::CentralizedUnconditional: return learners::TargetMode::CentralizedUnconditional;
  }
  return learners::TargetMode::Decentralized;
}

replay::SampleSpec RunConfig::sample_spec() const {
  replay::SampleSpec s;
  s.batch_size = batch_size;
  s.mode = sample_mode == "trace" ? replay::SampleMode::Trace : replay::SampleMode::FullEpisode;
  s.trace_length = trace_length;
  return s;
}

learners::HystereticConfig RunConfig::hysteresis() const { return {hysteresis_alpha, hysteresis_beta}; }

learners::EpsilonSchedule RunConfig::epsilon() const {
  return {epsilon_start, epsilon_end, epsilon_decay_episodes};
}

learners::Optimizer::Settings RunConfig::optimizer_settings() const {
  learners::Optimizer::Settings s;
  s.kind = optimizer == "sgd" ? learners::Optimizer::Kind::Sgd : learners::Optimizer::Kind::Adam;
  s.learning_rate = learning_rate;
  s.clip_norm = clip_norm;
  return s;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  const double g = discount();
  require(g >= 0.0 && g <= 1.0, "discount must lie in [0,1]");
  for (int w : pre_widths) require(w >= 1, "pre_widths entries must be at least 1");
  for (int w : post_widths) require(w >= 1, "post_widths entries must be at least 1");
  require(recurrent_width >= 1, "recurrent_width must be at least 1");
  require(hysteresis_beta > 0.0 && hysteresis_beta <= hysteresis_alpha,
          "hysteresis requires 0 < hysteresis_beta <= hysteresis_alpha");
  require(optimizer == "adam" || optimizer == "sgd", "optimizer must be adam or sgd");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(clip_norm >= 0.0, "clip_norm must be non-negative");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0,
          "epsilon values must lie in [0,1]");
  require(epsilon_decay_episodes >= 0, "epsilon_decay_episodes must be non-negative");
  require(buffer_capacity >= 1, "buffer_capacity must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(sample_mode == "episode" || sample_mode == "trace", "sample_mode must be episode or trace");
  require(sample_mode != "trace" || trace_length >= 1, "trace mode needs trace_length >= 1");
  require(warmup_episodes >= 0, "warmup_episodes must be non-negative");
  require(updates_per_episode >= 0, "updates_per_episode must be non-negative");
  require(target_sync_period >= 1, "target_sync_period must be positive");
  require(episodes >= 0, "episodes must be non-negative");
  require(eval_period >= 1, "eval_period must be positive");
  require(eval_episodes >= 1, "eval_episodes must be positive");
  require(!seeds.empty(), "seeds must list at least one seed");
  require(env.env != "warehouse" || !env.primitive, "warehouse has no primitive-action variant");
}

RunConfig parse_run_config(const KeyValues& kv) {
  RunConfig c;
  for (const auto& [key, value] : kv) {
    if (envs::apply_env_key(c.env, key, value)) continue;
    if (key == "mode") c.mode = parse_learner_mode(value);
    else if (key == "pre_widths") c.pre_widths = parse_int_list(key, value);
    else if (key == "recurrent_width") c.recurrent_width = parse_int(key, value);
    else if (key == "post_widths") c.post_widths = parse_int_list(key, value);
    else if (key == "hysteresis_alpha") c.hysteresis_alpha = parse_double(key, value);
    else if (key == "hysteresis_beta") c.hysteresis_beta = parse_double(key, value);
    else if (key == "optimizer") c.optimizer = value;
    else if (key == "learning_rate") c.learning_rate = parse_double(key, value);
    else if (key == "clip_norm") c.clip_norm = parse_double(key, value);
    else if (key == "epsilon_start") c.epsilon_start = parse_double(key, value);
    else if (key == "epsilon_end") c.epsilon_end = parse_double(key, value);
    else if (key == "epsilon_decay_episodes") c.epsilon_decay_episodes = parse_int(key, value);
    else if (key == "buffer_capacity") c.buffer_capacity = parse_int(key, value);
    else if (key == "batch_size") c.batch_size = parse_int(key, value);
    else if (key == "sample_mode") c.sample_mode = value;
    else if (key == "trace_length") c.trace_length = parse_int(key, value);
    else if (key == "warmup_episodes") c.warmup_episodes = parse_int(key, value);
    else if (key == "updates_per_episode") c.updates_per_episode = parse_int(key, value);
    else if (key == "target_sync_period") c.target_sync_period = parse_int(key, value);
    else if (key == "episodes") c.episodes = parse_int(key, value);
    else if (key == "eval_period") c.eval_period = parse_int(key, value);
    else if (key == "eval_episodes") c.eval_episodes = parse_int(key, value);
    else if (key == "seeds") c.seeds = parse_u64_list(key, value);
    else if (key == "share_parameters") c.share_parameters = parse_bool(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_key_value_file(path)); }

void write_run_config(std::ostream& out, const RunConfig& c) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto list = [&](const auto& v) {
    for (std::size_t k = 0; k < v.size(); ++k) out << (k ? "," : "") << v[k];
    out << '\n';
  };
  envs::write_env_keys(out, c.env);
  out << "mode = " << to_string(c.mode) << '\n';
  out << "pre_widths = ";
  list(c.pre_widths);
  out << "recurrent_width = " << c.recurrent_width << '\n';
  out << "post_widths = ";
  list(c.post_widths);
  out << "hysteresis_alpha = " << c.hysteresis_alpha << '\n'
      << "hysteresis_beta = " << c.hysteresis_beta << '\n'
      << "optimizer = " << c.optimizer << '\n'
      << "learning_rate = " << c.learning_rate << '\n'
      << "clip_norm = " << c.clip_norm << '\n'
      << "epsilon_start = " << c.epsilon_start << '\n'
      << "epsilon_end = " << c.epsilon_end << '\n'
      << "epsilon_decay_episodes = " << c.epsilon_decay_episodes << '\n'
      << "buffer_capacity = " << c.buffer_capacity << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "sample_mode = " << c.sample_mode << '\n'
      << "trace_length = " << c.trace_length << '\n'
      << "warmup_episodes = " << c.warmup_episodes << '\n'
      << "updates_per_episode = " << c.updates_per_episode << '\n'
      << "target_sync_period = " << c.target_sync_period << '\n'
      << "episodes = " << c.episodes << '\n'
      << "eval_period = " << c.eval_period << '\n'
      << "eval_episodes = " << c.eval_episodes << '\n';
  out << "seeds = ";
  list(c.seeds);
  out << "share_parameters = " << (c.share_parameters ? "true" : "false") << '\n';
  out.flags(flags);
  out.precision(precision);
}

std::string run_config_text(const RunConfig& config) {
  std::ostringstream out;
  write_run_config(out, config);
  return out.str();
}

}  // namespace macmarl::harness
