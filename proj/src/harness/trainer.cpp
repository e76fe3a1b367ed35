#include "macmarl/harness/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "macmarl/core/binary_io.hpp"

namespace macmarl::harness {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

// Independent random streams of one run.
enum Stream : std::uint64_t { kInitStream = 0, kActStream = 1, kEvalStream = 2, kSampleStream = 3 };

bool is_centralized(LearnerMode mode) { return mode != LearnerMode::Decentralized; }

}  // namespace

EvalSummary summarize(std::vector<double> returns) {
  EvalSummary s;
  const auto n = static_cast<double>(returns.size());
  if (returns.empty()) return s;
  s.mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  if (returns.size() > 1) {
    double ss = 0.0;
    for (double r : returns) ss += (r - s.mean) * (r - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  s.returns = std::move(returns);
  return s;
}

Trainer::Trainer(RunConfig config, std::uint64_t seed) : Trainer(std::move(config), seed, true) {}

Trainer::Trainer(RunConfig config, std::uint64_t seed, bool initialize)
    : config_(std::move(config)),
      seed_(seed),
      act_rng_(derive_seed(seed, kActStream)),
      sample_rng_(derive_seed(seed, kSampleStream)) {
  config_.validate();
  env_ = envs::make_env(config_.env);
  validate_macro_sets(*env_);
  const int n = env_->num_agents();
  const double gamma = env_->discount();
  const auto capacity = static_cast<std::size_t>(config_.buffer_capacity);

  auto net_config = [&](int input, int output) {
    neural::NetConfig c;
    c.input_dim = input;
    c.pre_widths = config_.pre_widths;
    c.recurrent_width = config_.recurrent_width;
    c.post_widths = config_.post_widths;
    c.output_dim = output;
    return c;
  };

  if (is_centralized(config_.mode)) {
    int input = 0;
    std::vector<int> counts;
    for (int i = 0; i < n; ++i) {
      input += env_->macro_obs_dim(i);
      counts.push_back(env_->num_macros(i));
    }
    jerts_.emplace(counts, gamma, capacity);
    nets_.emplace_back(net_config(input, jerts_->space().size()));
    net_of_.assign(n, 0);
  } else {
    certs_.emplace(n, gamma, capacity);
    if (config_.share_parameters) {
      for (int i = 1; i < n; ++i)
        if (env_->macro_obs_dim(i) != env_->macro_obs_dim(0) || env_->num_macros(i) != env_->num_macros(0))
          throw ConfigError("share_parameters needs agents with identical observation and macro sets");
      nets_.emplace_back(net_config(env_->macro_obs_dim(0), env_->num_macros(0)));
      net_of_.assign(n, 0);
    } else {
      for (int i = 0; i < n; ++i) {
        nets_.emplace_back(net_config(env_->macro_obs_dim(i), env_->num_macros(i)));
        net_of_.push_back(i);
      }
    }
  }
  if (initialize) {
    Rng init(derive_seed(seed, kInitStream));
    for (auto& net : nets_) {
      net.initialize(init);
      optimizers_.emplace_back(config_.optimizer_settings(), net.num_params());
    }
  }
}

std::uint64_t Trainer::eval_seed_for(int episode) const {
  return derive_seed(derive_seed(seed_, kEvalStream), static_cast<std::uint64_t>(episode));
}

std::unique_ptr<Controller> Trainer::greedy_controller() const {
  if (is_centralized(config_.mode)) return std::make_unique<CentralizedController>(nets_.front(), 0.0);
  return std::make_unique<DecentralizedController>(nets_, net_of_, 0.0);
}

EvalSummary Trainer::evaluate(int episodes, std::uint64_t eval_seed) const {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  auto env = env_->clone();
  auto controller = greedy_controller();
  Rng rng(eval_seed);
  std::vector<double> returns;
  returns.reserve(episodes);
  for (int k = 0; k < episodes; ++k) returns.push_back(run_episode(*env, *controller, rng).discounted_return);
  return summarize(std::move(returns));
}

void Trainer::train_episode() {
  const double epsilon = config_.epsilon().value(episode_);
  std::unique_ptr<Controller> controller;
  if (is_centralized(config_.mode))
    controller = std::make_unique<CentralizedController>(nets_.front(), epsilon);
  else
    controller = std::make_unique<DecentralizedController>(nets_, net_of_, epsilon);

  const auto tag = static_cast<std::uint64_t>(episode_);
  if (certs_) {
    certs_->begin_episode(tag);
    run_episode(*env_, *controller, act_rng_, [&](const TickContext& c) {
      std::vector<ObsVec> fresh;
      fresh.reserve(c.tick.observations.size());
      for (const auto& o : c.tick.observations) fresh.push_back(o.macro);
      certs_->record_tick(c.selection_obs, c.macros, fresh, c.tick.term_flags, c.tick.reward);
    });
    certs_->end_episode();
  } else {
    jerts_->begin_episode(tag);
    run_episode(*env_, *controller, act_rng_, [&](const TickContext& c) {
      jerts_->record_tick(c.joint_selection_obs, c.macros, c.joint_fresh_obs, c.tick.term_flags, c.tick.reward);
    });
    jerts_->end_episode();
  }
  ++episode_;

  const std::size_t stored = certs_ ? certs_->size() : jerts_->size();
  if (stored >= static_cast<std::size_t>(std::max(1, config_.warmup_episodes)))
    for (int u = 0; u < config_.updates_per_episode; ++u) update();
  if (episode_ % config_.target_sync_period == 0)
    for (auto& net : nets_) net.sync_target();
  if (episode_ % config_.eval_period == 0) {
    const auto s = evaluate(config_.eval_episodes, eval_seed_for(episode_));
    metrics_.push_back({episode_, s.mean, s.stderr_, seed_});
  }
}

void Trainer::train(std::optional<int> until) {
  const int target = until.value_or(config_.episodes);
  while (episode_ < target) train_episode();
}

void Trainer::update() {
  const auto spec = config_.sample_spec();
  const double gamma = env_->discount();
  const auto mode = config_.target_mode();
  const auto hyst = config_.hysteresis();
  if (jerts_) {
    const auto traces = jerts_->sample_concurrent(spec, sample_rng_);
    int dim = 0;
    for (int i = 0; i < env_->num_agents(); ++i) dim += env_->macro_obs_dim(i);
    const auto batch = replay::pad_batch(traces, dim);
    learners::train_on_batch(nets_[0], optimizers_[0], batch, gamma, mode, hyst, &jerts_->space());
  } else {
    const auto per_agent = certs_->sample_concurrent(spec, sample_rng_);
    for (std::size_t k = 0; k < nets_.size(); ++k) {
      std::vector<replay::SqueezedTrace> traces;
      int dim = 0;
      for (int i = 0; i < env_->num_agents(); ++i) {
        if (net_of_[i] != static_cast<int>(k)) continue;
        dim = env_->macro_obs_dim(i);
        traces.insert(traces.end(), per_agent[i].begin(), per_agent[i].end());
      }
      const auto batch = replay::pad_batch(traces, dim);
      learners::train_on_batch(nets_[k], optimizers_[k], batch, gamma, mode, hyst);
    }
  }
  ++updates_;
}

// Layout: "MTRN", u32 version, string config text, u64 seed, i32 episode,
// i64 updates, string act stream, string sample stream, u32 net count, nets,
// optimizers, u8 buffer kind (0 per-agent, 1 joint), buffer snapshot,
// u64 metrics count, per record (i32 episode, f64 mean, f64 stderr, u64 seed).
void Trainer::save(std::ostream& out) const {
  bin::write_header(out, "MTRN", kCheckpointVersion);
  bin::write_string(out, run_config_text(config_));
  bin::write<std::uint64_t>(out, seed_);
  bin::write<std::int32_t>(out, episode_);
  bin::write<std::int64_t>(out, updates_);
  bin::write_string(out, act_rng_.state());
  bin::write_string(out, sample_rng_.state());
  bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(nets_.size()));
  for (const auto& net : nets_) net.save(out);
  for (const auto& opt : optimizers_) opt.save(out);
  bin::write<std::uint8_t>(out, jerts_ ? 1 : 0);
  if (jerts_)
    jerts_->save(out);
  else
    certs_->save(out);
  bin::write<std::uint64_t>(out, metrics_.size());
  for (const auto& m : metrics_) {
    bin::write<std::int32_t>(out, m.episode);
    bin::write<double>(out, m.return_mean);
    bin::write<double>(out, m.return_stderr);
    bin::write<std::uint64_t>(out, m.seed);
  }
}

Trainer Trainer::load(std::istream& in) {
  bin::expect_header(in, "MTRN", kCheckpointVersion);
  std::istringstream text(bin::read_string(in));
  RunConfig config = parse_run_config(parse_key_values(text));
  const auto seed = bin::read<std::uint64_t>(in);
  Trainer t(std::move(config), seed, false);
  t.episode_ = bin::read<std::int32_t>(in);
  t.updates_ = bin::read<std::int64_t>(in);
  t.act_rng_.set_state(bin::read_string(in));
  t.sample_rng_.set_state(bin::read_string(in));
  const auto count = bin::read<std::uint32_t>(in);
  if (count != t.nets_.size()) throw bin::FormatError("checkpoint net count does not match its config");
  for (auto& net : t.nets_) {
    auto loaded = learners::Net::load(in);
    if (!(loaded.config() == net.config())) throw bin::FormatError("checkpoint net shape does not match its config");
    net = std::move(loaded);
  }
  for (std::size_t k = 0; k < t.nets_.size(); ++k) {
    t.optimizers_.push_back(learners::Optimizer::load(in));
    if (t.optimizers_.back().first_moment().size() != t.nets_[k].num_params())
      throw bin::FormatError("optimizer state does not match the net");
  }
  const auto kind = bin::read<std::uint8_t>(in);
  if ((kind == 1) != t.jerts_.has_value()) throw bin::FormatError("checkpoint buffer kind mismatch");
  if (kind == 1)
    t.jerts_ = replay::MacJerts::load(in);
  else
    t.certs_ = replay::MacCerts::load(in);
  const auto records = bin::read<std::uint64_t>(in);
  if (records > (1u << 24)) throw bin::FormatError("metrics count out of range");
  for (std::uint64_t k = 0; k < records; ++k) {
    MetricsRecord m;
    m.episode = bin::read<std::int32_t>(in);
    m.return_mean = bin::read<double>(in);
    m.return_stderr = bin::read<double>(in);
    m.seed = bin::read<std::uint64_t>(in);
    t.metrics_.push_back(m);
  }
  return t;
}

void Trainer::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  save(out);
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

Trainer Trainer::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return load(in);
}

std::vector<double> smooth_curve(const std::vector<double>& series, int window) {
  if (window < 1) throw std::invalid_argument("smoothing window must be positive");
  const int n = static_cast<int>(series.size());
  const int left = window / 2;
  const int right = window - left - 1;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    int lo = i - left;
    int hi = i + right;
    if (lo < 0 || hi > n - 1) {
      const int k = std::min(i, n - 1 - i);
      lo = i - k;
      hi = i + k;
    }
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += series[j];
    out[i] = sum / (hi - lo + 1);
  }
  return out;
}

double final_smoothed(const std::vector<double>& series, int window) {
  if (series.empty()) throw std::invalid_argument("empty series");
  const int n = static_cast<int>(series.size());
  const int count = std::min(n, window);
  double sum = 0.0;
  for (int j = n - count; j < n; ++j) sum += series[j];
  return sum / count;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  const auto precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "episode,return_mean,return_stderr,seed\n";
  for (const auto& r : records)
    out << r.episode << ',' << r.return_mean << ',' << r.return_stderr << ',' << r.seed << '\n';
  out.precision(precision);
}

std::vector<MetricsRecord> smooth_metrics(const std::vector<MetricsRecord>& records, int window) {
  std::vector<double> mean;
  std::vector<double> err;
  for (const auto& r : records) {
    mean.push_back(r.return_mean);
    err.push_back(r.return_stderr);
  }
  mean = smooth_curve(mean, window);
  err = smooth_curve(err, window);
  auto out = records;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].return_mean = mean[k];
    out[k].return_stderr = err[k];
  }
  return out;
}

}  // namespace macmarl::harness
