// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.
//
//   macmarl_acceptance [--only 1,5,7] [--report path]

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "macmarl/envs/box_pushing.hpp"
#include "macmarl/envs/capture_target.hpp"
#include "macmarl/envs/warehouse.hpp"
#include "macmarl/harness/oracles.hpp"
#include "macmarl/harness/trainer.hpp"
#include "support/nets.hpp"
#include "support/synthetic.hpp"

using namespace macmarl;
using namespace macmarl::harness;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Collects named boolean checks; the first few failures end up in the detail.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (failed_ <= 3) failures_ += (failures_.empty() ? "" : "; ") + what;
  }
  Verdict verdict(const std::string& summary) const {
    if (failed_ == 0) return {true, summary + " (" + std::to_string(total_) + " checks)"};
    return {false, std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed: " + failures_};
  }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::string failures_;
};

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string fmt(double v, int precision = 3) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

RunConfig load_config(const std::string& name) {
  return load_run_config(std::string(MACMARL_CONFIG_DIR) + "/" + name);
}

std::vector<double> returns_of(const std::vector<MetricsRecord>& m) {
  std::vector<double> out;
  for (const auto& r : m) out.push_back(r.return_mean);
  return out;
}

// Standard error of the values entering the final smoothed point.
double final_window_stderr(const std::vector<double>& series, int window = 10) {
  const int n = static_cast<int>(series.size());
  const int k = std::min(n, window);
  return summarize(std::vector<double>(series.end() - k, series.end())).stderr_;
}

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<MetricsRecord> metrics;
  std::string metrics_csv;
  double final_smoothed = 0.0;
  double cpu = 0.0;
};

RunResult train_run(const RunConfig& config, std::uint64_t seed,
                    const std::function<void(const Trainer&, RunResult&)>& inspect = {}) {
  const double start = cpu_seconds();
  Trainer trainer(config, seed);
  trainer.train();
  RunResult r;
  r.seed = seed;
  r.metrics = trainer.metrics();
  std::ostringstream csv;
  write_metrics_csv(csv, r.metrics);
  r.metrics_csv = csv.str();
  r.final_smoothed = final_smoothed(returns_of(r.metrics));
  r.cpu = cpu_seconds() - start;
  if (inspect) inspect(trainer, r);
  return r;
}

// ---------------------------------------------------------------------------

Verdict buffer_correctness() {
  const double start = cpu_seconds();
  Rng rng(1001);
  Checks checks;
  for (int k = 0; k < 1000; ++k) {
    const int n = 2 + static_cast<int>(rng.uniform_int(2));
    const double gamma = k % 2 ? 0.9 : 1.0;
    const auto ep = testing::make_synthetic_episode(rng, n, 1 + static_cast<int>(rng.uniform_int(60)), gamma);
    replay::MacCerts certs(n, gamma, 1);
    replay::MacJerts jerts(ep.macro_counts, gamma, 1);
    testing::record_agents(certs, ep);
    testing::record_joint(jerts, ep);
    const std::vector<replay::SampleWindow> full{{0, 0, ep.length, true}};
    const auto agents = certs.squeeze_windows(full);
    const auto joint = jerts.squeeze_windows(full)[0];
    const double raw = replay::discounted_return(ep.rewards, gamma);
    for (int i = 0; i < n; ++i) {
      const auto want = testing::expected_agent_trace(ep, i, 0, ep.length, true);
      checks.expect(testing::same_trace(agents[i][0], want, 1e-10), "agent trace mismatch, episode " + std::to_string(k));
      checks.expect(std::abs(testing::squeezed_return(agents[i][0], gamma) - raw) <= 1e-10,
                    "agent reward not conserved, episode " + std::to_string(k));
    }
    checks.expect(testing::same_trace(joint, testing::expected_joint_trace(ep, jerts.space(), 0, ep.length, true), 1e-10),
                  "joint trace mismatch, episode " + std::to_string(k));
    checks.expect(std::abs(testing::squeezed_return(joint, gamma) - raw) <= 1e-10,
                  "joint reward not conserved, episode " + std::to_string(k));
  }
  const double secs = cpu_seconds() - start;
  checks.expect(secs < 60.0, "runtime " + fmt(secs) + " s exceeds 60 s");
  return checks.verdict("1000 synthetic episodes in " + fmt(secs, 2) + " s");
}

Verdict accumulation_arithmetic() {
  Rng rng(1002);
  Checks checks;
  for (int k = 0; k < 500; ++k) {
    const int n = 2 + static_cast<int>(rng.uniform_int(2));
    const double gamma = k % 2 ? 0.9 : 1.0;
    const auto ep = testing::make_synthetic_episode(rng, n, 1 + static_cast<int>(rng.uniform_int(40)), gamma);
    replay::MacCerts certs(n, gamma, 1);
    replay::MacJerts jerts(ep.macro_counts, gamma, 1);
    testing::record_agents(certs, ep);
    testing::record_joint(jerts, ep);
    for (int t = 0; t < ep.length; ++t) {
      for (int i = 0; i < n; ++i) {
        int tm = t;
        while (tm > 0 && !ep.term[tm - 1][i]) --tm;
        const double want = testing::discounted_sum(ep.rewards, tm, t, gamma);
        checks.expect(std::abs(certs.episode(0).rows[i][t].r_partial - want) <= 1e-12, "per-agent r^c");
      }
      int tm = t;
      while (tm > 0 && !testing::any_term(ep, tm - 1)) --tm;
      checks.expect(std::abs(jerts.episode(0).row[t].r_partial - testing::discounted_sum(ep.rewards, tm, t, gamma)) <= 1e-12,
                    "joint r^c");
    }
  }
  // Worked case at gamma = 1: joint macro <m1, m4> lasts two ticks because the
  // second agent finished m4, so the joint reward covers both ticks.
  const double r1 = 0.37, r2 = -1.25;
  replay::MacJerts jerts({4, 5}, 1.0, 1);
  jerts.begin_episode();
  const ObsVec z = ObsVec::Zero(2), z2 = ObsVec::Ones(2);
  const std::vector<int> m{1, 4};
  jerts.record_tick(z, m, z2, {false, false}, r1);
  jerts.record_tick(z, m, z2, {false, true}, r2);
  jerts.end_episode();
  const auto squeezed = jerts.squeeze_windows(std::vector<replay::SampleWindow>{{0, 0, 2, false}})[0];
  checks.expect(squeezed.size() == 1 && squeezed[0].reward == r1 + r2 && squeezed[0].tau == 2,
                "worked case r = r1 + r2");
  replay::MacCerts certs(1, 1.0, 1);
  certs.begin_episode();
  const std::vector<ObsVec> zs{z}, fs{z2};
  certs.record_tick(zs, std::vector<int>{0}, fs, {false}, r1);
  certs.record_tick(zs, std::vector<int>{0}, fs, {true}, r2);
  certs.end_episode();
  checks.expect(certs.episode(0).rows[0][1].r_partial == r1 + r2, "per-agent two-tick macro r = r1 + r2");
  return checks.verdict("randomized partial sums and the two-tick worked case");
}

replay::PaddedBatch joint_batch(Rng& rng, const JointActionSpace& space, double undone_prob) {
  std::vector<replay::SqueezedTrace> traces;
  for (int b = 0; b < 4; ++b) {
    replay::SqueezedTrace tr;
    const int len = 1 + static_cast<int>(rng.uniform_int(6));
    for (int k = 0; k < len; ++k) {
      replay::MacroTransition t;
      t.z = testing::random_obs(rng, 2);
      t.z_next = testing::random_obs(rng, 2);
      for (int i = 0; i < space.num_agents(); ++i) {
        t.components.push_back(static_cast<int>(rng.uniform_int(space.agent_size(i))));
        t.undone_mask.push_back(rng.bernoulli(undone_prob));
      }
      t.m = space.encode(t.components);
      t.reward = rng.uniform();
      t.tau = 1 + static_cast<int>(rng.uniform_int(4));
      tr.push_back(t);
    }
    traces.push_back(tr);
  }
  return replay::pad_batch(traces, 2);
}

Verdict target_semantics() {
  const double start = cpu_seconds();
  Rng rng(1003);
  Checks checks;
  const double gamma = 0.95;
  for (int k = 0; k < 300; ++k) {
    const JointActionSpace space({2 + static_cast<int>(rng.uniform_int(3)), 2 + static_cast<int>(rng.uniform_int(3))});
    const auto none = joint_batch(rng, space, 0.0);
    const Eigen::Index cols = static_cast<Eigen::Index>(none.steps + 1) * none.batch;
    const Eigen::MatrixXd on = testing::random_matrix(rng, space.size(), cols);
    const Eigen::MatrixXd tg = testing::random_matrix(rng, space.size(), cols);
    checks.expect(learners::td_targets(on, tg, none, gamma, learners::TargetMode::CentralizedConditional, &space) ==
                      learners::td_targets(on, tg, none, gamma, learners::TargetMode::CentralizedUnconditional),
                  "conditional != unconditional with all-false undone masks");
    const auto all = joint_batch(rng, space, 1.0);
    const Eigen::Index cols2 = static_cast<Eigen::Index>(all.steps + 1) * all.batch;
    const Eigen::MatrixXd on2 = testing::random_matrix(rng, space.size(), cols2);
    const Eigen::MatrixXd tg2 = testing::random_matrix(rng, space.size(), cols2);
    const auto y = learners::td_targets(on2, tg2, all, gamma, learners::TargetMode::CentralizedConditional, &space);
    for (int t = 0; t < all.steps; ++t)
      for (int b = 0; b < all.batch; ++b) {
        if (all.mask(t, b) == 0.0) continue;
        const int j = space.encode(all.continuing[static_cast<std::size_t>(t) * all.batch + b]);
        const double want = all.rewards(t, b) + std::pow(gamma, all.tau(t, b)) * tg2(j, (t + 1) * all.batch + b);
        checks.expect(std::abs(y(t, b) - want) <= 1e-12, "all-true mask does not bootstrap on the continuing action");
      }
  }
  for (int k = 0; k < 10000; ++k) {
    const int n = 2 + static_cast<int>(rng.uniform_int(2));
    std::vector<int> sizes;
    for (int i = 0; i < n; ++i) sizes.push_back(2 + static_cast<int>(rng.uniform_int(4)));
    const JointActionSpace space(sizes);
    Eigen::VectorXd q(space.size());
    for (int j = 0; j < q.size(); ++j) q[j] = rng.uniform();
    std::vector<int> pin(n, -1);
    std::vector<std::optional<int>> pinned(n);
    for (int i = 0; i < n; ++i)
      if (rng.bernoulli(0.5)) pinned[i] = pin[i] = static_cast<int>(rng.uniform_int(sizes[i]));
    checks.expect(argmax_over(q, space.restricted(pinned)) == testing::brute_force_restricted_argmax(q, space, pin),
                  "restricted argmax differs from enumeration");
  }
  const double secs = cpu_seconds() - start;
  checks.expect(secs < 60.0, "runtime " + fmt(secs) + " s exceeds 60 s");
  return checks.verdict("target identities and 10^4 restricted argmax tables in " + fmt(secs, 2) + " s");
}

Verdict gradient_correctness() {
  const double start = cpu_seconds();
  Rng rng(1004);
  Checks checks;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto c = testing::random_small_config(rng);
    learners::Net net(c);
    net.initialize(rng);
    const int B = 1 + static_cast<int>(rng.uniform_int(3));
    const int T = 1 + static_cast<int>(rng.uniform_int(6));
    const auto x = testing::random_matrix(rng, c.input_dim, T * B);
    const auto coeffs = testing::random_matrix(rng, c.output_dim, T * B);
    const double err = testing::max_fd_relative_error(net, x, B, coeffs, rng, 50);
    worst = std::max(worst, err);
    checks.expect(err < 1e-4, "relative error " + std::to_string(err));
  }
  neural::NetConfig c;
  c.input_dim = 5;
  c.output_dim = 6;
  const double loss = testing::overfit_one_batch(c, rng, 1500);
  checks.expect(loss < 1e-3, "overfit loss " + std::to_string(loss));
  const double secs = cpu_seconds() - start;
  checks.expect(secs < 300.0, "runtime " + fmt(secs) + " s exceeds 300 s");
  std::ostringstream s;
  s << "max relative error " << std::scientific << std::setprecision(2) << worst << ", overfit loss " << loss;
  return checks.verdict(s.str());
}

Verdict hysteresis_ratio() {
  Rng rng(1005);
  neural::NetConfig c;
  c.input_dim = 4;
  c.output_dim = 3;
  learners::Net net(c);
  net.initialize(rng);
  const int T = 5, B = 4;
  const Eigen::MatrixXd x = testing::random_matrix(rng, 4, (T + 1) * B);
  const Eigen::MatrixXd out = net.evaluate_sequence(x, B);
  learners::TDBatch base;
  base.mask = Eigen::MatrixXd::Ones(T, B);
  base.tau = Eigen::MatrixXi::Ones(T, B);
  base.actions.resize(T, B);
  base.q.resize(T, B);
  for (int t = 0; t < T; ++t)
    for (int b = 0; b < B; ++b) {
      base.actions(t, b) = static_cast<int>(rng.uniform_int(3));
      base.q(t, b) = out(base.actions(t, b), t * B + b);
    }
  auto magnitude = [&](double sign) {
    learners::Net copy = net;
    copy.forward_sequence(x, B);
    learners::TDBatch td = base;
    td.y = base.q.array() + sign * 0.5;
    neural::Optimizer<double>::Settings s;
    s.kind = neural::Optimizer<double>::Kind::Sgd;
    s.learning_rate = 1e-2;
    neural::Optimizer<double> opt(s, copy.num_params());
    const Eigen::VectorXd before = copy.params();
    learners::hysteretic_update(copy, td, learners::HystereticConfig{}, opt);
    return (copy.params() - before).norm();
  };
  const double ratio = magnitude(-1.0) / magnitude(+1.0);
  const bool ok = std::abs(ratio - 0.2) <= 1e-6;
  return {ok, "negative/positive update ratio " + fmt(ratio, 9) + " (expected 0.2)"};
}

// Ticks until `agent` first terminates; the others keep repeating `other_macro`.
int ticks_until_termination(EnvModel& env, int agent, int macro, int other_macro) {
  Rng rng(0);
  env.reset(rng);
  auto obs = env.observe(rng);
  auto state = begin_episode(env, obs);
  std::vector<MacroSelector> sel(env.num_agents());
  for (int i = 0; i < env.num_agents(); ++i)
    sel[i] = [=](int, const ObsVec&, std::span<const int>, Rng&) { return i == agent ? macro : other_macro; };
  select_macros_decentralized(env, sel, state, obs, rng);
  for (int t = 1; t <= env.horizon(); ++t) {
    const auto tick = run_primitive_tick(env, state, rng);
    if (tick.term_flags[agent]) return t;
    select_macros_decentralized(env, sel, state, tick.observations, rng);
  }
  return -1;
}

Verdict environment_constants() {
  using namespace envs;
  Checks checks;
  Rng rng(1006);

  CaptureTarget ct;
  checks.expect(ct.config().flicker_probability == 0.3, "CT flicker probability 0.3");
  int captures = 0;
  for (int k = 0; k < 500; ++k) {
    CaptureTargetState s;
    s.grid_size = 4;
    s.agent_pos = {Cell{1, 1}, Cell{1, 1}};
    s.target_pos = Cell{1, 1};
    ct.set_state(s);
    const std::array<int, 2> stay{CaptureTarget::Stay, CaptureTarget::Stay};
    const auto out = ct.step(stay, rng);
    const auto& after = ct.state();
    const bool caught = after.agent_pos[0] == after.target_pos && after.agent_pos[1] == after.target_pos;
    checks.expect(out.reward == (caught ? 1.0 : 0.0) && out.done == caught, "CT pays +1 exactly on capture");
    captures += caught ? 1 : 0;
  }
  checks.expect(captures > 0, "CT capture observed");
  int unseen = 0;
  const int draws = 40000;
  for (int k = 0; k < draws; ++k) unseen += ct.observe(rng)[0].primitive[2] == 0.0 ? 1 : 0;
  checks.expect(std::abs(static_cast<double>(unseen) / draws - 0.3) < 0.01, "CT empirical flicker rate");

  BoxPushing bp;
  const auto start = bp.state();
  const std::array<int, 2> idle{BoxPushing::Stay, BoxPushing::Stay};
  checks.expect(std::abs(bp.step(idle, rng).reward + 0.1) < 1e-12, "BP step -0.1");
  auto s = start;
  s.heading[0] = Heading::West;
  bp.set_state(s);
  const std::array<int, 2> bump{BoxPushing::Forward, BoxPushing::Stay};
  checks.expect(std::abs(bp.step(bump, rng).reward + 5.1) < 1e-12, "BP boundary penalty -5");
  s = start;
  s.agent_pos[0] = Cell{s.big_box_pos.row + 1, s.big_box_pos.col};
  bp.set_state(s);
  checks.expect(std::abs(bp.step(bump, rng).reward + 5.1) < 1e-12, "BP lone big-box push penalty -5");
  s = start;
  s.small_box_pos[0] = Cell{1, s.small_box_pos[0].col};
  s.agent_pos[0] = Cell{2, s.small_box_pos[0].col};
  bp.set_state(s);
  checks.expect(std::abs(bp.step(bump, rng).reward - 9.9) < 1e-12, "BP small box +10");
  s = start;
  s.big_box_pos.row = 1;
  s.agent_pos = {Cell{2, s.big_box_pos.col}, Cell{2, s.big_box_pos.col + 1}};
  bp.set_state(s);
  const std::array<int, 2> push{BoxPushing::Forward, BoxPushing::Forward};
  checks.expect(std::abs(bp.step(push, rng).reward - 99.9) < 1e-12, "BP big box +100");

  Warehouse wh;
  const auto& wc = wh.config();
  checks.expect(wc.horizon == 150, "WH horizon 150");
  checks.expect(wc.speed == 0.6, "WH speed 0.6");
  checks.expect(wc.human_step_time == 18, "WH human step time 18");
  const std::array<int, 3> still{Warehouse::TbStay, Warehouse::TbStay, Warehouse::FetchIdle};
  checks.expect(wh.step(still, rng).reward == -1.0, "WH step -1");
  wh.reset(rng);
  const std::array<int, 3> pass{Warehouse::TbStay, Warehouse::TbStay, Warehouse::FetchFinishPass0};
  checks.expect(wh.step(pass, rng).reward == -11.0, "WH empty pass -10");
  wh.reset(rng);
  auto ws = wh.state();
  ws.turtlebots[0].pos = WarehouseMap::kWorkshopWaypoint;
  ws.turtlebots[0].tools = {0};
  wh.set_state(ws);
  checks.expect(wh.step(still, rng).reward == 99.0, "WH delivery +100");
  const int k = Warehouse::kFetch;
  checks.expect(ticks_until_termination(wh, k, Warehouse::SearchTool, Warehouse::GoToWS) == 6, "WH Search 6 ticks");
  checks.expect(ticks_until_termination(wh, k, Warehouse::PassToT0, Warehouse::GoToWS) == 4, "WH Pass 4 ticks");
  checks.expect(ticks_until_termination(wh, k, Warehouse::WaitT, Warehouse::GoToWS) == 1, "WH Wait 1 tick");
  const int drive = wh.travel_ticks(WarehouseMap::kTurtlebotStart[0], WarehouseMap::kTableWaypoints[0]);
  checks.expect(ticks_until_termination(wh, 0, Warehouse::GetTool, Warehouse::WaitT) == drive + 10,
                "WH Get_Tool gives up after 10 ticks");
  wh.reset(rng);
  ws = wh.state();
  ws.human_has_next_tool = true;
  wh.set_state(ws);
  int human = 0;
  while (wh.state().human_step == 1 && human < 100) {
    wh.step(still, rng);
    ++human;
  }
  checks.expect(human == 18, "WH human step takes 18 ticks (got " + std::to_string(human) + ")");
  wh.reset(rng);
  int ticks = 1;
  while (!wh.step(still, rng).done && ticks < 1000) ++ticks;
  checks.expect(ticks == 150, "WH episode ends at tick 150");
  return checks.verdict("CT, BP and WH rewards, penalties, durations and horizons");
}

bool pushes_big_box(const Trainer& trainer) {
  auto env = trainer.env().clone();
  auto controller = trainer.greedy_controller();
  Rng rng(0);
  bool big = false;
  run_episode(*env, *controller, rng, [&](const TickContext& c) { big = big || c.tick.reward > 50.0; });
  return big;
}

// Ticks the small-box script needs; its return is bounded by 10 * gamma^(T-1).
int small_box_script_ticks(const envs::EnvConfig& config) {
  auto macro_config = config;
  macro_config.primitive = false;
  auto env = envs::make_env(macro_config);
  ScriptedController script(box_pushing_small_box_rule());
  Rng rng(0);
  return run_episode(*env, script, rng).ticks;
}

std::vector<RunResult> train_seeds(const RunConfig& config,
                                   const std::function<void(const Trainer&, RunResult&)>& inspect = {}) {
  std::vector<RunResult> out;
  for (auto seed : config.seeds) out.push_back(train_run(config, seed, inspect));
  return out;
}

std::vector<RunResult> criterion7_runs;

Verdict box_pushing_centralized() {
  const auto config = load_config("box_pushing_6_centralized.cfg");
  const double oracle = oracle_return(config.env).mean;
  criterion7_runs = train_seeds(config);
  int good = 0;
  double worst_cpu = 0.0;
  std::string per_seed;
  for (const auto& r : criterion7_runs) {
    good += r.final_smoothed >= 0.9 * oracle && r.cpu <= 1800.0 ? 1 : 0;
    worst_cpu = std::max(worst_cpu, r.cpu);
    per_seed += " " + fmt(r.final_smoothed, 2);
  }
  return {good >= 4, std::to_string(good) + "/5 seeds reach 90% of oracle " + fmt(oracle, 2) + " (finals" + per_seed +
                         "; max " + fmt(worst_cpu, 0) + " CPU s/seed)"};
}

Verdict macro_vs_primitive_box_pushing() {
  const auto macro = load_config("box_pushing_8_decentralized_macro.cfg");
  const auto primitive = load_config("box_pushing_8_decentralized_primitive.cfg");
  if (macro.episodes != primitive.episodes) return {false, "episode budgets differ"};
  const int ticks = small_box_script_ticks(macro.env);
  const double bound = 10.0 * std::pow(macro.discount(), ticks - 1);
  int cooperative = 0;
  for (const auto& r : train_seeds(macro, [&](const Trainer& t, RunResult&) { cooperative += pushes_big_box(t); }))
    (void)r;
  int below = 0;
  std::string finals;
  for (const auto& r : train_seeds(primitive)) {
    below += r.final_smoothed < bound ? 1 : 0;
    finals += " " + fmt(r.final_smoothed, 2);
  }
  return {cooperative >= 4 && below >= 4,
          "macro pushes big box in " + std::to_string(cooperative) + "/5 seeds; primitive below bound " +
              fmt(bound, 2) + " in " + std::to_string(below) + "/5 (finals" + finals + ")"};
}

double early_area(const std::vector<MetricsRecord>& m, int episodes) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : m)
    if (r.episode <= episodes / 2) {
      sum += r.return_mean;
      ++n;
    }
  return n ? sum / n : 0.0;
}

Verdict capture_target_speed() {
  const auto macro = load_config("capture_target_4_macro.cfg");
  const auto primitive = load_config("capture_target_4_primitive.cfg");
  if (macro.episodes != primitive.episodes || macro.seeds != primitive.seeds)
    return {false, "macro and primitive runs are not matched"};
  const auto a = train_seeds(macro);
  const auto b = train_seeds(primitive);
  int wins = 0;
  std::string detail;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double am = early_area(a[k].metrics, macro.episodes);
    const double ap = early_area(b[k].metrics, primitive.episodes);
    wins += am > ap ? 1 : 0;
    detail += " " + fmt(am, 3) + ">" + fmt(ap, 3);
  }
  return {wins >= 4, std::to_string(wins) + "/5 seeds with larger early area (macro>primitive:" + detail + ")"};
}

Verdict warehouse_centralized() {
  const auto cen = load_config("warehouse_centralized.cfg");
  const auto dec = load_config("warehouse_decentralized.cfg");
  const auto a = train_seeds(cen);
  const auto b = train_seeds(dec);
  double ma = 0.0, mb = 0.0, worst_cpu = 0.0;
  std::string detail;
  for (const auto& r : a) {
    ma += r.final_smoothed / a.size();
    worst_cpu = std::max(worst_cpu, r.cpu);
  }
  for (const auto& r : b) {
    mb += r.final_smoothed / b.size();
    worst_cpu = std::max(worst_cpu, r.cpu);
  }
  for (std::size_t k = 0; k < a.size(); ++k)
    detail += " " + fmt(a[k].final_smoothed, 1) + "/" + fmt(b[k].final_smoothed, 1);
  return {ma > mb && worst_cpu <= 7200.0, "centralized mean " + fmt(ma, 2) + " vs decentralized " + fmt(mb, 2) +
                                              " (per seed" + detail + "; max " + fmt(worst_cpu, 0) + " CPU s/seed)"};
}

Verdict conditional_vs_unconditional() {
  const auto cond = load_config("box_pushing_10_conditional.cfg");
  const auto uncond = load_config("box_pushing_10_unconditional.cfg");
  if (cond.seeds != uncond.seeds || cond.episodes != uncond.episodes) return {false, "runs are not matched"};
  const auto a = train_seeds(cond);
  const auto b = train_seeds(uncond);
  int ok = 0;
  std::string detail;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double se = std::hypot(final_window_stderr(returns_of(a[k].metrics)),
                                 final_window_stderr(returns_of(b[k].metrics)));
    ok += a[k].final_smoothed >= b[k].final_smoothed - se ? 1 : 0;
    detail += " " + fmt(a[k].final_smoothed, 1) + "/" + fmt(b[k].final_smoothed, 1);
  }
  return {ok >= 4, std::to_string(ok) + "/5 seeds conditional >= unconditional within 1 SE (per seed" + detail + ")"};
}

Verdict reproducibility() {
  if (criterion7_runs.empty()) criterion7_runs = train_seeds(load_config("box_pushing_6_centralized.cfg"));
  const auto again = train_seeds(load_config("box_pushing_6_centralized.cfg"));
  int same = 0;
  for (std::size_t k = 0; k < again.size(); ++k)
    same += again[k].metrics_csv == criterion7_runs[k].metrics_csv && !again[k].metrics.empty() ? 1 : 0;
  return {same == static_cast<int>(again.size()),
          std::to_string(same) + "/" + std::to_string(again.size()) + " repeated runs with identical metrics files"};
}

struct Criterion {
  int id;
  std::string name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::ofstream report;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--only" && k + 1 < argc) {
      for (int id : parse_int_list("--only", argv[++k])) only.insert(id);
    } else if (arg == "--report" && k + 1 < argc) {
      report.open(argv[++k]);
    } else {
      std::cerr << "usage: macmarl_acceptance [--only 1,2,...] [--report path]\n";
      return 2;
    }
  }
  const std::vector<Criterion> criteria{
      {1, "buffer correctness", buffer_correctness},
      {2, "accumulation arithmetic", accumulation_arithmetic},
      {3, "target semantics", target_semantics},
      {4, "gradient correctness", gradient_correctness},
      {5, "hysteresis ratio", hysteresis_ratio},
      {6, "environment constants", environment_constants},
      {7, "box pushing 6x6 centralized-conditional", box_pushing_centralized},
      {8, "box pushing 8x8 macro vs primitive", macro_vs_primitive_box_pushing},
      {9, "capture target 4x4 learning speed", capture_target_speed},
      {10, "warehouse centralized vs decentralized (longest)", warehouse_centralized},
      {11, "box pushing 10x10 conditional vs unconditional", conditional_vs_unconditional},
      {12, "reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto wall = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const std::chrono::duration<double> secs = std::chrono::steady_clock::now() - wall;
    failed += v.pass ? 0 : 1;
    std::ostringstream line;
    line << "criterion " << std::setw(2) << c.id << " " << (v.pass ? "PASS" : "FAIL") << "  " << c.name << ": "
         << v.detail << " [" << fmt(secs.count(), 1) << " s]";
    std::cout << line.str() << std::endl;
    if (report) report << line.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
