#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "macmarl/core/joint_actions.hpp"
#include "macmarl/core/rng.hpp"
#include "macmarl/core/types.hpp"

namespace macmarl::replay {

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One primitive tick of one agent's row. While the macro runs, z_next == z
/// and r_partial is the discounted sum accumulated so far.
struct AgentStepRecord {
  ObsVec z;
  int m = 0;
  ObsVec z_next;
  double r_partial = 0.0;
  bool terminated = false;
  /// Ticks the macro has run, including this one.
  int tau_so_far = 0;
};

/// One primitive tick of the joint row. `undone_mask[i]` is true for agents
/// whose macro did not terminate at this tick.
struct JointStepRecord {
  ObsVec z;
  std::vector<int> m;
  ObsVec z_next;
  double r_partial = 0.0;
  bool any_terminated = false;
  std::vector<bool> undone_mask;
  int tau_so_far = 0;
};

bool operator==(const AgentStepRecord& a, const AgentStepRecord& b);
bool operator==(const JointStepRecord& a, const JointStepRecord& b);

struct AgentEpisode {
  std::uint64_t seed = 0;
  /// rows[i] is agent i's row; all rows have equal length.
  std::vector<std::vector<AgentStepRecord>> rows;
  int length() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
};

struct JointEpisode {
  std::uint64_t seed = 0;
  std::vector<JointStepRecord> row;
  int length() const { return static_cast<int>(row.size()); }
};

/// A macro-level transition. For joint traces `m` is the joint index,
/// `components` the per-agent macros and `undone_mask` marks agents that keep
/// running into the next joint macro-action.
struct MacroTransition {
  ObsVec z;
  int m = 0;
  ObsVec z_next;
  double reward = 0.0;
  int tau = 1;
  bool done = false;
  std::vector<int> components;
  std::vector<bool> undone_mask;
};

using SqueezedTrace = std::vector<MacroTransition>;

/// Keeps terminated records; when `episode_end` is set the final record is
/// kept as well (forced termination) and flagged done.
SqueezedTrace squeeze_agent_trace(std::span<const AgentStepRecord> row, bool episode_end);
SqueezedTrace squeeze_joint_trace(std::span<const JointStepRecord> row, const JointActionSpace& space,
                                  bool episode_end);

/// Which part of a stored episode a sample covers.
enum class SampleMode { FullEpisode, Trace };

struct SampleSpec {
  int batch_size = 16;
  SampleMode mode = SampleMode::FullEpisode;
  /// Raw-tick window length in trace mode.
  int trace_length = 0;
};

/// Drawn (episode, raw window) pairs shared by every agent of a batch.
struct SampleWindow {
  std::size_t episode = 0;
  int start = 0;
  int length = 0;
  bool reaches_end = true;
};

std::vector<SampleWindow> draw_windows(std::span<const int> episode_lengths, const SampleSpec& spec,
                                       Rng& rng);

/// Mac-CERTs: per-agent rows recorded concurrently every primitive tick.
/// Capacity is counted in episodes with FIFO eviction.
class MacCerts {
 public:
  MacCerts(int num_agents, double discount, std::size_t capacity);

  void begin_episode(std::uint64_t seed = 0);
  /// z: each agent's observation at its running macro's selection; m: running
  /// macros; z_fresh: observations emitted after the tick; terminated: flags.
  void record_tick(std::span<const ObsVec> z, std::span<const int> m, std::span<const ObsVec> z_fresh,
                   const std::vector<bool>& terminated, double reward);
  void end_episode();

  /// Same episodes and windows for every agent; result[agent][b].
  std::vector<std::vector<SqueezedTrace>> sample_concurrent(const SampleSpec& spec, Rng& rng) const;
  std::vector<std::vector<SqueezedTrace>> squeeze_windows(std::span<const SampleWindow> windows) const;

  int num_agents() const { return num_agents_; }
  double discount() const { return discount_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return episodes_.size(); }
  bool empty() const { return episodes_.empty(); }
  const AgentEpisode& episode(std::size_t k) const { return episodes_.at(k); }
  bool recording() const { return open_; }

  void save(std::ostream& out) const;
  static MacCerts load(std::istream& in);
  friend bool operator==(const MacCerts& a, const MacCerts& b);

 private:
  int num_agents_;
  double discount_;
  std::size_t capacity_;
  std::deque<AgentEpisode> episodes_;
  AgentEpisode current_;
  bool open_ = false;
};

/// Mac-JERTs: one joint row; the accumulator restarts after every joint
/// boundary (any agent terminated).
class MacJerts {
 public:
  MacJerts(std::vector<int> macro_counts, double discount, std::size_t capacity);

  void begin_episode(std::uint64_t seed = 0);
  /// z: joint observation at the running joint macro's selection; z_fresh:
  /// joint observation after the tick (used only when an agent terminated).
  void record_tick(const ObsVec& z, std::span<const int> m, const ObsVec& z_fresh,
                   const std::vector<bool>& terminated, double reward);
  void end_episode();

  std::vector<SqueezedTrace> sample_concurrent(const SampleSpec& spec, Rng& rng) const;
  std::vector<SqueezedTrace> squeeze_windows(std::span<const SampleWindow> windows) const;

  const JointActionSpace& space() const { return space_; }
  double discount() const { return discount_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return episodes_.size(); }
  bool empty() const { return episodes_.empty(); }
  const JointEpisode& episode(std::size_t k) const { return episodes_.at(k); }

  void save(std::ostream& out) const;
  static MacJerts load(std::istream& in);
  friend bool operator==(const MacJerts& a, const MacJerts& b);

 private:
  JointActionSpace space_;
  double discount_;
  std::size_t capacity_;
  std::deque<JointEpisode> episodes_;
  JointEpisode current_;
  bool open_ = false;
};

/// Right-padded batch. `inputs` stacks T+1 input steps column-wise
/// (obs_dim x (T+1)*batch, column s * batch + b): step 0 holds z of the first
/// entry, step t+1 holds z_next of entry t, so the recurrent output at step t
/// is Q(h_t) and at step t+1 is Q(h'_t).
/// Padded positions carry the sentinel (zero observation, macro 0, reward 0,
/// tau 1) and mask 0.
struct PaddedBatch {
  int steps = 0;
  int batch = 0;
  Eigen::MatrixXd inputs;
  Eigen::MatrixXi actions;
  Eigen::MatrixXd rewards;
  Eigen::MatrixXi tau;
  Eigen::MatrixXd done;
  Eigen::MatrixXd mask;
  /// Per (t, b) at index t * batch + b: continuing macro per agent or -1 for
  /// agents free to choose. Empty for per-agent batches.
  std::vector<std::vector<int>> continuing;
};

PaddedBatch pad_batch(std::span<const SqueezedTrace> traces, int obs_dim);

/// Discounted return of a raw reward sequence from t = 0.
double discounted_return(std::span<const double> rewards, double discount);

}  // namespace macmarl::replay
