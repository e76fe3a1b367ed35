#include "macmarl/replay/buffers.hpp"

#include <cmath>

#include "macmarl/core/binary_io.hpp"

namespace macmarl::replay {

namespace {

constexpr std::uint32_t kSnapshotVersion = 1;

bool same_obs(const ObsVec& a, const ObsVec& b) { return a.size() == b.size() && a == b; }

void write_agent_record(std::ostream& out, const AgentStepRecord& r) {
  bin::write_vector(out, r.z);
  bin::write<std::int32_t>(out, r.m);
  bin::write_vector(out, r.z_next);
  bin::write<double>(out, r.r_partial);
  bin::write<std::uint8_t>(out, r.terminated ? 1 : 0);
  bin::write<std::int32_t>(out, r.tau_so_far);
}

AgentStepRecord read_agent_record(std::istream& in) {
  AgentStepRecord r;
  r.z = bin::read_vector(in);
  r.m = bin::read<std::int32_t>(in);
  r.z_next = bin::read_vector(in);
  r.r_partial = bin::read<double>(in);
  r.terminated = bin::read<std::uint8_t>(in) != 0;
  r.tau_so_far = bin::read<std::int32_t>(in);
  return r;
}

}  // namespace

bool operator==(const AgentStepRecord& a, const AgentStepRecord& b) {
  return same_obs(a.z, b.z) && a.m == b.m && same_obs(a.z_next, b.z_next) && a.r_partial == b.r_partial &&
         a.terminated == b.terminated && a.tau_so_far == b.tau_so_far;
}

bool operator==(const JointStepRecord& a, const JointStepRecord& b) {
  return same_obs(a.z, b.z) && a.m == b.m && same_obs(a.z_next, b.z_next) && a.r_partial == b.r_partial &&
         a.any_terminated == b.any_terminated && a.undone_mask == b.undone_mask &&
         a.tau_so_far == b.tau_so_far;
}

SqueezedTrace squeeze_agent_trace(std::span<const AgentStepRecord> row, bool episode_end) {
  if (row.empty()) throw ReplayError("cannot squeeze an empty trace");
  SqueezedTrace out;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const bool last = k + 1 == row.size();
    const auto& r = row[k];
    if (!r.terminated && !(episode_end && last)) continue;
    MacroTransition e;
    e.z = r.z;
    e.m = r.m;
    e.z_next = r.z_next;
    e.reward = r.r_partial;
    e.tau = r.tau_so_far;
    e.done = episode_end && last;
    out.push_back(std::move(e));
  }
  return out;
}

SqueezedTrace squeeze_joint_trace(std::span<const JointStepRecord> row, const JointActionSpace& space,
                                  bool episode_end) {
  if (row.empty()) throw ReplayError("cannot squeeze an empty trace");
  SqueezedTrace out;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const bool last = k + 1 == row.size();
    const auto& r = row[k];
    if (!r.any_terminated && !(episode_end && last)) continue;
    MacroTransition e;
    e.z = r.z;
    e.m = space.encode(r.m);
    e.components = r.m;
    e.z_next = r.z_next;
    e.reward = r.r_partial;
    e.tau = r.tau_so_far;
    e.done = episode_end && last;
    e.undone_mask = r.undone_mask;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SampleWindow> draw_windows(std::span<const int> episode_lengths, const SampleSpec& spec,
                                       Rng& rng) {
  if (episode_lengths.empty()) throw ReplayError("cannot sample from an empty buffer");
  if (spec.batch_size < 1) throw ReplayError("batch size must be positive");
  if (spec.mode == SampleMode::Trace && spec.trace_length < 1)
    throw ReplayError("trace length must be positive");
  std::vector<SampleWindow> out(spec.batch_size);
  for (auto& w : out) {
    w.episode = rng.uniform_int(episode_lengths.size());
    const int len = episode_lengths[w.episode];
    if (spec.mode == SampleMode::FullEpisode || len <= spec.trace_length) {
      w.start = 0;
      w.length = len;
      w.reaches_end = true;
    } else {
      w.start = static_cast<int>(rng.uniform_int(static_cast<std::size_t>(len - spec.trace_length + 1)));
      w.length = spec.trace_length;
      w.reaches_end = w.start + w.length == len;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mac-CERTs

MacCerts::MacCerts(int num_agents, double discount, std::size_t capacity)
    : num_agents_(num_agents), discount_(discount), capacity_(capacity) {
  if (num_agents < 1) throw ReplayError("buffer needs at least one agent");
  if (capacity < 1) throw ReplayError("buffer capacity must be positive");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ReplayError("discount must lie in [0,1]");
}

void MacCerts::begin_episode(std::uint64_t seed) {
  current_ = AgentEpisode{};
  current_.seed = seed;
  current_.rows.assign(num_agents_, {});
  open_ = true;
}

void MacCerts::record_tick(std::span<const ObsVec> z, std::span<const int> m, std::span<const ObsVec> z_fresh,
                           const std::vector<bool>& terminated, double reward) {
  if (!open_) throw ReplayError("record_tick called outside an episode");
  const auto n = static_cast<std::size_t>(num_agents_);
  if (z.size() != n || m.size() != n || z_fresh.size() != n || terminated.size() != n)
    throw ReplayError("row length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = current_.rows[i];
    const bool fresh = row.empty() || row.back().terminated;
    if (!fresh && row.back().m != m[i]) throw ReplayError("macro changed without termination");
    AgentStepRecord r;
    r.z = z[i];
    r.m = m[i];
    r.tau_so_far = fresh ? 1 : row.back().tau_so_far + 1;
    r.r_partial = (fresh ? 0.0 : row.back().r_partial) + std::pow(discount_, r.tau_so_far - 1) * reward;
    r.terminated = terminated[i];
    r.z_next = r.terminated ? z_fresh[i] : z[i];
    row.push_back(std::move(r));
  }
}

void MacCerts::end_episode() {
  if (!open_) throw ReplayError("end_episode called outside an episode");
  open_ = false;
  if (current_.length() == 0) return;
  episodes_.push_back(std::move(current_));
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

std::vector<std::vector<SqueezedTrace>> MacCerts::squeeze_windows(std::span<const SampleWindow> windows) const {
  std::vector<std::vector<SqueezedTrace>> out(num_agents_);
  for (int i = 0; i < num_agents_; ++i) {
    out[i].reserve(windows.size());
    for (const auto& w : windows) {
      const auto& row = episodes_.at(w.episode).rows[i];
      out[i].push_back(squeeze_agent_trace(std::span(row).subspan(w.start, w.length), w.reaches_end));
    }
  }
  return out;
}

std::vector<std::vector<SqueezedTrace>> MacCerts::sample_concurrent(const SampleSpec& spec, Rng& rng) const {
  std::vector<int> lengths;
  lengths.reserve(episodes_.size());
  for (const auto& e : episodes_) lengths.push_back(e.length());
  const auto windows = draw_windows(lengths, spec, rng);
  return squeeze_windows(windows);
}

// Layout: "MCRT", u32 version, u32 n_agents, f64 discount, u64 capacity,
// u64 episode count; per episode u64 seed, u64 length, then agent-major
// records (vec z, i32 m, vec z_next, f64 r_partial, u8 terminated, i32 tau).
// Vectors are u32 length + f64 values. An episode being recorded is not saved.
void MacCerts::save(std::ostream& out) const {
  bin::write_header(out, "MCRT", kSnapshotVersion);
  bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(num_agents_));
  bin::write<double>(out, discount_);
  bin::write<std::uint64_t>(out, capacity_);
  bin::write<std::uint64_t>(out, episodes_.size());
  for (const auto& e : episodes_) {
    bin::write<std::uint64_t>(out, e.seed);
    bin::write<std::uint64_t>(out, static_cast<std::uint64_t>(e.length()));
    for (const auto& row : e.rows)
      for (const auto& r : row) write_agent_record(out, r);
  }
}

MacCerts MacCerts::load(std::istream& in) {
  bin::expect_header(in, "MCRT", kSnapshotVersion);
  const auto n = bin::read<std::uint32_t>(in);
  const auto discount = bin::read<double>(in);
  const auto capacity = bin::read<std::uint64_t>(in);
  MacCerts buffer(static_cast<int>(n), discount, capacity);
  const auto count = bin::read<std::uint64_t>(in);
  if (count > capacity) throw bin::FormatError("episode count exceeds capacity");
  for (std::uint64_t k = 0; k < count; ++k) {
    AgentEpisode e;
    e.seed = bin::read<std::uint64_t>(in);
    const auto len = bin::read<std::uint64_t>(in);
    if (len > (1u << 24)) throw bin::FormatError("episode length out of range");
    e.rows.assign(n, {});
    for (auto& row : e.rows) {
      row.reserve(len);
      for (std::uint64_t t = 0; t < len; ++t) row.push_back(read_agent_record(in));
    }
    buffer.episodes_.push_back(std::move(e));
  }
  return buffer;
}

bool operator==(const MacCerts& a, const MacCerts& b) {
  if (a.num_agents_ != b.num_agents_ || a.discount_ != b.discount_ || a.capacity_ != b.capacity_ ||
      a.episodes_.size() != b.episodes_.size())
    return false;
  for (std::size_t k = 0; k < a.episodes_.size(); ++k) {
    const auto& x = a.episodes_[k];
    const auto& y = b.episodes_[k];
    if (x.seed != y.seed || x.rows != y.rows) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Mac-JERTs

MacJerts::MacJerts(std::vector<int> macro_counts, double discount, std::size_t capacity)
    : space_(std::move(macro_counts)), discount_(discount), capacity_(capacity) {
  if (space_.num_agents() < 1) throw ReplayError("buffer needs at least one agent");
  if (capacity < 1) throw ReplayError("buffer capacity must be positive");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ReplayError("discount must lie in [0,1]");
}

void MacJerts::begin_episode(std::uint64_t seed) {
  current_ = JointEpisode{};
  current_.seed = seed;
  open_ = true;
}

void MacJerts::record_tick(const ObsVec& z, std::span<const int> m, const ObsVec& z_fresh,
                           const std::vector<bool>& terminated, double reward) {
  if (!open_) throw ReplayError("record_tick called outside an episode");
  const auto n = static_cast<std::size_t>(space_.num_agents());
  if (m.size() != n || terminated.size() != n) throw ReplayError("row length mismatch");
  auto& row = current_.row;
  const bool fresh = row.empty() || row.back().any_terminated;
  JointStepRecord r;
  r.z = z;
  r.m.assign(m.begin(), m.end());
  if (!fresh && row.back().m != r.m) throw ReplayError("joint macro changed without a joint boundary");
  r.tau_so_far = fresh ? 1 : row.back().tau_so_far + 1;
  r.r_partial = (fresh ? 0.0 : row.back().r_partial) + std::pow(discount_, r.tau_so_far - 1) * reward;
  r.undone_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.undone_mask[i] = !terminated[i];
    r.any_terminated = r.any_terminated || terminated[i];
  }
  r.z_next = r.any_terminated ? z_fresh : z;
  row.push_back(std::move(r));
}

void MacJerts::end_episode() {
  if (!open_) throw ReplayError("end_episode called outside an episode");
  open_ = false;
  if (current_.length() == 0) return;
  episodes_.push_back(std::move(current_));
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

std::vector<SqueezedTrace> MacJerts::squeeze_windows(std::span<const SampleWindow> windows) const {
  std::vector<SqueezedTrace> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    const auto& row = episodes_.at(w.episode).row;
    out.push_back(squeeze_joint_trace(std::span(row).subspan(w.start, w.length), space_, w.reaches_end));
  }
  return out;
}

std::vector<SqueezedTrace> MacJerts::sample_concurrent(const SampleSpec& spec, Rng& rng) const {
  std::vector<int> lengths;
  lengths.reserve(episodes_.size());
  for (const auto& e : episodes_) lengths.push_back(e.length());
  const auto windows = draw_windows(lengths, spec, rng);
  return squeeze_windows(windows);
}

// Layout: "MJRT", u32 version, u32 n_agents, i32 macro count per agent,
// f64 discount, u64 capacity, u64 episode count; per episode u64 seed,
// u64 length, records (vec z, i32 per agent m, vec z_next, f64 r_partial,
// u8 any_terminated, u8 per agent undone, i32 tau).
void MacJerts::save(std::ostream& out) const {
  bin::write_header(out, "MJRT", kSnapshotVersion);
  bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(space_.num_agents()));
  for (int s : space_.sizes()) bin::write<std::int32_t>(out, s);
  bin::write<double>(out, discount_);
  bin::write<std::uint64_t>(out, capacity_);
  bin::write<std::uint64_t>(out, episodes_.size());
  for (const auto& e : episodes_) {
    bin::write<std::uint64_t>(out, e.seed);
    bin::write<std::uint64_t>(out, static_cast<std::uint64_t>(e.length()));
    for (const auto& r : e.row) {
      bin::write_vector(out, r.z);
      for (int mi : r.m) bin::write<std::int32_t>(out, mi);
      bin::write_vector(out, r.z_next);
      bin::write<double>(out, r.r_partial);
      bin::write<std::uint8_t>(out, r.any_terminated ? 1 : 0);
      for (bool u : r.undone_mask) bin::write<std::uint8_t>(out, u ? 1 : 0);
      bin::write<std::int32_t>(out, r.tau_so_far);
    }
  }
}

MacJerts MacJerts::load(std::istream& in) {
  bin::expect_header(in, "MJRT", kSnapshotVersion);
  const auto n = bin::read<std::uint32_t>(in);
  if (n == 0 || n > 64) throw bin::FormatError("agent count out of range");
  std::vector<int> sizes(n);
  for (auto& s : sizes) s = bin::read<std::int32_t>(in);
  const auto discount = bin::read<double>(in);
  const auto capacity = bin::read<std::uint64_t>(in);
  MacJerts buffer(sizes, discount, capacity);
  const auto count = bin::read<std::uint64_t>(in);
  if (count > capacity) throw bin::FormatError("episode count exceeds capacity");
  for (std::uint64_t k = 0; k < count; ++k) {
    JointEpisode e;
    e.seed = bin::read<std::uint64_t>(in);
    const auto len = bin::read<std::uint64_t>(in);
    if (len > (1u << 24)) throw bin::FormatError("episode length out of range");
    e.row.reserve(len);
    for (std::uint64_t t = 0; t < len; ++t) {
      JointStepRecord r;
      r.z = bin::read_vector(in);
      r.m.resize(n);
      for (auto& mi : r.m) mi = bin::read<std::int32_t>(in);
      r.z_next = bin::read_vector(in);
      r.r_partial = bin::read<double>(in);
      r.any_terminated = bin::read<std::uint8_t>(in) != 0;
      r.undone_mask.resize(n);
      for (std::size_t i = 0; i < n; ++i) r.undone_mask[i] = bin::read<std::uint8_t>(in) != 0;
      r.tau_so_far = bin::read<std::int32_t>(in);
      e.row.push_back(std::move(r));
    }
    buffer.episodes_.push_back(std::move(e));
  }
  return buffer;
}

bool operator==(const MacJerts& a, const MacJerts& b) {
  if (a.space_.sizes() != b.space_.sizes() || a.discount_ != b.discount_ || a.capacity_ != b.capacity_ ||
      a.episodes_.size() != b.episodes_.size())
    return false;
  for (std::size_t k = 0; k < a.episodes_.size(); ++k)
    if (a.episodes_[k].seed != b.episodes_[k].seed || a.episodes_[k].row != b.episodes_[k].row) return false;
  return true;
}

// ---------------------------------------------------------------------------

PaddedBatch pad_batch(std::span<const SqueezedTrace> traces, int obs_dim) {
  PaddedBatch p;
  p.batch = static_cast<int>(traces.size());
  for (const auto& t : traces) p.steps = std::max(p.steps, static_cast<int>(t.size()));
  const int T = p.steps;
  const int B = p.batch;
  p.inputs = Eigen::MatrixXd::Zero(obs_dim, static_cast<Eigen::Index>(T + 1) * B);
  p.actions = Eigen::MatrixXi::Zero(T, B);
  p.rewards = Eigen::MatrixXd::Zero(T, B);
  p.tau = Eigen::MatrixXi::Ones(T, B);
  p.done = Eigen::MatrixXd::Zero(T, B);
  p.mask = Eigen::MatrixXd::Zero(T, B);

  int joint_agents = 0;
  for (const auto& t : traces)
    if (!t.empty() && !t.front().components.empty()) joint_agents = static_cast<int>(t.front().components.size());
  if (joint_agents > 0) p.continuing.assign(static_cast<std::size_t>(T) * B, std::vector<int>(joint_agents, -1));

  for (int b = 0; b < B; ++b) {
    const auto& trace = traces[b];
    for (int t = 0; t < static_cast<int>(trace.size()); ++t) {
      const auto& e = trace[t];
      if (e.z.size() != obs_dim || e.z_next.size() != obs_dim)
        throw ReplayError("observation dimension mismatch in batch");
      if (t == 0) p.inputs.col(b) = e.z;
      p.inputs.col(static_cast<Eigen::Index>(t + 1) * B + b) = e.z_next;
      p.actions(t, b) = e.m;
      p.rewards(t, b) = e.reward;
      p.tau(t, b) = e.tau;
      p.done(t, b) = e.done ? 1.0 : 0.0;
      p.mask(t, b) = 1.0;
      if (joint_agents > 0) {
        if (static_cast<int>(e.components.size()) != joint_agents ||
            static_cast<int>(e.undone_mask.size()) != joint_agents)
          throw ReplayError("joint entry lacks components or undone mask");
        auto& c = p.continuing[static_cast<std::size_t>(t) * B + b];
        for (int i = 0; i < joint_agents; ++i) c[i] = e.undone_mask[i] ? e.components[i] : -1;
      }
    }
  }
  return p;
}

double discounted_return(std::span<const double> rewards, double discount) {
  double g = 0.0;
  double w = 1.0;
  for (double r : rewards) {
    g += w * r;
    w *= discount;
  }
  return g;
}

}  // namespace macmarl::replay
