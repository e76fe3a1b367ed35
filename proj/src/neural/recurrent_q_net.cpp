#include "macmarl/neural/recurrent_q_net.hpp"

#include <algorithm>
#include <stdexcept>

#include "macmarl/core/binary_io.hpp"

namespace macmarl::neural {

void NetConfig::validate() const {
  auto positive = [](int w) { return w >= 1; };
  if (input_dim < 1 || recurrent_width < 1 || output_dim < 1 ||
      !std::all_of(pre_widths.begin(), pre_widths.end(), positive) ||
      !std::all_of(post_widths.begin(), post_widths.end(), positive))
    throw std::invalid_argument("network widths must be at least 1");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) throw std::invalid_argument("leaky slope must lie in [0,1)");
}

std::vector<TensorShape> parameter_layout(const NetConfig& c) {
  c.validate();
  std::vector<TensorShape> out;
  Eigen::Index offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    out.push_back({std::move(name), rows, cols, offset});
    offset += static_cast<Eigen::Index>(rows) * cols;
  };
  int in = c.input_dim;
  for (std::size_t k = 0; k < c.pre_widths.size(); ++k) {
    add("pre" + std::to_string(k) + ".W", c.pre_widths[k], in);
    add("pre" + std::to_string(k) + ".b", c.pre_widths[k], 1);
    in = c.pre_widths[k];
  }
  const int H = c.recurrent_width;
  add("lstm.Wx", 4 * H, in);
  add("lstm.Wh", 4 * H, H);
  add("lstm.b", 4 * H, 1);
  in = H;
  for (std::size_t k = 0; k < c.post_widths.size(); ++k) {
    add("post" + std::to_string(k) + ".W", c.post_widths[k], in);
    add("post" + std::to_string(k) + ".b", c.post_widths[k], 1);
    in = c.post_widths[k];
  }
  add("out.W", c.output_dim, in);
  add("out.b", c.output_dim, 1);
  return out;
}

namespace {

constexpr std::uint32_t kNetVersion = 1;
constexpr std::uint32_t kOptimizerVersion = 1;

template <typename Scalar, typename Vec>
auto tensor(Vec& theta, const TensorShape& s) {
  using M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if constexpr (std::is_const_v<std::remove_reference_t<decltype(*theta.data())>>)
    return Eigen::Map<const M>(theta.data() + s.offset, s.rows, s.cols);
  else
    return Eigen::Map<M>(theta.data() + s.offset, s.rows, s.cols);
}

// Index of the first tensor of each block inside the layout.
struct Blocks {
  std::size_t pre = 0;
  std::size_t lstm = 0;
  std::size_t post = 0;
  std::size_t out = 0;
  explicit Blocks(const NetConfig& c)
      : lstm(2 * c.pre_widths.size()), post(lstm + 3), out(post + 2 * c.post_widths.size()) {}
};

}  // namespace

template <typename Scalar>
RecurrentQNet<Scalar>::RecurrentQNet(NetConfig config)
    : config_(std::move(config)), layout_(parameter_layout(config_)) {
  const auto& last = layout_.back();
  params_ = Vector::Zero(last.offset + static_cast<Eigen::Index>(last.rows) * last.cols);
  target_ = params_;
}

template <typename Scalar>
void RecurrentQNet<Scalar>::initialize(Rng& rng) {
  // Weights and biases of a layer share the fan-in of the layer's weight matrix.
  int fan_in = config_.input_dim;
  for (const auto& s : layout_) {
    if (!s.name.ends_with(".b")) fan_in = s.cols;
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(fan_in));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(s.rows) * s.cols; ++k)
      params_[s.offset + k] = static_cast<Scalar>((2.0 * rng.uniform() - 1.0)) * bound;
  }
  const Blocks blocks(config_);
  const auto& bias = layout_[blocks.lstm + 2];
  const int H = config_.recurrent_width;
  params_.segment(bias.offset + H, H).setConstant(Scalar(1));
  sync_target();
}

template <typename Scalar>
typename RecurrentQNet<Scalar>::Hidden RecurrentQNet<Scalar>::zero_hidden(int batch) const {
  const int H = config_.recurrent_width;
  return {Matrix::Zero(H, batch), Matrix::Zero(H, batch)};
}

template <typename Scalar>
typename RecurrentQNet<Scalar>::Matrix RecurrentQNet<Scalar>::run(const Vector& theta, const Matrix& inputs,
                                                                    int batch, const Hidden* initial,
                                                                    Hidden* final_state, Cache* cache) const {
  if (inputs.rows() != config_.input_dim)
    throw std::invalid_argument("input dimension mismatch: expected " + std::to_string(config_.input_dim) +
                                ", got " + std::to_string(inputs.rows()));
  if (batch < 1 || inputs.cols() % batch != 0)
    throw std::invalid_argument("input columns are not a multiple of the batch size");
  const int B = batch;
  const int T = static_cast<int>(inputs.cols() / B);
  const int H = config_.recurrent_width;
  const Scalar slope = static_cast<Scalar>(config_.leaky_slope);
  const auto leaky = [slope](Scalar x) { return leaky_relu(x, slope); };
  const auto sig = [](Scalar x) { return sigmoid(x); };
  const auto tanh_ = [](Scalar x) { return std::tanh(x); };
  const Blocks blocks(config_);

  if (cache) {
    *cache = Cache{};
    cache->batch = B;
    cache->steps = T;
    cache->inputs = inputs;
  }

  Matrix a = inputs;
  for (std::size_t k = 0; k < config_.pre_widths.size(); ++k) {
    const auto W = tensor<Scalar>(theta, layout_[2 * k]);
    const auto b = tensor<Scalar>(theta, layout_[2 * k + 1]);
    Matrix z = W * a;
    z.colwise() += b.col(0);
    a = z.unaryExpr(leaky);
    if (cache) cache->pre.push_back(a);
  }

  const auto Wx = tensor<Scalar>(theta, layout_[blocks.lstm]);
  const auto Wh = tensor<Scalar>(theta, layout_[blocks.lstm + 1]);
  const auto bl = tensor<Scalar>(theta, layout_[blocks.lstm + 2]);
  Matrix gx = Wx * a;
  gx.colwise() += bl.col(0);

  Matrix h_prev = initial ? initial->h : Matrix::Zero(H, B);
  Matrix c_prev = initial ? initial->c : Matrix::Zero(H, B);
  if (h_prev.rows() != H || h_prev.cols() != B || c_prev.rows() != H || c_prev.cols() != B)
    throw std::invalid_argument("initial hidden state shape mismatch");
  if (cache) {
    cache->h0 = h_prev;
    cache->c0 = c_prev;
    for (Matrix* m : {&cache->i, &cache->f, &cache->g, &cache->o, &cache->c, &cache->tanh_c})
      m->resize(H, static_cast<Eigen::Index>(T) * B);
  }
  Matrix hs(H, static_cast<Eigen::Index>(T) * B);
  Matrix gates(4 * H, B);
  for (int t = 0; t < T; ++t) {
    const Eigen::Index col = static_cast<Eigen::Index>(t) * B;
    gates.noalias() = Wh * h_prev;
    gates += gx.middleCols(col, B);
    const Matrix i = gates.topRows(H).unaryExpr(sig);
    const Matrix f = gates.middleRows(H, H).unaryExpr(sig);
    const Matrix g = gates.middleRows(2 * H, H).unaryExpr(tanh_);
    const Matrix o = gates.bottomRows(H).unaryExpr(sig);
    c_prev = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    const Matrix tc = c_prev.unaryExpr(tanh_);
    h_prev = o.cwiseProduct(tc);
    hs.middleCols(col, B) = h_prev;
    if (cache) {
      cache->i.middleCols(col, B) = i;
      cache->f.middleCols(col, B) = f;
      cache->g.middleCols(col, B) = g;
      cache->o.middleCols(col, B) = o;
      cache->c.middleCols(col, B) = c_prev;
      cache->tanh_c.middleCols(col, B) = tc;
    }
  }
  if (final_state) *final_state = {h_prev, c_prev};

  a = hs;
  if (cache) cache->h = hs;
  for (std::size_t k = 0; k < config_.post_widths.size(); ++k) {
    const auto W = tensor<Scalar>(theta, layout_[blocks.post + 2 * k]);
    const auto b = tensor<Scalar>(theta, layout_[blocks.post + 2 * k + 1]);
    Matrix z = W * a;
    z.colwise() += b.col(0);
    a = z.unaryExpr(leaky);
    if (cache) cache->post.push_back(a);
  }
  const auto Wo = tensor<Scalar>(theta, layout_[blocks.out]);
  const auto bo = tensor<Scalar>(theta, layout_[blocks.out + 1]);
  Matrix out = Wo * a;
  out.colwise() += bo.col(0);
  return out;
}

template <typename Scalar>
typename RecurrentQNet<Scalar>::Matrix RecurrentQNet<Scalar>::forward_sequence(const Matrix& inputs, int batch,
                                                                                 const Hidden* initial,
                                                                                 Hidden* final_state) {
  Cache cache;
  Matrix out = run(params_, inputs, batch, initial, final_state, &cache);
  cache_ = std::move(cache);
  return out;
}

template <typename Scalar>
typename RecurrentQNet<Scalar>::Matrix RecurrentQNet<Scalar>::evaluate_sequence(const Matrix& inputs, int batch,
                                                                                  Params which,
                                                                                  const Hidden* initial,
                                                                                  Hidden* final_state) const {
  return run(which == Params::Online ? params_ : target_, inputs, batch, initial, final_state, nullptr);
}

template <typename Scalar>
typename RecurrentQNet<Scalar>::Vector RecurrentQNet<Scalar>::step(const Vector& input, Hidden& state,
                                                                     Params which) const {
  Hidden next;
  Matrix out = run(which == Params::Online ? params_ : target_, input, 1, &state, &next, nullptr);
  state = std::move(next);
  return out.col(0);
}

template <typename Scalar>
typename RecurrentQNet<Scalar>::Vector RecurrentQNet<Scalar>::backward_sequence(const Matrix& dout) const {
  if (!cache_) throw std::logic_error("backward_sequence requires a cached forward pass");
  const Cache& k = *cache_;
  const int B = k.batch;
  const int T = k.steps;
  const int H = config_.recurrent_width;
  const Eigen::Index TB = static_cast<Eigen::Index>(T) * B;
  if (dout.rows() != config_.output_dim || dout.cols() != TB)
    throw std::invalid_argument("output gradient shape mismatch");
  const Scalar slope = static_cast<Scalar>(config_.leaky_slope);
  const auto leaky_grad = [slope](Scalar a) { return a > Scalar(0) ? Scalar(1) : slope; };
  const Blocks blocks(config_);

  Vector grad = Vector::Zero(params_.size());

  // Linear head and dense layers after the LSTM.
  const Matrix& last = k.post.empty() ? k.h : k.post.back();
  tensor<Scalar>(grad, layout_[blocks.out]).noalias() = dout * last.transpose();
  tensor<Scalar>(grad, layout_[blocks.out + 1]) = dout.rowwise().sum();
  Matrix da = tensor<Scalar>(params_, layout_[blocks.out]).transpose() * dout;
  for (std::size_t l = config_.post_widths.size(); l-- > 0;) {
    const Matrix& a_prev = l == 0 ? k.h : k.post[l - 1];
    const Matrix dz = da.cwiseProduct(k.post[l].unaryExpr(leaky_grad));
    tensor<Scalar>(grad, layout_[blocks.post + 2 * l]).noalias() = dz * a_prev.transpose();
    tensor<Scalar>(grad, layout_[blocks.post + 2 * l + 1]) = dz.rowwise().sum();
    da = tensor<Scalar>(params_, layout_[blocks.post + 2 * l]).transpose() * dz;
  }

  // Backpropagation through time.
  const auto Wh = tensor<Scalar>(params_, layout_[blocks.lstm + 1]);
  Matrix dgates_all(4 * H, TB);
  Matrix dh_next = Matrix::Zero(H, B);
  Matrix dc_next = Matrix::Zero(H, B);
  for (int t = T - 1; t >= 0; --t) {
    const Eigen::Index col = static_cast<Eigen::Index>(t) * B;
    const auto i = k.i.middleCols(col, B);
    const auto f = k.f.middleCols(col, B);
    const auto g = k.g.middleCols(col, B);
    const auto o = k.o.middleCols(col, B);
    const auto tc = k.tanh_c.middleCols(col, B);
    const Matrix c_prev = t == 0 ? k.c0 : Matrix(k.c.middleCols(col - B, B));
    const Matrix dh = da.middleCols(col, B) + dh_next;
    const Matrix dc = dc_next + dh.cwiseProduct(o).cwiseProduct((Scalar(1) - tc.array().square()).matrix());
    auto dgates = dgates_all.middleCols(col, B);
    dgates.topRows(H) = dc.cwiseProduct(g).cwiseProduct(i).cwiseProduct((Scalar(1) - i.array()).matrix());
    dgates.middleRows(H, H) =
        dc.cwiseProduct(c_prev).cwiseProduct(f).cwiseProduct((Scalar(1) - f.array()).matrix());
    dgates.middleRows(2 * H, H) = dc.cwiseProduct(i).cwiseProduct((Scalar(1) - g.array().square()).matrix());
    dgates.bottomRows(H) = dh.cwiseProduct(tc).cwiseProduct(o).cwiseProduct((Scalar(1) - o.array()).matrix());
    dc_next = dc.cwiseProduct(f);
    dh_next.noalias() = Wh.transpose() * dgates;
  }
  Matrix h_prev_all(H, TB);
  if (T > 0) {
    h_prev_all.leftCols(B) = k.h0;
    h_prev_all.rightCols(TB - B) = k.h.leftCols(TB - B);
  }
  const Matrix& lstm_in = k.pre.empty() ? k.inputs : k.pre.back();
  tensor<Scalar>(grad, layout_[blocks.lstm]).noalias() = dgates_all * lstm_in.transpose();
  tensor<Scalar>(grad, layout_[blocks.lstm + 1]).noalias() = dgates_all * h_prev_all.transpose();
  tensor<Scalar>(grad, layout_[blocks.lstm + 2]) = dgates_all.rowwise().sum();
  da = tensor<Scalar>(params_, layout_[blocks.lstm]).transpose() * dgates_all;

  for (std::size_t l = config_.pre_widths.size(); l-- > 0;) {
    const Matrix& a_prev = l == 0 ? k.inputs : k.pre[l - 1];
    const Matrix dz = da.cwiseProduct(k.pre[l].unaryExpr(leaky_grad));
    tensor<Scalar>(grad, layout_[2 * l]).noalias() = dz * a_prev.transpose();
    tensor<Scalar>(grad, layout_[2 * l + 1]) = dz.rowwise().sum();
    if (l > 0) da = tensor<Scalar>(params_, layout_[2 * l]).transpose() * dz;
  }
  return grad;
}

// Layout: "RQNT", u32 version; config (u32 input_dim, u32 n_pre, u32 widths,
// u32 recurrent width, u32 n_post, u32 widths, u32 output_dim, f64 slope);
// shape table (u32 count; per tensor: string name, u32 rows, u32 cols);
// u64 parameter count; θ then θ⁻ as little-endian f64.
template <typename Scalar>
void RecurrentQNet<Scalar>::save(std::ostream& out) const {
  bin::write_header(out, "RQNT", kNetVersion);
  auto widths = [&](const std::vector<int>& w) {
    bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
    for (int x : w) bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(x));
  };
  bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(config_.input_dim));
  widths(config_.pre_widths);
  bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(config_.recurrent_width));
  widths(config_.post_widths);
  bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(config_.output_dim));
  bin::write<double>(out, config_.leaky_slope);
  bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(layout_.size()));
  for (const auto& s : layout_) {
    bin::write_string(out, s.name);
    bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(s.rows));
    bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(s.cols));
  }
  bin::write<std::uint64_t>(out, static_cast<std::uint64_t>(params_.size()));
  for (const Vector* v : {&params_, &target_})
    for (Eigen::Index k = 0; k < v->size(); ++k) bin::write<double>(out, static_cast<double>((*v)[k]));
}

template <typename Scalar>
RecurrentQNet<Scalar> RecurrentQNet<Scalar>::load(std::istream& in) {
  bin::expect_header(in, "RQNT", kNetVersion);
  auto widths = [&]() {
    const auto n = bin::read<std::uint32_t>(in);
    if (n > 64) throw bin::FormatError("layer count out of range");
    std::vector<int> w(n);
    for (auto& x : w) x = static_cast<int>(bin::read<std::uint32_t>(in));
    return w;
  };
  NetConfig c;
  c.input_dim = static_cast<int>(bin::read<std::uint32_t>(in));
  c.pre_widths = widths();
  c.recurrent_width = static_cast<int>(bin::read<std::uint32_t>(in));
  c.post_widths = widths();
  c.output_dim = static_cast<int>(bin::read<std::uint32_t>(in));
  c.leaky_slope = bin::read<double>(in);
  RecurrentQNet net(c);
  const auto count = bin::read<std::uint32_t>(in);
  if (count != net.layout_.size()) throw bin::FormatError("parameter shape table mismatch");
  for (const auto& s : net.layout_) {
    const auto name = bin::read_string(in, 256);
    const auto rows = bin::read<std::uint32_t>(in);
    const auto cols = bin::read<std::uint32_t>(in);
    if (name != s.name || static_cast<int>(rows) != s.rows || static_cast<int>(cols) != s.cols)
      throw bin::FormatError("parameter shape mismatch at tensor '" + s.name + "'");
  }
  if (bin::read<std::uint64_t>(in) != static_cast<std::uint64_t>(net.params_.size()))
    throw bin::FormatError("parameter count mismatch");
  for (Vector* v : {&net.params_, &net.target_})
    for (Eigen::Index k = 0; k < v->size(); ++k) (*v)[k] = static_cast<Scalar>(bin::read<double>(in));
  return net;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
Optimizer<Scalar>::Optimizer(Settings settings, Eigen::Index num_params)
    : settings_(settings), m_(Vector::Zero(num_params)), v_(Vector::Zero(num_params)) {
  if (!(settings.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

template <typename Scalar>
void Optimizer<Scalar>::step(Vector& params, const Vector& grad, Scalar scale) {
  if (grad.size() != params.size() || params.size() != m_.size())
    throw std::invalid_argument("optimizer shape mismatch");
  require_finite(grad, "gradient");
  Vector g = grad;
  if (settings_.clip_norm > 0.0) {
    const Scalar norm = g.norm();
    if (norm > static_cast<Scalar>(settings_.clip_norm)) g *= static_cast<Scalar>(settings_.clip_norm) / norm;
  }
  const Scalar lr = static_cast<Scalar>(settings_.learning_rate) * scale;
  ++steps_;
  if (settings_.kind == Kind::Sgd) {
    params -= lr * g;
    return;
  }
  const Scalar b1 = static_cast<Scalar>(settings_.beta1);
  const Scalar b2 = static_cast<Scalar>(settings_.beta2);
  const Scalar eps = static_cast<Scalar>(settings_.epsilon);
  m_ = b1 * m_ + (Scalar(1) - b1) * g;
  v_ = b2 * v_ + (Scalar(1) - b2) * g.cwiseProduct(g);
  const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(steps_));
  const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(steps_));
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
}

// Layout: "OPTM", u32 version, u8 kind, f64 learning rate, beta1, beta2,
// epsilon, clip norm, i64 step count, u64 size, first then second moments.
template <typename Scalar>
void Optimizer<Scalar>::save(std::ostream& out) const {
  bin::write_header(out, "OPTM", kOptimizerVersion);
  bin::write<std::uint8_t>(out, settings_.kind == Kind::Adam ? 0 : 1);
  for (double x : {settings_.learning_rate, settings_.beta1, settings_.beta2, settings_.epsilon,
                   settings_.clip_norm})
    bin::write<double>(out, x);
  bin::write<std::int64_t>(out, steps_);
  bin::write<std::uint64_t>(out, static_cast<std::uint64_t>(m_.size()));
  for (const Vector* v : {&m_, &v_})
    for (Eigen::Index k = 0; k < v->size(); ++k) bin::write<double>(out, static_cast<double>((*v)[k]));
}

template <typename Scalar>
Optimizer<Scalar> Optimizer<Scalar>::load(std::istream& in) {
  bin::expect_header(in, "OPTM", kOptimizerVersion);
  Settings s;
  s.kind = bin::read<std::uint8_t>(in) == 0 ? Kind::Adam : Kind::Sgd;
  s.learning_rate = bin::read<double>(in);
  s.beta1 = bin::read<double>(in);
  s.beta2 = bin::read<double>(in);
  s.epsilon = bin::read<double>(in);
  s.clip_norm = bin::read<double>(in);
  const auto steps = bin::read<std::int64_t>(in);
  const auto n = bin::read<std::uint64_t>(in);
  if (n > (1ull << 32)) throw bin::FormatError("optimizer size out of range");
  Optimizer opt(s, static_cast<Eigen::Index>(n));
  opt.steps_ = steps;
  for (Vector* v : {&opt.m_, &opt.v_})
    for (Eigen::Index k = 0; k < v->size(); ++k) (*v)[k] = static_cast<Scalar>(bin::read<double>(in));
  return opt;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
GradientCheckResult gradient_check(RecurrentQNet<Scalar>& net, const typename RecurrentQNet<Scalar>::Matrix& inputs,
                                   int batch, const typename RecurrentQNet<Scalar>::Matrix& coeffs,
                                   const std::vector<Eigen::Index>& indices, double h, double tolerance) {
  using Matrix = typename RecurrentQNet<Scalar>::Matrix;
  const auto loss = [&]() {
    const Matrix q = net.evaluate_sequence(inputs, batch);
    return static_cast<double>((coeffs.cwiseProduct(q)).sum() + Scalar(0.5) * q.squaredNorm());
  };
  const Matrix q = net.forward_sequence(inputs, batch);
  const auto grad = net.backward_sequence(coeffs + q);

  GradientCheckResult result;
  int within = 0;
  for (const auto idx : indices) {
    Scalar& p = net.params()[idx];
    const Scalar saved = p;
    p = saved + static_cast<Scalar>(h);
    const double up = loss();
    p = saved - static_cast<Scalar>(h);
    const double down = loss();
    p = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = static_cast<double>(grad[idx]);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    const double rel = std::abs(numeric - analytic) / denom;
    result.max_relative_error = std::max(result.max_relative_error, rel);
    if (rel < tolerance) ++within;
    ++result.probed;
  }
  result.fraction_within = result.probed ? static_cast<double>(within) / result.probed : 1.0;
  return result;
}

template class RecurrentQNet<double>;
template class RecurrentQNet<float>;
template class Optimizer<double>;
template class Optimizer<float>;
template GradientCheckResult gradient_check<double>(RecurrentQNet<double>&, const RecurrentQNet<double>::Matrix&, int,
                                                    const RecurrentQNet<double>::Matrix&,
                                                    const std::vector<Eigen::Index>&, double, double);

}  // namespace macmarl::neural
