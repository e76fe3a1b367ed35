#include <doctest.h>

#include <sstream>

#include "macmarl/neural/recurrent_q_net.hpp"
#include "support/nets.hpp"

using namespace macmarl;
using namespace macmarl::neural;
using Net = RecurrentQNet<double>;

TEST_CASE("parameter layout counts every tensor") {
  NetConfig c;
  c.input_dim = 5;
  c.output_dim = 6;
  // Independent count: dense 5->32->32, LSTM(32->64), dense 64->32, head 32->6.
  const long expected = (5 * 32 + 32) + (32 * 32 + 32) + (4 * 64 * 32 + 4 * 64 * 64 + 4 * 64) + (64 * 32 + 32) +
                        (32 * 6 + 6);
  Net net(c);
  CHECK(net.num_params() == expected);
  const auto& layout = net.layout();
  CHECK(layout.front().name == "pre0.W");
  CHECK(layout.back().name == "out.b");
  Eigen::Index next = 0;
  for (const auto& t : layout) {
    CHECK(t.offset == next);
    next += static_cast<Eigen::Index>(t.rows) * t.cols;
  }
}

TEST_CASE("initialization bounds and forget bias") {
  NetConfig c;
  c.input_dim = 4;
  c.output_dim = 3;
  Net net(c);
  Rng rng(1);
  net.initialize(rng);
  CHECK(net.params() == net.target_params());
  for (const auto& t : net.layout()) {
    const auto block = net.params().segment(t.offset, static_cast<Eigen::Index>(t.rows) * t.cols);
    if (t.name == "lstm.b") {
      const int H = c.recurrent_width;
      const double bound = 1.0 / std::sqrt(static_cast<double>(H));
      CHECK(block.segment(H, H).minCoeff() >= 1.0 - bound);
      CHECK(block.head(H).cwiseAbs().maxCoeff() <= bound);
    }
  }
}

TEST_CASE("finite differences agree with backpropagation through time") {
  Rng rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    const auto c = testing::random_small_config(rng);
    Net net(c);
    net.initialize(rng);
    const int B = 1 + static_cast<int>(rng.uniform_int(3));
    const int T = 1 + static_cast<int>(rng.uniform_int(5));
    const auto inputs = testing::random_matrix(rng, c.input_dim, T * B);
    const auto coeffs = testing::random_matrix(rng, c.output_dim, T * B);
    const double err = testing::max_fd_relative_error(net, inputs, B, coeffs, rng, 60);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("library gradient check agrees") {
  Rng rng(3);
  const auto c = testing::random_small_config(rng);
  Net net(c);
  net.initialize(rng);
  const auto inputs = testing::random_matrix(rng, c.input_dim, 8);
  const auto coeffs = testing::random_matrix(rng, c.output_dim, 8);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < net.num_params(); k += 3) idx.push_back(k);
  const auto r = gradient_check(net, inputs, 2, coeffs, idx);
  CHECK(r.max_relative_error < 1e-4);
  CHECK(r.fraction_within == 1.0);
}

TEST_CASE("stepping one observation at a time matches the sequence pass") {
  Rng rng(4);
  NetConfig c;
  c.input_dim = 3;
  c.output_dim = 4;
  Net net(c);
  net.initialize(rng);
  const int T = 7, B = 3;
  const auto inputs = testing::random_matrix(rng, 3, T * B);
  const auto out = net.evaluate_sequence(inputs, B);
  for (int b = 0; b < B; ++b) {
    auto h = net.zero_hidden(1);
    for (int t = 0; t < T; ++t) {
      const Eigen::VectorXd q = net.step(inputs.col(t * B + b), h);
      CHECK((q - out.col(t * B + b)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  // Splitting a sequence and carrying the state gives the same outputs.
  Net::Hidden mid;
  const auto first = net.evaluate_sequence(inputs.leftCols(3 * B), B, Net::Params::Online, nullptr, &mid);
  const auto second = net.evaluate_sequence(inputs.rightCols(4 * B), B, Net::Params::Online, &mid);
  CHECK((first - out.leftCols(3 * B)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((second - out.rightCols(4 * B)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("target parameters are separate until synced") {
  Rng rng(5);
  NetConfig c;
  c.input_dim = 2;
  c.output_dim = 2;
  Net net(c);
  net.initialize(rng);
  const auto x = testing::random_matrix(rng, 2, 4);
  net.params()[0] += 0.5;
  CHECK(net.evaluate_sequence(x, 2, Net::Params::Online) != net.evaluate_sequence(x, 2, Net::Params::Target));
  net.sync_target();
  CHECK(net.evaluate_sequence(x, 2, Net::Params::Online) == net.evaluate_sequence(x, 2, Net::Params::Target));
}

TEST_CASE("backward without a cached pass is an error") {
  NetConfig c;
  Net net(c);
  CHECK_THROWS_AS(net.backward_sequence(Net::Matrix::Zero(1, 1)), std::logic_error);
  CHECK_THROWS(net.evaluate_sequence(Net::Matrix::Zero(2, 1), 1));
}

TEST_CASE("net save/load round-trip and header checks") {
  Rng rng(6);
  NetConfig c;
  c.input_dim = 3;
  c.output_dim = 5;
  c.pre_widths = {8};
  Net net(c);
  net.initialize(rng);
  net.params()[3] = 42.0;
  std::stringstream ss;
  net.save(ss);
  const std::string blob = ss.str();
  std::stringstream in(blob);
  const auto back = Net::load(in);
  CHECK(back.config() == c);
  CHECK(back.params() == net.params());
  CHECK(back.target_params() == net.target_params());

  std::string corrupt = blob;
  corrupt[0] = 'X';
  std::stringstream bad(corrupt);
  CHECK_THROWS(Net::load(bad));
  std::stringstream truncated(blob.substr(0, blob.size() / 2));
  CHECK_THROWS(Net::load(truncated));
}

TEST_CASE("single precision instantiation tracks double precision") {
  Rng rng(7);
  NetConfig c;
  c.input_dim = 3;
  c.output_dim = 2;
  Net dnet(c);
  dnet.initialize(rng);
  RecurrentQNet<float> fnet(c);
  fnet.params() = dnet.params().cast<float>();
  const auto x = testing::random_matrix(rng, 3, 10);
  const auto d = dnet.evaluate_sequence(x, 2);
  const auto f = fnet.evaluate_sequence(x.cast<float>(), 2);
  CHECK((d - f.cast<double>()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("optimizers") {
  using Opt = Optimizer<double>;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 0.0;

  SUBCASE("sgd takes -lr * grad") {
    Opt::Settings s;
    s.kind = Opt::Kind::Sgd;
    s.learning_rate = 0.1;
    Opt opt(s, 3);
    opt.step(p, g);
    CHECK(p[0] == doctest::Approx(-0.2));
    CHECK(p[1] == doctest::Approx(0.05));
    CHECK(p[2] == 0.0);
  }
  SUBCASE("adam's first step has size lr per moving coordinate") {
    Opt opt(Opt::Settings{}, 3);
    opt.step(p, g);
    CHECK(p[0] == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK(p[2] == 0.0);
    CHECK(opt.step_count() == 1);
  }
  SUBCASE("clipping rescales to the configured norm") {
    Opt::Settings s;
    s.kind = Opt::Kind::Sgd;
    s.learning_rate = 1.0;
    s.clip_norm = 1.0;
    Opt opt(s, 3);
    opt.step(p, g);
    CHECK(p.norm() == doctest::Approx(1.0));
  }
  SUBCASE("non-finite gradients abort") {
    Opt opt(Opt::Settings{}, 3);
    g[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(opt.step(p, g), NumericalError);
  }
  SUBCASE("state round-trips") {
    Opt opt(Opt::Settings{}, 3);
    opt.step(p, g);
    std::stringstream ss;
    opt.save(ss);
    CHECK(Opt::load(ss) == opt);
  }
}

TEST_CASE("overfitting one batch drives the loss to zero") {
  Rng rng(8);
  NetConfig c;
  c.input_dim = 4;
  c.output_dim = 3;
  const double loss = testing::overfit_one_batch(c, rng, 1500);
  CHECK(loss < 1e-3);
}
