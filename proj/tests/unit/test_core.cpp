#include <doctest.h>

#include <set>
#include <sstream>

#include "macmarl/core/execution.hpp"
#include "macmarl/core/joint_actions.hpp"
#include "macmarl/core/key_value.hpp"
#include "macmarl/core/rng.hpp"
#include "support/synthetic.hpp"

using namespace macmarl;

TEST_CASE("rng streams are reproducible and serializable") {
  Rng a(42), b(42);
  for (int k = 0; k < 100; ++k) CHECK(a.next() == b.next());
  const std::string saved = a.state();
  std::vector<double> first;
  for (int k = 0; k < 10; ++k) first.push_back(a.uniform());
  Rng c;
  c.set_state(saved);
  for (int k = 0; k < 10; ++k) CHECK(c.uniform() == first[k]);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("uniform_int stays in range and hits every value") {
  Rng rng(5);
  std::set<std::size_t> seen;
  for (int k = 0; k < 2000; ++k) {
    const auto v = rng.uniform_int(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  for (int k = 0; k < 1000; ++k) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("joint action encode/decode round-trips (property)") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> sizes;
    const int n = 1 + static_cast<int>(rng.uniform_int(4));
    for (int i = 0; i < n; ++i) sizes.push_back(1 + static_cast<int>(rng.uniform_int(5)));
    JointActionSpace space(sizes);
    int total = 1;
    for (int s : sizes) total *= s;
    REQUIRE(space.size() == total);
    for (int j = 0; j < space.size(); ++j) CHECK(space.encode(space.decode(j)) == j);
  }
  JointActionSpace s({3, 4});
  CHECK(s.encode(std::vector<int>{1, 2}) == 6);
  CHECK(s.decode(11) == std::vector<int>{2, 3});
}

TEST_CASE("restricted joint sets pin undone agents") {
  JointActionSpace space({3, 4});
  std::vector<std::optional<int>> pinned{std::nullopt, 1};
  const auto r = space.restricted(pinned);
  CHECK(r.size() == 3);
  for (int j : r) CHECK(space.decode(j)[1] == 1);
  std::vector<std::optional<int>> free(2);
  CHECK(static_cast<int>(space.restricted(free).size()) == space.size());
  std::vector<std::optional<int>> all{2, 3};
  CHECK(space.restricted(all) == std::vector<int>{space.encode(std::vector<int>{2, 3})});
}

TEST_CASE("restricted argmax matches enumeration on random tables") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(2));
    std::vector<int> sizes;
    for (int i = 0; i < n; ++i) sizes.push_back(2 + static_cast<int>(rng.uniform_int(3)));
    JointActionSpace space(sizes);
    Eigen::VectorXd q(space.size());
    for (int j = 0; j < q.size(); ++j) q[j] = rng.uniform();
    std::vector<int> pin(n, -1);
    std::vector<std::optional<int>> pinned(n);
    for (int i = 0; i < n; ++i)
      if (rng.bernoulli(0.5)) {
        pin[i] = static_cast<int>(rng.uniform_int(sizes[i]));
        pinned[i] = pin[i];
      }
    CHECK(argmax_over(q, space.restricted(pinned)) == testing::brute_force_restricted_argmax(q, space, pin));
  }
}

TEST_CASE("argmax takes the first maximum") {
  Eigen::VectorXd q(4);
  q << 1.0, 3.0, 3.0, 2.0;
  CHECK(argmax(q) == 1);
  CHECK(argmax_over(q, std::vector<int>{3, 2, 1}) == 2);
}

TEST_CASE("epsilon-greedy respects candidates") {
  Rng rng(9);
  Eigen::VectorXd q(4);
  q << 0.0, 10.0, 5.0, 1.0;
  const std::vector<int> cand{0, 2, 3};
  for (int k = 0; k < 50; ++k) CHECK(epsilon_greedy(q, cand, 0.0, rng) == 2);
  std::set<int> seen;
  for (int k = 0; k < 500; ++k) {
    const int a = epsilon_greedy(q, cand, 1.0, rng);
    CHECK(a != 1);
    seen.insert(a);
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("key/value parsing") {
  std::istringstream in("# comment\n a = 1 \n\nb=x # trailing\nlist = 1, 2,3\n");
  const auto kv = parse_key_values(in);
  REQUIRE(kv.size() == 3);
  CHECK(kv[0] == std::pair<std::string, std::string>{"a", "1"});
  CHECK(kv[1].second == "x");
  CHECK(parse_int_list("list", kv[2].second) == std::vector<int>{1, 2, 3});

  std::istringstream dup("a = 1\na = 2\n");
  CHECK_THROWS_AS(parse_key_values(dup), ConfigError);
  std::istringstream bad("novalue\n");
  CHECK_THROWS_AS(parse_key_values(bad), ConfigError);
  CHECK_THROWS_AS(parse_int("k", "1.5"), ConfigError);
  CHECK_THROWS_AS(parse_double("k", "abc"), ConfigError);
  CHECK_THROWS_AS(parse_bool("k", "maybe"), ConfigError);
  CHECK(parse_bool("k", "yes"));
  CHECK(parse_double("k", "1e-3") == doctest::Approx(1e-3));
  CHECK_THROWS_AS(read_key_value_file("/nonexistent/file.cfg"), ConfigError);
}
