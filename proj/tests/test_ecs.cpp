#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ecsrl/ecs.hpp"
#include "ecsrl/errors.hpp"

using namespace ecsrl;

namespace {

// Independent KL oracle: long-double accumulation in reverse index order, so
// it shares neither precision nor summation order with the library.
long double kl_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  long double sum = 0.0L;
  for (size_t j = p.size(); j-- > 0;) {
    if (p[j] > 0.0) {
      sum += static_cast<long double>(p[j]) *
             std::log(static_cast<long double>(p[j]) / static_cast<long double>(q[j]));
    }
  }
  return sum;
}

Ivc random_simplex(int n, RngStream& rng) {
  Ivc ivc;
  ivc.weights.resize(static_cast<size_t>(n));
  double sum = 0.0;
  for (double& w : ivc.weights) {
    w = rng.next_open();
    sum += w;
  }
  for (double& w : ivc.weights) w /= sum;
  return ivc;
}

}  // namespace

TEST_CASE("init_ecs: zero coverage, strictly positive normalized attention") {
  RngStream rng(123);
  EcsSnapshot s = init_ecs(3, rng);
  CHECK(s.round == 0);
  REQUIRE(s.avc.bits.size() == 3);
  for (uint8_t b : s.avc.bits) CHECK(b == 0);
  REQUIRE(s.ivc.weights.size() == 3);
  double sum = 0.0;
  for (double w : s.ivc.weights) {
    CHECK(w > 0.0);
    sum += w;
  }
  CHECK(std::abs(sum - 1.0) <= kSimplexTol);
  CHECK(ivc_valid(s.ivc));
}

TEST_CASE("init_ecs: deterministic under a fixed seed") {
  RngStream a(77), b(77);
  EcsSnapshot sa = init_ecs(5, a);
  EcsSnapshot sb = init_ecs(5, b);
  for (size_t j = 0; j < 5; ++j) CHECK(sa.ivc.weights[j] == sb.ivc.weights[j]);
}

TEST_CASE("init_ecs rejects fewer than two slots") {
  RngStream rng(1);
  CHECK_THROWS_AS(init_ecs(1, rng), DimensionError);
  CHECK_THROWS_AS(init_ecs(0, rng), DimensionError);
}

TEST_CASE("normalize_ivc maps min to 0 and max to 1") {
  std::vector<double> out = normalize_ivc(Ivc{{0.1, 0.5, 0.9}});
  REQUIRE(out.size() == 3);
  CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize_ivc: flat input collapses to zeros") {
  std::vector<double> out = normalize_ivc(Ivc{{0.25, 0.25, 0.25, 0.25}});
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("normalize_ivc: already-spanning input is unchanged") {
  std::vector<double> out = normalize_ivc(Ivc{{0.0, 1.0}});
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 1.0);
}

TEST_CASE("normalize_ivc output always lies in [0,1]") {
  RngStream rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Ivc ivc = random_simplex(2 + rng.next_index(7), rng);
    std::vector<double> out = normalize_ivc(ivc);
    for (double v : out) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("polarize thresholds normalized weights strictly") {
  std::vector<uint8_t> bits = polarize(Ivc{{0.1, 0.5, 0.9}}, 0.6);
  REQUIRE(bits.size() == 3);
  CHECK(bits[0] == 0);
  CHECK(bits[1] == 0);  // normalized 0.5 is not > 0.6
  CHECK(bits[2] == 1);
}

TEST_CASE("polarize: flat attention marks nothing") {
  std::vector<uint8_t> bits = polarize(Ivc{{0.5, 0.5}}, 0.6);
  CHECK(bits[0] == 0);
  CHECK(bits[1] == 0);
}

TEST_CASE("polarize: non-degenerate input always marks the argmax") {
  RngStream rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    Ivc ivc = random_simplex(2 + rng.next_index(7), rng);
    std::vector<uint8_t> bits = polarize(ivc, 0.99);
    size_t argmax = 0;
    for (size_t j = 1; j < ivc.weights.size(); ++j) {
      if (ivc.weights[j] > ivc.weights[argmax]) argmax = j;
    }
    int pop = 0;
    for (uint8_t b : bits) pop += b;
    CHECK(bits[argmax] == 1);
    CHECK(pop >= 1);
  }
}

TEST_CASE("polarize validates the threshold") {
  Ivc ivc{{0.5, 0.5}};
  CHECK_THROWS_AS(polarize(ivc, 0.0), ValueError);
  CHECK_THROWS_AS(polarize(ivc, 1.0), ValueError);
  CHECK_THROWS_AS(polarize(ivc, -0.2), ValueError);
}

TEST_CASE("update_avc is an elementwise OR") {
  Avc out = update_avc(Avc{{1, 0, 0}}, {0, 1, 0});
  CHECK(out.bits == std::vector<uint8_t>{1, 1, 0});

  Avc full = update_avc(Avc{{1, 1, 1}}, {0, 0, 0});
  CHECK(full.bits == std::vector<uint8_t>{1, 1, 1});

  Avc ident = update_avc(Avc{{0, 0, 0}}, {1, 0, 1});
  CHECK(ident.bits == std::vector<uint8_t>{1, 0, 1});
}

TEST_CASE("update_avc is idempotent and never clears bits") {
  RngStream rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + rng.next_index(6);
    Avc prev;
    std::vector<uint8_t> pol;
    for (int j = 0; j < n; ++j) {
      prev.bits.push_back(static_cast<uint8_t>(rng.next_index(2)));
      pol.push_back(static_cast<uint8_t>(rng.next_index(2)));
    }
    Avc once = update_avc(prev, pol);
    Avc twice = update_avc(once, pol);
    CHECK(once.bits == twice.bits);
    for (int j = 0; j < n; ++j) {
      CHECK(once.bits[static_cast<size_t>(j)] >= prev.bits[static_cast<size_t>(j)]);
    }
  }
}

TEST_CASE("update_avc validates shapes and binariness") {
  CHECK_THROWS_AS(update_avc(Avc{{0, 1}}, {1, 0, 0}), DimensionError);
  CHECK_THROWS_AS(update_avc(Avc{{0, 2}}, {1, 0}), ValueError);
  CHECK_THROWS_AS(update_avc(Avc{{0, 1}}, {1, 3}), ValueError);
}

TEST_CASE("kl_divergence matches hand-computed values") {
  CHECK(kl_divergence(Ivc{{0.5, 0.5}}, Ivc{{0.5, 0.5}}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(kl_divergence(Ivc{{0.75, 0.25}}, Ivc{{0.5, 0.5}}) ==
        doctest::Approx(0.130812).epsilon(1e-5));
  CHECK(kl_divergence(Ivc{{0.5, 0.5}}, Ivc{{0.75, 0.25}}) ==
        doctest::Approx(0.143841).epsilon(1e-5));
}

TEST_CASE("kl_divergence agrees with an independent oracle on random pairs") {
  RngStream rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 2 + rng.next_index(7);
    Ivc p = random_simplex(n, rng);
    Ivc q = random_simplex(n, rng);
    double got = kl_divergence(p, q);
    double want = static_cast<double>(kl_oracle(p.weights, q.weights));
    CHECK(std::abs(got - want) <= 1e-10);
    CHECK(got >= 0.0);
  }
}

TEST_CASE("kl_divergence: zero p entries contribute nothing") {
  double v = kl_divergence(Ivc{{0.0, 1.0}}, Ivc{{0.5, 0.5}});
  CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("kl_divergence rejects missing mass in q under positive p") {
  CHECK_THROWS_AS(kl_divergence(Ivc{{0.5, 0.5}}, Ivc{{1.0, 0.0}}), ValueError);
  CHECK_THROWS_AS(kl_divergence(Ivc{{0.5, 0.5}}, Ivc{{0.5}}), DimensionError);
}

TEST_CASE("kl_divergence(p, p) vanishes for random simplex points") {
  RngStream rng(555);
  for (int trial = 0; trial < 200; ++trial) {
    Ivc p = random_simplex(2 + rng.next_index(7), rng);
    CHECK(std::abs(kl_divergence(p, p)) <= 1e-12);
  }
}

TEST_CASE("ivc_valid enforces the simplex contract") {
  CHECK(ivc_valid(Ivc{{0.5, 0.5}}));
  CHECK_FALSE(ivc_valid(Ivc{{1.0}}));             // too short
  CHECK_FALSE(ivc_valid(Ivc{{0.7, 0.4}}));        // sum too large
  CHECK_FALSE(ivc_valid(Ivc{{-0.1, 1.1}}));       // entries outside [0, 1]
  CHECK_FALSE(ivc_valid(Ivc{{0.25, 0.25, 0.25}}));  // sum too small
}
