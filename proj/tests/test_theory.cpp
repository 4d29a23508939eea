#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lrp/errors.hpp"
#include "lrp/theory.hpp"
#include "oracles.hpp"

#include <boost/math/special_functions/zeta.hpp>

using namespace lrp;

namespace {

std::vector<double> grid50() {
  std::vector<double> g;
  for (int i = 0; i < 50; ++i) g.push_back((i + 0.5) / 50);
  return g;
}

// Largest component over occupied vertices, by enumerating every site and bond subset.
std::vector<double> enumerate_complete_graph(const CompleteGraphParams& c) {
  const int n = static_cast<int>(c.n);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> dist(static_cast<std::size_t>(n + 1), 0.0);
  for (std::uint32_t sites = 0; sites < (1u << n); ++sites) {
    double ws = 1;
    for (int i = 0; i < n; ++i) ws *= (sites >> i & 1) ? c.r : 1 - c.r;
    for (std::uint32_t bonds = 0; bonds < (1u << pairs.size()); ++bonds) {
      double w = ws;
      std::vector<int> comp(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) comp[static_cast<std::size_t>(i)] = i;
      for (std::size_t b = 0; b < pairs.size(); ++b) {
        const bool on = bonds >> b & 1;
        w *= on ? c.p : 1 - c.p;
        const auto [u, v] = pairs[b];
        if (!on || !(sites >> u & 1) || !(sites >> v & 1)) continue;
        const int cu = comp[static_cast<std::size_t>(u)], cv = comp[static_cast<std::size_t>(v)];
        for (auto& x : comp) {
          if (x == cv) x = cu;
        }
      }
      int best = 0;
      for (int lab = 0; lab < n; ++lab) {
        int size = 0;
        for (int i = 0; i < n; ++i) size += (sites >> i & 1) && comp[static_cast<std::size_t>(i)] == lab;
        best = std::max(best, size);
      }
      dist[static_cast<std::size_t>(best)] += w;
    }
  }
  return dist;
}

double brute_below(int kappa, double b, double e) {
  const double bound = std::pow(b, kappa);
  const int top = static_cast<int>(std::ceil(bound));
  double acc = 0;
  if (kappa == 1) {
    for (int a = 1; a < top + 1; ++a)
      if (a < bound) acc += std::pow(a, e);
  } else if (kappa == 2) {
    for (int a = 1; a <= top; ++a)
      for (int c = 1; c <= top; ++c)
        if (double(a) * c < bound) acc += std::pow(double(a) * c, e);
  } else {
    for (int a = 1; a <= top; ++a)
      for (int c = 1; c <= top; ++c)
        for (int f = 1; f <= top; ++f)
          if (double(a) * c * f < bound) acc += std::pow(double(a) * c * f, e);
  }
  return acc;
}

}  // namespace

TEST_CASE("delta closed form against a high-precision oracle") {
  CHECK(delta(1.5, 1) == doctest::Approx(2.40942).epsilon(1e-5));
  CHECK(delta(1.0, 1) == 1.0);
  CHECK(delta(std::sqrt(2.0) * 3, 3) == doctest::Approx(2.0).epsilon(1e-12));
  for (double s : grid50()) {
    for (int d = 1; d <= 3; ++d) {
      const double sd = d * (1 + s);  // strictly inside (d, 2d)
      CHECK(std::abs(delta(sd, d) - oracle::delta(sd, d)) <= 1e-9 * std::max(1.0, oracle::delta(sd, d)));
    }
  }
  CHECK_THROWS_AS(delta(2.0, 1), DivergenceError);
  CHECK_THROWS_AS(delta(5.0, 2), DivergenceError);
  CHECK_THROWS_AS(delta(0.0, 1), InvalidInput);
  CHECK_THROWS_AS(delta(1.0, 0), InvalidInput);
}

TEST_CASE("delta is increasing, above 1, and depends on s/d only") {
  double prev = 1.0;
  for (int i = 1; i < 100; ++i) {
    const double s = 1 + i / 100.0;
    const double v = delta(s, 1);
    CHECK(v > prev);
    CHECK(v > 1);
    CHECK(delta(2 * s, 2) == doctest::Approx(v).epsilon(1e-12));
    CHECK(delta(3 * s, 3) == doctest::Approx(v).epsilon(1e-12));
    prev = v;
  }
}

TEST_CASE("depth K and n") {
  CHECK(depth_K(std::exp(std::exp(1.0)), 0.5) == doctest::Approx(1 / std::log(2.0)));
  CHECK(depth_K(1e6, 0.5) < depth_K(1e9, 0.5));
  CHECK(depth_K(1e6, 0.5) > depth_K(1e6, 0.4));
  CHECK_THROWS_AS(depth_K(2.0, 0.5), InvalidInput);
  CHECK_THROWS_AS(depth_K(100, 1.0), InvalidInput);
  CHECK_THROWS_AS(depth_n(10, 0.5, 1), InvalidInput);

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> logN(std::exp(1.0) + 0.01, 60), gam(0.05, 0.95), eps(0, 2);
  for (int it = 0; it < 2000; ++it) {
    const double N = std::exp(logN(gen)), g = gam(gen), e = eps(gen);
    const int n = depth_n(N, g, e);
    const double target = std::log(std::log(N)) - e * std::log(std::log(std::log(N)));
    const double step = std::log(1 / g);
    CHECK(n >= 0);
    if (target >= 0) {
      CHECK(n * step <= target + 1e-12);
      CHECK((n + 1) * step > target - 1e-12);
    } else {
      CHECK(n == 0);
    }
  }
}

TEST_CASE("chernoff rate against relative entropy and the variational form") {
  CHECK(chernoff_rate(0.25, 0.5) == doctest::Approx(0.130812).epsilon(1e-5));
  CHECK(chernoff_rate(0.3, 0.3) == 0.0);
  CHECK(chernoff_rate(0.0, 0.4) == doctest::Approx(-std::log(0.6)).epsilon(1e-14));
  CHECK(chernoff_rate(0.7, 0.5) == 0.0);
  CHECK(std::isinf(chernoff_rate(0.5, 1.0)));
  CHECK(chernoff_rate(1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(chernoff_rate(-0.1, 0.5), InvalidInput);
  CHECK_THROWS_AS(chernoff_rate(0.1, 1.5), InvalidInput);
  CHECK(oracle::chernoff_sup(0.25, 0.5) == doctest::Approx(0.130812).epsilon(1e-5));

  int positive = 0;
  for (double q : grid50()) {
    for (double qp : grid50()) {
      const double v = chernoff_rate(qp, q);
      CHECK(std::abs(v - oracle::chernoff_sup(qp, q)) <= 1e-9);
      if (qp <= q) CHECK(std::abs(v - oracle::kl(qp, q)) <= 1e-12);
      if (qp < q) {
        CHECK(v > 0);
        ++positive;
      }
    }
  }
  CHECK(positive == 1225);
}

TEST_CASE("chernoff floor trivial cases and argument checks") {
  CHECK(chernoff_rate_floor(0.2, 0.9, 0.3, 5.0) <= 0.0);
  CHECK(chernoff_rate_floor(0.0, 0.5, 0.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(chernoff_rate_floor(0.5, 0.99, 0.25, 1.0) == doctest::Approx(0.75 * 0.5 * (std::log(100.0) - 1)));
  // 1 - q' = 0.2 < 0.5^0.5
  CHECK_THROWS_AS(chernoff_rate_floor(0.8, 0.5, 0.5, 1.0), InvalidInput);
  CHECK_THROWS_AS(chernoff_rate_floor(0.2, 0.5, 1.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(chernoff_rate_floor(0.2, 1.0, 0.5, 1.0), InvalidInput);
}

namespace {

template <class F>
void sweep_floor(F&& visit) {
  for (int i = 1; i < 300; ++i) {
    const double q = 1 - std::pow(10.0, -i / 20.0);
    for (int j = 0; j < 400; ++j) {
      const double qp = q * j / 400;
      for (double alpha : {0.0, 0.1, 0.2, 0.25, 0.26, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        if (1 - qp < std::pow(1 - q, alpha)) continue;
        visit(qp, q, alpha);
      }
    }
  }
}

}  // namespace

TEST_CASE("chernoff floor with C = 1/(1 - alpha) never exceeds the rate") {
  int points = 0;
  sweep_floor([&](double qp, double q, double alpha) {
    ++points;
    CHECK(chernoff_rate_floor(qp, q, alpha, 1 / (1 - alpha)) <= chernoff_rate(qp, q) + 1e-12);
  });
  CHECK(points > 100000);
}

TEST_CASE("chernoff floor with C = 1 + 1/e holds only for small alpha") {
  const double C = 1 + 1 / std::numbers::e;
  const double alpha_max = 1 - std::numbers::e / (std::numbers::e + 1);
  int points = 0;
  sweep_floor([&](double qp, double q, double alpha) {
    if (alpha > alpha_max) return;
    ++points;
    CHECK(chernoff_rate_floor(qp, q, alpha, C) <= chernoff_rate(qp, q) + 1e-12);
  });
  CHECK(points > 50000);
  // At alpha = 1/2 the constant is too small.
  const double qp = 0.8734, q = 0.98415;
  REQUIRE(1 - qp >= std::sqrt(1 - q));
  CHECK(chernoff_rate_floor(qp, q, 0.5, C) > chernoff_rate(qp, q) + 1e-3);
}

TEST_CASE("scale sequence") {
  const ScaleSequence q = make_scale_sequence(3, 1, 1.5, 1.8, 1, 0.5, 6);
  CHECK(q.a == doctest::Approx((2 - 1.8) / 1.8));
  CHECK(q.depth() == 6);
  CHECK(q.ell.size() == 7);
  CHECK(q.ell[0] >= 3);
  for (int n = 1; n <= q.depth(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    CHECK(q.N[i] / q.N[i - 1] == q.ell[i - 1]);
  }
  // 6 ell^{d - s} > 1 at ell = 3, s = 1.5.
  CHECK_FALSE(q.rho_positive);

  const ScaleSequence big = make_scale_sequence(1000, 1, 1.9, 1.95, 1, 0.5, 8);
  CHECK(big.rho_positive);
  for (std::size_t i = 1; i < big.rho.size(); ++i) {
    CHECK(big.rho[i] <= big.rho[i - 1]);
    CHECK(big.rho[i] > 0);
  }
  CHECK(q.c0 == *std::min_element(q.c0_terms.begin(), q.c0_terms.end()));

  for (double sp : {1.2, 1.5, 1.9}) {
    for (int d : {1}) {
      const ScaleSequence t = make_scale_sequence(1, 1, 1.1, sp, d, 0.5, 12);
      // With ell_1 = e the term telescopes to e^{-s'}.
      REQUIRE(t.shift == 0);
      for (double term : t.c0_terms_exact) CHECK(std::abs(term - std::exp(-sp)) <= 1e-9 * std::exp(-sp));
    }
  }
  const ScaleSequence t2 = make_scale_sequence(10, 4, 2.5, 3.2, 2, 0.9, 10);
  // Starting further along the sequence rescales the constant to e^{-s' (1 + a)^shift}.
  CHECK(t2.shift > 0);
  const double c2 = std::exp(-3.2 * std::pow(1 + t2.a, t2.shift));
  for (double term : t2.c0_terms_exact) CHECK(std::abs(term - c2) <= 1e-9 * c2);

  CHECK_THROWS_AS(make_scale_sequence(3, 1, 1.5, 1.4, 1, 0.5, 6), InvalidInput);
  CHECK_THROWS_AS(make_scale_sequence(3, 1, 1.5, 2.0, 1, 0.5, 6), InvalidInput);
  CHECK_THROWS_AS(make_scale_sequence(2.5, 1, 1.5, 1.8, 1, 0.5, 6), InvalidInput);
  CHECK_THROWS_AS(make_scale_sequence(3, 1, 1.5, 1.8, 1, 1.0, 6), InvalidInput);
  CHECK_THROWS_AS(make_scale_sequence(3, 1, 1.5, 1.8, 1, 0.5, 0), InvalidInput);
}

TEST_CASE("complete graph trivial cases") {
  CHECK(complete_graph_sample({10, 0, 0.5, 0, 0}, 1).largest == 0);
  CHECK(complete_graph_sample({10, 1, 1, 0, 0}, 1).largest == 10);
  const auto o = complete_graph_sample({10, 1, 0, 0, 0}, 1);
  CHECK(o.largest == 1);
  CHECK(o.occupied == 10);
  CHECK(o.vacant_pairs == 45);
  CHECK(complete_graph_sample({50, 0.6, 0.2, 0, 0}, 9).largest == complete_graph_sample({50, 0.6, 0.2, 0, 0}, 9).largest);
  CHECK_THROWS_AS(complete_graph_sample({0, 0.5, 0.5, 0, 0}, 1), InvalidInput);
}

TEST_CASE("complete graph exact distribution against full enumeration") {
  for (std::uint64_t n = 1; n <= 5; ++n) {
    for (auto [r, p] : {std::pair{0.9, 0.3}, std::pair{0.5, 0.5}, std::pair{0.2, 0.8}}) {
      const CompleteGraphParams c{n, r, p, 0, 0};
      const auto got = complete_graph_exact_distribution(c);
      const auto want = enumerate_complete_graph(c);
      REQUIRE(got.size() == want.size());
      double total = 0;
      for (std::size_t k = 0; k < got.size(); ++k) {
        CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
        total += got[k];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  const CompleteGraphParams six{6, 0.7, 0.4, 0, 0};
  const auto got = complete_graph_exact_distribution(six);
  const auto want = enumerate_complete_graph(six);
  for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
  CHECK_THROWS_AS(complete_graph_exact_distribution({7, 0.5, 0.5, 0, 0}), InvalidInput);
}

TEST_CASE("complete graph samples follow the exact law") {
  const CompleteGraphParams c{5, 0.8, 0.35, 0, 0};
  const auto exact = complete_graph_exact_distribution(c);
  std::vector<double> freq(exact.size(), 0);
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) freq[complete_graph_sample(c, 1000 + static_cast<std::uint64_t>(t)).largest] += 1.0 / trials;
  double tv = 0;
  for (std::size_t k = 0; k < exact.size(); ++k) tv += 0.5 * std::abs(freq[k] - exact[k]);
  CHECK(tv < 0.01);
}

TEST_CASE("complete graph tail bound") {
  const CompleteGraphParams ref{100, 0.9, 0.3, 0.7, 0.15};
  const double b = complete_graph_tail_bound(ref);
  const double want = std::exp(-100 * oracle::kl(0.7, 0.9)) + std::exp(-0.5 * (100.0 * 100 * 0.49 - 100) * oracle::kl(0.15, 0.3));
  CHECK(b == doctest::Approx(want).epsilon(1e-12));
  CHECK(complete_graph_tail_bound({100, 0.9, 0.3, 0.9, 0.15}) >= 1.0);
  CHECK(complete_graph_tail_bound({1, 0.9, 0.3, 0.5, 0.15}) >= 1.0);
  CHECK_THROWS_AS(complete_graph_tail_bound({100, 0.5, 0.3, 0.7, 0.15}), InvalidInput);
  CHECK_THROWS_AS(complete_graph_tail_bound({100, 0.9, 0.3, 0.7, 0.45}), InvalidInput);

  for (double rp : {0.2, 0.5}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 50; ++i) {
      const double r = rp + (1 - rp) * i / 50.0;
      const double v = complete_graph_tail_bound({60, r, 0.4, rp, 0.2});
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("shell sums") {
  CHECK(shell_sum({1, 1.5, 1, ShellMode::below}) == 1.0);
  CHECK(shell_sum({2, 2, 1, ShellMode::below}) == 5.0);
  CHECK(shell_sum({1, 2, 1, ShellMode::at_least}) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6 - 1).epsilon(1e-9));
  CHECK_THROWS_AS(shell_sum({1, 2, 0, ShellMode::at_least}), InvalidInput);
  CHECK_THROWS_AS(shell_sum({0, 2, 1, ShellMode::below}), InvalidInput);

  for (int kappa = 1; kappa <= 3; ++kappa) {
    for (double b : {1.5, 2.0, 3.0, 4.0, 5.5, 8.0}) {
      CHECK(static_cast<double>(shell_count_below(kappa, b)) == brute_below(kappa, b, 0));
      CHECK(shell_sum({kappa, b, 1, ShellMode::below}) == brute_below(kappa, b, 0));
      for (double alpha : {0.5, 2.0}) {
        CHECK(shell_sum({kappa, b, alpha, ShellMode::below}) == doctest::Approx(brute_below(kappa, b, alpha - 1)).epsilon(1e-12));
        const double full = std::pow(static_cast<double>(boost::math::zeta(oracle::Big(1 + alpha))), kappa);
        CHECK(shell_sum({kappa, b, alpha, ShellMode::at_least}) ==
              doctest::Approx(full - brute_below(kappa, b, -(1 + alpha))).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("shell bound right-hand sides") {
  CHECK(shell_bound_rhs({1, std::numbers::e, 1, ShellMode::at_least}, 1) == doctest::Approx(1 / std::numbers::e));
  CHECK(shell_bound_rhs({2, 4, 1, ShellMode::below}, 1) == doctest::Approx(std::pow(4 * std::log(4.0), 2)));
  double prev = 0;
  for (double g = 0.5; g < 5; g += 0.5) {
    const double v = shell_bound_rhs({2, 3, 0.5, ShellMode::at_least}, g);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(shell_bound_rhs({1, 1.0, 1, ShellMode::at_least}, 1), InvalidInput);
  CHECK_THROWS_AS(shell_bound_rhs({1, 0.5, 1, ShellMode::below}, 1), InvalidInput);
}

TEST_CASE("gap exponent inequality") {
  const auto one = gap_exponent_inequality(1.5, 1, 0.5, 1);
  CHECK(one.lhs == one.rhs);
  CHECK(one.lhs == doctest::Approx(0.5));
  CHECK(gap_exponent_inequality(1.5, 1, 0.5, 3).holds);
  CHECK_THROWS_AS(gap_exponent_inequality(1.0, 1, 0.3, 2), InvalidInput);
  CHECK_THROWS_AS(gap_exponent_inequality(1.5, 1, 0.8, 2), InvalidInput);
  CHECK_THROWS_AS(gap_exponent_inequality(1.5, 1, 0.5, 0), InvalidInput);

  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int it = 0; it < 1000; ++it) {
    const int d = 1 + static_cast<int>(gen() % 3);
    const double s = d * (1 + u(gen));
    const double gamma = u(gen) * s / (2 * d);
    const int n = 1 + static_cast<int>(gen() % 12);
    const auto r = gap_exponent_inequality(s, d, gamma, n);
    CHECK(r.holds);
    if (n == 1) CHECK(r.lhs == r.rhs);
  }
}
