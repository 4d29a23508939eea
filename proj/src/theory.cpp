#include "lrp/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "lrp/clusters.hpp"
#include "lrp/errors.hpp"
#include "lrp/random.hpp"

namespace lrp {

namespace {

void check_probability(double x, const char* name) {
  if (!(x >= 0 && x <= 1)) throw InvalidInput(std::string(name) + " must be a probability in [0, 1]");
}

}  // namespace

double delta(double s, int d) {
  if (d < 1) throw InvalidInput("dimension must be a positive integer");
  if (!(s > 0) || !std::isfinite(s)) throw InvalidInput("s must be a positive finite real");
  if (s >= 2.0 * d) throw DivergenceError("Delta diverges as s approaches 2d from below; got s >= 2d");
  if (s == static_cast<double>(d)) return 1.0;
  return std::log(2.0) / std::log(2.0 * d / s);
}

double depth_K(double N, double gamma) {
  if (!(N > std::exp(1.0)) || !std::isfinite(N)) throw InvalidInput("N must exceed e");
  if (!(gamma > 0 && gamma < 1)) throw InvalidInput("gamma must be in (0, 1)");
  return std::log(std::log(N)) / std::log(1.0 / gamma);
}

int depth_n(double N, double gamma, double eps) {
  if (!(N > std::exp(std::exp(1.0))) || !std::isfinite(N)) throw InvalidInput("N must exceed e^e");
  if (!(gamma > 0 && gamma < 1)) throw InvalidInput("gamma must be in (0, 1)");
  if (!(eps >= 0) || !std::isfinite(eps)) throw InvalidInput("epsilon must be nonnegative");
  const double ll = std::log(std::log(N));
  const double budget = ll - eps * std::log(ll);
  const double step = std::log(1.0 / gamma);
  if (budget < step) return 0;
  auto n = static_cast<int>(std::floor(budget / step));
  while (n > 0 && n * step > budget) --n;
  while ((n + 1) * step <= budget) ++n;
  return n;
}

double chernoff_rate(double qprime, double q) {
  check_probability(qprime, "q'");
  check_probability(q, "q");
  if (qprime >= q) return 0.0;
  if (q == 1.0) return std::numeric_limits<double>::infinity();
  // (1 - q') log((1 - q')/(1 - q)) + q' log(q'/q), with 0 log 0 = 0
  double first = (1 - qprime) * (std::log1p(-qprime) - std::log1p(-q));
  double second = qprime > 0 ? qprime * std::log(qprime / q) : 0.0;
  return std::max(0.0, first + second);
}

double chernoff_rate_floor(double qprime, double q, double alpha, double C) {
  check_probability(qprime, "q'");
  check_probability(q, "q");
  if (!(alpha >= 0 && alpha < 1)) throw InvalidInput("alpha must be in [0, 1)");
  if (!std::isfinite(C)) throw InvalidInput("C must be finite");
  if (q == 1.0) throw InvalidInput("floor is undefined at q = 1");
  const double lhs = std::log1p(-qprime);
  const double rhs = alpha * std::log1p(-q);
  if (lhs < rhs - 1e-15 * std::abs(rhs)) throw InvalidInput("floor needs 1 - q' >= (1 - q)^alpha");
  return (1 - alpha) * (1 - qprime) * (-std::log1p(-q) - C);
}

ScaleSequence make_scale_sequence(double ell0, double N0, double s, double sprime, int d, double rho0, int depth) {
  if (d < 1) throw InvalidInput("dimension must be a positive integer");
  if (!(ell0 >= 1) || ell0 != std::floor(ell0)) throw InvalidInput("ell0 must be a positive integer");
  if (!(N0 >= 1) || N0 != std::floor(N0)) throw InvalidInput("N0 must be a positive integer");
  if (!(s > 0)) throw InvalidInput("s must be positive");
  if (!(sprime > s && sprime < 2.0 * d)) throw InvalidInput("s' must lie in (s, 2d)");
  if (!(rho0 > 0 && rho0 < 1)) throw InvalidInput("rho0 must be in (0, 1)");
  if (depth < 1 || depth > 64) throw InvalidInput("depth must be in [1, 64]");
  ScaleSequence q;
  q.ell0 = ell0;
  q.N0 = N0;
  q.s = s;
  q.sprime = sprime;
  q.d = d;
  q.rho0 = rho0;
  q.a = (2.0 * d - sprime) / sprime;
  const double g = 1 + q.a;
  while (std::round(std::exp(std::pow(g, q.shift))) < ell0) ++q.shift;
  for (int n = 1; n <= depth + 1; ++n) {
    const double le = std::pow(g, n - 1 + q.shift);
    q.log_ell_exact.push_back(le);
    q.ell.push_back(std::round(std::exp(le)));
  }
  q.N.push_back(N0);
  q.log_N.push_back(std::log(N0));
  q.rho.push_back(rho0);
  for (int n = 1; n <= depth; ++n) {
    const double l = q.ell[static_cast<std::size_t>(n - 1)];
    q.N.push_back(q.N.back() * l);
    q.log_N.push_back(q.log_N.back() + std::log(l));
    if (!(q.N.back() < 9007199254740992.0)) q.N_exact = false;
    q.r.push_back(1 - 6 * std::exp((d - s) * std::log(l)));
    q.p.push_back(1 - std::exp((s - sprime) * q.log_N.back()));
    q.rho.push_back(q.rho.back() * q.r.back() * q.p.back());
    if (!(q.rho.back() > 0)) q.rho_positive = false;
  }
  double log_prod = 0, log_prod_exact = 0;
  for (int n = 1; n <= depth; ++n) {
    const auto i = static_cast<std::size_t>(n - 1);
    log_prod += (2.0 * d - sprime) * std::log(q.ell[i]);
    log_prod_exact += (2.0 * d - sprime) * q.log_ell_exact[i];
    q.c0_terms.push_back(std::exp(log_prod - sprime * std::log(q.ell[i + 1])));
    q.c0_terms_exact.push_back(std::exp(log_prod_exact - sprime * q.log_ell_exact[i + 1]));
  }
  q.c0 = *std::min_element(q.c0_terms.begin(), q.c0_terms.end());
  return q;
}

namespace {

void check_params(const CompleteGraphParams& c) {
  if (c.n < 1) throw InvalidInput("complete graph needs at least one vertex");
  if (c.n > (std::uint64_t{1} << 31)) throw InvalidInput("complete graph is limited to 2^31 vertices");
  check_probability(c.r, "r");
  check_probability(c.p, "p");
  check_probability(c.rprime, "r'");
  check_probability(c.pprime, "p'");
}

}  // namespace

CompleteGraphOutcome complete_graph_sample(const CompleteGraphParams& params, std::uint64_t seed) {
  check_params(params);
  SplitMix64 rng(hash_words(seed, {0x636f6d706c657465ULL}));
  std::uint64_t occupied = 0;
  if (params.r >= 1) {
    occupied = params.n;
  } else if (params.r > 0) {
    const double l = std::log1p(-params.r);
    for (std::uint64_t pos = geometric_skip(rng, l); pos < params.n; pos += 1 + geometric_skip(rng, l)) ++occupied;
  }
  CompleteGraphOutcome out;
  out.occupied = occupied;
  if (occupied == 0) return out;
  const auto A = static_cast<std::uint32_t>(occupied);
  DisjointSets ds(A);
  std::uint64_t bonds = 0;
  if (params.p >= 1) {
    for (std::uint32_t i = 1; i < A; ++i) ds.unite(0, i);
    bonds = static_cast<std::uint64_t>(A) * (A - 1) / 2;
  } else if (params.p > 0) {
    const double l = std::log1p(-params.p);
    // Skips restart per row; geometric gaps are memoryless so the law is unchanged.
    for (std::uint32_t i = 0; i + 1 < A; ++i) {
      const std::uint64_t row = A - 1 - i;
      for (std::uint64_t pos = geometric_skip(rng, l); pos < row; pos += 1 + geometric_skip(rng, l)) {
        ds.unite(i, static_cast<std::uint32_t>(i + 1 + pos));
        ++bonds;
      }
    }
  }
  for (std::uint32_t i = 0; i < A; ++i) out.largest = std::max<std::uint64_t>(out.largest, ds.size_of(i));
  out.vacant_pairs = static_cast<std::uint64_t>(A) * (A - 1) / 2 - bonds;
  return out;
}

std::vector<double> complete_graph_exact_distribution(const CompleteGraphParams& params) {
  check_params(params);
  if (params.n > 6) throw InvalidInput("exact distribution is limited to n <= 6");
  const int n = static_cast<int>(params.n);
  std::vector<double> dist(static_cast<std::size_t>(n + 1), 0.0);
  // Distribution of the largest component among k occupied vertices, by bond subsets.
  std::vector<std::vector<double>> by_k(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) {
    auto& row = by_k[static_cast<std::size_t>(k)];
    row.assign(static_cast<std::size_t>(k + 1), 0.0);
    if (k == 0) {
      row[0] = 1;
      continue;
    }
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
    const auto m = pairs.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      DisjointSets ds(static_cast<std::size_t>(k));
      const int e = std::popcount(mask);
      for (std::size_t b = 0; b < m; ++b) {
        if (mask >> b & 1) ds.unite(static_cast<std::uint32_t>(pairs[b].first), static_cast<std::uint32_t>(pairs[b].second));
      }
      std::uint32_t big = 0;
      for (int i = 0; i < k; ++i) big = std::max(big, ds.size_of(static_cast<std::uint32_t>(i)));
      row[big] += std::pow(params.p, e) * std::pow(1 - params.p, static_cast<double>(m) - e);
    }
  }
  for (int k = 0; k <= n; ++k) {
    double choose = 1;
    for (int i = 0; i < k; ++i) choose = choose * (n - i) / (i + 1);
    const double w = choose * std::pow(params.r, k) * std::pow(1 - params.r, n - k);
    for (int c = 0; c <= k; ++c) dist[static_cast<std::size_t>(c)] += w * by_k[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
  }
  return dist;
}

double complete_graph_tail_bound(const CompleteGraphParams& params) {
  check_params(params);
  if (params.rprime > params.r) throw InvalidInput("bound needs r' <= r");
  if (params.pprime > params.p) throw InvalidInput("bound needs p' <= p");
  const auto n = static_cast<double>(params.n);
  const double first = std::exp(-n * chernoff_rate(params.rprime, params.r));
  const double coef = 0.5 * (n * n * params.rprime * params.rprime - n);
  const double psi = chernoff_rate(params.pprime, params.p);
  double second;
  if (std::isinf(psi)) {
    second = coef > 0 ? 0.0 : (coef < 0 ? std::numeric_limits<double>::infinity() : 1.0);
  } else {
    second = std::exp(-coef * psi);
  }
  return first + second;
}

namespace {

constexpr double kMaxShellBound = 1e9;

void check_shell(const ShellSumSpec& spec) {
  if (spec.kappa < 1 || spec.kappa > 16) throw InvalidInput("kappa must be in [1, 16]");
  if (!(spec.b > 0) || !std::isfinite(spec.b)) throw InvalidInput("b must be positive and finite");
  if (!std::isfinite(spec.alpha)) throw InvalidInput("alpha must be finite");
}

// Sum over tuples (n_1..n_k) with prefix * prod n_i < bound of prod n_i^e.
double below_sum(int k, double prefix, double bound, double e) {
  double acc = 0;
  for (double n = 1; prefix * n < bound; ++n) {
    const double w = e == 0 ? 1.0 : std::pow(n, e);
    acc += k == 1 ? w : w * below_sum(k - 1, prefix * n, bound, e);
  }
  return acc;
}

std::uint64_t below_count(int k, double prefix, double bound) {
  if (k == 1) {
    // n < bound / prefix; an integer count
    std::uint64_t c = 0;
    for (double n = 1; prefix * n < bound; ++n) ++c;
    return c;
  }
  std::uint64_t acc = 0;
  for (double n = 1; prefix * n < bound; ++n) acc += below_count(k - 1, prefix * n, bound);
  return acc;
}

}  // namespace

std::uint64_t shell_count_below(int kappa, double b) {
  check_shell({kappa, b, 1.0, ShellMode::below});
  const double bound = std::pow(b, kappa);
  if (bound > kMaxShellBound) throw InvalidInput("b^kappa too large for enumeration");
  return below_count(kappa, 1.0, bound);
}

double shell_sum(const ShellSumSpec& spec) {
  check_shell(spec);
  const double bound = std::pow(spec.b, spec.kappa);
  if (bound > kMaxShellBound) throw InvalidInput("b^kappa too large for enumeration");
  if (spec.mode == ShellMode::below) return below_sum(spec.kappa, 1.0, bound, spec.alpha - 1);
  if (!(spec.alpha > 0)) throw InvalidInput("the at-least sum diverges for alpha <= 0");
  // Full sum factorises into zeta(1 + alpha)^kappa; subtract the finite complement.
  const double full = std::pow(std::riemann_zeta(1 + spec.alpha), spec.kappa);
  return full - below_sum(spec.kappa, 1.0, bound, -(1 + spec.alpha));
}

double shell_bound_rhs(const ShellSumSpec& spec, double g) {
  check_shell(spec);
  if (!std::isfinite(g)) throw InvalidInput("g must be finite");
  if (spec.mode == ShellMode::at_least) {
    if (!(spec.b > 1)) throw InvalidInput("at-least bound needs b > 1");
    return std::pow(g * std::pow(spec.b, -spec.alpha) * std::log(spec.b), spec.kappa);
  }
  if (!(spec.b >= std::exp(1.0) / 4)) throw InvalidInput("below bound needs b >= e/4");
  return std::pow(g * std::pow(spec.b, spec.alpha) * std::log(spec.b), spec.kappa);
}

GapExponentInequality gap_exponent_inequality(double s, int d, double gamma, int n) {
  if (d < 1) throw InvalidInput("dimension must be a positive integer");
  if (!(s > d && s < 2.0 * d)) throw InvalidInput("s must lie in (d, 2d)");
  if (!(gamma > 0 && gamma < s / (2.0 * d))) throw InvalidInput("gamma must lie in (0, s/(2d))");
  if (n < 1) throw InvalidInput("n must be a positive integer");
  const double x = 2 * gamma;
  double sum = 0;
  for (int k = 1; k <= n - 1; ++k) sum += std::pow(x, k);
  GapExponentInequality r;
  r.lhs = s - d * std::pow(x, n) + (s - d) * sum;
  r.rhs = (s - 2.0 * d * gamma) * std::pow(x, n - 1);
  r.holds = r.lhs >= r.rhs - 1e-12 * std::max(1.0, std::abs(r.rhs));
  return r;
}

}  // namespace lrp
