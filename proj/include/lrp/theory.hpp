#pragma once

// Closed-form quantities and bound calculators.

#include <cstdint>
#include <vector>

namespace lrp {

// log 2 / log(2d/s). s = d gives the limit 1; s >= 2d throws DivergenceError.
double delta(double s, int d);

// log log N / log(1/gamma).
double depth_K(double N, double gamma);
// Largest n >= 0 with n log(1/gamma) <= log log N - eps log log log N. Needs N > e^e.
int depth_n(double N, double gamma, double eps);

// Large-deviation rate for Bernoulli(q) sample means falling to q' (relative
// entropy of q' from q). Zero for q' >= q; +inf for q = 1 > q'.
double chernoff_rate(double qprime, double q);
// (1 - alpha)(1 - q')[log(1/(1 - q)) - C], needing 1 - q' >= (1 - q)^alpha.
double chernoff_rate_floor(double qprime, double q, double alpha, double C);

struct ScaleSequence {
  double ell0 = 0;
  double N0 = 0;
  double s = 0;
  double sprime = 0;
  int d = 1;
  double rho0 = 0;
  double a = 0;          // (2d - s') / s'
  int shift = 0;         // ell_n = round(exp((1 + a)^(n - 1 + shift)))
  // Index n - 1 holds level n for n = 1..depth+1 (one extra level feeds c0).
  std::vector<double> log_ell_exact;  // (1 + a)^(n - 1 + shift)
  std::vector<double> ell;            // rounded
  // Index n holds level n for n = 0..depth.
  std::vector<double> N;              // N_0 prod ell_k; exact while below 2^53
  std::vector<double> log_N;
  std::vector<double> r;              // index n - 1: 1 - 6 ell_n^(d - s)
  std::vector<double> p;              // index n - 1: 1 - N_n^(s - s')
  std::vector<double> rho;            // index n: rho_0 prod_{k<=n} r_k p_k
  std::vector<double> c0_terms;       // index n - 1: ell_{n+1}^-s' prod_{k<=n} ell_k^(2d - s'), rounded ell
  std::vector<double> c0_terms_exact; // same with un-rounded ell
  double c0 = 0;                       // min of c0_terms
  bool N_exact = true;                 // every N_n below 2^53
  bool rho_positive = true;

  int depth() const noexcept { return static_cast<int>(N.size()) - 1; }
};

ScaleSequence make_scale_sequence(double ell0, double N0, double s, double sprime, int d, double rho0, int depth);

struct CompleteGraphParams {
  std::uint64_t n = 1;
  double r = 1;
  double p = 1;
  double rprime = 0;
  double pprime = 0;
};

struct CompleteGraphOutcome {
  std::uint64_t largest = 0;   // occupied sites in the largest occupied-bond component
  std::uint64_t occupied = 0;
  std::uint64_t vacant_pairs = 0;  // pairs of occupied sites without a bond
};

CompleteGraphOutcome complete_graph_sample(const CompleteGraphParams& params, std::uint64_t seed);
// P(|C_n| = k) for k = 0..n by summing over occupied sets and their induced bond
// configurations; n <= 6.
std::vector<double> complete_graph_exact_distribution(const CompleteGraphParams& params);
// e^{-n psi(r', r)} + e^{-(n^2 r'^2 - n) psi(p', p) / 2}; may exceed 1.
double complete_graph_tail_bound(const CompleteGraphParams& params);

enum class ShellMode { at_least, below };

struct ShellSumSpec {
  int kappa = 1;
  double b = 2;
  double alpha = 1;
  ShellMode mode = ShellMode::at_least;
};

// at_least: sum over prod n_i >= b^kappa of prod n_i^-(1 + alpha).
// below:    sum over prod n_i <  b^kappa of prod n_i^(alpha - 1).
double shell_sum(const ShellSumSpec& spec);
// Number of tuples with prod n_i < b^kappa.
std::uint64_t shell_count_below(int kappa, double b);
// at_least: (g b^-alpha log b)^kappa; below: (g b^alpha log b)^kappa.
double shell_bound_rhs(const ShellSumSpec& spec, double g);

struct GapExponentInequality {
  double lhs = 0;
  double rhs = 0;
  bool holds = false;  // lhs >= rhs up to 1e-12 relative
};

// lhs = s - d(2g)^n + (s - d) sum_{k=1}^{n-1} (2g)^k against rhs = (s - 2dg)(2g)^(n-1).
GapExponentInequality gap_exponent_inequality(double s, int d, double gamma, int n);

}  // namespace lrp
