#pragma once

// Experiment orchestration: seeded trials over a worker pool, estimators, and
// schema-versioned JSON / CSV reports.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrp/bondspace.hpp"
#include "lrp/theory.hpp"

namespace lrp {

inline constexpr int kReportSchemaVersion = 1;

struct ExperimentConfig {
  BondModel model;
  std::vector<Coord> sides;
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  double rho = 0.3;
  double delta = 0.5;
  Coord ell = 5;
  double gamma = 0.9;
  double sprime = 0;        // 0 picks (s + 2d) / 2
  double box_factor = 4;    // distance experiments: box side = box_factor |x|
  int threads = 1;
  std::size_t memory_budget_bytes = std::size_t{8} << 30;
  std::vector<double> coupled_betas;  // block renormalization under coupled sampling
  double exponent = -1;               // hierarchy regularity exponent; < 0 picks Delta(s, d)
  std::string out_json;
  std::string out_csv;

  void validate() const;
  double effective_sprime() const;
  nlohmann::ordered_json to_json() const;
};

struct TrialRow {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::int64_t side = 0;
  std::string quantity;
  double value = 0;
};

struct Report {
  std::string experiment;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<TrialRow> rows;  // sorted by (side, trial, quantity order of emission)
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  nlohmann::ordered_json bounds = nlohmann::ordered_json::array();
  std::vector<std::string> warnings;
  bool pass = true;             // only meaningful for experiments with a check
  double wall_seconds = 0;
  bool include_timing = false;  // timing breaks byte-identity, so it is opt-in

  nlohmann::ordered_json to_json() const;
  std::string json_text() const;
  std::string csv_text() const;
};

// Stable per-trial seed; independent of worker count and scheduling.
std::uint64_t trial_seed(std::uint64_t master, std::string_view experiment, std::int64_t side, std::uint64_t trial);
std::uint64_t default_seed();  // LRP_SEED or 1

// Runs fn(i) for i in [0, n) over `threads` workers. Callers write results by index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct Proportion {
  double estimate = 0;
  double stderr_ = 0;
};
Proportion binomial_proportion(std::uint64_t hits, std::uint64_t n);
double median(std::vector<double> v);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  std::vector<double> residuals;
  bool ok = false;
};
// Ordinary least squares y = intercept + slope x; needs at least 3 points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Slope of log(D) against log log |x|.
LineFit fit_loglog(const std::vector<double>& distances, const std::vector<double>& medians);

struct DeltaEstimate {
  std::vector<double> distances;      // all requested
  std::vector<double> used;           // kept for the fit
  std::vector<double> median_D;       // per used distance
  std::vector<double> dropped_fraction;  // per requested distance
  std::vector<std::uint64_t> connected;  // per requested distance
  LineFit fit;
  double slope = 0;
  double reference_delta = 0;
  double box_factor = 4;
  Report report;
};

Report run_cluster_fraction(const ExperimentConfig& config);
DeltaEstimate run_distance_scaling(const ExperimentConfig& config, const std::vector<double>& distances);
Report run_dense_density(const ExperimentConfig& config);
Report run_complete_graph_check(const CompleteGraphParams& params, std::uint64_t trials, std::uint64_t seed,
                                int threads = 1);
Report run_block_renorm(const ExperimentConfig& config, Coord K, double delta);
Report run_hierarchy_audit(const ExperimentConfig& config, const std::vector<double>& distances);

std::vector<double> default_distances(int dim, std::size_t memory_budget_bytes);

int cli_main(int argc, const char* const* argv);

}  // namespace lrp
