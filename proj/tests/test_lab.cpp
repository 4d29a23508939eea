#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lrp/errors.hpp"
#include "lrp/lab.hpp"

using namespace lrp;

namespace {

ExperimentConfig base(double beta, double s, double nn) {
  ExperimentConfig c;
  c.model.dim = 1;
  c.model.profile = ConnectionProfile::shifted_power(beta, s);
  c.model.nn_prob = nn;
  return c;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

double row_value(const Report& r, Coord side, const std::string& q, std::uint64_t trial = 0) {
  for (const auto& row : r.rows) {
    if (row.side == side && row.quantity == q && row.trial == trial) return row.value;
  }
  throw std::runtime_error("row not found: " + q);
}

}  // namespace

TEST_CASE("least squares fits") {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.ok);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-12));
  for (double r : f.residuals) CHECK(std::abs(r) < 1e-12);
  CHECK_FALSE(fit_line({0, 1}, {0, 1}).ok);

  std::vector<double> r, D;
  for (int k = 4; k <= 20; k += 2) {
    r.push_back(std::ldexp(1.0, k));
    D.push_back(std::pow(std::log(r.back()), 2));
  }
  const auto g = fit_loglog(r, D);
  CHECK(g.ok);
  CHECK(std::abs(g.slope - 2) < 1e-9);
  CHECK_THROWS_AS(fit_loglog({2, 3, 100}, {1, 1, 1}), InvalidInput);
  CHECK_THROWS_AS(fit_loglog({20, 30, 100}, {1, 0, 1}), InvalidInput);
}

TEST_CASE("estimators") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  const auto p = binomial_proportion(25, 100);
  CHECK(p.estimate == 0.25);
  CHECK(p.stderr_ == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
  CHECK(binomial_proportion(0, 10).stderr_ == 0);
}

TEST_CASE("trial seeds are stable and distinct") {
  CHECK(trial_seed(1, "x", 8, 0) == trial_seed(1, "x", 8, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m : {1u, 2u}) {
    for (const char* e : {"a", "b"}) {
      for (std::int64_t side : {8, 16}) {
        for (std::uint64_t t = 0; t < 50; ++t) seen.insert(trial_seed(m, e, side, t));
      }
    }
  }
  CHECK(seen.size() == 400);
}

TEST_CASE("default seed reads the environment") {
  ::unsetenv("LRP_SEED");
  CHECK(default_seed() == 1);
  ::setenv("LRP_SEED", "12345", 1);
  CHECK(default_seed() == 12345);
  ::setenv("LRP_SEED", "abc", 1);
  CHECK_THROWS_AS(default_seed(), InvalidInput);
  ::unsetenv("LRP_SEED");
}

TEST_CASE("parallel_for visits every index once and propagates errors") {
  for (int threads : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](std::size_t i) {
                                 if (i == 37) throw InvalidInput("boom");
                               }),
                  InvalidInput);
  CHECK_NOTHROW(parallel_for(0, 4, [](std::size_t) {}));
}

TEST_CASE("config validation and serialisation") {
  ExperimentConfig c = base(1, 1.5, 0.5);
  c.sides = {16, 32};
  CHECK_NOTHROW(c.validate());
  CHECK(c.effective_sprime() == 1.75);
  const auto j = c.to_json();
  CHECK_FALSE(j.contains("threads"));
  CHECK(j["model"]["s"] == 1.5);
  CHECK(j["sides"].size() == 2);

  ExperimentConfig bad = c;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = c;
  bad.sides = {32, 16};
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = c;
  bad.ell = 4;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("cluster fraction on trivial models") {
  ExperimentConfig full = base(0, 1.5, 1.0);
  full.sides = {8, 16};
  full.trials = 3;
  const Report r = run_cluster_fraction(full);
  CHECK(r.experiment == "cluster-fraction");
  CHECK(r.rows.size() == 2 * 3 * 2);
  CHECK(row_value(r, 16, "largest_fraction", 2) == 1.0);
  CHECK(r.summary[0]["below_count"] == 0);

  ExperimentConfig empty = base(0, 1.5, 0.0);
  empty.sides = {10};
  empty.trials = 2;
  const Report e = run_cluster_fraction(empty);
  CHECK(row_value(e, 10, "largest_fraction") == doctest::Approx(0.1));
  CHECK(row_value(e, 10, "below_rho") == 1.0);
  CHECK(e.summary[0]["p_below"] == 1.0);
}

TEST_CASE("report formats") {
  ExperimentConfig c = base(1, 1.5, 0.5);
  c.sides = {8};
  c.trials = 2;
  Report r = run_cluster_fraction(c);
  const auto j = nlohmann::ordered_json::parse(r.json_text());
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"schema_version", "experiment", "config", "pass", "summary", "bounds",
                                         "warnings", "rows"});
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["rows"].size() == r.rows.size());

  const std::string csv = r.csv_text();
  CHECK(csv.rfind("# lrp-report csv schema_version=1 experiment=cluster-fraction\ntrial,seed,side,quantity,value\n", 0) == 0);
  CHECK(count_lines(csv) == 2 + r.rows.size());

  r.include_timing = true;
  r.wall_seconds = 1.5;
  CHECK(nlohmann::ordered_json::parse(r.json_text())["wall_seconds"] == 1.5);
}

TEST_CASE("distance scaling on a nearest-neighbour chain") {
  ExperimentConfig c = base(0, 1.5, 1.0);
  c.trials = 2;
  const auto d = run_distance_scaling(c, {16, 32, 64, 128});
  REQUIRE(d.used.size() == 4);
  for (std::size_t i = 0; i < d.used.size(); ++i) CHECK(d.median_D[i] == d.used[i]);
  CHECK(d.fit.ok);
  CHECK(d.reference_delta == doctest::Approx(delta(1.5, 1)));
  CHECK(d.report.pass);

  // Without any bonds nothing is connected: every distance is dropped.
  ExperimentConfig none = base(0, 1.5, 0.0);
  none.trials = 2;
  const auto n = run_distance_scaling(none, {16, 32, 64});
  CHECK(n.used.empty());
  CHECK_FALSE(n.fit.ok);
  CHECK_FALSE(n.report.pass);
  CHECK_FALSE(n.report.warnings.empty());

  CHECK_THROWS_AS(run_distance_scaling(c, {32, 16, 64}), InvalidInput);
}

TEST_CASE("dense density") {
  ExperimentConfig c = base(0, 1.5, 1.0);
  c.sides = {16};
  c.trials = 2;
  c.ell = 5;
  c.rho = 0.5;
  const Report r = run_dense_density(c);
  CHECK(row_value(r, 16, "dense_fraction") == 1.0);
  CHECK(row_value(r, 16, "below_rho") == 0.0);

  c.model.nn_prob = 0;
  const Report e = run_dense_density(c);
  CHECK(row_value(e, 16, "dense_fraction") == 0.0);
}

TEST_CASE("complete graph check") {
  const Report full = run_complete_graph_check({20, 1, 1, 0.7, 0.15}, 50, 3);
  CHECK(full.pass);
  for (const auto& row : full.rows) {
    if (row.quantity == "largest") CHECK(row.value == 20);
  }
  const Report small = run_complete_graph_check({5, 0.8, 0.4, 0.5, 0.2}, 2000, 3);
  CHECK(small.pass);
  CHECK(small.bounds.dump().find("total_variation") != std::string::npos);
}

TEST_CASE("block renormalisation") {
  ExperimentConfig c = base(1, 1.5, 0.5);
  c.sides = {27};
  c.trials = 3;
  const Report r = run_block_renorm(c, 3, 0.5);
  CHECK(r.experiment == "block-renorm");
  CHECK_FALSE(r.rows.empty());

  c.sides = {28};
  CHECK_THROWS_AS(run_block_renorm(c, 3, 0.5), InvalidInput);
  c.sides = {32};
  CHECK_THROWS_AS(run_block_renorm(c, 4, 0.5), InvalidInput);

  ExperimentConfig cc = base(1, 1.5, 0.5);
  cc.sides = {27};
  cc.trials = 3;
  cc.coupled_betas = {0.5, 1.0, 2.0};
  const Report coupled = run_block_renorm(cc, 3, 0.5);
  CHECK(coupled.pass);
}

TEST_CASE("hierarchy audit runner") {
  ExperimentConfig c = base(2, 1.5, 0.9);
  c.trials = 3;
  c.gamma = 0.8;
  const Report r = run_hierarchy_audit(c, {32, 64});
  CHECK(r.pass);
  CHECK_THROWS_AS(run_hierarchy_audit(c, {8, 64}), InvalidInput);
}

TEST_CASE("reports are identical at 1 and 8 workers") {
  ExperimentConfig c = base(1, 1.5, 0.6);
  c.sides = {32, 64};
  c.trials = 6;
  c.seed = 99;
  auto at = [&](int threads, auto&& fn) {
    ExperimentConfig k = c;
    k.threads = threads;
    return fn(k);
  };
  auto cf = [](const ExperimentConfig& k) { return run_cluster_fraction(k); };
  auto dd = [](const ExperimentConfig& k) { return run_dense_density(k); };
  auto ds = [](const ExperimentConfig& k) { return run_distance_scaling(k, {16, 32, 64}).report; };
  auto br = [](ExperimentConfig k) {
    k.sides = {27};
    return run_block_renorm(k, 3, 0.5);
  };
  auto ha = [](const ExperimentConfig& k) { return run_hierarchy_audit(k, {32, 64}); };
  CHECK(at(1, cf).json_text() == at(8, cf).json_text());
  CHECK(at(1, cf).csv_text() == at(8, cf).csv_text());
  CHECK(at(1, dd).json_text() == at(8, dd).json_text());
  CHECK(at(1, ds).json_text() == at(8, ds).json_text());
  CHECK(at(1, br).json_text() == at(8, br).json_text());
  CHECK(at(1, ha).json_text() == at(8, ha).json_text());
  CHECK(run_complete_graph_check({30, 0.9, 0.3, 0.7, 0.15}, 200, 5, 1).json_text() ==
        run_complete_graph_check({30, 0.9, 0.3, 0.7, 0.15}, 200, 5, 8).json_text());

  ExperimentConfig other = c;
  other.seed = 100;
  CHECK(run_cluster_fraction(other).json_text() != run_cluster_fraction(c).json_text());
}
