#include "lrp/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "lrp/chemdist.hpp"
#include "lrp/clusters.hpp"
#include "lrp/errors.hpp"
#include "lrp/format.hpp"
#include "lrp/random.hpp"

namespace lrp {

using ojson = nlohmann::ordered_json;

void ExperimentConfig::validate() const {
  model.validate();
  if (trials < 1) throw InvalidInput("trials must be at least 1");
  if (!std::is_sorted(sides.begin(), sides.end())) throw InvalidInput("sides must be sorted ascending");
  for (Coord L : sides) {
    if (L < 1) throw InvalidInput("box sides must be positive");
  }
  if (!(gamma > 0 && gamma < 1)) throw InvalidInput("gamma must be in (0, 1)");
  if (!(rho > 0 && rho <= 1)) throw InvalidInput("rho must be in (0, 1]");
  if (!(delta >= 0 && delta <= 1)) throw InvalidInput("delta must be in [0, 1]");
  if (ell < 1 || ell % 2 == 0) throw InvalidInput("ell must be a positive odd integer");
  if (!(box_factor >= 1)) throw InvalidInput("box factor must be at least 1");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
  if (sprime != 0 && !(sprime > 0)) throw InvalidInput("s' must be positive");
}

double ExperimentConfig::effective_sprime() const {
  if (sprime > 0) return sprime;
  const double s = model.profile.kind() == ProfileKind::custom_table ? model.dim * 1.5 : model.profile.s();
  return 0.5 * (s + 2.0 * model.dim);
}

namespace {

ojson model_json(const BondModel& m) {
  ojson j;
  j["dim"] = m.dim;
  j["profile"] = std::string(to_string(m.profile.kind()));
  if (m.profile.kind() == ProfileKind::custom_table) {
    ojson t = ojson::array();
    for (const auto& [mag, q] : m.profile.table()) t.push_back({mag, q});
    j["table"] = t;
  } else {
    j["beta"] = m.profile.beta();
    j["s"] = m.profile.s();
  }
  j["nn_prob"] = m.nn_prob;
  j["norm"] = std::string(to_string(m.norm));
  return j;
}

}  // namespace

ojson ExperimentConfig::to_json() const {
  // The worker count is deliberately absent: it must not influence any output.
  ojson j;
  j["model"] = model_json(model);
  j["sides"] = sides;
  j["trials"] = trials;
  j["seed"] = seed;
  j["rho"] = rho;
  j["delta"] = delta;
  j["ell"] = ell;
  j["gamma"] = gamma;
  j["sprime"] = effective_sprime();
  j["box_factor"] = box_factor;
  if (!coupled_betas.empty()) j["coupled_betas"] = coupled_betas;
  if (exponent >= 0) j["exponent"] = exponent;
  return j;
}

ojson Report::to_json() const {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = experiment;
  j["config"] = config;
  j["pass"] = pass;
  j["summary"] = summary;
  j["bounds"] = bounds;
  j["warnings"] = warnings;
  ojson rs = ojson::array();
  for (const TrialRow& r : rows) {
    rs.push_back({{"trial", r.trial}, {"seed", r.seed}, {"side", r.side}, {"quantity", r.quantity}, {"value", r.value}});
  }
  j["rows"] = std::move(rs);
  if (include_timing) j["wall_seconds"] = wall_seconds;
  return j;
}

std::string Report::json_text() const { return to_json().dump(2) + "\n"; }

std::string Report::csv_text() const {
  std::string out = "# lrp-report csv schema_version=" + std::to_string(kReportSchemaVersion) + " experiment=" + experiment + "\n";
  out += "trial,seed,side,quantity,value\n";
  for (const TrialRow& r : rows) {
    out += std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' + std::to_string(r.side) + ',' + r.quantity + ',' +
           format_double(r.value) + '\n';
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::string_view experiment, std::int64_t side, std::uint64_t trial) {
  std::uint64_t tag = 0xcbf29ce484222325ULL;
  for (char c : experiment) tag = (tag ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  return hash_words(master, {tag, static_cast<std::uint64_t>(side), trial});
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("LRP_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
    throw InvalidInput("LRP_SEED must be a nonnegative integer");
  }
  return 1;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    const auto width = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    for (std::size_t t = 0; t < width; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n && !failed; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

Proportion binomial_proportion(std::uint64_t hits, std::uint64_t n) {
  if (n == 0) return {0, 0};
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(n))};
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidInput("fit needs equally many x and y values");
  LineFit f;
  const std::size_t n = x.size();
  if (n < 3) return f;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < n; ++i) f.residuals.push_back(y[i] - f.intercept - f.slope * x[i]);
  f.ok = std::isfinite(f.slope);
  return f;
}

LineFit fit_loglog(const std::vector<double>& distances, const std::vector<double>& medians) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > std::exp(1.0)) || !(medians.at(i) > 0)) throw InvalidInput("fit needs |x| > e and D > 0");
    x.push_back(std::log(std::log(distances[i])));
    y.push_back(std::log(medians[i]));
  }
  return fit_line(x, y);
}

std::vector<double> default_distances(int dim, std::size_t memory_budget_bytes) {
  // Roughly 64 bytes per site covers the adjacency of supercritical samples.
  const double site_cap = static_cast<double>(memory_budget_bytes) / 64.0;
  std::vector<double> out;
  for (int k = 8; k <= 20; ++k) {
    const double r = std::ldexp(1.0, k);
    if (std::pow(4 * r, dim) > site_cap) break;
    out.push_back(r);
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SamplerOptions sampler_options(const ExperimentConfig& c) {
  SamplerOptions o;
  o.threads = 1;
  o.memory_budget_bytes = c.memory_budget_bytes;
  return o;
}

Report make_report(std::string name, const ExperimentConfig& config) {
  Report r;
  r.experiment = std::move(name);
  r.config = config.to_json();
  return r;
}

std::vector<TrialRow> flatten(std::vector<std::vector<TrialRow>>& parts) {
  std::vector<TrialRow> out;
  for (auto& p : parts) {
    out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  return out;
}

double tail_curve(double rho, Coord L, int d, double sprime) {
  return std::exp(-rho * std::pow(static_cast<double>(L), 2.0 * d - sprime));
}

}  // namespace

Report run_cluster_fraction(const ExperimentConfig& config) {
  config.validate();
  if (config.sides.empty()) throw InvalidInput("cluster-fraction needs at least one side");
  const auto t0 = Clock::now();
  Report rep = make_report("cluster-fraction", config);
  const int d = config.model.dim;
  const std::size_t T = config.trials;
  const std::size_t S = config.sides.size();
  std::vector<std::vector<TrialRow>> parts(S * T);
  std::vector<double> frac(S * T);
  parallel_for(S * T, config.threads, [&](std::size_t i) {
    const Coord L = config.sides[i / T];
    const std::uint64_t t = i % T;
    const std::uint64_t seed = trial_seed(config.seed, "cluster-fraction", L, t);
    const GraphSample g = sample_graph(config.model, BoxSpec::cornered(Point::zero(d), L), seed, sampler_options(config));
    frac[i] = largest_component_fraction(g);
    const double volume = std::pow(static_cast<double>(L), d);
    const bool below = frac[i] * volume < config.rho * volume;
    parts[i] = {{t, seed, L, "largest_fraction", frac[i]}, {t, seed, L, "below_rho", below ? 1.0 : 0.0}};
  });
  rep.rows = flatten(parts);
  const double sp = config.effective_sprime();
  for (std::size_t si = 0; si < S; ++si) {
    const Coord L = config.sides[si];
    std::uint64_t hits = 0;
    std::vector<double> f(frac.begin() + static_cast<std::ptrdiff_t>(si * T), frac.begin() + static_cast<std::ptrdiff_t>((si + 1) * T));
    for (double x : f) hits += x < config.rho;
    const Proportion p = binomial_proportion(hits, T);
    const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(T);
    rep.summary.push_back({{"side", L},
                           {"trials", T},
                           {"below_count", hits},
                           {"p_below", p.estimate},
                           {"p_below_se", p.stderr_},
                           {"mean_fraction", mean},
                           {"median_fraction", median(f)}});
    rep.bounds.push_back({{"side", L}, {"curve", "exp(-rho L^(2d - s'))"}, {"value", tail_curve(config.rho, L, d, sp)}});
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

namespace {

struct PairOutcome {
  bool in_largest = false;
  std::uint64_t D = 0;
  std::uint64_t seed = 0;
};

using PairVisitor = std::function<void(const GraphSample&, const Point&, const Point&)>;

// The box of side box_factor * r around the pair (0, r e_1).
BoxSpec pair_box(const ExperimentConfig& config, Coord r) {
  const int d = config.model.dim;
  const auto side = static_cast<Coord>(std::ceil(config.box_factor * static_cast<double>(r)));
  Point lower(d);
  for (int i = 0; i < d; ++i) lower[i] = -side / 2;
  lower[0] = r / 2 - side / 2;
  return BoxSpec::cornered(lower, side);
}

Point pair_target(int d, Coord r) {
  Point y(d);
  y[0] = r;
  return y;
}

constexpr auto kUnseen = std::numeric_limits<std::uint32_t>::max();

// Restricts g to the sites of `sub` and decides whether x and y lie in the
// largest component of the restriction, returning D(x, y) inside it. The
// restriction of a sample to a sub-box is itself a sample on the sub-box.
class RestrictedPairProbe {
 public:
  explicit RestrictedPairProbe(const GraphSample& g) : g_(g), dist_(g.site_count(), kUnseen) {}

  PairOutcome probe(const BoxSpec& sub, const Point& xp, const Point& yp) {
    PairOutcome out;
    const int d = g_.box().dim();
    const bool contiguous = d == 1;
    const std::uint64_t lo = contiguous ? g_.box().index_of(sub.lower()) : 0;
    const std::uint64_t hi = contiguous ? lo + sub.site_count() : 0;
    auto inside = [&](SiteIndex v) { return contiguous ? (v >= lo && v < hi) : sub.contains(g_.point(v)); };
    for (SiteIndex v : touched_) dist_[v] = kUnseen;
    touched_.clear();
    const SiteIndex x = g_.index(xp);
    const SiteIndex y = g_.index(yp);
    dist_[x] = 0;
    touched_.push_back(x);
    for (std::size_t head = 0; head < touched_.size(); ++head) {
      const SiteIndex u = touched_[head];
      for (SiteIndex v : g_.neighbors(u)) {
        if (dist_[v] != kUnseen || !inside(v)) continue;
        dist_[v] = dist_[u] + 1;
        touched_.push_back(v);
      }
    }
    if (dist_[y] == kUnseen) return out;
    const std::uint64_t comp = touched_.size();
    if (2 * comp <= sub.site_count() && !largest_by_union_find(sub, inside, x, comp)) return out;
    out.in_largest = true;
    out.D = dist_[y];
    return out;
  }

 private:
  template <class Inside>
  bool largest_by_union_find(const BoxSpec& sub, Inside&& inside, SiteIndex x, std::uint64_t comp) {
    std::vector<SiteIndex> sites;
    sites.reserve(sub.site_count());
    for (const Point& p : box_sites(sub)) sites.push_back(g_.index(p));
    DisjointSets ds(g_.site_count());
    for (SiteIndex u : sites) {
      for (SiteIndex v : g_.neighbors(u)) {
        if (v > u && inside(v)) ds.unite(u, v);
      }
    }
    // Sites are visited in ascending order, so a root's first visit is its minimal
    // site; size ties go to the component with the smaller minimal site.
    const SiteIndex x_root = ds.find(x);
    std::vector<bool> seen(g_.site_count(), false);
    for (SiteIndex u : sites) {
      const SiteIndex root = ds.find(u);
      if (seen[root]) continue;
      seen[root] = true;
      if (root == x_root) return std::none_of(sites.begin(), sites.end(), [&](SiteIndex w) { return ds.size_of(w) > comp; });
      if (ds.size_of(root) >= comp) return false;
    }
    return true;
  }

  const GraphSample& g_;
  std::vector<std::uint32_t> dist_;
  std::vector<SiteIndex> touched_;
};

// Independent sample of one pair box, as used by the audit.
PairOutcome sample_pair(const ExperimentConfig& config, std::string_view tag, Coord r, std::uint64_t trial,
                        const PairVisitor& visit) {
  const int d = config.model.dim;
  const BoxSpec box = pair_box(config, r);
  PairOutcome out;
  out.seed = trial_seed(config.seed, tag, r, trial);
  const GraphSample g = sample_graph(config.model, box, out.seed, sampler_options(config));
  const Point xp = Point::zero(d);
  const Point yp = pair_target(d, r);
  RestrictedPairProbe probe(g);
  const PairOutcome o = probe.probe(box, xp, yp);
  out.in_largest = o.in_largest;
  out.D = o.D;
  if (out.in_largest && visit) visit(g, xp, yp);
  return out;
}

std::vector<Coord> checked_distances(const std::vector<double>& distances) {
  std::vector<Coord> out;
  for (double r : distances) {
    if (!(r >= 2) || r != std::floor(r)) throw InvalidInput("distances must be integers >= 2");
    out.push_back(static_cast<Coord>(r));
  }
  if (!std::is_sorted(out.begin(), out.end())) throw InvalidInput("distances must be sorted ascending");
  return out;
}

std::size_t min_connected(std::uint64_t trials) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(trials))));
}

}  // namespace

DeltaEstimate run_distance_scaling(const ExperimentConfig& config, const std::vector<double>& distances) {
  config.validate();
  const auto rs = checked_distances(distances);
  if (rs.empty()) throw InvalidInput("distance-scaling needs at least one distance");
  const auto t0 = Clock::now();
  DeltaEstimate est;
  est.report = make_report("distance-scaling", config);
  est.report.config["distances"] = distances;
  est.distances = distances;
  est.box_factor = config.box_factor;
  const std::size_t T = config.trials;
  // One sample per trial on the largest box; every smaller pair box nested in it
  // is probed on the restriction, the others get their own sample.
  std::vector<PairOutcome> outcomes(rs.size() * T);
  const int d = config.model.dim;
  const BoxSpec outer = pair_box(config, rs.back());
  parallel_for(T, config.threads, [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(config.seed, "distance-scaling", rs.back(), t);
    const GraphSample g = sample_graph(config.model, outer, seed, sampler_options(config));
    RestrictedPairProbe probe(g);
    for (std::size_t di = 0; di < rs.size(); ++di) {
      const BoxSpec sub = pair_box(config, rs[di]);
      PairOutcome& o = outcomes[di * T + t];
      if (outer.contains(sub)) {
        o = probe.probe(sub, Point::zero(d), pair_target(d, rs[di]));
        o.seed = seed;
      } else {
        o = sample_pair(config, "distance-scaling", rs[di], t, {});
      }
    }
  });
  std::vector<double> used_median;
  for (std::size_t di = 0; di < rs.size(); ++di) {
    std::vector<double> Ds;
    for (std::uint64_t t = 0; t < T; ++t) {
      const PairOutcome& o = outcomes[di * T + t];
      est.report.rows.push_back({t, o.seed, rs[di], "in_largest", o.in_largest ? 1.0 : 0.0});
      if (o.in_largest) {
        est.report.rows.push_back({t, o.seed, rs[di], "D", static_cast<double>(o.D)});
        Ds.push_back(static_cast<double>(o.D));
      }
    }
    const double dropped = 1.0 - static_cast<double>(Ds.size()) / static_cast<double>(T);
    est.dropped_fraction.push_back(dropped);
    est.connected.push_back(Ds.size());
    const double med = median(Ds);
    ojson row = {{"distance", rs[di]},
                 {"box_side", static_cast<Coord>(std::ceil(config.box_factor * static_cast<double>(rs[di])))},
                 {"connected", Ds.size()},
                 {"dropped_fraction", dropped},
                 {"median_D", Ds.empty() ? ojson(nullptr) : ojson(med)}};
    if (Ds.size() < min_connected(T) || !(med > 0)) {
      est.report.warnings.push_back("distance " + std::to_string(rs[di]) + " dropped: only " + std::to_string(Ds.size()) +
                                    " of " + std::to_string(T) + " trials had both endpoints in the largest component");
      row["used"] = false;
    } else {
      est.used.push_back(static_cast<double>(rs[di]));
      used_median.push_back(med);
      row["used"] = true;
    }
    est.report.summary.push_back(row);
  }
  est.median_D = used_median;
  if (est.used.size() >= 3) {
    est.fit = fit_loglog(est.used, used_median);
  } else {
    est.report.warnings.push_back("fit needs at least 3 usable distances, have " + std::to_string(est.used.size()));
  }
  est.slope = est.fit.ok ? est.fit.slope : std::nan("");
  const BondModel& m = config.model;
  if (m.profile.kind() != ProfileKind::custom_table && m.profile.s() > m.dim && m.profile.s() < 2.0 * m.dim) {
    est.reference_delta = delta(m.profile.s(), m.dim);
  } else {
    est.reference_delta = std::nan("");
  }
  est.report.pass = est.fit.ok;
  est.report.bounds.push_back({{"quantity", "slope of log median D against log log |x|"},
                               {"slope", est.fit.ok ? ojson(est.fit.slope) : ojson(nullptr)},
                               {"intercept", est.fit.ok ? ojson(est.fit.intercept) : ojson(nullptr)},
                               {"residuals", est.fit.residuals},
                               {"reference_delta", std::isnan(est.reference_delta) ? ojson(nullptr) : ojson(est.reference_delta)},
                               {"proxy", "both endpoints in the largest component of a box of side box_factor |x|"}});
  est.report.wall_seconds = seconds_since(t0);
  return est;
}

Report run_dense_density(const ExperimentConfig& config) {
  config.validate();
  if (config.sides.empty()) throw InvalidInput("dense-density needs at least one side");
  const auto t0 = Clock::now();
  Report rep = make_report("dense-density", config);
  const int d = config.model.dim;
  const Coord ell = config.ell;
  const Coord h = (ell - 1) / 2;
  for (Coord L : config.sides) {
    if (ell * ell > L) {
      rep.warnings.push_back("side " + std::to_string(L) + " is below ell^2 = " + std::to_string(ell * ell));
    }
  }
  const std::size_t T = config.trials;
  const std::size_t S = config.sides.size();
  std::vector<std::vector<TrialRow>> parts(S * T);
  std::vector<double> frac(S * T);
  parallel_for(S * T, config.threads, [&](std::size_t i) {
    const Coord L = config.sides[i / T];
    const std::uint64_t t = i % T;
    const std::uint64_t seed = trial_seed(config.seed, "dense-density", L, t);
    // The sample extends by the window half-width so every window fits.
    Point lower(d);
    for (int k = 0; k < d; ++k) lower[k] = -h;
    const GraphSample g = sample_graph(config.model, BoxSpec::cornered(lower, L + 2 * h), seed, sampler_options(config));
    const DenseReport dr = dense_set(g, BoxSpec::cornered(Point::zero(d), L), config.rho, ell, MarginPolicy::require);
    frac[i] = static_cast<double>(dr.count) / std::pow(static_cast<double>(L), d);
    parts[i] = {{t, seed, L, "dense_fraction", frac[i]}, {t, seed, L, "below_rho", frac[i] < config.rho ? 1.0 : 0.0}};
  });
  rep.rows = flatten(parts);
  const double sp = config.effective_sprime();
  for (std::size_t si = 0; si < S; ++si) {
    const Coord L = config.sides[si];
    std::vector<double> f(frac.begin() + static_cast<std::ptrdiff_t>(si * T), frac.begin() + static_cast<std::ptrdiff_t>((si + 1) * T));
    std::uint64_t hits = 0;
    for (double x : f) hits += x < config.rho;
    const Proportion p = binomial_proportion(hits, T);
    rep.summary.push_back({{"side", L},
                           {"trials", T},
                           {"below_count", hits},
                           {"p_below", p.estimate},
                           {"p_below_se", p.stderr_},
                           {"mean_dense_fraction", std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(T)}});
    rep.bounds.push_back({{"side", L}, {"curve", "exp(-rho L^(2d - s'))"}, {"value", tail_curve(config.rho, L, d, sp)}});
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

Report run_complete_graph_check(const CompleteGraphParams& params, std::uint64_t trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw InvalidInput("trials must be at least 1");
  const double bound = complete_graph_tail_bound(params);
  const auto t0 = Clock::now();
  Report rep;
  rep.experiment = "complete-graph";
  rep.config = {{"n", params.n}, {"r", params.r}, {"p", params.p}, {"rprime", params.rprime},
                {"pprime", params.pprime}, {"trials", trials}, {"seed", seed}};
  std::vector<CompleteGraphOutcome> out(trials);
  std::vector<std::uint64_t> seeds(trials);
  const auto n = static_cast<std::int64_t>(params.n);
  parallel_for(trials, threads, [&](std::size_t t) {
    seeds[t] = trial_seed(seed, "complete-graph", n, t);
    out[t] = complete_graph_sample(params, seeds[t]);
  });
  const double threshold = params.pprime * params.rprime * static_cast<double>(params.n);
  std::uint64_t hits = 0;
  std::vector<std::uint64_t> hist(params.n + 1, 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    rep.rows.push_back({t, seeds[t], n, "largest", static_cast<double>(out[t].largest)});
    rep.rows.push_back({t, seeds[t], n, "occupied", static_cast<double>(out[t].occupied)});
    hits += static_cast<double>(out[t].largest) <= threshold;
    ++hist[out[t].largest];
  }
  const Proportion p = binomial_proportion(hits, trials);
  rep.pass = p.estimate <= bound + 3 * p.stderr_;
  rep.summary.push_back({{"threshold", threshold}, {"tail_count", hits}, {"p_tail", p.estimate}, {"p_tail_se", p.stderr_}});
  rep.bounds.push_back({{"bound", bound}, {"vacuous", bound >= 1}, {"empirical_le_bound_plus_3se", rep.pass}});
  if (params.n <= 6) {
    const auto exact = complete_graph_exact_distribution(params);
    double tv = 0;
    for (std::size_t k = 0; k < exact.size(); ++k) {
      tv += std::abs(exact[k] - static_cast<double>(hist[k]) / static_cast<double>(trials));
    }
    tv *= 0.5;
    rep.bounds.push_back({{"exact_distribution", exact}, {"total_variation", tv}});
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

Report run_block_renorm(const ExperimentConfig& config, Coord K, double delta_threshold) {
  config.validate();
  if (config.sides.empty()) throw InvalidInput("block-renorm needs at least one side");
  for (Coord L : config.sides) {
    if (K < 1 || L % K != 0) throw InvalidInput("side " + std::to_string(L) + " is not divisible by K = " + std::to_string(K));
  }
  if (K % 2 == 0) throw InvalidInput("K must be odd");
  const auto t0 = Clock::now();
  Report rep = make_report("block-renorm", config);
  rep.config["K"] = K;
  rep.config["delta"] = delta_threshold;
  const int d = config.model.dim;
  const std::size_t T = config.trials;
  const std::size_t S = config.sides.size();
  const double s = config.model.profile.kind() == ProfileKind::custom_table ? 1.0 : config.model.profile.s();
  std::vector<double> betas = config.coupled_betas;
  std::sort(betas.begin(), betas.end());
  std::vector<std::vector<TrialRow>> parts(S * T);
  std::vector<BlockGraph> blocks(S * T);
  std::vector<std::vector<double>> coupled_occ(S * T);
  parallel_for(S * T, config.threads, [&](std::size_t i) {
    const Coord L = config.sides[i / T];
    const std::uint64_t t = i % T;
    const std::uint64_t seed = trial_seed(config.seed, "block-renorm", L, t);
    const BoxSpec box = BoxSpec::cornered(Point::zero(d), L);
    const GraphSample g = sample_graph(config.model, box, seed, sampler_options(config));
    blocks[i] = block_renormalize(g, K, delta_threshold);
    parts[i].push_back({t, seed, L, "occupancy", blocks[i].occupancy_rate()});
    parts[i].push_back({t, seed, L, "block_edges", static_cast<double>(blocks[i].edges.size())});
    if (!betas.empty()) {
      std::vector<BondModel> models;
      for (double b : betas) {
        BondModel m = config.model;
        m.profile = m.profile.kind() == ProfileKind::pure_power ? ConnectionProfile::pure_power(b, s)
                                                                : ConnectionProfile::shifted_power(b, s);
        models.push_back(m);
      }
      const auto gs = sample_graph_coupled(models, box, seed, sampler_options(config));
      for (std::size_t j = 0; j < gs.size(); ++j) {
        const double occ = block_renormalize(gs[j], K, delta_threshold).occupancy_rate();
        coupled_occ[i].push_back(occ);
        parts[i].push_back({t, seed, L, "occupancy_beta=" + format_double(betas[j]), occ});
      }
    }
  });
  rep.rows = flatten(parts);
  for (std::size_t si = 0; si < S; ++si) {
    const Coord L = config.sides[si];
    std::vector<BlockGraph> group(blocks.begin() + static_cast<std::ptrdiff_t>(si * T),
                                  blocks.begin() + static_cast<std::ptrdiff_t>((si + 1) * T));
    double occ = 0;
    for (const auto& b : group) occ += b.occupancy_rate();
    occ /= static_cast<double>(T);
    const BlockConnectionStats st = block_connection_stats(group, s);
    ojson table = ojson::array();
    for (const auto& row : st.rows) {
      table.push_back({{"magnitude", row.magnitude},
                       {"pairs", row.pairs},
                       {"connected", row.connected},
                       {"occupied_pairs", row.occupied_pairs},
                       {"frequency", row.frequency},
                       {"occupied_frequency", row.occupied_frequency},
                       {"fitted", row.fitted},
                       {"residual", row.residual}});
    }
    ojson entry = {{"side", L},        {"blocks", group.front().block_count()}, {"mean_occupancy", occ},
                   {"beta_fit", st.beta_fit}, {"rms_residual", st.rms_residual},     {"connection_table", table}};
    if (!betas.empty()) {
      std::vector<double> mean(betas.size(), 0.0);
      bool monotone = true;
      for (std::size_t t = 0; t < T; ++t) {
        const auto& v = coupled_occ[si * T + t];
        for (std::size_t j = 0; j < v.size(); ++j) {
          mean[j] += v[j] / static_cast<double>(T);
          if (j > 0 && v[j] < v[j - 1]) monotone = false;
        }
      }
      entry["coupled_betas"] = betas;
      entry["coupled_mean_occupancy"] = mean;
      entry["coupled_monotone_all_trials"] = monotone;
      rep.pass = rep.pass && monotone;
    }
    rep.summary.push_back(entry);
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

Report run_hierarchy_audit(const ExperimentConfig& config, const std::vector<double>& distances) {
  config.validate();
  const auto rs = checked_distances(distances);
  if (rs.empty()) throw InvalidInput("hierarchy-audit needs at least one distance");
  for (Coord r : rs) {
    if (!(static_cast<double>(r) > std::exp(std::exp(1.0)))) throw InvalidInput("hierarchy-audit needs distances above e^e");
  }
  const BondModel& m = config.model;
  double exponent = config.exponent;
  if (exponent < 0) {
    if (m.profile.kind() == ProfileKind::custom_table) throw InvalidInput("custom-table profiles need an explicit exponent");
    exponent = delta(m.profile.s(), m.dim);
  }
  const auto t0 = Clock::now();
  Report rep = make_report("hierarchy-audit", config);
  rep.config["distances"] = distances;
  rep.config["exponent"] = exponent;
  const std::size_t T = config.trials;
  std::vector<std::vector<TrialRow>> parts(rs.size() * T);
  std::vector<std::optional<HierarchyAudit>> audits(rs.size() * T);
  parallel_for(parts.size(), config.threads, [&](std::size_t i) {
    const Coord r = rs[i / T];
    const std::uint64_t t = i % T;
    std::optional<HierarchyAudit> audit;
    const int depth = std::max(1, depth_n(static_cast<double>(r), config.gamma, 1.0));
    const PairOutcome o = sample_pair(config, "hierarchy-audit", r, t, [&](const GraphSample& g, const Point& x, const Point& y) {
      audit = audit_hierarchy(g, x, y, config.gamma, depth, exponent);
    });
    parts[i].push_back({t, o.seed, r, "in_largest", o.in_largest ? 1.0 : 0.0});
    if (!audit) return;
    const HierarchyAudit& a = *audit;
    auto& p = parts[i];
    p.push_back({t, o.seed, r, "depth", static_cast<double>(a.hierarchy.depth())});
    p.push_back({t, o.seed, r, "hops", static_cast<double>(a.path.hops())});
    p.push_back({t, o.seed, r, "gap_steps", static_cast<double>(a.gap_steps)});
    p.push_back({t, o.seed, r, "hierarchy_bonds", static_cast<double>(a.hierarchy_bonds)});
    p.push_back({t, o.seed, r, "gap_products_ok", a.all_gap_products_ok ? 1.0 : 0.0});
    p.push_back({t, o.seed, r, "regular", a.all_regular ? 1.0 : 0.0});
    p.push_back({t, o.seed, r, "gap_steps_reach_2n1", a.gap_steps_reach_2n1 ? 1.0 : 0.0});
    p.push_back({t, o.seed, r, "gap_steps_reach_2n", a.gap_steps_reach_2n ? 1.0 : 0.0});
    p.push_back({t, o.seed, r, "pigeonhole_failures", static_cast<double>(a.pigeonhole_failures)});
    p.push_back({t, o.seed, r, "valid", a.valid ? 1.0 : 0.0});
    audits[i] = std::move(audit);
  });
  rep.rows = flatten(parts);
  for (std::size_t di = 0; di < rs.size(); ++di) {
    std::uint64_t n = 0, prod_ok = 0, reg_ok = 0, reach1 = 0, reach = 0, valid = 0, pig = 0;
    std::map<int, std::uint64_t> depths;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& a = audits[di * T + t];
      if (!a) continue;
      ++n;
      prod_ok += a->all_gap_products_ok;
      reg_ok += a->all_regular;
      reach1 += a->gap_steps_reach_2n1;
      reach += a->gap_steps_reach_2n;
      valid += a->valid;
      pig += a->pigeonhole_failures == 0;
      ++depths[a->hierarchy.depth()];
    }
    auto rate = [&](std::uint64_t k) { return n ? ojson(static_cast<double>(k) / static_cast<double>(n)) : ojson(nullptr); };
    ojson dj = ojson::object();
    for (const auto& [dep, c] : depths) dj[std::to_string(dep)] = c;
    rep.summary.push_back({{"distance", rs[di]},
                           {"audited", n},
                           {"depths", dj},
                           {"gap_product_rate", rate(prod_ok)},
                           {"regularity_rate", rate(reg_ok)},
                           {"gap_steps_reach_2n1_rate", rate(reach1)},
                           {"gap_steps_reach_2n_rate", rate(reach)},
                           {"valid_rate", rate(valid)},
                           {"pigeonhole_rate", rate(pig)}});
    rep.pass = rep.pass && valid == n && pig == n;
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

}  // namespace lrp
