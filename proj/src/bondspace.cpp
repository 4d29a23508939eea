#include "lrp/bondspace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "lrp/errors.hpp"
#include "lrp/format.hpp"
#include "lrp/random.hpp"

namespace lrp {

std::string_view to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::shifted_power: return "shifted-power";
    case ProfileKind::pure_power: return "pure-power";
    case ProfileKind::custom_table: return "custom-table";
  }
  return "?";
}

ProfileKind parse_profile(std::string_view s) {
  if (s == "shifted-power") return ProfileKind::shifted_power;
  if (s == "pure-power") return ProfileKind::pure_power;
  if (s == "custom-table") return ProfileKind::custom_table;
  throw InvalidInput("unknown profile '" + std::string(s) + "'");
}

namespace {

void check_power_params(double beta, double s) {
  if (!(beta >= 0) || !std::isfinite(beta)) throw InvalidInput("beta must be a finite nonnegative real");
  if (!(s > 0) || !std::isfinite(s)) throw InvalidInput("exponent s must be a finite positive real");
}

constexpr double kTableTolerance = 1e-9;

}  // namespace

ConnectionProfile ConnectionProfile::shifted_power(double beta, double s) {
  check_power_params(beta, s);
  ConnectionProfile p;
  p.kind_ = ProfileKind::shifted_power;
  p.beta_ = beta;
  p.s_ = s;
  return p;
}

ConnectionProfile ConnectionProfile::pure_power(double beta, double s) {
  check_power_params(beta, s);
  ConnectionProfile p;
  p.kind_ = ProfileKind::pure_power;
  p.beta_ = beta;
  p.s_ = s;
  return p;
}

ConnectionProfile ConnectionProfile::custom_table(std::vector<std::pair<double, double>> magnitude_to_q) {
  for (const auto& [mag, q] : magnitude_to_q) {
    if (!(mag > 0) || !std::isfinite(mag)) throw InvalidInput("custom table magnitudes must be positive");
    if (!(q >= 0) || !std::isfinite(q)) throw InvalidInput("custom table q values must be finite and nonnegative");
  }
  std::sort(magnitude_to_q.begin(), magnitude_to_q.end());
  for (std::size_t i = 1; i < magnitude_to_q.size(); ++i) {
    if (magnitude_to_q[i].first - magnitude_to_q[i - 1].first <= kTableTolerance * magnitude_to_q[i].first) {
      throw InvalidInput("custom table has duplicate magnitude " + format_double(magnitude_to_q[i].first));
    }
  }
  ConnectionProfile p;
  p.kind_ = ProfileKind::custom_table;
  p.beta_ = 0.0;
  p.s_ = 0.0;
  p.table_ = std::move(magnitude_to_q);
  return p;
}

double ConnectionProfile::q(double magnitude) const {
  switch (kind_) {
    case ProfileKind::shifted_power: return beta_ == 0.0 ? 0.0 : beta_ * std::pow(1.0 + magnitude, -s_);
    case ProfileKind::pure_power: return beta_ == 0.0 ? 0.0 : beta_ * std::pow(magnitude, -s_);
    case ProfileKind::custom_table: {
      auto it = std::lower_bound(table_.begin(), table_.end(), magnitude * (1 - kTableTolerance),
                                 [](const auto& e, double m) { return e.first < m; });
      if (it == table_.end() || std::abs(it->first - magnitude) > kTableTolerance * magnitude) {
        throw InvalidInput("custom table has no entry for |z| = " + format_double(magnitude));
      }
      return it->second;
    }
  }
  return 0.0;
}

void BondModel::validate() const {
  if (dim < 1 || dim > kMaxDim) throw InvalidInput("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (!(nn_prob >= 0 && nn_prob <= 1)) throw InvalidInput("nn_prob must be in [0, 1]");
}

std::string BondModel::describe() const {
  std::string s = "dim=" + std::to_string(dim) + " profile=" + std::string(to_string(profile.kind()));
  if (profile.kind() == ProfileKind::custom_table) {
    s += " table_entries=" + std::to_string(profile.table().size());
  } else {
    s += " beta=" + format_double(profile.beta()) + " s=" + format_double(profile.s());
  }
  s += " nn_prob=" + format_double(nn_prob) + " norm=" + std::string(to_string(norm));
  return s;
}

namespace {

bool is_unit_step(const Point& z) {
  int nonzero = 0;
  for (int i = 0; i < z.dim(); ++i) {
    if (z[i] == 0) continue;
    if (z[i] != 1 && z[i] != -1) return false;
    ++nonzero;
  }
  return nonzero == 1;
}

}  // namespace

double q_value(const BondModel& model, const Point& displacement) {
  if (displacement.dim() != model.dim) throw InvalidInput("displacement dimension does not match the model");
  if (displacement.is_zero()) throw InvalidInput("q is undefined at zero displacement");
  return model.profile.q(norm(displacement, model.norm));
}

double displacement_probability(const BondModel& model, const Point& displacement) {
  const double q = q_value(model, displacement);
  const double p_long = -std::expm1(-q);
  if (model.nn_prob > 0 && is_unit_step(displacement)) {
    return 1.0 - (1.0 - p_long) * (1.0 - model.nn_prob);
  }
  return p_long;
}

double pair_probability(const BondModel& model, const Point& x, const Point& y) {
  if (x.dim() != model.dim || y.dim() != model.dim) throw InvalidInput("point dimension does not match the model");
  if (x == y) throw InvalidInput("pair probability needs distinct sites");
  return displacement_probability(model, y - x);
}

namespace {

// Displacement classes of a box with side L in d dimensions: the lexicographically
// positive vectors of [-(L-1), L-1]^d, enumerated by their rank in that cube.
class DisplacementClasses {
 public:
  DisplacementClasses(int dim, Coord side) : dim_(dim), side_(side) {
    const auto w = static_cast<std::uint64_t>(2 * side - 1);
    cube_ = 1;
    for (int i = 0; i < dim; ++i) cube_ *= w;
    center_ = (cube_ - 1) / 2;
    stride_.resize(static_cast<std::size_t>(dim));
    std::uint64_t s = 1;
    for (int i = dim - 1; i >= 0; --i) {
      stride_[static_cast<std::size_t>(i)] = s;
      s *= static_cast<std::uint64_t>(side);
    }
  }

  std::uint64_t begin() const noexcept { return center_ + 1; }
  std::uint64_t end() const noexcept { return cube_; }

  Point vector(std::uint64_t rank) const {
    Point v(dim_);
    const auto w = static_cast<std::uint64_t>(2 * side_ - 1);
    for (int i = dim_ - 1; i >= 0; --i) {
      v[i] = static_cast<Coord>(rank % w) - (side_ - 1);
      rank /= w;
    }
    return v;
  }

  // Number of box positions x with x and x + v both inside.
  std::uint64_t translations(const Point& v) const noexcept {
    std::uint64_t m = 1;
    for (int i = 0; i < dim_; ++i) m *= static_cast<std::uint64_t>(side_ - std::llabs(v[i]));
    return m;
  }

  std::int64_t index_offset(const Point& v) const noexcept {
    std::int64_t off = 0;
    for (int i = 0; i < dim_; ++i) off += v[i] * static_cast<std::int64_t>(stride_[static_cast<std::size_t>(i)]);
    return off;
  }

  // Box index of the pos-th translation (mixed radix over the admissible sub-box).
  std::uint64_t lower_site(const Point& v, std::uint64_t pos) const noexcept {
    std::uint64_t u = 0;
    for (int i = dim_ - 1; i >= 0; --i) {
      const auto radix = static_cast<std::uint64_t>(side_ - std::llabs(v[i]));
      const std::uint64_t digit = pos % radix;
      pos /= radix;
      const auto lo = static_cast<std::uint64_t>(v[i] < 0 ? -v[i] : 0);
      u += (lo + digit) * stride_[static_cast<std::size_t>(i)];
    }
    return u;
  }

  int dim() const noexcept { return dim_; }

 private:
  int dim_;
  Coord side_;
  std::uint64_t cube_ = 0;
  std::uint64_t center_ = 0;
  std::vector<std::uint64_t> stride_;
};

std::uint64_t class_seed(std::uint64_t seed, const Point& v) {
  std::uint64_t h = hash_words(seed, {0x6c72702d636c6173ULL, static_cast<std::uint64_t>(v.dim())});
  for (int i = 0; i < v.dim(); ++i) h = mix64(h ^ mix64(static_cast<std::uint64_t>(v[i]) + 0x9e3779b97f4a7c15ULL));
  return h;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

// Calls visit(pos) for each candidate position of a Bernoulli(p) process on [0, m).
template <class Visit>
void skip_sample(SplitMix64& rng, double p, std::uint64_t m, Visit&& visit) {
  if (p <= 0.0 || m == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t pos = 0; pos < m; ++pos) visit(pos);
    return;
  }
  const double log1m_p = std::log1p(-p);
  std::uint64_t pos = geometric_skip(rng, log1m_p);
  while (pos < m) {
    visit(pos);
    pos = saturating_add(pos, saturating_add(1, geometric_skip(rng, log1m_p)));
  }
}

void check_box_fits(const BoxSpec& box, const SamplerOptions& opt) {
  if (box.site_count() >= std::numeric_limits<SiteIndex>::max()) {
    throw ResourceError("box has " + std::to_string(box.site_count()) + " sites; at most 2^32-2 are addressable",
                        box.site_count() * 16, opt.memory_budget_bytes);
  }
  const std::size_t base = (box.site_count() + 1) * sizeof(std::uint64_t);
  if (base > opt.memory_budget_bytes) {
    throw ResourceError("box needs at least " + std::to_string(base) + " bytes for the site table", base,
                        opt.memory_budget_bytes);
  }
}

struct ChunkPlan {
  std::uint64_t begin;
  std::uint64_t end;
};

std::vector<ChunkPlan> plan_chunks(const DisplacementClasses& classes, int threads) {
  const std::uint64_t n = classes.end() - classes.begin();
  const std::uint64_t pieces = threads <= 1 ? 1 : std::min<std::uint64_t>(n, static_cast<std::uint64_t>(threads) * 16);
  std::vector<ChunkPlan> plan;
  if (n == 0) return plan;
  for (std::uint64_t i = 0; i < pieces; ++i) {
    plan.push_back({classes.begin() + n * i / pieces, classes.begin() + n * (i + 1) / pieces});
  }
  return plan;
}

template <class Work>
void run_chunks(std::size_t count, int threads, Work&& work) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  for (std::size_t t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
    });
  }
}

}  // namespace

double expected_edge_count(const BondModel& model, const BoxSpec& box) {
  model.validate();
  if (box.dim() != model.dim) throw InvalidInput("box dimension does not match the model");
  DisplacementClasses classes(box.dim(), box.side());
  long double total = 0;
  for (std::uint64_t r = classes.begin(); r < classes.end(); ++r) {
    const Point v = classes.vector(r);
    total += static_cast<long double>(classes.translations(v)) * displacement_probability(model, v);
  }
  return static_cast<double>(total);
}

double box_connection_probability(const BondModel& model, std::span<const Point> b0, std::span<const Point> b1) {
  model.validate();
  if (b0.empty() || b1.empty()) throw InvalidInput("site sets must be nonempty");
  std::set<Point> first(b0.begin(), b0.end());
  for (const Point& p : b1) {
    if (p.dim() != model.dim) throw InvalidInput("site dimension does not match the model");
    if (first.count(p)) throw InvalidInput("site sets overlap at " + p.str());
  }
  for (const Point& p : first) {
    if (p.dim() != model.dim) throw InvalidInput("site dimension does not match the model");
  }
  std::set<Point> second(b1.begin(), b1.end());
  // log P(no bond) = -sum q + sum over nearest-neighbour pairs of log(1 - nn_prob)
  long double log_none = 0;
  for (const Point& z : first) {
    for (const Point& w : second) {
      const Point v = z - w;
      log_none -= q_value(model, v);
      if (model.nn_prob > 0 && is_unit_step(v)) {
        if (model.nn_prob >= 1) return 1.0;
        log_none += std::log1p(-model.nn_prob);
      }
    }
  }
  return -std::expm1(static_cast<double>(log_none));
}

// Edge stream, adjacency entries and the staging copy used while building.
constexpr std::size_t kBytesPerEdge = sizeof(Edge) + 2 * sizeof(SiteIndex) + 2 * sizeof(Edge);

void sort_class_order(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.v - a.u, a.u) < std::pair(b.v - b.u, b.u);
  });
}

// Packs a class-ordered edge stream into sorted CSR adjacency.
class GraphBuilder {
 public:
  // edges must satisfy u < v and come in class order: ascending index offset
  // v - u, then ascending source.
  static GraphSample build(const BoxSpec& box, const BondModel& model, std::uint64_t seed,
                           std::span<const Edge> edges) {
    GraphSample g;
    g.box_ = box;
    g.model_ = model;
    g.seed_ = seed;
    const std::size_t n = box.site_count();
    std::vector<std::uint32_t> degree(n, 0);
    for (const Edge& e : edges) {
      ++degree[e.u];
      ++degree[e.v];
    }
    g.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
    g.adj_.resize(g.offsets_[n]);
    // Two-level scatter: first into buckets of consecutive sites, whose regions
    // coincide with their final adjacency ranges, then within each bucket. The
    // reversed stream lists every site's smaller neighbours ascending and the
    // forward stream its larger ones, so lists come out sorted.
    constexpr unsigned kShift = 11;
    std::vector<Edge> staged(g.adj_.size());
    std::vector<std::uint64_t> bucket((n >> kShift) + 1);
    for (std::size_t b = 0; b < bucket.size(); ++b) bucket[b] = g.offsets_[b << kShift];
    for (auto it = edges.rbegin(); it != edges.rend(); ++it) staged[bucket[it->v >> kShift]++] = {it->v, it->u};
    for (const Edge& e : edges) staged[bucket[e.u >> kShift]++] = e;
    std::vector<std::uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const Edge& e : staged) g.adj_[cursor[e.u]++] = e.v;
    return g;
  }
};

GraphSample GraphSample::from_edges(const BoxSpec& box, const BondModel& model, std::uint64_t seed,
                                    std::vector<Edge> edges) {
  if (box.site_count() >= std::numeric_limits<SiteIndex>::max()) throw InvalidInput("box too large");
  for (Edge& e : edges) {
    if (e.u == e.v) throw InvalidInput("self-loop at site " + std::to_string(e.u));
    if (e.u >= box.site_count() || e.v >= box.site_count()) throw InvalidInput("edge endpoint outside box");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  sort_class_order(edges);
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return GraphBuilder::build(box, model, seed, edges);
}

GraphSample GraphSample::from_point_edges(const BoxSpec& box, const BondModel& model, std::uint64_t seed,
                                          const std::vector<std::pair<Point, Point>>& edges) {
  std::vector<Edge> idx;
  idx.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    idx.push_back({static_cast<SiteIndex>(box.index_of(a)), static_cast<SiteIndex>(box.index_of(b))});
  }
  return from_edges(box, model, seed, std::move(idx));
}

bool GraphSample::has_edge(SiteIndex a, SiteIndex b) const noexcept {
  if (a >= site_count() || b >= site_count()) return false;
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::vector<Edge> GraphSample::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (SiteIndex u = 0; u < site_count(); ++u) {
    for (SiteIndex v : neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

std::size_t GraphSample::memory_bytes() const noexcept {
  return offsets_.size() * sizeof(std::uint64_t) + adj_.size() * sizeof(SiteIndex);
}

namespace {

[[noreturn]] void throw_edge_budget(const BondModel& model, const BoxSpec& box, const SamplerOptions& opt) {
  const double expected = expected_edge_count(model, box);
  const auto required = static_cast<std::size_t>((box.site_count() + 1) * sizeof(std::uint64_t) +
                                                 expected * (kBytesPerEdge));
  throw ResourceError("sampling needs about " + std::to_string(required) + " bytes (" +
                          format_double(std::round(expected)) + " expected edges), budget is " +
                          std::to_string(opt.memory_budget_bytes),
                      required, opt.memory_budget_bytes);
}

template <class Emit>
void sample_classes(const DisplacementClasses& classes, const ChunkPlan& chunk, std::uint64_t seed,
                    const BondModel& dominant, Emit&& emit) {
  for (std::uint64_t r = chunk.begin; r < chunk.end; ++r) {
    const Point v = classes.vector(r);
    const double p = displacement_probability(dominant, v);
    if (p <= 0.0) continue;
    const std::uint64_t m = classes.translations(v);
    const auto off = static_cast<std::uint64_t>(classes.index_offset(v));
    SplitMix64 rng(class_seed(seed, v));
    if (classes.dim() == 1) {
      skip_sample(rng, p, m, [&](std::uint64_t pos) { emit(rng, v, pos, pos + off); });
    } else {
      skip_sample(rng, p, m, [&](std::uint64_t pos) {
        const std::uint64_t u = classes.lower_site(v, pos);
        emit(rng, v, u, u + off);
      });
    }
  }
}

}  // namespace

GraphSample sample_graph(const BondModel& model, const BoxSpec& box, std::uint64_t seed,
                         const SamplerOptions& options) {
  model.validate();
  if (box.dim() != model.dim) throw InvalidInput("box dimension does not match the model");
  check_box_fits(box, options);
  DisplacementClasses classes(box.dim(), box.side());
  const auto plan = plan_chunks(classes, options.threads);
  const std::size_t base = (box.site_count() + 1) * sizeof(std::uint64_t);
  const std::size_t edge_cap = (options.memory_budget_bytes - base) / (kBytesPerEdge);
  std::vector<std::vector<Edge>> parts(plan.size());
  std::atomic<std::size_t> total{0};
  std::atomic<bool> over{false};
  run_chunks(plan.size(), options.threads, [&](std::size_t i) {
    auto& out = parts[i];
    sample_classes(classes, plan[i], seed, model, [&](SplitMix64&, const Point&, std::uint64_t u, std::uint64_t w) {
      out.push_back({static_cast<SiteIndex>(u), static_cast<SiteIndex>(w)});
      if ((out.size() & 0xffff) == 0 && total.fetch_add(0x10000) + 0x10000 > edge_cap) over = true;
    });
    if (over) return;
  });
  std::size_t count = 0;
  for (const auto& p : parts) count += p.size();
  if (over || count > edge_cap) throw_edge_budget(model, box, options);
  if (parts.size() == 1) return GraphBuilder::build(box, model, seed, parts[0]);
  std::vector<Edge> all;
  all.reserve(count);
  for (auto& p : parts) {
    all.insert(all.end(), p.begin(), p.end());
    std::vector<Edge>().swap(p);
  }
  return GraphBuilder::build(box, model, seed, all);
}

std::vector<GraphSample> sample_graph_coupled(std::span<const BondModel> models, const BoxSpec& box,
                                              std::uint64_t seed, const SamplerOptions& options) {
  if (models.empty()) throw InvalidInput("coupled sampling needs at least one model");
  for (const auto& m : models) {
    m.validate();
    if (m.dim != box.dim()) throw InvalidInput("box dimension does not match the model");
    if (m.norm != models[0].norm) throw InvalidInput("coupled models must share the norm");
  }
  check_box_fits(box, options);
  DisplacementClasses classes(box.dim(), box.side());
  // Candidates are drawn at the pointwise maximum probability; each candidate then
  // carries a uniform mark U and belongs to model j iff U * p_max < p_j.
  std::vector<std::vector<Edge>> per_model(models.size());
  std::vector<double> pj(models.size());
  const ChunkPlan all{classes.begin(), classes.end()};
  struct MaxModel {};
  for (std::uint64_t r = all.begin; r < all.end; ++r) {
    const Point v = classes.vector(r);
    double pmax = 0;
    for (std::size_t j = 0; j < models.size(); ++j) {
      pj[j] = displacement_probability(models[j], v);
      pmax = std::max(pmax, pj[j]);
    }
    if (pmax <= 0.0) continue;
    const std::uint64_t m = classes.translations(v);
    const auto off = static_cast<std::uint64_t>(classes.index_offset(v));
    SplitMix64 rng(class_seed(seed, v));
    skip_sample(rng, pmax, m, [&](std::uint64_t pos) {
      const std::uint64_t u = classes.dim() == 1 ? pos : classes.lower_site(v, pos);
      const double mark = rng.uniform() * pmax;
      for (std::size_t j = 0; j < models.size(); ++j) {
        if (mark < pj[j]) per_model[j].push_back({static_cast<SiteIndex>(u), static_cast<SiteIndex>(u + off)});
      }
    });
  }
  std::vector<GraphSample> out;
  out.reserve(models.size());
  for (std::size_t j = 0; j < models.size(); ++j) {
    out.push_back(GraphBuilder::build(box, models[j], seed, per_model[j]));
  }
  return out;
}

GraphSample sample_graph_naive(const BondModel& model, const BoxSpec& box, std::uint64_t seed) {
  model.validate();
  if (box.dim() != model.dim) throw InvalidInput("box dimension does not match the model");
  if (box.site_count() > 10000) throw InvalidInput("naive sampler is limited to 10^4 sites");
  const auto n = static_cast<SiteIndex>(box.site_count());
  std::vector<Point> pts = box_sites(box);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge> edges;
  for (SiteIndex u = 0; u < n; ++u) {
    for (SiteIndex w = u + 1; w < n; ++w) {
      if (unif(gen) < pair_probability(model, pts[u], pts[w])) edges.push_back({u, w});
    }
  }
  sort_class_order(edges);
  return GraphBuilder::build(box, model, seed, edges);
}

void write_edge_list(std::ostream& out, const GraphSample& g) {
  const BoxSpec& box = g.box();
  out << "# lrp-edgelist v1 " << g.model().describe() << " side=" << box.side()
      << " mode=" << (box.mode() == BoxMode::centered ? "centered" : "cornered") << " anchor=" << box.anchor().str()
      << " seed=" << g.seed() << " edges=" << g.edge_count() << '\n';
  for (SiteIndex u = 0; u < g.site_count(); ++u) {
    const auto nb = g.neighbors(u);
    if (nb.empty() || nb.back() < u) continue;
    const std::string pu = g.point(u).str();
    for (SiteIndex v : nb) {
      if (v > u) out << pu << '\t' << g.point(v).str() << '\n';
    }
  }
}

std::string edge_list_text(const GraphSample& g) {
  std::ostringstream os;
  write_edge_list(os, g);
  return os.str();
}

}  // namespace lrp
