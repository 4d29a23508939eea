#include "lrp/clusters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "lrp/errors.hpp"

namespace lrp {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
  if (n > std::numeric_limits<std::uint32_t>::max()) throw InvalidInput("too many elements for union-find");
  std::iota(parent_.begin(), parent_.end(), 0u);
}

std::uint32_t DisjointSets::find(std::uint32_t a) noexcept {
  std::uint32_t root = a;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[a] != root) {
    const std::uint32_t next = parent_[a];
    parent_[a] = root;
    a = next;
  }
  return root;
}

bool DisjointSets::unite(std::uint32_t a, std::uint32_t b) noexcept {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

std::vector<SiteIndex> Labeling::members(std::uint32_t id) const {
  std::vector<SiteIndex> out;
  for (std::size_t i = 0; i < component.size(); ++i) {
    if (component[i] == id) out.push_back(static_cast<SiteIndex>(i));
  }
  return out;
}

Labeling label_components(const GraphSample& g) {
  const SiteIndex n = g.site_count();
  DisjointSets ds(n);
  for (SiteIndex u = 0; u < n; ++u) {
    for (SiteIndex v : g.neighbors(u)) {
      if (v > u) ds.unite(u, v);
    }
  }
  Labeling lab;
  lab.component.assign(n, 0);
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> id_of_root(n, unset);
  for (SiteIndex u = 0; u < n; ++u) {
    const std::uint32_t r = ds.find(u);
    if (id_of_root[r] == unset) {
      id_of_root[r] = static_cast<std::uint32_t>(lab.sizes.size());
      lab.sizes.push_back(ds.size_of(r));
    }
    lab.component[u] = id_of_root[r];
  }
  for (std::uint32_t id = 1; id < lab.sizes.size(); ++id) {
    if (lab.sizes[id] > lab.sizes[lab.largest]) lab.largest = id;
  }
  return lab;
}

double largest_component_fraction(const GraphSample& g) {
  const Labeling lab = label_components(g);
  return static_cast<double>(lab.largest_size()) / static_cast<double>(g.site_count());
}

namespace {

void check_ell(Coord ell) {
  if (ell < 1 || ell % 2 == 0) throw InvalidInput("window side ell must be a positive odd integer, got " + std::to_string(ell));
}

}  // namespace

LocalClusterSearch::LocalClusterSearch(const GraphSample& g) : g_(g), stamp_(g.site_count(), 0) {}

std::size_t LocalClusterSearch::size(SiteIndex x, Coord ell) {
  check_ell(ell);
  if (x >= g_.site_count()) throw InvalidInput("site index outside the sample box");
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  const Coord h = (ell - 1) / 2;
  const BoxSpec& box = g_.box();
  const int d = box.dim();
  const Coord side = box.side();
  queue_.clear();
  queue_.push_back(x);
  stamp_[x] = epoch_;

  // Offsets of x from the box's lower corner, per axis.
  std::array<Coord, kMaxDim> xc{};
  {
    std::uint64_t r = x;
    for (int i = d - 1; i >= 0; --i) {
      xc[static_cast<std::size_t>(i)] = static_cast<Coord>(r % static_cast<std::uint64_t>(side));
      r /= static_cast<std::uint64_t>(side);
    }
  }
  clipped_ = false;
  for (int i = 0; i < d; ++i) {
    if (xc[static_cast<std::size_t>(i)] - h < 0 || xc[static_cast<std::size_t>(i)] + h >= side) clipped_ = true;
  }
  auto inside = [&](SiteIndex v) {
    if (d == 1) return std::llabs(static_cast<Coord>(v) - static_cast<Coord>(x)) <= h;
    std::uint64_t r = v;
    for (int i = d - 1; i >= 0; --i) {
      const auto c = static_cast<Coord>(r % static_cast<std::uint64_t>(side));
      r /= static_cast<std::uint64_t>(side);
      if (std::llabs(c - xc[static_cast<std::size_t>(i)]) > h) return false;
    }
    return true;
  };
  for (std::size_t head = 0; head < queue_.size(); ++head) {
    for (SiteIndex v : g_.neighbors(queue_[head])) {
      if (stamp_[v] == epoch_ || !inside(v)) continue;
      stamp_[v] = epoch_;
      queue_.push_back(v);
    }
  }
  return queue_.size();
}

std::vector<Point> local_cluster(const GraphSample& g, const Point& x, Coord ell) {
  if (!g.contains(x)) throw InvalidInput("site " + x.str() + " outside the sample box");
  LocalClusterSearch search(g);
  search.size(g.index(x), ell);
  std::vector<SiteIndex> idx(search.last().begin(), search.last().end());
  std::sort(idx.begin(), idx.end());
  std::vector<Point> out;
  out.reserve(idx.size());
  for (SiteIndex i : idx) out.push_back(g.point(i));
  return out;
}

bool meets_density(std::size_t cluster_size, double rho, Coord ell, int dim) {
  const double volume = std::pow(static_cast<double>(ell), dim);
  return static_cast<double>(cluster_size) >= rho * volume * (1 - 4 * std::numeric_limits<double>::epsilon());
}

bool is_dense(const GraphSample& g, const Point& x, double rho, Coord ell) {
  if (!g.contains(x)) throw InvalidInput("site " + x.str() + " outside the sample box");
  LocalClusterSearch search(g);
  return meets_density(search.size(g.index(x), ell), rho, ell, g.box().dim());
}

DenseReport dense_set(const GraphSample& g, const BoxSpec& region, double rho, Coord ell, MarginPolicy margin) {
  check_ell(ell);
  if (!(rho > 0 && rho < 1 + 1e-12)) throw InvalidInput("rho must be in (0, 1]");
  if (!g.box().contains(region)) throw InvalidInput("region is not inside the sample box");
  if (margin == MarginPolicy::require) {
    const Coord h = (ell - 1) / 2;
    for (int i = 0; i < region.dim(); ++i) {
      if (region.lower()[i] - h < g.box().lower()[i] || region.upper()[i] + h > g.box().upper()[i]) {
        throw InvalidInput("region needs a margin of " + std::to_string(h) +
                           " sites inside the sample box; pass MarginPolicy::waive to accept clipped windows");
      }
    }
  }
  DenseReport rep;
  rep.region = region;
  rep.rho = rho;
  rep.ell = ell;
  LocalClusterSearch search(g);
  for (std::uint64_t i = 0; i < region.site_count(); ++i) {
    const Point p = region.point_at(i);
    const std::size_t c = search.size(g.index(p), ell);
    if (search.last_clipped()) rep.clipped_sites.push_back(p);
    if (meets_density(c, rho, ell, g.box().dim())) rep.dense_sites.push_back(p);
  }
  rep.count = rep.dense_sites.size();
  return rep;
}

Point BlockGraph::block_coords(std::uint32_t b) const {
  Point p(box.dim());
  for (int i = box.dim() - 1; i >= 0; --i) {
    p[i] = static_cast<Coord>(b % static_cast<std::uint64_t>(blocks_per_axis));
    b /= static_cast<std::uint32_t>(blocks_per_axis);
  }
  return p;
}

double BlockGraph::occupancy_rate() const {
  if (occupied.empty()) return 0.0;
  const auto n = std::count(occupied.begin(), occupied.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(occupied.size());
}

BlockGraph block_renormalize(const GraphSample& g, Coord K, double delta) {
  const BoxSpec& box = g.box();
  if (K < 1 || K % 2 == 0) throw InvalidInput("block side K must be a positive odd integer");
  if (box.side() % K != 0) {
    throw InvalidInput("box side " + std::to_string(box.side()) + " is not divisible by K = " + std::to_string(K));
  }
  if (!(delta >= 0 && delta <= 1)) throw InvalidInput("delta must be in [0, 1]");
  const int d = box.dim();
  const Coord side = box.side();
  BlockGraph bg;
  bg.K = K;
  bg.delta = delta;
  bg.box = box;
  bg.norm = g.model().norm;
  bg.blocks_per_axis = side / K;
  std::uint64_t nblocks = 1;
  for (int i = 0; i < d; ++i) nblocks *= static_cast<std::uint64_t>(bg.blocks_per_axis);

  const SiteIndex n = g.site_count();
  std::vector<std::uint32_t> block_of(n);
  for (SiteIndex u = 0; u < n; ++u) {
    std::uint64_t r = u;
    std::uint64_t b = 0, mul = 1;
    for (int i = d - 1; i >= 0; --i) {
      const auto c = static_cast<Coord>(r % static_cast<std::uint64_t>(side));
      r /= static_cast<std::uint64_t>(side);
      b += static_cast<std::uint64_t>(c / K) * mul;
      mul *= static_cast<std::uint64_t>(bg.blocks_per_axis);
    }
    block_of[u] = static_cast<std::uint32_t>(b);
  }
  DisjointSets ds(n);
  for (SiteIndex u = 0; u < n; ++u) {
    for (SiteIndex v : g.neighbors(u)) {
      if (v > u && block_of[u] == block_of[v]) ds.unite(u, v);
    }
  }
  // Sites ascend lexicographically, which is also lexicographic within each block,
  // so the first time a root is met it is met at its component's minimal site.
  bg.occupied.assign(nblocks, 0);
  bg.chosen_min_site.assign(nblocks, 0);
  bg.chosen_size.assign(nblocks, 0);
  std::vector<std::uint32_t> chosen_root(nblocks, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint8_t> seen(n, 0);
  for (SiteIndex u = 0; u < n; ++u) {
    const std::uint32_t r = ds.find(u);
    if (seen[r]) continue;
    seen[r] = 1;
    const std::uint32_t b = block_of[u];
    const std::uint64_t sz = ds.size_of(r);
    if (sz > bg.chosen_size[b]) {
      bg.chosen_size[b] = sz;
      bg.chosen_min_site[b] = u;
      chosen_root[b] = r;
    }
  }
  const double volume = std::pow(static_cast<double>(K), d);
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    bg.occupied[b] = static_cast<double>(bg.chosen_size[b]) >= delta * volume * (1 - 4 * std::numeric_limits<double>::epsilon());
  }
  for (SiteIndex u = 0; u < n; ++u) {
    const std::uint32_t bu = block_of[u];
    if (!bg.occupied[bu] || ds.find(u) != chosen_root[bu]) continue;
    for (SiteIndex v : g.neighbors(u)) {
      const std::uint32_t bv = block_of[v];
      if (v <= u || bv == bu || !bg.occupied[bv] || ds.find(v) != chosen_root[bv]) continue;
      bg.edges.emplace_back(std::min(bu, bv), std::max(bu, bv));
    }
  }
  std::sort(bg.edges.begin(), bg.edges.end());
  bg.edges.erase(std::unique(bg.edges.begin(), bg.edges.end()), bg.edges.end());
  return bg;
}

BlockConnectionStats block_connection_stats(std::span<const BlockGraph> graphs, double s) {
  if (graphs.empty()) throw InvalidInput("block connection statistics need at least one block graph");
  if (!(s > 0) || !std::isfinite(s)) throw InvalidInput("exponent s must be positive");
  const BlockGraph& ref = graphs.front();
  for (const BlockGraph& g : graphs) {
    if (g.K != ref.K || !(g.box == ref.box) || g.norm != ref.norm) {
      throw InvalidInput("block graphs must share K and box geometry");
    }
  }
  const std::size_t nb = ref.block_count();
  std::vector<Point> coords;
  coords.reserve(nb);
  for (std::uint32_t b = 0; b < nb; ++b) coords.push_back(ref.block_coords(b));
  std::map<double, BlockConnectionRow> rows;
  for (std::uint32_t a = 0; a < nb; ++a) {
    for (std::uint32_t b = a + 1; b < nb; ++b) {
      const double m = norm(coords[b] - coords[a], ref.norm);
      auto& row = rows[m];
      row.magnitude = m;
      row.pairs += graphs.size();
      for (const BlockGraph& g : graphs) {
        if (g.occupied[a] && g.occupied[b]) ++row.occupied_pairs;
      }
    }
  }
  for (const BlockGraph& g : graphs) {
    for (const auto& [a, b] : g.edges) ++rows[norm(coords[b] - coords[a], ref.norm)].connected;
  }
  BlockConnectionStats st;
  st.s = s;
  long double sxy = 0, sxx = 0;
  for (auto& [m, row] : rows) {
    row.frequency = row.pairs ? static_cast<double>(row.connected) / static_cast<double>(row.pairs) : 0.0;
    row.occupied_frequency =
        row.occupied_pairs ? static_cast<double>(row.connected) / static_cast<double>(row.occupied_pairs) : 0.0;
    if (row.occupied_pairs > 0 && row.occupied_frequency < 1.0) {
      const double x = std::pow(m, -s);
      const double y = -std::log1p(-row.occupied_frequency);
      const auto w = static_cast<long double>(row.occupied_pairs);
      sxy += w * x * y;
      sxx += w * x * x;
    }
  }
  st.beta_fit = sxx > 0 ? static_cast<double>(sxy / sxx) : 0.0;
  long double ss = 0;
  std::size_t used = 0;
  for (auto& [m, row] : rows) {
    row.fitted = -std::expm1(-st.beta_fit * std::pow(m, -s));
    row.residual = row.occupied_frequency - row.fitted;
    if (row.occupied_pairs > 0) {
      ss += static_cast<long double>(row.residual) * row.residual;
      ++used;
    }
    st.rows.push_back(row);
  }
  st.rms_residual = used ? std::sqrt(static_cast<double>(ss / used)) : 0.0;
  return st;
}

}  // namespace lrp
