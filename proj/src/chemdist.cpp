#include "lrp/chemdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "lrp/clusters.hpp"
#include "lrp/errors.hpp"

namespace lrp {

namespace {

constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

SiteIndex checked_index(const GraphSample& g, const Point& p) {
  if (!g.contains(p)) throw InvalidInput("site " + p.str() + " outside the sample box");
  return g.index(p);
}

// BFS from src that stops as soon as dst is discovered. Returns dist (partial).
std::vector<std::uint32_t> bfs_until(const GraphSample& g, SiteIndex src, SiteIndex dst) {
  std::vector<std::uint32_t> dist(g.site_count(), kUnreached);
  std::vector<SiteIndex> queue;
  queue.push_back(src);
  dist[src] = 0;
  if (src == dst) return dist;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const SiteIndex u = queue[head];
    for (SiteIndex v : g.neighbors(u)) {
      if (dist[v] != kUnreached) continue;
      dist[v] = dist[u] + 1;
      if (v == dst) return dist;
      queue.push_back(v);
    }
  }
  return dist;
}

}  // namespace

std::vector<std::uint32_t> bfs_distances(const GraphSample& g, SiteIndex src) {
  if (src >= g.site_count()) throw InvalidInput("source outside the sample box");
  return bfs_until(g, src, std::numeric_limits<SiteIndex>::max());
}

std::optional<std::uint64_t> chemical_distance(const GraphSample& g, const Point& x, const Point& y) {
  const SiteIndex a = checked_index(g, x);
  const SiteIndex b = checked_index(g, y);
  const auto dist = bfs_until(g, a, b);
  if (dist[b] == kUnreached) return std::nullopt;
  return dist[b];
}

std::optional<PathRecord> shortest_path(const GraphSample& g, const Point& x, const Point& y) {
  const SiteIndex a = checked_index(g, x);
  const SiteIndex b = checked_index(g, y);
  const auto dist = bfs_until(g, a, b);
  if (dist[b] == kUnreached) return std::nullopt;
  std::vector<SiteIndex> rev{b};
  for (SiteIndex cur = b; cur != a;) {
    for (SiteIndex w : g.neighbors(cur)) {
      if (dist[w] != kUnreached && dist[w] + 1 == dist[cur]) {
        cur = w;
        break;
      }
    }
    rev.push_back(cur);
  }
  PathRecord p;
  p.norm = g.model().norm;
  p.indices.assign(rev.rbegin(), rev.rend());
  for (SiteIndex i : p.indices) p.sites.push_back(g.point(i));
  for (std::size_t i = 1; i < p.sites.size(); ++i) p.bond_lengths.push_back(norm(p.sites[i] - p.sites[i - 1], p.norm));
  return p;
}

DiameterResult graph_diameter(const GraphSample& g, DiameterMode mode) {
  if (mode == DiameterMode::exact && g.site_count() > 10000) {
    throw InvalidInput("exact diameter is limited to 10^4 sites");
  }
  const Labeling lab = label_components(g);
  SiteIndex start = 0;
  for (SiteIndex u = 0; u < g.site_count(); ++u) {
    if (lab.component[u] == lab.largest) {
      start = u;
      break;
    }
  }
  auto eccentricity = [&](SiteIndex s, SiteIndex* far) {
    const auto dist = bfs_distances(g, s);
    std::uint32_t best = 0;
    SiteIndex arg = s;
    for (SiteIndex u = 0; u < g.site_count(); ++u) {
      if (dist[u] != kUnreached && dist[u] > best) {
        best = dist[u];
        arg = u;
      }
    }
    if (far) *far = arg;
    return best;
  };
  DiameterResult r;
  if (mode == DiameterMode::exact) {
    for (SiteIndex u = 0; u < g.site_count(); ++u) {
      if (lab.component[u] == lab.largest) r.value = std::max<std::uint64_t>(r.value, eccentricity(u, nullptr));
    }
    return r;
  }
  SiteIndex far = start;
  eccentricity(start, &far);
  r.value = eccentricity(far, nullptr);
  r.is_lower_bound = true;
  return r;
}

std::string sigma_string(int length, std::uint64_t sigma) {
  std::string s(static_cast<std::size_t>(length), '0');
  for (int i = length - 1; i >= 0; --i, sigma >>= 1) s[static_cast<std::size_t>(i)] = (sigma & 1) ? '1' : '0';
  return s;
}

Point Hierarchy::gap(int k, std::uint64_t sigma) const {
  if (k < 0 || k >= depth()) throw InvalidInput("gap level out of range");
  return z(k + 1, 2 * sigma) - z(k + 1, 2 * sigma + 1);
}

double Hierarchy::gap_length(int k, std::uint64_t sigma) const { return lrp::norm(gap(k, sigma), norm); }

namespace {

constexpr int kMaxHierarchyDepth = 30;

struct Segment {
  std::int64_t a;
  std::int64_t b;
};

}  // namespace

Hierarchy extract_hierarchy(const PathRecord& path, int depth) {
  if (depth < 1) throw InvalidInput("hierarchy depth must be at least 1");
  if (depth > kMaxHierarchyDepth) throw InvalidInput("hierarchy depth is limited to " + std::to_string(kMaxHierarchyDepth));
  if (path.sites.size() < 2 || path.sites.front() == path.sites.back()) {
    throw InvalidInput("hierarchy extraction needs a path with distinct endpoints");
  }
  Hierarchy h;
  h.norm = path.norm;
  h.requested_depth = depth;
  const auto last = static_cast<std::int64_t>(path.sites.size() - 1);
  h.levels.push_back({path.sites.front(), path.sites.back()});
  h.positions.push_back({0, last});
  std::vector<Segment> segs{{0, last}};
  while (h.depth() < depth) {
    if (std::all_of(segs.begin(), segs.end(), [](const Segment& s) { return s.a == s.b; })) {
      h.exhausted = true;
      break;
    }
    std::vector<Point> level;
    std::vector<std::int64_t> pos;
    std::vector<Segment> next;
    level.reserve(segs.size() * 4);
    for (const Segment& s : segs) {
      std::int64_t i = s.a, j = s.a;
      if (s.a < s.b) {
        std::int64_t best = s.a;
        for (std::int64_t k = s.a + 1; k < s.b; ++k) {
          if (path.bond_lengths[static_cast<std::size_t>(k)] > path.bond_lengths[static_cast<std::size_t>(best)]) best = k;
        }
        i = best;
        j = best + 1;
      }
      for (std::int64_t q : {s.a, i, j, s.b}) {
        level.push_back(path.sites[static_cast<std::size_t>(q)]);
        pos.push_back(q);
      }
      next.push_back({s.a, i});
      next.push_back({j, s.b});
    }
    h.levels.push_back(std::move(level));
    h.positions.push_back(std::move(pos));
    segs = std::move(next);
  }
  return h;
}

namespace {

using UnorderedBond = std::pair<Point, Point>;

UnorderedBond make_bond(const Point& a, const Point& b) { return a < b ? UnorderedBond{a, b} : UnorderedBond{b, a}; }

}  // namespace

HierarchyValidation validate_hierarchy(const Hierarchy& h, const GraphSample& g, const Point& x, const Point& y) {
  HierarchyValidation v;
  auto fail = [&](int clause, std::string detail) {
    v.valid = false;
    v.violations.push_back({clause, std::move(detail)});
  };
  if (h.depth() < 1) {
    fail(1, "hierarchy has no levels");
    return v;
  }
  for (int k = 1; k <= h.depth(); ++k) {
    if (h.levels[static_cast<std::size_t>(k - 1)].size() != (std::size_t{1} << k)) {
      fail(1, "level " + std::to_string(k) + " does not hold 2^" + std::to_string(k) + " sites");
      return v;
    }
  }
  if (!(h.z(1, 0) == x)) fail(1, "z_0 = " + h.z(1, 0).str() + " differs from x = " + x.str());
  if (!(h.z(1, 1) == y)) fail(1, "z_1 = " + h.z(1, 1).str() + " differs from y = " + y.str());
  std::set<UnorderedBond> seen;
  for (int k = 0; k + 2 <= h.depth(); ++k) {
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) {
      const Point& z0 = h.z(k + 1, 2 * s);
      const Point& z1 = h.z(k + 1, 2 * s + 1);
      const Point& z00 = h.z(k + 2, 4 * s);
      const Point& z01 = h.z(k + 2, 4 * s + 1);
      const Point& z10 = h.z(k + 2, 4 * s + 2);
      const Point& z11 = h.z(k + 2, 4 * s + 3);
      const std::string sig = sigma_string(k, s);
      if (!(z00 == z0)) fail(2, "z_" + sig + "00 = " + z00.str() + " differs from z_" + sig + "0 = " + z0.str());
      if (!(z11 == z1)) fail(2, "z_" + sig + "11 = " + z11.str() + " differs from z_" + sig + "1 = " + z1.str());
      if (z01 == z10) continue;
      if (!g.contains(z01) || !g.contains(z10) || !g.has_edge(g.index(z01), g.index(z10))) {
        fail(3, "bond (" + z01.str() + ", " + z10.str() + ") for sigma '" + sig + "' is not occupied");
      }
      if (!seen.insert(make_bond(z01, z10)).second) {
        fail(4, "bond (" + z01.str() + ", " + z10.str() + ") for sigma '" + sig + "' is repeated");
      }
    }
  }
  return v;
}

HierarchyValidation validate_hierarchy(const Hierarchy& h, const GraphSample& g) {
  if (h.depth() < 1 || h.levels[0].size() != 2) {
    HierarchyValidation v;
    v.valid = false;
    v.violations.push_back({1, "hierarchy has no well-formed first level"});
    return v;
  }
  return validate_hierarchy(h, g, h.z(1, 0), h.z(1, 1));
}

namespace {

void check_gap_level(const Hierarchy& h, int k) {
  if (k < 1 || k > h.depth() - 1) {
    throw InvalidInput("gap level " + std::to_string(k) + " outside [1, " + std::to_string(h.depth() - 1) + "]");
  }
}

}  // namespace

double log_gap_product(const Hierarchy& h, int k) {
  check_gap_level(h, k);
  double acc = 0;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) acc += std::log(std::max(1.0, h.gap_length(k, s)));
  return acc;
}

double gap_product(const Hierarchy& h, int k) {
  check_gap_level(h, k);
  double acc = 1;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) acc *= std::max(1.0, h.gap_length(k, s));
  return acc;
}

bool gap_product_holds(const Hierarchy& h, int k, double N, double gamma) {
  if (!(N >= 1)) throw InvalidInput("N must be at least 1");
  if (!(gamma > 0 && gamma < 1)) throw InvalidInput("gamma must be in (0, 1)");
  const double target = std::pow(2 * gamma, k) * std::log(N);
  return log_gap_product(h, k) >= target - 1e-12 * std::max(1.0, std::abs(target));
}

std::vector<std::vector<bool>> check_regularity(const Hierarchy& h, double N, double exponent) {
  if (!(N > std::exp(1.0))) throw InvalidInput("regularity needs N > e");
  if (!std::isfinite(exponent)) throw InvalidInput("exponent must be finite");
  const double factor = std::pow(std::log(N), -exponent);
  std::vector<std::vector<bool>> table;
  for (int k = 0; k + 2 <= h.depth(); ++k) {
    std::vector<bool> row;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) {
      const double bond = norm(h.z(k + 2, 4 * s + 1) - h.z(k + 2, 4 * s + 2), h.norm);
      const double need = h.gap_length(k, s) * factor;
      row.push_back(bond >= need * (1 - 1e-12));
    }
    table.push_back(std::move(row));
  }
  return table;
}

std::size_t pigeonhole_failures(const Hierarchy& h, const PathRecord& path) {
  if (h.positions.size() != h.levels.size()) throw InvalidInput("hierarchy is not path-derived");
  std::size_t failures = 0;
  for (int k = 0; k + 2 <= h.depth(); ++k) {
    const auto& pos = h.positions[static_cast<std::size_t>(k)];
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) {
      const std::int64_t a = pos[2 * s], b = pos[2 * s + 1];
      if (a < 0 || b < 0) throw InvalidInput("hierarchy is not path-derived");
      if (a == b) continue;
      const double bond = norm(h.z(k + 2, 4 * s + 1) - h.z(k + 2, 4 * s + 2), h.norm);
      const double seg = norm(path.sites[static_cast<std::size_t>(a)] - path.sites[static_cast<std::size_t>(b)], h.norm);
      if (bond * static_cast<double>(b - a) < seg * (1 - 1e-12)) ++failures;
    }
  }
  return failures;
}

GreedyResult greedy_build(const GraphSample& g, const Point& x, const Point& y, double gamma, double rho, Coord ell,
                          int max_depth) {
  if (!g.contains(x) || !g.contains(y)) throw InvalidInput("endpoints must lie in the sample box");
  if (x == y) throw InvalidInput("greedy construction needs distinct endpoints");
  if (!(gamma > 0 && gamma < 1)) throw InvalidInput("gamma must be in (0, 1)");
  if (!(rho > 0 && rho <= 1)) throw InvalidInput("rho must be in (0, 1]");
  if (ell < 1 || ell % 2 == 0) throw InvalidInput("ell must be a positive odd integer");
  if (max_depth < 1 || max_depth > kMaxHierarchyDepth) throw InvalidInput("max_depth out of range");

  const double N = distance(x, y, g.model().norm);
  LocalClusterSearch search(g);
  std::vector<std::int8_t> dense(g.site_count(), -1);
  auto is_dense_site = [&](SiteIndex i) {
    if (dense[i] < 0) dense[i] = meets_density(search.size(i, ell), rho, ell, g.box().dim()) ? 1 : 0;
    return dense[i] == 1;
  };

  GreedyResult res;
  Hierarchy h;
  h.norm = g.model().norm;
  h.levels.push_back({x, y});
  h.positions.push_back({-1, -1});
  res.scales.push_back(N);
  std::set<Edge> used;
  for (int k = 0;; ++k) {
    const double Nk = std::pow(N, std::pow(gamma, k));
    if (Nk <= static_cast<double>(ell) || h.depth() >= max_depth) break;
    const double Nnext = std::pow(N, std::pow(gamma, k + 1));
    const auto& cur = h.levels.back();
    std::vector<Point> level;
    level.reserve(cur.size() * 2);
    for (std::size_t s = 0; s < cur.size() / 2; ++s) {
      const Point& u = cur[2 * s];
      const Point& v = cur[2 * s + 1];
      if (u == v) {
        level.insert(level.end(), {u, u, u, v});
        continue;
      }
      const AnnulusSpec au = annulus(u, Nnext);
      const AnnulusSpec av = annulus(v, Nnext);
      std::optional<Edge> found;
      for (const Point& a : au.sites()) {
        if (!g.contains(a)) continue;
        const SiteIndex ia = g.index(a);
        if (!is_dense_site(ia)) continue;
        for (SiteIndex ib : g.neighbors(ia)) {
          const Edge e{std::min(ia, ib), std::max(ia, ib)};
          if (used.count(e) || !av.contains(g.point(ib)) || !is_dense_site(ib)) continue;
          found = Edge{ia, ib};
          break;
        }
        if (found) break;
      }
      if (!found) {
        res.failure_level = h.depth() + 1;
        res.levels_built = h.depth();
        return res;
      }
      used.insert({std::min(found->u, found->v), std::max(found->u, found->v)});
      level.insert(level.end(), {u, g.point(found->u), g.point(found->v), v});
    }
    h.levels.push_back(std::move(level));
    h.positions.emplace_back(h.levels.back().size(), -1);
    res.scales.push_back(Nnext);
  }
  h.requested_depth = h.depth();
  res.levels_built = h.depth();
  res.hierarchy = std::move(h);
  return res;
}

namespace {

bool in_window(const Point& p, const Point& c, Coord half) {
  for (int i = 0; i < p.dim(); ++i) {
    if (std::llabs(p[i] - c[i]) > half) return false;
  }
  return true;
}

// Shortest path from a to b using only sites inside either window.
std::optional<std::vector<SiteIndex>> windowed_path(const GraphSample& g, SiteIndex a, SiteIndex b, Coord half) {
  if (a == b) return std::vector<SiteIndex>{a};
  const Point pa = g.point(a), pb = g.point(b);
  std::unordered_map<SiteIndex, SiteIndex> parent{{a, a}};
  std::vector<SiteIndex> queue{a};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const SiteIndex u = queue[head];
    for (SiteIndex v : g.neighbors(u)) {
      if (parent.count(v)) continue;
      const Point pv = g.point(v);
      if (!in_window(pv, pa, half) && !in_window(pv, pb, half)) continue;
      parent.emplace(v, u);
      if (v == b) {
        std::vector<SiteIndex> path{b};
        for (SiteIndex c = b; c != a;) path.push_back(c = parent[c]);
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(v);
    }
  }
  return std::nullopt;
}

std::uint64_t loop_erased_length(const std::vector<SiteIndex>& walk) {
  std::vector<SiteIndex> out;
  std::unordered_map<SiteIndex, std::size_t> where;
  for (SiteIndex v : walk) {
    auto it = where.find(v);
    if (it != where.end()) {
      for (std::size_t i = it->second + 1; i < out.size(); ++i) where.erase(out[i]);
      out.resize(it->second + 1);
      continue;
    }
    where.emplace(v, out.size());
    out.push_back(v);
  }
  return out.empty() ? 0 : out.size() - 1;
}

}  // namespace

BridgeResult bridge_gaps(const GraphSample& g, const Hierarchy& h, Coord ell) {
  if (ell < 1 || ell % 2 == 0) throw InvalidInput("ell must be a positive odd integer");
  if (h.depth() < 1) throw InvalidInput("empty hierarchy");
  const auto& bottom = h.levels.back();
  for (const Point& p : bottom) {
    if (!g.contains(p)) throw InvalidInput("hierarchy site " + p.str() + " outside the sample box");
  }
  const Coord half = (ell - 1) / 2;
  BridgeResult r;
  r.walk.push_back(g.index(bottom.front()));
  const std::size_t gaps = bottom.size() / 2;
  for (std::size_t s = 0; s < gaps; ++s) {
    const SiteIndex a = g.index(bottom[2 * s]);
    const SiteIndex b = g.index(bottom[2 * s + 1]);
    auto path = windowed_path(g, a, b, half);
    if (!path) {
      r.failed_gap = sigma_string(h.depth() - 1, s);
      return r;
    }
    r.per_gap.push_back(path->size() - 1);
    r.total_steps += path->size() - 1;
    r.walk.insert(r.walk.end(), path->begin() + 1, path->end());
    if (s + 1 < gaps) {
      const SiteIndex c = g.index(bottom[2 * s + 2]);
      if (c != b) r.walk.push_back(c);
    }
  }
  r.ok = true;
  r.walk_length = r.walk.size() - 1;
  r.loop_erased_length = loop_erased_length(r.walk);
  return r;
}

HierarchyAudit audit_hierarchy(const GraphSample& g, const Point& x, const Point& y, double gamma, int depth,
                               double exponent) {
  if (!(gamma > 0 && gamma < 1)) throw InvalidInput("gamma must be in (0, 1)");
  auto path = shortest_path(g, x, y);
  if (!path) throw InvalidInput("sites " + x.str() + " and " + y.str() + " are not connected");
  HierarchyAudit a;
  a.path = std::move(*path);
  a.hierarchy = extract_hierarchy(a.path, depth);
  a.N = distance(x, y, g.model().norm);
  a.gamma = gamma;
  a.exponent = exponent;
  const Hierarchy& h = a.hierarchy;
  for (int k = 1; k <= h.depth() - 1; ++k) {
    a.log_gap_products.push_back(log_gap_product(h, k));
    const bool ok = gap_product_holds(h, k, a.N, gamma);
    a.gap_product_ok.push_back(ok);
    a.all_gap_products_ok = a.all_gap_products_ok && ok;
  }
  if (a.N > std::exp(1.0)) {
    a.regularity = check_regularity(h, a.N, exponent);
    for (const auto& row : a.regularity) {
      for (bool b : row) a.all_regular = a.all_regular && b;
    }
  }
  const auto& pos = h.positions.back();
  for (std::size_t s = 0; s + 1 < pos.size(); s += 2) a.gap_steps += static_cast<std::uint64_t>(pos[s + 1] - pos[s]);
  for (int k = 0; k + 2 <= h.depth(); ++k) {
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) {
      if (!(h.z(k + 2, 4 * s + 1) == h.z(k + 2, 4 * s + 2))) ++a.hierarchy_bonds;
    }
  }
  a.gap_steps_reach_2n = a.gap_steps >= (std::uint64_t{1} << h.depth());
  a.gap_steps_reach_2n1 = a.gap_steps >= (std::uint64_t{1} << (h.depth() - 1));
  a.pigeonhole_failures = pigeonhole_failures(h, a.path);
  a.valid = validate_hierarchy(h, g, x, y).valid;
  return a;
}

std::string hierarchy_tree_text(const Hierarchy& h) {
  std::string out;
  auto visit = [&](auto&& self, int len, std::uint64_t sigma) -> void {
    out += std::string(static_cast<std::size_t>(2 * (len - 1)), ' ');
    out += sigma_string(len, sigma) + "  " + h.z(len, sigma).str() + '\n';
    if (len < h.depth()) {
      self(self, len + 1, 2 * sigma);
      self(self, len + 1, 2 * sigma + 1);
    }
  };
  visit(visit, 1, 0);
  visit(visit, 1, 1);
  return out;
}

}  // namespace lrp
