#pragma once

// Graph distances on a sampled configuration, and binary hierarchies of sites
// hanging off a path: extraction, validation, gap statistics, greedy
// construction from dense sites, and gap bridging.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrp/bondspace.hpp"

namespace lrp {

std::optional<std::uint64_t> chemical_distance(const GraphSample& g, const Point& x, const Point& y);

struct PathRecord {
  std::vector<Point> sites;
  std::vector<SiteIndex> indices;
  std::vector<double> bond_lengths;  // |z_{i-1} - z_i| under the model norm
  NormKind norm = NormKind::euclidean;

  std::size_t hops() const noexcept { return bond_lengths.size(); }
};

// Minimal path; each site is entered from its lexicographically smallest
// neighbour one step closer to x.
std::optional<PathRecord> shortest_path(const GraphSample& g, const Point& x, const Point& y);

// Breadth-first distances from src; unreachable sites hold UINT32_MAX.
std::vector<std::uint32_t> bfs_distances(const GraphSample& g, SiteIndex src);

enum class DiameterMode { exact, two_sweep_lower };

struct DiameterResult {
  std::uint64_t value = 0;
  bool is_lower_bound = false;
};

// Diameter of the largest component.
DiameterResult graph_diameter(const GraphSample& g, DiameterMode mode);

// Binary strings sigma of length k are stored as integers with the first
// character most significant. Level k (1..depth) holds 2^k sites.
struct Hierarchy {
  std::vector<std::vector<Point>> levels;
  // Position of each site along the source path, or -1 when not path-derived.
  std::vector<std::vector<std::int64_t>> positions;
  NormKind norm = NormKind::euclidean;
  int requested_depth = 0;
  bool exhausted = false;  // recursion ran out of bonds before requested_depth

  int depth() const noexcept { return static_cast<int>(levels.size()); }
  const Point& z(int level, std::uint64_t sigma) const { return levels.at(static_cast<std::size_t>(level - 1)).at(sigma); }
  // t_sigma = z_{sigma 0} - z_{sigma 1} for |sigma| = k, 0 <= k <= depth - 1.
  Point gap(int k, std::uint64_t sigma) const;
  double gap_length(int k, std::uint64_t sigma) const;
};

std::string sigma_string(int length, std::uint64_t sigma);

// Longest-bond splitting of a path (earliest bond on ties); an empty segment
// collapses to its endpoint.
Hierarchy extract_hierarchy(const PathRecord& path, int depth);

struct HierarchyViolation {
  int clause = 0;  // 1..4
  std::string detail;
};

struct HierarchyValidation {
  bool valid = true;
  std::vector<HierarchyViolation> violations;
};

HierarchyValidation validate_hierarchy(const Hierarchy& h, const GraphSample& g, const Point& x, const Point& y);
HierarchyValidation validate_hierarchy(const Hierarchy& h, const GraphSample& g);  // x, y taken from level 1

// prod over sigma in {0,1}^k of (|t_sigma| v 1), 1 <= k <= depth - 1.
double gap_product(const Hierarchy& h, int k);
double log_gap_product(const Hierarchy& h, int k);
bool gap_product_holds(const Hierarchy& h, int k, double N, double gamma);  // product >= N^{(2 gamma)^k}

// regularity[k][sigma] for 0 <= k <= depth - 2: does the bond (z_{sigma01}, z_{sigma10})
// have length >= |t_sigma| (log N)^-exponent?
std::vector<std::vector<bool>> check_regularity(const Hierarchy& h, double N, double exponent);

// Per gap of a path-derived hierarchy: the chosen bond is at least the segment's
// endpoint distance divided by its hop count. Returns the number of failures.
std::size_t pigeonhole_failures(const Hierarchy& h, const PathRecord& path);

struct GreedyResult {
  std::optional<Hierarchy> hierarchy;
  int failure_level = 0;      // level whose bonds could not be found; 0 on success
  int levels_built = 0;
  std::vector<double> scales;  // N_k per built level
};

// Level by level, gap (u, v) at level k looks for the first bond between a dense
// site of the annulus B_{N_{k+1}}(u) and a dense site of B_{N_{k+1}}(v), scanning
// the dense sites of the first annulus lexicographically and their neighbours in
// ascending order; bonds already used are skipped. Stops once N_k <= ell.
GreedyResult greedy_build(const GraphSample& g, const Point& x, const Point& y, double gamma, double rho, Coord ell,
                          int max_depth = 30);

struct BridgeResult {
  bool ok = false;
  std::string failed_gap;             // sigma of the first unbridgeable gap
  std::uint64_t total_steps = 0;      // summed gap path lengths
  std::vector<std::uint64_t> per_gap;
  std::vector<SiteIndex> walk;        // x to y through gaps and hierarchy bonds
  std::uint64_t walk_length = 0;
  std::uint64_t loop_erased_length = 0;
};

// Each bottom gap is joined by BFS inside the union of the ell-windows around
// its two endpoints.
BridgeResult bridge_gaps(const GraphSample& g, const Hierarchy& h, Coord ell);

struct HierarchyAudit {
  Hierarchy hierarchy;
  PathRecord path;
  double N = 0;
  double gamma = 0;
  double exponent = 0;
  std::vector<double> log_gap_products;  // k = 1..depth-1
  std::vector<bool> gap_product_ok;
  std::vector<std::vector<bool>> regularity;
  bool all_gap_products_ok = true;
  bool all_regular = true;
  std::uint64_t gap_steps = 0;        // sum of |pi_sigma| over bottom gaps
  std::uint64_t hierarchy_bonds = 0;  // distinct-endpoint bonds
  bool gap_steps_reach_2n = false;    // gap_steps >= 2^depth
  bool gap_steps_reach_2n1 = false;   // gap_steps >= 2^(depth-1)
  std::size_t pigeonhole_failures = 0;
  bool valid = false;
};

HierarchyAudit audit_hierarchy(const GraphSample& g, const Point& x, const Point& y, double gamma, int depth,
                               double exponent);

// Indented tree: one line per sigma with its site.
std::string hierarchy_tree_text(const Hierarchy& h);

}  // namespace lrp
