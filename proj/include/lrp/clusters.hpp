#pragma once

// Connected components of a sampled configuration: global labeling, local
// clusters inside windows, dense sites, and K-block coarse graining.

#include <cstdint>
#include <span>
#include <vector>

#include "lrp/bondspace.hpp"

namespace lrp {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);
  std::uint32_t find(std::uint32_t a) noexcept;
  bool unite(std::uint32_t a, std::uint32_t b) noexcept;  // false if already joined
  std::uint32_t size_of(std::uint32_t a) noexcept { return size_[find(a)]; }
  std::size_t element_count() const noexcept { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

// Component ids are numbered by their lexicographically minimal site, so id 0
// contains site 0. The largest component breaks size ties by the smaller id.
struct Labeling {
  std::vector<std::uint32_t> component;  // per site
  std::vector<std::uint64_t> sizes;      // per id
  std::uint32_t largest = 0;

  std::size_t count() const noexcept { return sizes.size(); }
  std::uint64_t largest_size() const noexcept { return sizes.empty() ? 0 : sizes[largest]; }
  std::vector<SiteIndex> members(std::uint32_t id) const;
};

Labeling label_components(const GraphSample& g);
double largest_component_fraction(const GraphSample& g);

// Breadth-first search from x using only bonds with both ends in the centered
// window of side ell around x (clipped to the sample box). Reusable scratch.
class LocalClusterSearch {
 public:
  explicit LocalClusterSearch(const GraphSample& g);
  std::size_t size(SiteIndex x, Coord ell);
  // Sites of the last search, in discovery order.
  std::span<const SiteIndex> last() const noexcept { return queue_; }
  // True if the window of the last search was clipped by the sample box.
  bool last_clipped() const noexcept { return clipped_; }

 private:
  const GraphSample& g_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<SiteIndex> queue_;
  bool clipped_ = false;
};

std::vector<Point> local_cluster(const GraphSample& g, const Point& x, Coord ell);
bool is_dense(const GraphSample& g, const Point& x, double rho, Coord ell);
// |C| >= rho ell^d, with a few ulps of slack so exact boundary cases count as dense.
bool meets_density(std::size_t cluster_size, double rho, Coord ell, int dim);

enum class MarginPolicy { require, waive };

struct DenseReport {
  BoxSpec region = BoxSpec::cornered(Point::zero(1), 1);
  double rho = 0;
  Coord ell = 1;
  std::vector<Point> dense_sites;    // lexicographic
  std::uint64_t count = 0;
  std::vector<Point> clipped_sites;  // region sites whose window left the sample box
};

// With MarginPolicy::require every window must fit in the sample box.
DenseReport dense_set(const GraphSample& g, const BoxSpec& region, double rho, Coord ell,
                      MarginPolicy margin = MarginPolicy::require);

struct BlockGraph {
  Coord K = 1;
  double delta = 0;
  BoxSpec box = BoxSpec::cornered(Point::zero(1), 1);
  NormKind norm = NormKind::euclidean;
  Coord blocks_per_axis = 1;
  std::vector<std::uint8_t> occupied;          // per block, lexicographic block order
  std::vector<SiteIndex> chosen_min_site;       // minimal site of the chosen component
  std::vector<std::uint64_t> chosen_size;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // sorted block pairs, first < second

  std::size_t block_count() const noexcept { return occupied.size(); }
  Point block_coords(std::uint32_t b) const;
  double occupancy_rate() const;
};

BlockGraph block_renormalize(const GraphSample& g, Coord K, double delta);

struct BlockConnectionRow {
  double magnitude = 0;        // block displacement |x - y| in block units
  std::uint64_t pairs = 0;     // block pairs at this magnitude, summed over inputs
  std::uint64_t connected = 0;
  std::uint64_t occupied_pairs = 0;  // pairs with both blocks occupied
  double frequency = 0;          // connected / pairs
  double occupied_frequency = 0; // connected / occupied_pairs
  double fitted = 0;             // 1 - exp(-beta_fit m^-s)
  double residual = 0;           // occupied_frequency - fitted
};

struct BlockConnectionStats {
  std::vector<BlockConnectionRow> rows;  // ascending magnitude
  double s = 0;
  double beta_fit = 0;
  double rms_residual = 0;
};

// beta_fit is the least-squares slope of -log(1 - f) against m^-s over rows with
// occupied pairs and f < 1, f being the occupied-pair frequency.
BlockConnectionStats block_connection_stats(std::span<const BlockGraph> graphs, double s);

}  // namespace lrp
