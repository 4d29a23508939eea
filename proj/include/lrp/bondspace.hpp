#pragma once

// Connection-probability law p_xy = 1 - exp(-q(x - y)) and samplers for the
// induced independent bond configuration on a finite box.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lrp/lattice.hpp"

namespace lrp {

enum class ProfileKind { shifted_power, pure_power, custom_table };

std::string_view to_string(ProfileKind k);
ProfileKind parse_profile(std::string_view s);

// q as a function of |z| only.
//   shifted_power: q = beta (1 + |z|)^-s
//   pure_power:    q = beta |z|^-s   (|z| >= 1 on the lattice)
//   custom_table:  explicit q per magnitude; a lookup miss is an error, never 0.
class ConnectionProfile {
 public:
  static ConnectionProfile shifted_power(double beta, double s);
  static ConnectionProfile pure_power(double beta, double s);
  static ConnectionProfile custom_table(std::vector<std::pair<double, double>> magnitude_to_q);

  ProfileKind kind() const noexcept { return kind_; }
  double beta() const noexcept { return beta_; }
  double s() const noexcept { return s_; }
  const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

  double q(double magnitude) const;

 private:
  ProfileKind kind_ = ProfileKind::shifted_power;
  double beta_ = 0.0;
  double s_ = 1.0;
  std::vector<std::pair<double, double>> table_;  // sorted by magnitude
};

struct BondModel {
  int dim = 1;
  ConnectionProfile profile = ConnectionProfile::shifted_power(0.0, 1.0);
  double nn_prob = 0.0;  // independent nearest-neighbour overlay; 0 = none
  NormKind norm = NormKind::euclidean;

  void validate() const;
  std::string describe() const;  // "dim=1 profile=shifted-power beta=1 s=1.5 nn_prob=0 norm=euclidean"
};

double q_value(const BondModel& model, const Point& displacement);
// Bond probability for a displacement, including the nearest-neighbour overlay.
double displacement_probability(const BondModel& model, const Point& displacement);
double pair_probability(const BondModel& model, const Point& x, const Point& y);

// Sum of pair probabilities over unordered in-box pairs, one term per displacement class.
double expected_edge_count(const BondModel& model, const BoxSpec& box);

// Exact probability that at least one bond joins the two disjoint site sets.
double box_connection_probability(const BondModel& model, std::span<const Point> b0, std::span<const Point> b1);

using SiteIndex = std::uint32_t;

struct Edge {
  SiteIndex u;
  SiteIndex v;  // u < v
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// One sampled bond configuration on a box. Sites are addressed by their
// lexicographic index in the box; neighbour lists are sorted ascending.
class GraphSample {
 public:
  GraphSample() = default;

  // Edges may come in any order and orientation; duplicates are merged.
  static GraphSample from_edges(const BoxSpec& box, const BondModel& model, std::uint64_t seed,
                                std::vector<Edge> edges);
  static GraphSample from_point_edges(const BoxSpec& box, const BondModel& model, std::uint64_t seed,
                                      const std::vector<std::pair<Point, Point>>& edges);

  const BoxSpec& box() const noexcept { return box_; }
  const BondModel& model() const noexcept { return model_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t edge_count() const noexcept { return adj_.size() / 2; }
  SiteIndex site_count() const noexcept { return static_cast<SiteIndex>(offsets_.size() - 1); }

  std::span<const SiteIndex> neighbors(SiteIndex i) const noexcept {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  std::size_t degree(SiteIndex i) const noexcept { return offsets_[i + 1] - offsets_[i]; }
  bool has_edge(SiteIndex a, SiteIndex b) const noexcept;

  Point point(SiteIndex i) const { return box_.point_at(i); }
  SiteIndex index(const Point& p) const { return static_cast<SiteIndex>(box_.index_of(p)); }
  bool contains(const Point& p) const noexcept { return box_.contains(p); }

  std::vector<Edge> edges() const;  // sorted, u < v
  std::size_t memory_bytes() const noexcept;

 private:
  friend class GraphBuilder;
  BoxSpec box_ = BoxSpec::cornered(Point::zero(1), 1);
  BondModel model_;
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> offsets_{0, 0};
  std::vector<SiteIndex> adj_;
};

struct SamplerOptions {
  int threads = 1;
  std::size_t memory_budget_bytes = std::size_t{8} << 30;
};

// Per-displacement-class geometric skip sampling; the substream of each class is
// seeded by a stable hash of (seed, displacement), so results do not depend on
// the thread count.
GraphSample sample_graph(const BondModel& model, const BoxSpec& box, std::uint64_t seed,
                         const SamplerOptions& options = {});

// Coupled samples for several models sharing dim and norm: one uniform variate per
// candidate pair, so a model whose pair probabilities dominate another's always
// yields a superset of edges.
std::vector<GraphSample> sample_graph_coupled(std::span<const BondModel> models, const BoxSpec& box,
                                              std::uint64_t seed, const SamplerOptions& options = {});

// Explicit per-pair coin flips; test oracle for boxes with at most 10^4 sites.
GraphSample sample_graph_naive(const BondModel& model, const BoxSpec& box, std::uint64_t seed);

// Header line with model, box and seed, then one "x<TAB>y" line per edge.
void write_edge_list(std::ostream& out, const GraphSample& g);
std::string edge_list_text(const GraphSample& g);

}  // namespace lrp
