#pragma once

// Integer-lattice geometry on Z^d: points, norms, boxes and annuli.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace lrp {

using Coord = std::int64_t;

inline constexpr int kMaxDim = 8;
// Coordinates are bounded so that every distance computation stays exact enough
// and overflow-free; anything outside is rejected with InvalidInput.
inline constexpr Coord kCoordLimit = Coord{1} << 40;

class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<Coord> coords);

  static Point zero(int dim) { return Point(dim); }
  static Point unit(int dim, int axis);

  int dim() const noexcept { return dim_; }
  Coord operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  Coord& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }

  Point& operator+=(const Point& o);
  Point& operator-=(const Point& o);
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  Point operator-() const;

  // Lexicographic, first coordinate most significant. Dimensions must agree.
  friend std::strong_ordering operator<=>(const Point& a, const Point& b);
  friend bool operator==(const Point& a, const Point& b);

  bool is_zero() const noexcept;
  std::string str() const;  // "c0,c1,..."

 private:
  std::array<Coord, kMaxDim> c_{};
  int dim_ = 0;
};

enum class NormKind { euclidean, sup, taxicab };

std::string_view to_string(NormKind n);
NormKind parse_norm(std::string_view s);

// |z| of a displacement under the chosen norm.
double norm(const Point& z, NormKind kind);
double distance(const Point& p, const Point& q, NormKind kind);

enum class BoxMode { centered, cornered };

// A box of side^d sites. Centered boxes are anchored at their center and need an
// odd side; cornered boxes are anchored at their lexicographically minimal corner.
class BoxSpec {
 public:
  static BoxSpec centered(const Point& center, Coord side);
  static BoxSpec cornered(const Point& corner, Coord side);

  int dim() const noexcept { return lower_.dim(); }
  Coord side() const noexcept { return side_; }
  BoxMode mode() const noexcept { return mode_; }
  const Point& anchor() const noexcept { return anchor_; }
  const Point& lower() const noexcept { return lower_; }
  Point upper() const;  // inclusive
  std::uint64_t site_count() const noexcept { return count_; }

  bool contains(const Point& p) const noexcept;
  bool contains(const BoxSpec& inner) const noexcept;

  // Lexicographic rank of p inside the box; p must be contained.
  std::uint64_t index_of(const Point& p) const;
  Point point_at(std::uint64_t index) const;

  friend bool operator==(const BoxSpec& a, const BoxSpec& b);

 private:
  BoxSpec(const Point& anchor, const Point& lower, Coord side, BoxMode mode);
  Point anchor_;
  Point lower_;
  Coord side_ = 0;
  BoxMode mode_ = BoxMode::cornered;
  std::uint64_t count_ = 0;
};

// All sites of the box in lexicographic order.
std::vector<Point> box_sites(const BoxSpec& box);

// Max pairwise distance over the box, closed form in side and norm.
double box_diameter(const BoxSpec& box, NormKind kind);

// Minimal odd integer strictly larger than x (x > 0).
Coord min_odd_above(double x);

// B_L(x): centered box of side L+ minus centered box of side L-, where L+ is the
// minimal odd integer above L and L- the minimal odd integer above L/2.
class AnnulusSpec {
 public:
  AnnulusSpec(const BoxSpec& outer, const BoxSpec& inner) : outer_(outer), inner_(inner) {}

  const BoxSpec& outer() const noexcept { return outer_; }
  const BoxSpec& inner() const noexcept { return inner_; }
  bool empty() const noexcept { return outer_.side() <= inner_.side(); }
  bool contains(const Point& p) const noexcept { return outer_.contains(p) && !inner_.contains(p); }
  std::uint64_t site_count() const noexcept;
  std::vector<Point> sites() const;  // lexicographic

 private:
  BoxSpec outer_;
  BoxSpec inner_;
};

AnnulusSpec annulus(const Point& center, double L);

}  // namespace lrp
