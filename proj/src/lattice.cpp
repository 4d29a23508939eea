#include "lrp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "lrp/errors.hpp"

namespace lrp {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw InvalidInput("dimension must be in [1, " + std::to_string(kMaxDim) + "], got " + std::to_string(dim));
  }
}

void check_coord(Coord c) {
  if (c > kCoordLimit || c < -kCoordLimit) {
    throw InvalidInput("coordinate " + std::to_string(c) + " exceeds the supported range 2^40");
  }
}

void check_same_dim(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

Point::Point(int dim) : dim_(dim) { check_dim(dim); }

Point::Point(std::initializer_list<Coord> coords) : dim_(static_cast<int>(coords.size())) {
  check_dim(dim_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Point Point::unit(int dim, int axis) {
  Point p(dim);
  if (axis < 0 || axis >= dim) throw InvalidInput("axis out of range");
  p[axis] = 1;
  return p;
}

Point& Point::operator+=(const Point& o) {
  check_same_dim(*this, o);
  for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

Point& Point::operator-=(const Point& o) {
  check_same_dim(*this, o);
  for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

Point Point::operator-() const {
  Point r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[i] = -r.c_[i];
  return r;
}

std::strong_ordering operator<=>(const Point& a, const Point& b) {
  check_same_dim(a, b);
  for (int i = 0; i < a.dim_; ++i) {
    if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

bool operator==(const Point& a, const Point& b) {
  if (a.dim_ != b.dim_) return false;
  return std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
}

bool Point::is_zero() const noexcept {
  return std::all_of(c_.begin(), c_.begin() + dim_, [](Coord c) { return c == 0; });
}

std::string Point::str() const {
  std::string s;
  for (int i = 0; i < dim_; ++i) {
    if (i) s += ',';
    s += std::to_string(c_[i]);
  }
  return s;
}

std::string_view to_string(NormKind n) {
  switch (n) {
    case NormKind::euclidean: return "euclidean";
    case NormKind::sup: return "sup";
    case NormKind::taxicab: return "taxicab";
  }
  return "?";
}

NormKind parse_norm(std::string_view s) {
  if (s == "euclidean" || s == "l2") return NormKind::euclidean;
  if (s == "sup" || s == "linf") return NormKind::sup;
  if (s == "taxicab" || s == "l1") return NormKind::taxicab;
  throw InvalidInput("unknown norm '" + std::string(s) + "'");
}

double norm(const Point& z, NormKind kind) {
  for (int i = 0; i < z.dim(); ++i) check_coord(z[i] / 2);  // displacements may reach 2^41
  switch (kind) {
    case NormKind::euclidean: {
      if (z.dim() == 1) return static_cast<double>(std::llabs(z[0]));
      double acc = 0.0;
      for (int i = 0; i < z.dim(); ++i) {
        const double c = static_cast<double>(z[i]);
        acc += c * c;
      }
      return std::sqrt(acc);
    }
    case NormKind::sup: {
      Coord m = 0;
      for (int i = 0; i < z.dim(); ++i) m = std::max<Coord>(m, std::llabs(z[i]));
      return static_cast<double>(m);
    }
    case NormKind::taxicab: {
      Coord m = 0;
      for (int i = 0; i < z.dim(); ++i) m += std::llabs(z[i]);
      return static_cast<double>(m);
    }
  }
  return 0.0;
}

double distance(const Point& p, const Point& q, NormKind kind) {
  check_same_dim(p, q);
  for (int i = 0; i < p.dim(); ++i) {
    check_coord(p[i]);
    check_coord(q[i]);
  }
  return norm(p - q, kind);
}

BoxSpec::BoxSpec(const Point& anchor, const Point& lower, Coord side, BoxMode mode)
    : anchor_(anchor), lower_(lower), side_(side), mode_(mode) {
  long double count = 1;
  for (int i = 0; i < lower.dim(); ++i) count *= static_cast<long double>(side);
  if (count > 1.8e19L) throw InvalidInput("box site count overflows 64 bits");
  count_ = 1;
  for (int i = 0; i < lower.dim(); ++i) count_ *= static_cast<std::uint64_t>(side);
  for (int i = 0; i < lower.dim(); ++i) {
    check_coord(lower[i]);
    check_coord(lower[i] + side - 1);
  }
}

BoxSpec BoxSpec::centered(const Point& center, Coord side) {
  if (side < 1) throw InvalidInput("box side must be positive");
  if (side % 2 == 0) throw InvalidInput("centered box needs an odd side, got " + std::to_string(side));
  Point lower = center;
  for (int i = 0; i < center.dim(); ++i) lower[i] -= (side - 1) / 2;
  return BoxSpec(center, lower, side, BoxMode::centered);
}

BoxSpec BoxSpec::cornered(const Point& corner, Coord side) {
  if (side < 1) throw InvalidInput("box side must be positive");
  return BoxSpec(corner, corner, side, BoxMode::cornered);
}

Point BoxSpec::upper() const {
  Point u = lower_;
  for (int i = 0; i < u.dim(); ++i) u[i] += side_ - 1;
  return u;
}

bool BoxSpec::contains(const Point& p) const noexcept {
  if (p.dim() != dim()) return false;
  for (int i = 0; i < p.dim(); ++i) {
    const Coord r = p[i] - lower_[i];
    if (r < 0 || r >= side_) return false;
  }
  return true;
}

bool BoxSpec::contains(const BoxSpec& inner) const noexcept {
  return inner.dim() == dim() && contains(inner.lower()) && contains(inner.upper());
}

std::uint64_t BoxSpec::index_of(const Point& p) const {
  if (!contains(p)) throw InvalidInput("point " + p.str() + " outside box");
  std::uint64_t idx = 0;
  for (int i = 0; i < p.dim(); ++i) {
    idx = idx * static_cast<std::uint64_t>(side_) + static_cast<std::uint64_t>(p[i] - lower_[i]);
  }
  return idx;
}

Point BoxSpec::point_at(std::uint64_t index) const {
  Point p = lower_;
  const auto side = static_cast<std::uint64_t>(side_);
  for (int i = p.dim() - 1; i >= 0; --i) {
    p[i] += static_cast<Coord>(index % side);
    index /= side;
  }
  return p;
}

bool operator==(const BoxSpec& a, const BoxSpec& b) {
  return a.lower_ == b.lower_ && a.side_ == b.side_ && a.mode_ == b.mode_ && a.anchor_ == b.anchor_;
}

std::vector<Point> box_sites(const BoxSpec& box) {
  std::vector<Point> out;
  out.reserve(box.site_count());
  for (std::uint64_t i = 0; i < box.site_count(); ++i) out.push_back(box.point_at(i));
  return out;
}

double box_diameter(const BoxSpec& box, NormKind kind) {
  const auto m = static_cast<double>(box.side() - 1);
  const auto d = static_cast<double>(box.dim());
  switch (kind) {
    case NormKind::euclidean: return m * std::sqrt(d);
    case NormKind::sup: return m;
    case NormKind::taxicab: return m * d;
  }
  return 0.0;
}

Coord min_odd_above(double x) {
  if (!(x > 0) || !std::isfinite(x)) throw InvalidInput("scale must be a positive finite real");
  auto n = static_cast<Coord>(std::floor(x)) + 1;
  if (n % 2 == 0) ++n;
  return n;
}

std::uint64_t AnnulusSpec::site_count() const noexcept {
  if (empty()) return 0;
  return outer_.site_count() - inner_.site_count();
}

std::vector<Point> AnnulusSpec::sites() const {
  std::vector<Point> out;
  if (empty()) return out;
  out.reserve(site_count());
  for (std::uint64_t i = 0; i < outer_.site_count(); ++i) {
    Point p = outer_.point_at(i);
    if (!inner_.contains(p)) out.push_back(p);
  }
  return out;
}

AnnulusSpec annulus(const Point& center, double L) {
  const Coord plus = min_odd_above(L);
  const Coord minus = min_odd_above(L / 2);
  return AnnulusSpec(BoxSpec::centered(center, plus), BoxSpec::centered(center, minus));
}

}  // namespace lrp
