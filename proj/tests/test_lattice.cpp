#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "lrp/errors.hpp"
#include "lrp/lattice.hpp"

using namespace lrp;

TEST_CASE("distance examples") {
  const Point o{0, 0}, p{3, 4};
  CHECK(distance(o, p, NormKind::euclidean) == doctest::Approx(5.0));
  CHECK(distance(o, p, NormKind::sup) == 4.0);
  CHECK(distance(o, p, NormKind::taxicab) == 7.0);
  for (auto k : {NormKind::euclidean, NormKind::sup, NormKind::taxicab}) {
    CHECK(distance(p, p, k) == 0.0);
  }
  CHECK_THROWS_AS(distance(Point{0}, Point{0, 1}, NormKind::sup), InvalidInput);
}

TEST_CASE("norm parsing") {
  CHECK(parse_norm("sup") == NormKind::sup);
  CHECK(to_string(NormKind::taxicab) == "taxicab");
  CHECK_THROWS_AS(parse_norm("l7"), InvalidInput);
}

TEST_CASE("coordinates beyond the limit are rejected") {
  Point p(1);
  p[0] = kCoordLimit + 1;
  CHECK_THROWS_AS(distance(p, Point{0}, NormKind::euclidean), InvalidInput);
  CHECK_THROWS_AS(BoxSpec::cornered(p, 1), InvalidInput);
  p[0] = 2 * kCoordLimit + 4;
  CHECK_THROWS_AS(norm(p, NormKind::sup), InvalidInput);
}

TEST_CASE("norm axioms on random triples") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<Coord> c(-50, 50);
  std::uniform_int_distribution<int> dims(1, 4);
  for (int it = 0; it < 2000; ++it) {
    const int d = dims(gen);
    Point a(d), b(d), e(d);
    for (int i = 0; i < d; ++i) {
      a[i] = c(gen);
      b[i] = c(gen);
      e[i] = c(gen);
    }
    const Coord m = c(gen);
    for (auto k : {NormKind::euclidean, NormKind::sup, NormKind::taxicab}) {
      CHECK(distance(a, e, k) <= distance(a, b, k) + distance(b, e, k) + 1e-9);
      CHECK(distance(a, b, k) == distance(b, a, k));
      Point scaled(d);
      for (int i = 0; i < d; ++i) scaled[i] = m * a[i];
      CHECK(norm(scaled, k) == doctest::Approx(std::abs(static_cast<double>(m)) * norm(a, k)));
      CHECK((distance(a, b, k) == 0.0) == (a == b));
    }
  }
}

TEST_CASE("box sites") {
  auto s1 = box_sites(BoxSpec::cornered(Point{0}, 3));
  CHECK(s1 == std::vector<Point>{Point{0}, Point{1}, Point{2}});

  auto s2 = box_sites(BoxSpec::centered(Point{0, 0}, 3));
  REQUIRE(s2.size() == 9);
  CHECK(s2.front() == Point{-1, -1});
  CHECK(s2.back() == Point{1, 1});
  CHECK(std::is_sorted(s2.begin(), s2.end()));
  CHECK(std::set<Point>(s2.begin(), s2.end()).size() == 9);

  auto s3 = box_sites(BoxSpec::centered(Point{5}, 5));
  CHECK(s3 == std::vector<Point>{Point{3}, Point{4}, Point{5}, Point{6}, Point{7}});

  CHECK_THROWS_AS(BoxSpec::centered(Point{0}, 4), InvalidInput);
  CHECK_THROWS_AS(BoxSpec::cornered(Point{0}, 0), InvalidInput);
}

TEST_CASE("box indexing round trip") {
  const BoxSpec b = BoxSpec::cornered(Point{-2, 3, 1}, 4);
  CHECK(b.site_count() == 64);
  const auto sites = box_sites(b);
  for (std::uint64_t i = 0; i < sites.size(); ++i) {
    CHECK(b.index_of(sites[i]) == i);
    CHECK(b.point_at(i) == sites[i]);
    CHECK(b.contains(sites[i]));
  }
  CHECK_FALSE(b.contains(Point{-3, 3, 1}));
  CHECK(b.contains(BoxSpec::cornered(Point{-1, 4, 2}, 3)));
  CHECK_FALSE(b.contains(BoxSpec::cornered(Point{-1, 4, 2}, 4)));
}

TEST_CASE("annulus examples") {
  const AnnulusSpec a = annulus(Point{0}, 10);
  CHECK(a.outer().side() == 11);
  CHECK(a.inner().side() == 7);
  CHECK(a.sites() == std::vector<Point>{Point{-5}, Point{-4}, Point{4}, Point{5}});
  CHECK(a.site_count() == 4);

  const AnnulusSpec e = annulus(Point{0}, 2);
  CHECK(e.outer().side() == 3);
  CHECK(e.inner().side() == 3);
  CHECK(e.empty());
  CHECK(e.sites().empty());
  CHECK(e.site_count() == 0);
}

TEST_CASE("annulus membership matches the set difference") {
  for (int d = 1; d <= 3; ++d) {
    for (double L : {3.0, 4.5, 7.0, 10.0}) {
      const Point c = d == 1 ? Point{2} : (d == 2 ? Point{1, -1} : Point{0, 1, 2});
      const AnnulusSpec a = annulus(c, L);
      const auto outer = box_sites(a.outer());
      std::uint64_t count = 0;
      for (const Point& p : outer) {
        const bool in = a.outer().contains(p) && !a.inner().contains(p);
        CHECK(a.contains(p) == in);
        count += in;
      }
      CHECK(count == a.site_count());
      const auto lp = static_cast<std::uint64_t>(a.outer().side());
      const auto lm = static_cast<std::uint64_t>(a.inner().side());
      std::uint64_t po = 1, pi = 1;
      for (int i = 0; i < d; ++i) {
        po *= lp;
        pi *= lm;
      }
      CHECK(a.site_count() == (a.empty() ? 0 : po - pi));
    }
  }
}

TEST_CASE("min odd above") {
  CHECK(min_odd_above(10) == 11);
  CHECK(min_odd_above(11) == 13);
  CHECK(min_odd_above(1) == 3);
  CHECK(min_odd_above(0.5) == 1);
  CHECK(min_odd_above(5.5) == 7);
}

TEST_CASE("box diameter closed form against exhaustive maximum") {
  CHECK(box_diameter(BoxSpec::cornered(Point{0, 0}, 1), NormKind::euclidean) == 0.0);
  CHECK(box_diameter(BoxSpec::cornered(Point{0}, 9), NormKind::taxicab) == 8.0);
  CHECK(box_diameter(BoxSpec::centered(Point{0, 0}, 3), NormKind::euclidean) == doctest::Approx(2 * std::sqrt(2.0)));
  for (int d = 1; d <= 3; ++d) {
    for (Coord side = 1; side <= 5; ++side) {
      const BoxSpec b = BoxSpec::cornered(Point::zero(d), side);
      const auto sites = box_sites(b);
      for (auto k : {NormKind::euclidean, NormKind::sup, NormKind::taxicab}) {
        double best = 0;
        for (const auto& p : sites) {
          for (const auto& q : sites) best = std::max(best, distance(p, q, k));
        }
        CHECK(box_diameter(b, k) == doctest::Approx(best).epsilon(1e-12));
      }
    }
  }
}
