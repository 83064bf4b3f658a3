#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nahm/errors.hpp"
#include "nahm/torus_spectral.hpp"

using namespace nahm;

namespace {
const double kTwoPi = 2 * std::numbers::pi;

// Brute force: eigenvalues +-2pi|n + b w - z| for every mode and branch, sorted.
std::vector<double> brute_spectrum(const Vec3& w, const Vec3& z, double cutoff, int box) {
  std::vector<double> v;
  for (int a = -box; a <= box; ++a)
    for (int b = -box; b <= box; ++b)
      for (int c = -box; c <= box; ++c)
        for (int br : {1, -1}) {
          double x = kTwoPi * (Vec3(a, b, c) + br * w - z).norm();
          if (x <= cutoff) {
            v.push_back(x);
            v.push_back(-x);
          }
        }
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> expand(const SpectrumMultiset& s) {
  std::vector<double> v;
  for (const auto& e : s.entries)
    for (int i = 0; i < e.multiplicity; ++i) v.push_back(e.value);
  return v;
}
}  // namespace

TEST_CASE("torus points reduce into the unit cube") {
  TorusPoint p(Vec3(1.25, -0.25, 3.0));
  CHECK(p.coords[0] == doctest::Approx(0.25));
  CHECK(p.coords[1] == doctest::Approx(0.75));
  CHECK(p.coords[2] == doctest::Approx(0.0));
  CHECK(same_point(p.negated(), TorusPoint(Vec3(0.75, 0.25, 0.0))));
  CHECK(torus_distance(TorusPoint(Vec3(0.05, 0, 0)), TorusPoint(Vec3(0.95, 0, 0))) == doctest::Approx(0.1));
}

TEST_CASE("exact spectrum matches brute-force lattice enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 15; ++trial) {
    Vec3 w(u(rng), u(rng), u(rng)), z(u(rng), u(rng), u(rng));
    double cutoff = 2 + 6 * u(rng);
    auto got = expand(exact_spectrum(TorusPoint(w), TorusPoint(z), cutoff));
    // |n|_inf <= 3 covers every lattice point within 2pi*|.| <= 8 of the reduced points
    auto want = brute_spectrum(TorusPoint(w).coords, TorusPoint(z).coords, cutoff, 3);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("spectrum examples") {
  auto s0 = exact_spectrum(TorusPoint(Vec3::Zero()), TorusPoint(Vec3::Zero()), 1);
  CHECK(s0.multiplicity_of(0.0) == 4);

  auto s1 = exact_spectrum(TorusPoint(Vec3(0.3, 0, 0)), TorusPoint(Vec3(0.1, 0, 0)), 3);
  CHECK(s1.smallest_positive() == doctest::Approx(kTwoPi * 0.2).epsilon(1e-12));
  const auto& e = *std::find_if(s1.entries.begin(), s1.entries.end(),
                                [&](const SpectrumEntry& x) { return std::abs(x.value - kTwoPi * 0.2) < 1e-9; });
  bool n0_plus = false;
  for (const auto& wit : e.witnesses) n0_plus = n0_plus || (wit.n == Int3::Zero() && wit.branch == 1);
  CHECK(n0_plus);

  auto s2 = exact_spectrum(TorusPoint(Vec3(0.5, 0, 0)), TorusPoint(Vec3::Zero()), 4);
  CHECK(s2.multiplicity_of(std::numbers::pi) == 4);
  CHECK(s2.multiplicity_of(-std::numbers::pi) == 4);
}

TEST_CASE("spectrum is symmetric under negation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = exact_spectrum(TorusPoint(Vec3(u(rng), u(rng), u(rng))), TorusPoint(Vec3(u(rng), u(rng), u(rng))), 9);
    for (const auto& e : s.entries) CHECK(s.multiplicity_of(-e.value, 1e-12) == e.multiplicity);
  }
}

TEST_CASE("eigenspace ranks") {
  Vec3 w(0.3, 0.1, 0.2);
  CHECK(eigenspace(TorusPoint(w), TorusPoint(w + Vec3(0.01, 0, 0)), kTwoPi * 0.01).rank() == 1);
  Vec3 h(0.5, 0, 0);
  CHECK(eigenspace(TorusPoint(h), TorusPoint(h + Vec3(0.01, 0, 0)), kTwoPi * 0.01).rank() == 2);
  CHECK(eigenspace(TorusPoint(w), TorusPoint(w), 0.0).rank() == 2);
  CHECK_THROWS_AS(eigenspace(TorusPoint(w), TorusPoint(w), 0.123), LevelNotInSpectrum);
}

TEST_CASE("eigenspace vectors are eigenvectors of the mode operator") {
  Vec3 w(0.3, 0.1, 0.2), z(0.25, 0.4, 0.9);
  auto s = exact_spectrum(TorusPoint(w), TorusPoint(z), 5);
  for (const auto& e : s.entries) {
    auto es = eigenspace(TorusPoint(w), TorusPoint(z), e.value);
    CHECK(es.rank() == e.multiplicity);
    for (const auto& v : es.basis) {
      Vec3 k = kTwoPi * (v.n.cast<double>() + v.branch * TorusPoint(w).coords - TorusPoint(z).coords);
      // sigma . k written out by hand
      Eigen::Matrix2cd m;
      m << k[2], std::complex<double>(k[0], -k[1]), std::complex<double>(k[0], k[1]), -k[2];
      CHECK((m * v.spinor - e.value * v.spinor).norm() < 1e-10);
    }
  }
}

TEST_CASE("singular set") {
  auto W = singular_set(FlatLimit(TorusPoint(Vec3(0.3, 0, 0)), End::plus),
                        FlatLimit(TorusPoint(Vec3(0.2, 0.1, 0)), End::minus));
  CHECK(W.size() == 4);
  for (Vec3 p : {Vec3(0.3, 0, 0), Vec3(0.7, 0, 0), Vec3(0.2, 0.1, 0), Vec3(0.8, 0.9, 0)})
    CHECK(distance_to_set(TorusPoint(p), W) < 1e-12);
  CHECK(singular_set(FlatLimit(TorusPoint(Vec3(0.5, 0, 0)), End::plus),
                     FlatLimit(TorusPoint(Vec3(0.5, 0, 0)), End::minus))
            .size() == 1);
  CHECK(singular_set(FlatLimit(TorusPoint(Vec3::Zero()), End::plus), FlatLimit(TorusPoint(Vec3::Zero()), End::minus))
            .size() == 1);
}

TEST_CASE("safe radius") {
  std::vector<TorusPoint> W = {TorusPoint(Vec3(0.3, 0, 0)), TorusPoint(Vec3(0.7, 0, 0))};
  CHECK(safe_radius(W[0], W, 1.0) == doctest::Approx(0.1));
  std::vector<TorusPoint> H = {TorusPoint(Vec3(0.5, 0, 0))};
  CHECK(safe_radius(H[0], H, 0.2) == doctest::Approx(0.05));
  std::vector<TorusPoint> O = {TorusPoint(Vec3::Zero())};
  CHECK(safe_radius(O[0], O, 4.0) == doctest::Approx(0.25));
  std::vector<TorusPoint> dup = {TorusPoint(Vec3(0.3, 0, 0)), TorusPoint(Vec3(1.3, 0, 0))};
  CHECK_THROWS_AS(safe_radius(dup[0], dup, 1.0), DegenerateConfiguration);
}
