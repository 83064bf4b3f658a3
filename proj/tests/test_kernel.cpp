#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nahm/errors.hpp"
#include "nahm/kernel.hpp"
#include "nahm/models.hpp"

using namespace nahm;

namespace {
const double kTwoPi = 2 * std::numbers::pi;

ConnectionPath flat_path(const Vec3& w, const Discretization& d, double beta = 1.0) {
  return ConnectionPath(std::make_shared<FlatSource>(w), w, w, beta, d);
}

// Levels +-2 pi |n + b w - z| of the flat operator, by brute force.
std::vector<double> flat_levels(const Vec3& w, const Vec3& z, int reach = 3) {
  std::vector<double> out;
  for (int i = -reach; i <= reach; ++i)
    for (int j = -reach; j <= reach; ++j)
      for (int k = -reach; k <= reach; ++k)
        for (int b : {1, -1}) {
          double l = kTwoPi * (Vec3(i, j, k) + b * w - z).norm();
          out.push_back(l);
          out.push_back(-l);
        }
  return out;
}

// Flat path: ker D_delta solves phi' = -H phi, so phi = exp(-lam t) v lies in
// L^2_delta iff -delta_+ < lam < -delta_-; coker is the mirror interval.
int flat_index_oracle(const Vec3& w, const Vec3& z, const Weight& d) {
  int ker = 0, coker = 0;
  for (double l : flat_levels(w, z)) {
    ker += (-d.plus < l && l < -d.minus);
    coker += (-d.minus < l && l < -d.plus);
  }
  return ker - coker;
}

Discretization small_disc() {
  Discretization d;
  d.t_max = 4;
  d.n_t = 81;
  return d;
}
}  // namespace

TEST_CASE("flat path has no kernel at zero weight") {
  auto d = small_disc();
  Vec3 w(0.13, 0.21, 0.37), z(0.05, 0.1, 0.2);
  auto A = flat_path(w, d);
  auto r = kernel(assemble_dirac(A, z, {0, 0}, d, Which::D), 4);
  CHECK(r.dim_ker == 0);
  CHECK(r.dim_coker == 0);
  CHECK(r.index == 0);
  REQUIRE(r.singular_values.size() == 4);
  CHECK(r.singular_values[0] > 1.0);
}

TEST_CASE("flat index matches the modewise exponential count") {
  auto d = small_disc();
  d.t_max = 6;
  d.n_t = 121;
  d.fourier_cut = 2;
  Vec3 w(0.3, 0.1, 0.0), z(0, 0, 0);
  auto A = flat_path(w, d);
  // smallest level 2 pi sqrt(0.1) ~ 1.987, next 2 pi sqrt(0.5) ~ 4.44
  for (Weight wt : {Weight{-1.0, 1.0}, Weight{1.0, -1.0}, Weight{-2.5, 2.5}, Weight{2.5, -2.5},
                    Weight{-2.5, -1.0}, Weight{0.5, 2.2}}) {
    CAPTURE(wt.minus);
    CAPTURE(wt.plus);
    auto r = kernel(assemble_dirac(A, z, wt, d, Which::D), 0);
    CHECK(r.index == flat_index_oracle(w, z, wt));
  }
}

TEST_CASE("abelian path index equals minus spectral flow") {
  auto d = small_disc();
  d.t_max = 5;
  d.n_t = 161;
  Vec3 z(0.05, 0.45, 0.7);
  auto P = make_abelian_path({0.13, 0.21, 0.37}, {0.29, 0.27, 0.41}, Profile::linear_smoothed, 2.0);
  auto r = kernel(assemble_dirac(P.path, z, {0, 0}, d, Which::D), 0);
  int sf = spectral_flow(P.path, z, d);
  CHECK(r.index == -sf);
  // abelian levels are +-|k(t)| with k(t) in R^3: no sign change, no flow
  CHECK(sf == 0);
}

TEST_CASE("wall crossing changes the index by the eigenspace rank") {
  auto d = small_disc();
  d.t_max = 8;
  d.n_t = 321;
  d.fourier_cut = 2;
  Vec3 z(0, 0, 0);
  SUBCASE("rank one at a generic twist") {
    auto A = flat_path({0.3, 0.1, 0.0}, d);
    // levels 2 pi |(0.25, 0, -0.2)| ~ 2.01 and 2 pi |(0.35, 0.2, 0.2)| ~ 2.83 split
    auto wc = wall_crossing_check(A, {0.05, 0.1, 0.2}, {0, 1.8}, {0, 2.2}, d);
    CHECK(wc.eigenspace_rank == 1);
    CHECK(std::abs(wc.predicted) == 1);
    CHECK(wc.measured == wc.predicted);
  }
  SUBCASE("rank two at z = 0 from the two summands") {
    auto A = flat_path({0.3, 0.1, 0.0}, d);
    auto wc = wall_crossing_check(A, z, {0, 1.8}, {0, 2.2}, d);
    CHECK(wc.eigenspace_rank == 2);
    CHECK(std::abs(wc.predicted) == 2);
    CHECK(wc.measured == wc.predicted);
  }
  SUBCASE("rank four when 2w is integral") {
    auto A = flat_path({0.5, 0.0, 0.0}, d);
    double l = kTwoPi * 0.5;
    auto wc = wall_crossing_check(A, z, {0, l - 0.3}, {0, l + 0.3}, d);
    CHECK(wc.eigenspace_rank == 4);
    CHECK(std::abs(wc.predicted) == 4);
    CHECK(wc.measured == wc.predicted);
  }
  SUBCASE("equal weights") {
    auto A = flat_path({0.3, 0.1, 0.0}, d);
    auto wc = wall_crossing_check(A, z, {0.4, -0.4}, {0.4, -0.4}, d);
    CHECK(std::isnan(wc.wall));
    CHECK(wc.predicted == 0);
    CHECK(wc.measured == 0);
  }
  SUBCASE("two walls at once") {
    auto A = flat_path({0.3, 0.1, 0.0}, d);
    CHECK_THROWS_AS(wall_crossing_check(A, z, {-2.2, -2.2}, {2.2, 2.2}, d), NotAdjacent);
  }
}

TEST_CASE("spectral flow of flat and reversed paths") {
  auto d = small_disc();
  Vec3 z(0.1, 0.2, 0.3);
  auto A = flat_path({0.13, 0.21, 0.37}, d);
  auto sf = spectral_flow_events(A, z, d);
  CHECK(sf.flow == 0);
  CHECK(sf.events.empty());
  auto P = make_abelian_path({0.13, 0.21, 0.37}, {0.29, 0.27, 0.41}, Profile::tanh, 2.0);
  auto Q = make_abelian_path({0.29, 0.27, 0.41}, {0.13, 0.21, 0.37}, Profile::tanh, 2.0);
  CHECK(spectral_flow(P.path, z, d) == -spectral_flow(Q.path, z, d));
}

TEST_CASE("walls and degenerate limits are rejected") {
  auto d = small_disc();
  Vec3 w(0.25, 0, 0), z(0, 0, 0);
  auto A = flat_path(w, d);
  Weight on_wall{0, kTwoPi * 0.25};
  CHECK_FALSE(is_fredholm(A, z, on_wall));
  CHECK(is_fredholm(A, z, {0, 1.0}));
  CHECK_THROWS_AS(kernel(assemble_dirac(A, z, on_wall, d, Which::D), 0), NotFredholm);
  // z on W: 0 is a limit eigenvalue
  CHECK_THROWS_AS(spectral_flow(A, w, d), CrossingAtBoundary);
}

TEST_CASE("Fredholm grid lists the limit spectra") {
  auto d = small_disc();
  Vec3 w(0.3, 0.1, 0.0), z(0, 0, 0);
  auto A = flat_path(w, d);
  auto g = fredholm_grid(A, z, 5.0);
  std::vector<double> oracle;
  for (double l : flat_levels(w, z))
    if (std::abs(l) <= 5.0) oracle.push_back(l);
  std::sort(oracle.begin(), oracle.end());
  oracle.erase(std::unique(oracle.begin(), oracle.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
               oracle.end());
  REQUIRE(g.spec_plus.size() == oracle.size());
  for (size_t i = 0; i < oracle.size(); ++i) CHECK(g.spec_plus[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  CHECK(g.is_on_wall({oracle[0], 0}));
}

TEST_CASE("index of D at delta is minus index of D* at minus delta") {
  auto d = small_disc();
  d.n_t = 121;
  auto P = make_abelian_path({0.13, 0.21, 0.37}, {0.29, 0.27, 0.41}, Profile::linear_smoothed, 2.0);
  Vec3 z(0.2, 0.24, 0.39);
  for (Weight wt : {Weight{0, 0}, Weight{-0.5, 0.5}, Weight{0.5, -0.5}, Weight{1.5, 0.3}}) {
    CAPTURE(wt.minus);
    CAPTURE(wt.plus);
    auto a = kernel(assemble_dirac(P.path, z, wt, d, Which::D), 0);
    auto b = kernel(assemble_dirac(P.path, z, -wt, d, Which::DStar), 0);
    CHECK(a.index == -b.index);
    CHECK(a.dim_ker == b.dim_coker);
  }
}
