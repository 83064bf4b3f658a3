#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nahm/errors.hpp"
#include "nahm/kernel.hpp"
#include "nahm/models.hpp"
#include "nahm/transform.hpp"

using namespace nahm;

namespace {
const Vec3 kWm(0.13, 0.21, 0.37), kWp(0.29, 0.27, 0.41);

const AbelianPath& default_path() {
  static const AbelianPath p = make_abelian_path(kWm, kWp, Profile::linear_smoothed, 2.0);
  return p;
}

Discretization core_disc() {
  Discretization d;
  d.t_max = 6;
  d.n_t = 121;
  return d;
}

// point of the segment w(t), t in R, which carries a rank-one fiber
Vec3 on_segment(double s) { return kWm + s * (kWp - kWm); }

SpinorField random_field(const Discretization& d, GridKind g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SpinorField f(d, g);
  for (int j = 0; j < f.time_points(); ++j) {
    double t = f.time(j);
    for (Eigen::Index i = 0; i < f.slice(); ++i) f.slice_at(j)[i] = std::exp(-0.3 * t * t) * cplx(nd(rng), nd(rng));
  }
  return f;
}

SpinorField minus(SpinorField a, const SpinorField& b) {
  a.values -= b.values;
  return a;
}
}  // namespace

TEST_CASE("Green's operator inverts the normal operator") {
  auto d = core_disc();
  Vec3 z(0.05, 0.45, 0.7);
  GreenSolver G(default_path().path, z, d);
  auto x = random_field(d, GridKind::midpoints, 1);
  int it = 0;
  double res = 0;
  auto y = G.apply(G.normal(x), &it, &res);
  CHECK(minus(y, x).norm() <= 1e-8 * x.norm());
  CHECK(res <= 1e-10);
  CHECK(it > 0);
  // residual of D*D G b = b for a random right-hand side
  auto b = random_field(d, GridKind::midpoints, 2);
  auto gb = G.apply(b);
  CHECK(minus(G.normal(gb), b).norm() <= 1e-9 * b.norm());
  // symmetric and positive
  cplx s1 = b.inner(G.apply(x)), s2 = G.apply(b).inner(x);
  CHECK(std::abs(s1 - s2) <= 1e-9 * std::abs(s1));
  CHECK(std::real(b.inner(gb)) > 0);
}

TEST_CASE("projector identities off the segment") {
  auto d = core_disc();
  Vec3 z(0.25, 0.3, 0.35);
  GreenSolver G(default_path().path, z, d);
  auto f = random_field(d, GridKind::nodes, 3), g = random_field(d, GridKind::nodes, 4);
  auto pf = G.project(f), pg = G.project(g);
  CHECK(minus(G.project(pf), pf).norm() <= 1e-9 * f.norm());
  CHECK(std::abs(pf.inner(g) - f.inner(pg)) <= 1e-9 * f.norm() * g.norm());
  CHECK(G.dstar(pf).norm() <= 1e-9 * f.norm());
  auto y = random_field(d, GridKind::midpoints, 5);
  CHECK(G.project(G.d(y)).norm() <= 1e-9 * y.norm());
  // ker D* = 0 here, so P vanishes
  CHECK(kernel(G.op(), 0).dim_ker == 0);
  CHECK(pf.norm() <= 1e-8 * f.norm());
  CHECK(minus(project(default_path().path, z, f, d), pf).norm() <= 1e-12 * f.norm());
}

TEST_CASE("on the segment D* has kernel and cokernel, so D*D is singular") {
  auto d = core_disc();
  Vec3 z = on_segment(0.5);
  auto kr = kernel(assemble_dirac(default_path().path, z, {0, 0}, d, Which::DStar), 0);
  CHECK(kr.dim_ker == 1);
  CHECK(kr.dim_coker == 1);
  CHECK(kr.index == 0);
  CHECK_THROWS_AS(GreenSolver(default_path().path, z, d), NotInvertible);
}

TEST_CASE("off the segment the fiber is trivial and the Green's operator is still defined") {
  auto d = core_disc();
  Vec3 z(0.05, 0.45, 0.7);
  auto p = transform_fiber(default_path().path, z, d);
  CHECK(p.rank == 0);
  CHECK(p.index == 0);
  auto f = random_field(d, GridKind::nodes, 6);
  CHECK(project(default_path().path, z, f, d).norm() <= 1e-8 * f.norm());
}

TEST_CASE("fiber on the segment: rank one, anti-Hermitian Higgs, orthonormal basis") {
  auto d = core_disc();
  auto p = transform_fiber(default_path().path, on_segment(0.4), d);
  REQUIRE(p.rank == 1);
  CHECK(p.index == 0);
  CHECK((p.higgs + p.higgs.adjoint()).norm() <= 1e-12);
  Mat gram = fiber_overlap(p, p);
  CHECK((gram - Mat::Identity(1, 1)).norm() <= 1e-10);
  CHECK(std::abs(tail_inner(p.basis[0], p.tails, p.basis[0], p.tails) - 1.0) <= 1e-10);
  CHECK_THROWS_AS(transform_fiber(default_path().path, kWp, d), SingularTwist);
}

TEST_CASE("Higgs spectrum is periodic under integer shifts of z") {
  auto d = core_disc();
  Vec3 z = on_segment(0.4);
  auto a = higgs_spectrum(transform_fiber(default_path().path, z, d));
  for (const Int3& n : {Int3(1, 0, 0), Int3(0, -1, 0), Int3(0, 0, 1)}) {
    auto b = higgs_spectrum(transform_fiber(default_path().path, z + n.cast<double>(), d));
    REQUIRE(b.size() == a.size());
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("Higgs field has a 1/(2r) pole at the end of the segment") {
  auto d = core_disc();
  Vec3 into = (kWm - kWp).normalized();
  auto rep = higgs_singularity_scan(default_path().path, kWp, {into, Vec3(1, 0, 0)}, {0.04, 0.02, 0.01}, d);
  REQUIRE(rep.rays.size() == 2);
  CHECK(std::abs(rep.rays[0].coefficient) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(rep.pole_rank == 1);
  CHECK(rep.rank == 1);
  // the transverse ray sees trivial fibers only
  CHECK(std::isnan(rep.rays[1].coefficient));
  CHECK(std::isnan(rep.isotropy_spread));
}

TEST_CASE("rank audit for distinct limits") {
  auto d = core_disc();
  const auto& P = default_path();
  auto W = singular_set(P.path.flat_limit(End::plus), P.path.flat_limit(End::minus));
  double eps = safe_radius(TorusPoint(kWp), W, P.beta);
  Vec3 dir = Vec3(1, 2, 2).normalized();
  auto a = rank_audit(P.path, kWp + 0.4 * eps / (2 * std::numbers::pi) * dir, kWp, eps, d);
  CHECK(a.passed());
  CHECK(a.dim_vbar == 1);
  CHECK(a.dim_ehat == 0);
  CHECK(a.dim_wprime == 1);
  CHECK(a.dim_vcorner == 0);
  CHECK(a.dim_kbar == 1);
  CHECK(a.dim_h == 2);
  CHECK(a.dim_dh == 1);
  CHECK(a.rk_h_case == 2);
  auto c = rank_audit(P.path, kWp, kWp, eps, d);
  CHECK(c.passed());
  CHECK(c.dim_wprime == 2);
  CHECK(laplacian_kernel(P.path, kWp + 0.4 * eps / (2 * std::numbers::pi) * dir, WeightSextet{eps}.upper_left(), d)
            .size() == 2);
}

TEST_CASE("rank audit for equal limits") {
  auto d = core_disc();
  auto P = make_abelian_path(kWp, kWp, Profile::linear_smoothed, 2.0);
  CHECK(P.path.equal_limits());
  auto W = singular_set(P.path.flat_limit(End::plus), P.path.flat_limit(End::minus));
  double eps = safe_radius(TorusPoint(kWp), W, P.beta);
  Vec3 dir = Vec3(1, 2, 2).normalized();
  auto a = rank_audit(P.path, kWp + 0.4 * eps / (2 * std::numbers::pi) * dir, kWp, eps, d);
  CHECK(a.passed());
  CHECK(a.dim_vbar == 2);
  CHECK(a.dim_kbar == 2);
  CHECK(a.dim_h == 4);
  CHECK(a.dim_wprime == 2);
  CHECK(a.rk_h_case == 4);
  auto c = rank_audit(P.path, kWp, kWp, eps, d);
  CHECK(c.passed());
  CHECK(c.dim_wprime == 4);
}

TEST_CASE("self-dual part of the curvature contraction vanishes on S-") {
  CHECK(selfdual_contraction_defect() <= 1e-14);
}

TEST_CASE("monopole assembly off the segment is rank zero") {
  auto d = core_disc();
  ZBox box{Vec3(0.6, 0.1, 0.8), {3, 2, 2}};
  auto M = assemble_monopole(default_path().path, box, 0.05, d, 0, {}, 2);
  CHECK(M.rank == 0);
  CHECK(M.points.size() == 12);
  CHECK(M.index_of(2, 1, 1) == 11);
  auto b = bogomolny_residual(M);
  CHECK(b.rank_zero);
  // same fibers whichever spanning tree is used
  auto N = assemble_monopole(default_path().path, box, 0.05, d, 1, {}, 1);
  CHECK(N.rank == 0);
}

TEST_CASE("fibers that meet the segment change rank") {
  auto d = core_disc();
  ZBox box{on_segment(0.4), {2, 1, 1}};
  CHECK_THROWS_AS(assemble_monopole(default_path().path, box, 0.01, d), RankJump);
  CHECK_THROWS_AS(curvature_identity_check(default_path().path, on_segment(0.4), 0, 0, 0, 1, 1e-3, d), RankJump);
  CHECK_THROWS_AS(curvature_identity_check(default_path().path, Vec3(0.6, 0.1, 0.8), 0, 0, 0, 1, 1e-3, d), RankZero);
}

TEST_CASE("monopole export writes one line per site") {
  auto d = core_disc();
  ZBox box{Vec3(0.6, 0.1, 0.8), {2, 2, 1}};
  auto M = assemble_monopole(default_path().path, box, 0.05, d);
  auto path = std::filesystem::temp_directory_path() / "nahm_core_monopole.jsonl";
  write_monopole_jsonl(path.string(), M);
  std::ifstream is(path);
  int lines = 0;
  for (std::string s; std::getline(is, s);) lines += !s.empty();
  CHECK(lines >= 4);
  std::filesystem::remove(path);
}
