// Acceptance battery: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "nahm/errors.hpp"
#include "nahm/kernel.hpp"
#include "nahm/models.hpp"
#include "nahm/transform.hpp"

using namespace nahm;

namespace {
const double kTwoPi = 2 * std::numbers::pi;
const Vec3 kWm(0.13, 0.21, 0.37), kWp(0.29, 0.27, 0.41);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const AbelianPath& builtin() {
  static const AbelianPath p = make_abelian_path(kWm, kWp, Profile::linear_smoothed, 2.0);
  return p;
}

Discretization disc(double t_max, int n_t, int cut = 1, int order = 2) {
  Discretization d;
  d.t_max = t_max;
  d.n_t = n_t;
  d.fourier_cut = cut;
  d.fd_order = order;
  return d;
}

ConnectionPath flat_path(const Vec3& w, const Discretization& d) {
  return ConnectionPath(std::make_shared<FlatSource>(w), w, w, 1.0, d);
}

SpinorField band_limited(const Discretization& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  SpinorField f(d, GridKind::nodes);
  const int s = f.slice();
  Vec a(s), b(s);
  for (int i = 0; i < s; ++i) {
    a[i] = cplx(g(rng), g(rng));
    b[i] = cplx(g(rng), g(rng));
  }
  for (int j = 0; j < d.n_t; ++j) {
    double t = d.t(j);
    f.slice_at(j) = std::exp(-t * t) * (a + t * b);
  }
  return f;
}

Vec3 random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  return Vec3(u(rng), u(rng), u(rng));
}

// 1. truncated flat cross-section operator against the exact multiset
Outcome spectrum_fidelity() {
  const int cut = 3;
  const double below = 0.5 * kTwoPi * cut;
  std::mt19937_64 rng(101);
  ModeLattice L(cut);
  std::vector<int> comps(4 * L.size());
  for (size_t i = 0; i < comps.size(); ++i) comps[i] = static_cast<int>(i);
  double worst = 0;
  bool counts = true;
  for (int trial = 0; trial < 20; ++trial) {
    Vec3 w = random_point(rng), z = random_point(rng);
    Eigen::SelfAdjointEigenSolver<Mat> es(twisted_operator(CoefficientField::flat(w, cut), z, comps, cut),
                                          Eigen::EigenvaluesOnly);
    std::vector<double> num, ex;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()[i]) < below) num.push_back(es.eigenvalues()[i]);
    for (const auto& e : exact_spectrum(TorusPoint(w), TorusPoint(z), below).entries)
      if (std::abs(e.value) < below) ex.insert(ex.end(), e.multiplicity, e.value);
    std::sort(ex.begin(), ex.end());
    if (num.size() != ex.size()) {
      counts = false;
      continue;
    }
    for (size_t i = 0; i < num.size(); ++i) worst = std::max(worst, std::abs(num[i] - ex[i]));
  }
  return {counts && worst <= 1e-9, fmt("20 (w,z), |lambda| < %.3f: max deviation %.2e, counts %s", below, worst,
                                       counts ? "equal" : "differ")};
}

// 2. Weitzenbock residuals and convergence order
Outcome weitzenbock() {
  Vec3 z(0.2, 0.6, 0.1);
  auto d4 = disc(4, 1601, 1, 4);
  double flat = weitzenbock_residual(flat_path(Vec3(0.3, 0.1, 0.2), d4), z, band_limited(d4, 1), d4);
  auto da = disc(4, 801, 1, 4);
  auto ap = make_abelian_path(kWm, kWp, Profile::tanh, 3.0, 1.0);
  double ab = weitzenbock_residual(ap.path, z, band_limited(da, 2), da);
  double r[2];
  for (int k = 0; k < 2; ++k) {
    auto d = disc(4, k == 0 ? 161 : 321);
    r[k] = weitzenbock_residual(flat_path(Vec3(0.3, 0.1, 0.2), d), z, band_limited(d, 1), d);
  }
  double order = std::log2(r[0] / r[1]);
  return {flat <= 1e-8 && ab <= 1e-6 && order >= 1.8,
          fmt("flat %.2e (<=1e-8), abelian %.2e (<=1e-6), fd2 order %.2f (>=1.8)", flat, ab, order)};
}

// 3. Fredholm wall map over a 32^3 twist grid plus the points of W
Outcome wall_map() {
  const auto& A = builtin().path;
  auto d = disc(6, 48);
  auto W = singular_set(A.flat_limit(End::plus), A.flat_limit(End::minus));
  const int n = 32;
  const double cell = std::sqrt(3.0) / n;
  std::vector<Vec3> zs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) zs.emplace_back((i + 0.5) / n, (j + 0.5) / n, (k + 0.5) / n);
  for (const auto& p : W) zs.push_back(p.coords);
  int mismatches = 0, gaps = 0, far_gaps = 0, on_w = 0;
  KernelOptions ko;
  ko.with_coker = false;
  for (const auto& z : zs) {
    double dist = distance_to_set(TorusPoint(z), W);
    bool fred = is_fredholm(A, z, {0, 0});
    if (fred != (dist > 1e-10)) ++mismatches;
    if (!fred) {
      ++on_w;
      continue;
    }
    try {
      kernel(assemble_dirac(A, z, {0, 0}, d, Which::DStar), 0, ko);
    } catch (const NoSpectralGap&) {
      ++gaps;
      if (dist > cell) ++far_gaps;
    }
  }
  return {mismatches == 0 && far_gaps == 0 && on_w == static_cast<int>(W.size()),
          fmt("%zu twists, %d on W, %d Fredholm mismatches, %d NoSpectralGap (%d beyond one cell)", zs.size(), on_w,
              mismatches, gaps, far_gaps)};
}

// 4. index = -spectral flow on randomized abelian paths
Outcome index_flow() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0, 1);
  auto d = disc(5, 96);
  int trials = 0, agree = 0;
  std::vector<int> flows;
  while (trials < 20) {
    Vec3 wm = random_point(rng), wp = random_point(rng), z = random_point(rng);
    Profile prof = trials % 2 ? Profile::tanh : Profile::linear_smoothed;
    double tf = 1.0 + 2.0 * u(rng);
    auto P = make_abelian_path(wm, wp, prof, tf, 1.0 + u(rng));
    auto W = singular_set(P.path.flat_limit(End::plus), P.path.flat_limit(End::minus));
    if (distance_to_set(TorusPoint(z), W) < 0.02) continue;
    ++trials;
    int sf = spectral_flow(P.path, z, d);
    int ind = kernel(assemble_dirac(P.path, z, {0, 0}, d, Which::DStar), 0).index;
    agree += ind == -sf;
    flows.push_back(sf);
  }
  auto has = [&](int f) { return std::find(flows.begin(), flows.end(), f) != flows.end(); };
  bool coverage = has(0) && (has(2) || has(-2)) && (has(4) || has(-4));
  std::ostringstream seen;
  std::sort(flows.begin(), flows.end());
  flows.erase(std::unique(flows.begin(), flows.end()), flows.end());
  for (int f : flows) seen << f << " ";
  return {agree == 20 && coverage,
          fmt("%d/20 paths with index == -sf; flows seen { %s}; flows +-2, +-4 not reachable by abelian paths", agree,
              seen.str().c_str())};
}

// 5. single-wall weight moves at rank-one and rank-two walls
Outcome wall_crossing() {
  const auto& A = builtin().path;
  auto d = disc(8, 241, 2);
  const double max_level = kTwoPi * d.fourier_cut / 3 - 0.5;
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g;
  std::vector<std::pair<Vec3, bool>> cases;  // twist, plus family
  for (int i = 0; i < 6; ++i) {
    Vec3 dir(g(rng), g(rng), g(rng));
    bool plus = i % 2 == 0;
    cases.push_back({(plus ? kWp : kWm) + (0.15 + 0.02 * i) * dir.normalized(), plus});
  }
  for (const Vec3& z : {Vec3(0, 0, 0), Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), Vec3(0.5, 0.5, 0.5)})
    cases.push_back({z, true});
  int ok = 0;
  bool rank1 = false, rank2 = false;
  std::ostringstream log;
  for (const auto& [z, plus] : cases) {
    auto grid = fredholm_grid(A, z, max_level + 2);
    const auto& levels = plus ? grid.spec_plus : grid.spec_minus;
    double lam = NAN, gap = 1.0;
    for (size_t i = 0; i < levels.size(); ++i)
      if (levels[i] > 0.05 && levels[i] < max_level) {
        lam = levels[i];
        if (i > 0) gap = std::min(gap, levels[i] - levels[i - 1]);
        if (i + 1 < levels.size()) gap = std::min(gap, levels[i + 1] - levels[i]);
        break;
      }
    if (std::isnan(lam)) {
      log << "no wall ";
      continue;
    }
    double s = 0.3 * gap;
    Weight a = plus ? Weight{0, lam - s} : Weight{lam - s, 0};
    Weight b = plus ? Weight{0, lam + s} : Weight{lam + s, 0};
    auto wc = wall_crossing_check(A, z, a, b, d);
    ok += wc.predicted == wc.measured;
    rank1 = rank1 || wc.eigenspace_rank == 1;
    rank2 = rank2 || wc.eigenspace_rank == 2;
    log << wc.predicted << "/" << wc.measured << " ";
  }
  return {ok == 10 && rank1 && rank2,
          fmt("%d/10 moves agree (predicted/measured: %s), ranks 1 %s, 2 %s", ok, log.str().c_str(),
              rank1 ? "seen" : "missing", rank2 ? "seen" : "missing")};
}

// 6. deformation invariance, cutoff invariance and the energy tail
Outcome deformation() {
  const auto& base = builtin().path;
  auto d = disc(6, 161);
  Vec3 z(0.05, 0.45, 0.7);
  auto index_of = [&](const ConnectionPath& A) {
    return kernel(assemble_dirac(A, z, {0, 0}, d, Which::DStar), 0).index;
  };
  int ib = index_of(base);
  auto ci = make_cutoff_interpolation(base, 2.0, FlatSegment{kWp, {0.1, 0.4, 0.2}}, z);
  bool along_s = true;
  for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) along_s = along_s && index_of(ci.a_R_s(s)) == ib;
  bool cutoff = true;
  for (double R : {1.5, 3.0}) cutoff = cutoff && index_of(make_cutoff_interpolation(base, R).a_R()) == ib;

  const double beta = 1.0;
  auto P = make_perturbed_flat(kWp, 0.1, beta, 606, 1);
  auto I = energy_charge(P, disc(10, 801));
  // least-squares slope of log density against |t| on the tails
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t j = 0; j < I.t.size(); ++j) {
    double a = std::abs(I.t[j]);
    if (a < 5 || a > 9.5 || I.density[j] <= 0) continue;
    double y = std::log(I.density[j]);
    sx += a, sy += y, sxx += a * a, sxy += a * y, ++m;
  }
  double rate = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  return {along_s && cutoff && rate >= 1.5 * beta,
          fmt("index(base) = %d; a_R^s constant over 5 s: %s; a_R for R = 1.5, 3: %s; tail rate %.3f beta (>= 1.5)",
              ib, along_s ? "yes" : "no", cutoff ? "yes" : "no", rate / beta)};
}

// 7. fiber rank against |index| on a 16^3 scan
Outcome transform_rank() {
  const auto& A = builtin().path;
  auto d = disc(6, 64);
  const int n = 16;
  std::vector<Vec3> zs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) zs.emplace_back((i + 0.5) / n, (j + 0.5) / n, (k + 0.5) / n);
  std::vector<int> rank(zs.size(), -1), index(zs.size(), 0);
  int workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (size_t i = w; i < zs.size(); i += workers) {
        auto p = transform_fiber(A, zs[i], d);
        rank[i] = p.rank;
        index[i] = p.index;
      }
    });
  for (auto& t : pool) t.join();
  int agree = 0, nonzero = 0;
  for (size_t i = 0; i < zs.size(); ++i) {
    agree += rank[i] == std::abs(index[i]);
    nonzero += rank[i] > 0;
  }
  return {agree == static_cast<int>(zs.size()),
          fmt("%d/%zu fibers with rank == |index| (%d fibers of nonzero rank; the builtin path has index 0)", agree,
              zs.size(), nonzero)};
}

// 8. curvature identity on kernel pairs and the self-dual contraction
Outcome curvature_identity() {
  const auto& A = builtin().path;
  auto d = disc(6, 121);
  double sd = selfdual_contraction_defect();
  int evaluated = 0, within = 0;
  std::string reason;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int i = 0; i < 10; ++i) {
    Vec3 z = kWm + (0.05 + 0.09 * i) * (kWp - kWm);
    const auto& mn = pairs[i % 3];
    try {
      auto c = curvature_identity_check(A, z, 0, 0, mn[0], mn[1], 1e-3, d);
      auto c2 = curvature_identity_check(A, z, 0, 0, mn[0], mn[1], 5e-4, d);
      ++evaluated;
      // Richardson: the h^2 part of the plaquette defect
      double defect = std::abs(c2.lhs - c.lhs) * 4.0 / 3.0;
      within += std::abs(c.lhs - c.rhs) <= std::max(c.boundary_estimate, 3 * defect);
    } catch (const Error& e) {
      if (reason.empty()) reason = e.what();
    }
  }
  return {evaluated == 10 && within == 10 && sd <= 1e-14,
          fmt("%d/10 pairs evaluated, %d within bound%s%s; SD contraction on S- %.1e (<= 1e-14)", evaluated, within,
              reason.empty() ? "" : "; first failure ", reason.c_str(), sd)};
}

std::vector<Vec3> axis_rays() {
  return {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
}

double audit_eps(const ConnectionPath& A, const Vec3& w) {
  auto W = singular_set(A.flat_limit(End::plus), A.flat_limit(End::minus));
  return safe_radius(TorusPoint(w), W, A.beta());
}

// 9. Higgs pole at w_+: coefficient, isotropy over 6 rays, pole rank
Outcome higgs_pole() {
  const auto& A = builtin().path;
  auto d = disc(6, 121);
  std::vector<double> radii = {0.04, 0.02, 0.01};
  auto axes = higgs_singularity_scan(A, kWp, axis_rays(), radii, d);
  // the kernel family is supported on the segment w(t), so the ray into it carries the pole
  Vec3 into = (kWm - kWp).normalized();
  auto seg = higgs_singularity_scan(A, kWp, {into}, radii, d);
  double c = std::abs(seg.rays[0].coefficient);
  int axis_poles = 0;
  for (const auto& r : axes.rays) axis_poles += !std::isnan(r.coefficient);
  double eps = audit_eps(A, kWp);
  auto audit = rank_audit(A, kWp + 0.4 * eps / kTwoPi * Vec3(1, 2, 2).normalized(), kWp, eps, d);
  bool coeff = std::abs(2 * c - 1) <= 0.05;
  bool iso = !std::isnan(axes.isotropy_spread) && axes.isotropy_spread <= 0.02;
  bool rank = seg.pole_rank == audit.dim_h - audit.dim_kbar;
  return {coeff && iso && rank,
          fmt("segment ray |c| = %.4f (|2c-1| = %.3f); axis rays with a pole %d/6, isotropy spread %s; pole rank %d vs "
              "rk H - dim Kbar = %d",
              c, std::abs(2 * c - 1), axis_poles, iso ? fmt("%.3f", axes.isotropy_spread).c_str() : "undefined",
              seg.pole_rank, audit.dim_h - audit.dim_kbar)};
}

// 10. rank audits at 5 radii and at z = w, distinct and equal limits
Outcome rank_audits() {
  auto d = disc(6, 121);
  const auto equal = make_abelian_path(kWp, kWp, Profile::linear_smoothed, 2.0);
  int passed = 0, total = 0;
  bool corner = true, cases = true;
  std::ostringstream log;
  for (const ConnectionPath* A : {&builtin().path, &equal.path}) {
    double eps = audit_eps(*A, kWp);
    Vec3 dir = Vec3(1, 2, 2).normalized();
    for (double f : {0.1, 0.2, 0.3, 0.4, 0.5}) {
      auto a = rank_audit(*A, kWp + f * eps / kTwoPi * dir, kWp, eps, d);
      passed += a.passed();
      ++total;
    }
    auto c = rank_audit(*A, kWp, kWp, eps, d);
    passed += c.passed();
    ++total;
    corner = corner && c.dim_vcorner == c.dim_ehat;
    cases = cases && !c.residual_rk_h;
    log << (A->equal_limits() ? "equal" : "distinct") << ": rk H " << c.dim_h << " case " << c.rk_h_case << "; ";
  }
  return {passed == total && corner && cases,
          fmt("%d/%d audits with all residuals 0; Vcorner = Ehat at z = w: %s; %s", passed, total,
              corner ? "yes" : "no", log.str().c_str())};
}

// 11. gauge periodicity of the Higgs spectrum
Outcome gauge_periodicity() {
  const auto& A = builtin().path;
  auto d = disc(6, 121);
  double worst = 0;
  bool dims = true;
  for (double s : {0.3, 0.6}) {
    Vec3 z = kWm + s * (kWp - kWm);
    auto a = transform_fiber(A, z, d), b = transform_fiber(A, z + Vec3(1, 0, 0), d);
    dims = dims && a.rank == b.rank && a.rank > 0;
    if (a.rank == b.rank) worst = std::max(worst, (higgs_spectrum(a) - higgs_spectrum(b)).cwiseAbs().maxCoeff());
  }
  return {dims && worst <= 1e-8, fmt("kernel dims equal and nonzero: %s; max spectral deviation %.2e", dims ? "yes" : "no", worst)};
}

// 12. Bogomolny residual along an eps-family of perturbed flat connections
Outcome bogomolny_tracking() {
  auto d = disc(6, 96);
  const double h = 0.02;
  ZBox box{kWp + Vec3(0.05, 0.05, 0.05), {3, 3, 3}};
  std::vector<double> es, res;
  for (double eps : {0.02, 0.04, 0.08}) {
    auto P = make_perturbed_flat(kWp, eps, 1.0, 1212, 1);
    auto M = assemble_monopole(P, box, h, d);
    auto b = bogomolny_residual(M);
    if (b.rank_zero)
      return {false, fmt("eps = %.2f: every fiber has rank 0 (index 0 family), no monopole to test", eps)};
    es.push_back(eps);
    res.push_back(b.residual);
  }
  // linear fit and floor from h, h/2 at the smallest eps
  double mx = (es[0] + es[1] + es[2]) / 3, my = (res[0] + res[1] + res[2]) / 3, sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) sxy += (es[i] - mx) * (res[i] - my), sxx += (es[i] - mx) * (es[i] - mx);
  double slope = sxy / sxx, intercept = my - slope * mx;
  auto P = make_perturbed_flat(kWp, es[0], 1.0, 1212, 1);
  double r2 = bogomolny_residual(assemble_monopole(P, box, h / 2, d)).residual;
  double floor = std::abs(4 * r2 - res[0]) / 3;
  return {std::abs(intercept) <= 2 * floor, fmt("intercept %.2e, floor %.2e", intercept, floor)};
}
}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"spectrum fidelity", spectrum_fidelity}, {"Weitzenbock identity", weitzenbock},
      {"Fredholm wall map", wall_map},          {"index = -spectral flow", index_flow},
      {"wall crossing", wall_crossing},         {"deformation and relative index", deformation},
      {"transform rank", transform_rank},       {"curvature identity", curvature_identity},
      {"Higgs pole", higgs_pole},               {"rank audits", rank_audits},
      {"gauge periodicity", gauge_periodicity}, {"Bogomolny tracking", bogomolny_tracking}};
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const Error& e) {
      o = {false, std::string("raised ") + e.what()};
    } catch (const std::exception& e) {
      o = {false, std::string("raised ") + e.what()};
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), sec,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
