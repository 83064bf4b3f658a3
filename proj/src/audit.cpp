#include <cmath>
#include <numbers>

#include "nahm/errors.hpp"
#include "nahm/transform.hpp"

namespace nahm {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// C_j = 2 pi (n_j - z_j) - i a_j on (mode, bundle) units
Mat covariant_units(const CoefficientField& a, const Vec3& z, const std::vector<int>& units, int cut, int dir) {
  ModeLattice L(cut);
  const int n = static_cast<int>(units.size());
  Mat c = Mat::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int q = 0; q < n; ++q) {
      int mr = units[r] / 2, br = units[r] % 2, mq = units[q] / 2, bq = units[q] % 2;
      int p = a.modes.index(L.mode(mr) - L.mode(mq));
      if (mr == mq && br == bq) c(r, q) += kTwoPi * (L.mode(mr)[dir] - z[dir]);
      if (p >= 0) c(r, q) += cplx(0, -1) * a.a[p][dir](br, bq);
    }
  return c;
}

Mat laplace_potential(const CoefficientField& a, const Vec3& z, const std::vector<int>& units, int cut) {
  Mat l = Mat::Zero(units.size(), units.size());
  for (int d = 0; d < 3; ++d) {
    Mat c = covariant_units(a, z, units, cut, d);
    l += c * c;
  }
  return l;
}

// allowed directions of the first-order system psi' = [[0, I], [L, 0]] psi at one end
Mat allowed_directions(const Mat& l, bool plus, double delta) {
  const auto u = l.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (l + l.adjoint()));
  auto ok = [&](double e) { return plus ? e < delta - 1e-10 : e > delta + 1e-10; };
  std::vector<Vec> cols;
  for (Eigen::Index i = 0; i < u; ++i) {
    Vec v = es.eigenvectors().col(i);
    double kappa = std::sqrt(std::max(0.0, es.eigenvalues()[i]));
    if (kappa < 1e-9) {
      // Jordan pair v, t v: both or neither
      if (ok(0.0)) {
        Vec a = Vec::Zero(2 * u), b = Vec::Zero(2 * u);
        a.head(u) = v;
        b.tail(u) = v;
        cols.push_back(a);
        cols.push_back(b);
      }
      continue;
    }
    for (double s : {1.0, -1.0})
      if (ok(s * kappa)) {
        Vec a(2 * u);
        a.head(u) = v;
        a.tail(u) = s * kappa * v;
        cols.push_back(a / a.norm());
      }
  }
  Mat m(2 * u, cols.size());
  for (size_t k = 0; k < cols.size(); ++k) m.col(k) = cols[k];
  if (cols.empty()) return m;
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(2 * u, cols.size());
}
}  // namespace

std::vector<SpinorField> laplacian_kernel(const ConnectionPath& A, const Vec3& z, const Weight& delta,
                                          const Discretization& disc) {
  disc.validate();
  const int n = disc.n_t;
  const double h = disc.h();
  std::vector<CoefficientField> samples(n);
  for (int j = 0; j < n; ++j) samples[j] = A.value(disc.t(j));
  std::vector<CoefficientField> pattern = samples;
  pattern.push_back(A.limit(End::minus));
  pattern.push_back(A.limit(End::plus));
  std::vector<SpinorField> out;
  for (const auto& comps : coupling_blocks(pattern, disc.fourier_cut)) {
    std::vector<int> units;
    for (int c : comps)
      if (c % 2 == 0) units.push_back(c / 2);
    const auto u = static_cast<Eigen::Index>(units.size());
    std::vector<Mat> g(n);
    double gmax = 0;
    for (int j = 0; j < n; ++j) {
      g[j] = Mat::Zero(2 * u, 2 * u);
      g[j].topRightCorner(u, u) = Mat::Identity(u, u);
      g[j].bottomLeftCorner(u, u) = laplace_potential(samples[j], z, units, disc.fourier_cut);
      gmax = std::max(gmax, g[j].cwiseAbs().rowwise().sum().maxCoeff());
    }
    Mat um = allowed_directions(laplace_potential(A.limit(End::minus), z, units, disc.fourier_cut), false, delta.minus);
    Mat up = allowed_directions(laplace_potential(A.limit(End::plus), z, units, disc.fourier_cut), true, delta.plus);
    BoxSystem s;
    s.row_width = static_cast<int>(2 * u);
    s.A.resize(n - 1);
    s.B.resize(n - 1);
    const Mat id = Mat::Identity(2 * u, 2 * u);
    for (int r = 0; r + 1 < n; ++r) {
      s.A[r] = -id / h - 0.5 * g[r];
      s.B[r] = id / h - 0.5 * g[r + 1];
    }
    s.A[0] = s.A[0] * um;
    s.B[n - 2] = s.B[n - 2] * up;
    s.col_width.assign(n, static_cast<int>(2 * u));
    s.col_width[0] = static_cast<int>(um.cols());
    s.col_width[n - 1] = static_cast<int>(up.cols());
    BlockTridiag t = s.normal_cols();
    const double tau = 1e-6 * (2.0 / h + gmax);
    int lo = t.count_below(tau * tau), hi = t.count_below(100 * tau * tau);
    if (lo != hi) throw NoSpectralGap("Laplacian kernel: singular values in [tau, 10 tau)");
    if (lo == 0) continue;
    EigenPairs ep = smallest_eigenpairs(t, lo, 0x1a9);
    auto off = s.col_offsets();
    for (int k = 0; k < lo; ++k) {
      for (int spin = 0; spin < 2; ++spin) {
        SpinorField f(disc, GridKind::nodes);
        for (int j = 0; j < n; ++j) {
          Vec v = ep.vectors.col(k).segment(off[j], off[j + 1] - off[j]);
          if (j == 0) v = um * v;
          if (j == n - 1) v = up * v;
          for (Eigen::Index q = 0; q < u; ++q) f.slice_at(j)[2 * units[q] + spin] = v[q];
        }
        f.values /= f.norm();
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

RankAudit rank_audit(const ConnectionPath& A, const Vec3& z, const Vec3& w, double eps, const Discretization& disc) {
  if (eps <= 0) throw InvalidArgument("eps must be positive");
  WeightSextet sx{eps};
  KernelOptions ko;
  ko.with_coker = false;
  auto dim = [&](const Weight& d, Which which, bool allow_wall) {
    KernelOptions o = ko;
    o.allow_wall = allow_wall;
    return kernel(assemble_dirac(A, z, d, disc, which), 0, o).dim_ker;
  };
  RankAudit r;
  r.dim_vbar = dim(sx.upper_left(), Which::DStar, false);
  r.dim_vcorner = dim(sx.lower_right(), Which::DStar, false);
  r.dim_kbar = dim(sx.upper_left(), Which::D, false);
  r.dim_ehat = dim({0, 0}, Which::DStar, true);
  r.dim_h = static_cast<int>(laplacian_kernel(A, z, sx.upper_left(), disc).size());
  r.dim_dh = r.dim_h - r.dim_kbar;

  // limit modes that the weight move (0,0) -> (-eps, eps) lets in
  TorusPoint zp(z);
  for (const auto& e : exact_spectrum(TorusPoint(A.limit_w(End::plus)), zp, eps + 1).entries)
    if (e.value > -1e-12 && e.value < eps - 1e-10) r.dim_wprime += e.multiplicity;
  for (const auto& e : exact_spectrum(TorusPoint(A.limit_w(End::minus)), zp, eps + 1).entries)
    if (e.value < 1e-12 && e.value > -eps + 1e-10) r.dim_wprime += e.multiplicity;

  Vec3 tw = 2 * w;
  bool two_w_integral = (tw - tw.array().round().matrix()).cwiseAbs().maxCoeff() < 1e-12;
  bool equal = A.equal_limits();
  r.rk_h_case = !equal ? (two_w_integral ? 4 : 2) : (two_w_integral ? 8 : 4);

  if (same_point(zp, TorusPoint(w), 1e-12)) {
    // at the singular point: 0 -> Ehat -> Vbar -> W'_0 -> Kbar -> 0 and Vcorner = Ehat
    r.residual_hatbar = r.dim_vbar - r.dim_ehat - r.dim_wprime + r.dim_kbar;
    r.residual_hatv = r.dim_ehat - r.dim_vcorner;
  } else {
    r.residual_hatbar = r.dim_vbar - r.dim_ehat - r.dim_wprime;
    r.residual_hatv = r.dim_ehat - r.dim_vcorner - r.dim_wprime + r.dim_kbar;
  }
  r.residual_split = r.dim_vbar - r.dim_vcorner - r.dim_dh;
  r.residual_rk_h = r.dim_h - r.rk_h_case;
  return r;
}

}  // namespace nahm
