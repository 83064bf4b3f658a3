#include "nahm/dirac.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "nahm/errors.hpp"

namespace nahm {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

const Mat2& pauli(int i) {
  static const Mat2 s[3] = {
      (Mat2() << 0, 1, 1, 0).finished(),
      (Mat2() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
      (Mat2() << 1, 0, 0, -1).finished(),
  };
  return s[i];
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }
}  // namespace

Mat twisted_operator(const CoefficientField& a, const Vec3& z, const std::vector<int>& comps,
                     int fourier_cut, bool twist) {
  ModeLattice L(fourier_cut);
  const ModeLattice& C = a.modes;
  int n = static_cast<int>(comps.size());
  Mat h = Mat::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    int mr = comps[r] / 4, br = (comps[r] / 2) % 2, sr = comps[r] % 2;
    Int3 nr = L.mode(mr);
    for (int c = 0; c < n; ++c) {
      int mc = comps[c] / 4, bc = (comps[c] / 2) % 2, sc = comps[c] % 2;
      int p = C.index(nr - L.mode(mc));
      bool diag_unit = mr == mc && br == bc;
      if (p < 0 && !diag_unit) continue;
      cplx v = 0;
      for (int i = 0; i < 3; ++i) {
        cplx sig = pauli(i)(sr, sc);
        if (sig == cplx(0)) continue;
        cplx ci = 0;
        if (twist && diag_unit) ci += kTwoPi * (nr[i] - z[i]);
        if (p >= 0) ci += cplx(0, -1) * a.a[p][i](br, bc);
        v += sig * ci;
      }
      h(r, c) = v;
    }
  }
  return h;
}

std::vector<std::vector<int>> coupling_blocks(const std::vector<CoefficientField>& fields, int fourier_cut) {
  ModeLattice L(fourier_cut);
  int units = 2 * L.size();
  UnionFind uf(units);
  for (const auto& f : fields) {
    const ModeLattice& C = f.modes;
    for (int p = 0; p < C.size(); ++p) {
      Int3 np = C.mode(p);
      for (int b1 = 0; b1 < 2; ++b1)
        for (int b2 = 0; b2 < 2; ++b2) {
          bool nz = false;
          for (int i = 0; i < 3; ++i) nz = nz || f.a[p][i](b1, b2) != cplx(0);
          if (!nz || (p == C.index(Int3::Zero()) && b1 == b2)) continue;
          for (int m = 0; m < L.size(); ++m) {
            int mr = L.index(L.mode(m) + np);
            if (mr >= 0) uf.unite(2 * mr + b1, 2 * m + b2);
          }
        }
    }
  }
  std::vector<std::vector<int>> blocks;
  std::vector<int> root_to_block(units, -1);
  for (int u = 0; u < units; ++u) {
    int r = uf.find(u);
    if (root_to_block[r] < 0) {
      root_to_block[r] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    auto& b = blocks[root_to_block[r]];
    b.push_back(2 * u);
    b.push_back(2 * u + 1);
  }
  return blocks;
}

DiracOperator assemble_dirac(const ConnectionPath& A, const Vec3& z, const Weight& delta,
                             const Discretization& disc, Which which, const AssembleOptions& opt) {
  disc.validate();
  double spectral_scale = std::max(std::abs(delta.minus), std::abs(delta.plus));
  if (kTwoPi * disc.fourier_cut < 3 * spectral_scale)
    throw ResolutionTooCoarse("fourier_cut too small for the requested weights");
  if (disc.t_max * A.beta() < 3) throw BoundaryMismatch("t_max * beta < 3");

  DiracOperator op;
  op.disc = disc;
  op.z = TorusPoint(z);
  op.z_raw = z;
  op.weight = delta;
  op.which = which;
  op.star_weight = which == Which::DStar ? delta : -delta;
  op.path = std::make_shared<const ConnectionPath>(A);

  const int n = disc.n_t;
  const double h = disc.h();
  std::vector<CoefficientField> samples(n), derivs;
  for (int j = 0; j < n; ++j) samples[j] = A.value(disc.t(j));
  if (disc.fd_order == 4) {
    derivs.resize(n);
    for (int j = 0; j < n; ++j) derivs[j] = A.time_derivative(disc.t(j));
  }
  std::vector<CoefficientField> pattern = samples;
  pattern.push_back(A.limit(End::minus));
  pattern.push_back(A.limit(End::plus));
  auto groups = coupling_blocks(pattern, disc.fourier_cut);

  std::vector<double> sig(n), sig_mid(n - 1);
  for (int j = 0; j < n; ++j) sig[j] = weight_factor(op.star_weight, disc.t(j));
  for (int j = 0; j + 1 < n; ++j) sig_mid[j] = weight_factor(op.star_weight, disc.t_mid(j));

  double hmax = 0;
  for (auto& comps : groups) {
    OperatorBlock blk;
    blk.comps = comps;
    const auto b = static_cast<Eigen::Index>(comps.size());
    blk.h.resize(n);
    std::vector<Mat> q(n);
    for (int j = 0; j < n; ++j) {
      blk.h[j] = twisted_operator(samples[j], z, comps, disc.fourier_cut);
      hmax = std::max(hmax, blk.h[j].cwiseAbs().rowwise().sum().maxCoeff());
      if (disc.fd_order == 4)
        q[j] = twisted_operator(derivs[j], z, comps, disc.fourier_cut, false) + blk.h[j] * blk.h[j];
    }
    for (End e : {End::minus, End::plus}) {
      Eigen::SelfAdjointEigenSolver<Mat> es(twisted_operator(A.limit(e), z, comps, disc.fourier_cut));
      Eigen::VectorXd lam = es.eigenvalues();
      std::vector<int> keep;
      for (Eigen::Index i = 0; i < lam.size(); ++i) {
        bool allowed = e == End::plus ? lam[i] < op.star_weight.plus - opt.wall_tol
                                      : lam[i] > op.star_weight.minus + opt.wall_tol;
        if (allowed) keep.push_back(static_cast<int>(i));
      }
      Mat u(b, keep.size());
      for (size_t k = 0; k < keep.size(); ++k) u.col(k) = es.eigenvectors().col(keep[k]);
      if (e == End::plus) {
        blk.lam_plus = lam;
        blk.vec_plus = es.eigenvectors();
        blk.u_plus = u;
      } else {
        blk.lam_minus = lam;
        blk.vec_minus = es.eigenvectors();
        blk.u_minus = u;
      }
    }
    blk.a_full.resize(n - 1);
    blk.b_full.resize(n - 1);
    for (int r = 0; r + 1 < n; ++r) {
      Mat a = identity(b) / h + 0.5 * blk.h[r];
      Mat bb = -identity(b) / h + 0.5 * blk.h[r + 1];
      if (disc.fd_order == 4) {
        a += (h / 12) * q[r];
        bb -= (h / 12) * q[r + 1];
      }
      blk.a_full[r] = (sig_mid[r] / sig[r]) * a;
      blk.b_full[r] = (sig_mid[r] / sig[r + 1]) * bb;
    }
    BoxSystem& s = blk.system;
    s.row_width = static_cast<int>(b);
    s.A = blk.a_full;
    s.B = blk.b_full;
    // unknowns are sqrt(q_j h) phi_j with trapezoid weights q_j
    s.A[0] = std::sqrt(2.0) * blk.a_full[0] * blk.u_minus;
    s.B[n - 2] = std::sqrt(2.0) * blk.b_full[n - 2] * blk.u_plus;
    s.col_width.assign(n, static_cast<int>(b));
    s.col_width[0] = static_cast<int>(blk.u_minus.cols());
    s.col_width[n - 1] = static_cast<int>(blk.u_plus.cols());
    op.blocks.push_back(std::move(blk));
  }
  op.scale = 2.0 / h + hmax;
  return op;
}

DiracOperator DiracOperator::adjoint() const {
  DiracOperator o = *this;
  o.which = which == Which::DStar ? Which::D : Which::DStar;
  o.weight = -weight;
  return o;
}

SpinorField DiracOperator::apply(const SpinorField& in) const {
  const int n = disc.n_t;
  if (which == Which::DStar) {
    SpinorField out(disc, GridKind::midpoints);
    for (const auto& blk : blocks) {
      for (int r = 0; r + 1 < n; ++r) {
        Vec x0(blk.comps.size()), x1(blk.comps.size());
        for (size_t k = 0; k < blk.comps.size(); ++k) {
          x0[k] = in.slice_at(r)[blk.comps[k]];
          x1[k] = in.slice_at(r + 1)[blk.comps[k]];
        }
        Vec y = blk.a_full[r] * x0 + blk.b_full[r] * x1;
        for (size_t k = 0; k < blk.comps.size(); ++k) out.slice_at(r)[blk.comps[k]] = y[k];
      }
    }
    return out;
  }
  SpinorField out(disc, GridKind::nodes);
  for (const auto& blk : blocks) {
    for (int r = 0; r + 1 < n; ++r) {
      Vec y(blk.comps.size());
      for (size_t k = 0; k < blk.comps.size(); ++k) y[k] = in.slice_at(r)[blk.comps[k]];
      Vec x0 = blk.a_full[r].adjoint() * y, x1 = blk.b_full[r].adjoint() * y;
      for (size_t k = 0; k < blk.comps.size(); ++k) {
        out.slice_at(r)[blk.comps[k]] += x0[k];
        out.slice_at(r + 1)[blk.comps[k]] += x1[k];
      }
    }
  }
  // adjoint for the trapezoid node inner product
  out.slice_at(0) *= 2.0;
  out.slice_at(n - 1) *= 2.0;
  return out;
}

double DiracOperator::boundary_residual(const SpinorField& phi) const {
  double s = 0;
  int last = phi.time_points() - 1;
  for (const auto& blk : blocks) {
    Vec e0(blk.comps.size()), e1(blk.comps.size());
    for (size_t k = 0; k < blk.comps.size(); ++k) {
      e0[k] = phi.slice_at(0)[blk.comps[k]];
      e1[k] = phi.slice_at(last)[blk.comps[k]];
    }
    s += (e0 - blk.u_minus * (blk.u_minus.adjoint() * e0)).squaredNorm();
    s += (e1 - blk.u_plus * (blk.u_plus.adjoint() * e1)).squaredNorm();
  }
  return std::sqrt(s);
}

SpinorField DiracOperator::expand(int block, const Vec& x) const {
  const auto& blk = blocks[block];
  const int n = disc.n_t;
  const double rh = 1.0 / std::sqrt(disc.h());
  if (which == Which::D) {
    SpinorField f(disc, GridKind::midpoints);
    const auto b = blk.comps.size();
    for (int r = 0; r + 1 < n; ++r)
      for (size_t k = 0; k < b; ++k) f.slice_at(r)[blk.comps[k]] = x[r * b + k] * rh;
    return f;
  }
  SpinorField f(disc, GridKind::nodes);
  auto off = blk.system.col_offsets();
  for (int j = 0; j < n; ++j) {
    Vec v = x.segment(off[j], off[j + 1] - off[j]);
    double e = 1.0;
    if (j == 0) v = blk.u_minus * v, e = std::sqrt(2.0);
    if (j == n - 1) v = blk.u_plus * v, e = std::sqrt(2.0);
    for (size_t k = 0; k < blk.comps.size(); ++k) f.slice_at(j)[blk.comps[k]] = v[k] * rh * e;
  }
  return f;
}

Vec DiracOperator::restrict_to(int block, const SpinorField& f) const {
  const auto& blk = blocks[block];
  const int n = disc.n_t;
  const double sh = std::sqrt(disc.h());
  const auto b = blk.comps.size();
  if (which == Which::D) {
    Vec x((n - 1) * b);
    for (int r = 0; r + 1 < n; ++r)
      for (size_t k = 0; k < b; ++k) x[r * b + k] = f.slice_at(r)[blk.comps[k]] * sh;
    return x;
  }
  auto off = blk.system.col_offsets();
  Vec x(off.back());
  for (int j = 0; j < n; ++j) {
    Vec v(b);
    for (size_t k = 0; k < b; ++k) v[k] = f.slice_at(j)[blk.comps[k]] * sh;
    if (j == 0) v = blk.u_minus.adjoint() * v / std::sqrt(2.0);
    if (j == n - 1) v = blk.u_plus.adjoint() * v / std::sqrt(2.0);
    x.segment(off[j], off[j + 1] - off[j]) = v;
  }
  return x;
}

}  // namespace nahm

namespace nahm {

namespace {

// Fourier multiplication by the matrix function f_dir on all (mode, bundle) units.
Mat unit_multiplier(const CoefficientField& f, int dir, int fourier_cut) {
  ModeLattice L(fourier_cut);
  int units = 2 * L.size();
  Mat m = Mat::Zero(units, units);
  for (int r = 0; r < L.size(); ++r)
    for (int c = 0; c < L.size(); ++c) {
      int p = f.modes.index(L.mode(r) - L.mode(c));
      if (p < 0) continue;
      m.block<2, 2>(2 * r, 2 * c) = f.a[p][dir];
    }
  return m;
}

// C_i = 2 pi (n_i - z_i) + (-i) a_i on units.
Mat covariant_component(const CoefficientField& a, const Vec3& z, int dir, int fourier_cut) {
  ModeLattice L(fourier_cut);
  Mat m = cplx(0, -1) * unit_multiplier(a, dir, fourier_cut);
  for (int r = 0; r < L.size(); ++r)
    for (int b = 0; b < 2; ++b) m(2 * r + b, 2 * r + b) += kTwoPi * (L.mode(r)[dir] - z[dir]);
  return m;
}

Mat spin_embed(const Mat& units, const Mat2& s) {
  Mat out(2 * units.rows(), 2 * units.cols());
  for (Eigen::Index r = 0; r < units.rows(); ++r)
    for (Eigen::Index c = 0; c < units.cols(); ++c) out.block<2, 2>(2 * r, 2 * c) = units(r, c) * s;
  return out;
}

std::vector<double> first_difference_stencil(int order) {
  if (order == 2) return {-0.5, 0, 0.5};
  return {1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12};
}

std::vector<double> second_difference_stencil(int order) {
  if (order == 2) return {1, -2, 1};
  return {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
}

}  // namespace

double weitzenbock_residual(const ConnectionPath& A, const Vec3& z, const SpinorField& phi,
                            const Discretization& disc) {
  disc.validate();
  const int n = disc.n_t, K = disc.fourier_cut;
  const double h = disc.h();
  const int w = disc.fd_order / 2;
  auto d1 = first_difference_stencil(disc.fd_order);
  auto d2 = second_difference_stencil(disc.fd_order);
  std::vector<int> all(4 * ModeLattice(K).size());
  std::iota(all.begin(), all.end(), 0);

  auto diff = [&](const std::vector<Vec>& f, int j, const std::vector<double>& st) {
    Vec r = Vec::Zero(f[j].size());
    for (int k = -w; k <= w; ++k)
      if (st[k + w] != 0) r += st[k + w] * f[j + k];
    return r;
  };

  std::vector<Vec> f(n), df(n), hf(n);
  for (int j = 0; j < n; ++j) f[j] = phi.slice_at(j);
  std::vector<Mat> hs(n);
  for (int j = 0; j < n; ++j) hs[j] = twisted_operator(A.value(disc.t(j)), z, all, K);
  // D phi on nodes with a full stencil
  for (int j = w; j < n - w; ++j) df[j] = diff(f, j, d1) / h + hs[j] * f[j];

  double res = 0, base = 0;
  for (int j = 0; j < n; ++j) base += f[j].squaredNorm();
  for (int j = 2 * w; j < n - 2 * w; ++j) {
    Vec dstar_d = -diff(df, j, d1) / h + hs[j] * df[j];

    CoefficientField a = A.value(disc.t(j));
    Vec lap = -diff(f, j, d2) / (h * h);
    for (int i = 0; i < 3; ++i) {
      Mat ci = covariant_component(a, z, i, K);
      Vec v(f[j].size());
      // spinor index is innermost; C_i acts on units
      for (int s = 0; s < 2; ++s) {
        Vec us = f[j](Eigen::seqN(s, ci.cols(), 2));
        v(Eigen::seqN(s, ci.cols(), 2)) = ci * (ci * us);
      }
      lap += v;
    }

    CoefficientField e = A.time_derivative(disc.t(j));
    CoefficientField b = magnetic_field(a);
    Vec cl = Vec::Zero(f[j].size());
    for (int l = 0; l < 3; ++l) {
      Mat x = unit_multiplier(e, l, K) - unit_multiplier(b, l, K);
      Mat2 s;
      if (l == 0) s << 0, 1, 1, 0;
      if (l == 1) s << 0, cplx(0, -1), cplx(0, 1), 0;
      if (l == 2) s << 1, 0, 0, -1;
      cl += cplx(0, 1) * (spin_embed(x, s) * f[j]);
    }
    res += (dstar_d - lap - cl).squaredNorm();
  }
  return base > 0 ? std::sqrt(res / base) : 0.0;
}

}  // namespace nahm
