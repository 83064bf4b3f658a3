#include "nahm/transform.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "nahm/errors.hpp"

namespace nahm {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec gather_rows(const OperatorBlock& blk, const SpinorField& f) {
  const auto b = blk.comps.size();
  const int rows = f.time_points();
  Vec x(rows * b);
  for (int r = 0; r < rows; ++r)
    for (size_t k = 0; k < b; ++k) x[r * b + k] = f.slice_at(r)[blk.comps[k]];
  return x;
}

void scatter_rows(const OperatorBlock& blk, const Vec& x, SpinorField& f) {
  const auto b = blk.comps.size();
  for (int r = 0; r < f.time_points(); ++r)
    for (size_t k = 0; k < b; ++k) f.slice_at(r)[blk.comps[k]] = x[r * b + k];
}

Vec normal_apply(const BoxSystem& s, const Vec& x) { return s.apply(s.apply_adjoint(x)); }

SpinorField combine(const std::vector<SpinorField>& basis, const Eigen::Ref<const Mat>& coeffs, int col) {
  SpinorField out(basis.front().disc, basis.front().grid);
  for (size_t a = 0; a < basis.size(); ++a) out.values += coeffs(a, col) * basis[a].values;
  return out;
}
}  // namespace

GreenSolver::GreenSolver(const ConnectionPath& A, const Vec3& z, const Discretization& disc)
    : op_(assemble_dirac(A, z, {0, 0}, disc, Which::DStar)) {
  const int n = disc.n_t;
  const double tau = 1e-6 * op_.scale;
  for (const auto& blk : op_.blocks) {
    BlockTridiag rows = blk.system.normal_rows();
    if (rows.count_below(tau * tau) > 0)
      throw NotInvertible("D*D has a kernel at z (z on the singular set or on a kernel-carrying wall)");
    // mode-diagonal part of the block with its own flat-limit boundary directions
    std::map<int, std::vector<int>> by_mode;
    for (size_t k = 0; k < blk.comps.size(); ++k) by_mode[blk.comps[k] / 4].push_back(static_cast<int>(k));
    std::vector<Precond> parts;
    for (auto& [mode, local] : by_mode) {
      const auto b = static_cast<Eigen::Index>(local.size());
      std::vector<int> sub;
      for (int k : local) sub.push_back(blk.comps[k]);
      Mat u[2];
      for (End e : {End::minus, End::plus}) {
        Eigen::SelfAdjointEigenSolver<Mat> es(twisted_operator(A.limit(e), z, sub, disc.fourier_cut));
        std::vector<int> keep;
        for (Eigen::Index i = 0; i < b; ++i) {
          double l = es.eigenvalues()[i];
          if (e == End::plus ? l < -1e-10 : l > 1e-10) keep.push_back(static_cast<int>(i));
        }
        Mat& ue = u[e == End::plus];
        ue.resize(b, keep.size());
        for (size_t c = 0; c < keep.size(); ++c) ue.col(c) = es.eigenvectors().col(keep[c]);
      }
      BoxSystem s;
      s.row_width = static_cast<int>(b);
      s.A.resize(n - 1);
      s.B.resize(n - 1);
      for (int r = 0; r + 1 < n; ++r) {
        s.A[r] = blk.a_full[r](local, local);
        s.B[r] = blk.b_full[r](local, local);
      }
      s.A[0] = s.A[0] * u[0];
      s.B[n - 2] = s.B[n - 2] * u[1];
      s.col_width.assign(n, static_cast<int>(b));
      s.col_width[0] = static_cast<int>(u[0].cols());
      s.col_width[n - 1] = static_cast<int>(u[1].cols());
      BlockTridiag t = s.normal_rows();
      double shift = 1e-12 * t.norm_bound();
      BlockCholesky chol(t, shift);
      while (!chol.ok() && shift < 1e-4 * t.norm_bound()) {
        shift *= 100;
        chol = BlockCholesky(t, shift);
      }
      if (!chol.ok()) throw NoConvergence("preconditioner factorization failed");
      parts.push_back({local, std::move(chol)});
    }
    pre_.push_back(std::move(parts));
  }
}

SpinorField GreenSolver::apply(const SpinorField& b, int* iterations, double* residual) const {
  SpinorField out(op_.disc, GridKind::midpoints);
  const int rows = out.time_points();
  int max_it = 0;
  double worst = 0;
  for (size_t bi = 0; bi < op_.blocks.size(); ++bi) {
    const auto& blk = op_.blocks[bi];
    const auto w = blk.comps.size();
    Vec rhs = gather_rows(blk, b);
    auto precond = [&](const Vec& r) {
      Vec z = Vec::Zero(r.size());
      for (const auto& p : pre_[bi]) {
        Vec loc(rows * p.local.size());
        for (int t = 0; t < rows; ++t)
          for (size_t k = 0; k < p.local.size(); ++k) loc[t * p.local.size() + k] = r[t * w + p.local[k]];
        Vec sol = p.chol.solve(loc);
        for (int t = 0; t < rows; ++t)
          for (size_t k = 0; k < p.local.size(); ++k) z[t * w + p.local[k]] = sol[t * p.local.size() + k];
      }
      return z;
    };
    const double bn = rhs.norm();
    Vec x = Vec::Zero(rhs.size());
    if (bn == 0) continue;
    Vec r = rhs, zz = precond(r), p = zz;
    cplx rz = r.dot(zz);
    int it = 0;
    const int cap = 2000;
    while (r.norm() > 1e-11 * bn) {
      if (++it > cap)
        throw NoConvergence("CG did not converge, relative residual " + std::to_string(r.norm() / bn));
      Vec ap = normal_apply(blk.system, p);
      cplx alpha = rz / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      zz = precond(r);
      cplx rz_new = r.dot(zz);
      p = zz + (rz_new / rz) * p;
      rz = rz_new;
    }
    // true residual
    worst = std::max(worst, (normal_apply(blk.system, x) - rhs).norm() / bn);
    max_it = std::max(max_it, it);
    scatter_rows(blk, x, out);
  }
  if (iterations) *iterations = max_it;
  if (residual) *residual = worst;
  return out;
}

SpinorField GreenSolver::normal(const SpinorField& x) const {
  SpinorField out(op_.disc, GridKind::midpoints);
  for (const auto& blk : op_.blocks) scatter_rows(blk, normal_apply(blk.system, gather_rows(blk, x)), out);
  return out;
}

SpinorField GreenSolver::dstar(const SpinorField& psi) const {
  SpinorField out(op_.disc, GridKind::midpoints);
  const double rh = 1.0 / std::sqrt(op_.disc.h());
  for (size_t bi = 0; bi < op_.blocks.size(); ++bi) {
    const auto& blk = op_.blocks[bi];
    scatter_rows(blk, blk.system.apply(op_.restrict_to(static_cast<int>(bi), psi)) * rh, out);
  }
  return out;
}

SpinorField GreenSolver::d(const SpinorField& y) const {
  SpinorField out(op_.disc, GridKind::nodes);
  const double sh = std::sqrt(op_.disc.h());
  for (size_t bi = 0; bi < op_.blocks.size(); ++bi) {
    const auto& blk = op_.blocks[bi];
    out.values += op_.expand(static_cast<int>(bi), blk.system.apply_adjoint(gather_rows(blk, y) * sh)).values;
  }
  return out;
}

SpinorField GreenSolver::project(const SpinorField& psi) const {
  SpinorField out(op_.disc, GridKind::nodes);
  for (size_t bi = 0; bi < op_.blocks.size(); ++bi)
    out.values += op_.expand(static_cast<int>(bi), op_.restrict_to(static_cast<int>(bi), psi)).values;
  out.values -= d(apply(dstar(psi))).values;
  return out;
}

SpinorField greens_apply(const ConnectionPath& A, const Vec3& z, const SpinorField& b, const Discretization& disc,
                         int* iterations) {
  return GreenSolver(A, z, disc).apply(b, iterations);
}

SpinorField project(const ConnectionPath& A, const Vec3& z, const SpinorField& psi, const Discretization& disc) {
  return GreenSolver(A, z, disc).project(psi);
}

namespace {
TailData tails_of(const DiracOperator& op) {
  TailData t;
  t.t_max = op.disc.t_max;
  for (const auto& blk : op.blocks) {
    t.comps.push_back(blk.comps);
    t.lam_minus.push_back(blk.lam_minus);
    t.lam_plus.push_back(blk.lam_plus);
    t.vec_minus.push_back(blk.vec_minus);
    t.vec_plus.push_back(blk.vec_plus);
  }
  return t;
}

// Integral over the flat end of <f, g> (times t when moment) for fields
// continued by their decaying limit modes from the end node.
cplx end_tail(const Vec& fv, const Eigen::VectorXd& lf, const Mat& vf, const Vec& gv, const Eigen::VectorXd& lg,
              const Mat& vg, bool plus, double T, bool moment) {
  Vec cf = vf.adjoint() * fv, cg = vg.adjoint() * gv;
  Mat cross = vf.adjoint() * vg;
  cplx s = 0;
  for (Eigen::Index i = 0; i < lf.size(); ++i) {
    if (plus ? lf[i] >= -1e-12 : lf[i] <= 1e-12) continue;
    for (Eigen::Index j = 0; j < lg.size(); ++j) {
      if (plus ? lg[j] >= -1e-12 : lg[j] <= 1e-12) continue;
      double kappa = std::abs(lf[i] + lg[j]);
      double weight = moment ? (plus ? T / kappa + 1 / (kappa * kappa) : -T / kappa - 1 / (kappa * kappa)) : 1 / kappa;
      s += std::conj(cf[i]) * cross(i, j) * cg[j] * weight;
    }
  }
  return s;
}
}  // namespace

cplx tail_inner(const SpinorField& f, const TailData& tf, const SpinorField& g, const TailData& tg, bool moment) {
  const auto& d = f.disc;
  const int n = f.time_points();
  cplx s = 0;
  for (int j = 0; j < n; ++j) {
    double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    if (moment) w *= f.time(j);
    s += w * f.slice_at(j).dot(g.slice_at(j));
  }
  s *= d.h();
  if (tf.comps.size() != tg.comps.size()) throw InvalidArgument("tail data of different block structure");
  for (size_t b = 0; b < tf.comps.size(); ++b) {
    const auto& comps = tf.comps[b];
    Vec f0(comps.size()), f1(comps.size()), g0(comps.size()), g1(comps.size());
    for (size_t k = 0; k < comps.size(); ++k) {
      f0[k] = f.slice_at(0)[comps[k]];
      f1[k] = f.slice_at(n - 1)[comps[k]];
      g0[k] = g.slice_at(0)[comps[k]];
      g1[k] = g.slice_at(n - 1)[comps[k]];
    }
    s += end_tail(f1, tf.lam_plus[b], tf.vec_plus[b], g1, tg.lam_plus[b], tg.vec_plus[b], true, tf.t_max, moment);
    s += end_tail(f0, tf.lam_minus[b], tf.vec_minus[b], g0, tg.lam_minus[b], tg.vec_minus[b], false, tf.t_max,
                  moment);
  }
  return s;
}

TransformPoint transform_fiber(const ConnectionPath& A, const Vec3& z, const Discretization& disc,
                               const TransformOptions& opt) {
  auto W = singular_set(A.flat_limit(End::plus), A.flat_limit(End::minus));
  if (distance_to_set(TorusPoint(z), W) < opt.h_z)
    throw SingularTwist("z within h_z of the singular set");
  DiracOperator op = assemble_dirac(A, z, {0, 0}, disc, Which::DStar);
  KernelResult kr = kernel(op, 0);
  TransformPoint p;
  p.z = z;
  p.tails = tails_of(op);
  p.index = kr.index;
  p.rank = kr.dim_ker;
  p.singular_values = kr.singular_values;
  if (opt.require_index_rank && p.rank != std::abs(p.index))
    throw RankJump("fiber rank differs from |index| at z");
  const int k = p.rank;
  if (k == 0) {
    p.higgs = Mat::Zero(0, 0);
    return p;
  }
  Mat gram(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) gram(a, b) = tail_inner(kr.basis[a], p.tails, kr.basis[b], p.tails);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (gram + gram.adjoint()));
  Mat s = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  for (int b = 0; b < k; ++b) p.basis.push_back(combine(kr.basis, s, b));
  Mat mt(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) mt(a, b) = tail_inner(p.basis[a], p.tails, p.basis[b], p.tails, true);
  mt = 0.5 * (mt + mt.adjoint());
  p.higgs = cplx(0, -kTwoPi) * mt;
  return p;
}

Mat fiber_overlap(const TransformPoint& a, const TransformPoint& b) {
  Mat o(a.rank, b.rank);
  for (int i = 0; i < a.rank; ++i)
    for (int j = 0; j < b.rank; ++j) o(i, j) = tail_inner(a.basis[i], a.tails, b.basis[j], b.tails);
  return o;
}

Eigen::VectorXd higgs_spectrum(const TransformPoint& p) {
  if (p.rank == 0) return Eigen::VectorXd();
  Mat ih = cplx(0, 1) * p.higgs;
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (ih + ih.adjoint())).eigenvalues();
}

}  // namespace nahm
