#include "nahm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nahm/errors.hpp"

namespace nahm {

namespace {

struct KernelPart {
  std::vector<SpinorField> basis;
  std::vector<double> sing;
  int dim = 0;
  ThresholdReport report;
};

KernelPart kernel_part(const DiracOperator& op, int k_max, std::uint64_t seed, bool want_basis) {
  KernelPart out;
  const double tau = 1e-6 * op.scale;
  out.report.threshold = tau;
  const double lo = tau * tau, hi = 100 * tau * tau;
  std::vector<double> sing;
  for (size_t bi = 0; bi < op.blocks.size(); ++bi) {
    const auto& blk = op.blocks[bi];
    BlockTridiag t = op.which == Which::DStar ? blk.system.normal_cols() : blk.system.normal_rows();
    int n_lo = t.count_below(lo), n_hi = t.count_below(hi);
    out.report.below += n_lo;
    out.report.below_outer += n_hi;
    if (n_lo != n_hi)
      throw NoSpectralGap("singular values in [tau, 10 tau) with tau=" + std::to_string(tau) +
                          " (block " + std::to_string(bi) + ")");
    out.dim += n_lo;
    int p = std::max(want_basis ? n_lo : 0, std::min(k_max, t.size()));
    if (p == 0) continue;
    EigenPairs ep = smallest_eigenpairs(t, p, seed + bi);
    if (!ep.converged) {
      // only the kernel vectors have to be accurate
      Mat r = t.apply(ep.vectors.leftCols(n_lo));
      for (int i = 0; i < n_lo; ++i)
        if (r.col(i).norm() > tau * tau * 10)
          throw IterationLimit("subspace iteration did not converge (block " + std::to_string(bi) + ")");
    }
    for (int i = 0; i < std::min<int>(p, k_max); ++i) sing.push_back(std::sqrt(std::max(0.0, ep.values[i])));
    if (!want_basis) continue;
    for (int i = 0; i < n_lo; ++i) {
      SpinorField g = op.expand(static_cast<int>(bi), ep.vectors.col(i));
      for (int j = 0; j < g.time_points(); ++j) g.slice_at(j) /= weight_factor(op.weight, g.time(j));
      out.basis.push_back(std::move(g));
    }
  }
  std::sort(sing.begin(), sing.end());
  if (static_cast<int>(sing.size()) > k_max) sing.resize(k_max);
  out.sing = sing;
  return out;
}

std::vector<double> distinct_values(const SpectrumMultiset& s) {
  std::vector<double> v;
  for (const auto& e : s.entries) v.push_back(e.value);
  return v;
}

bool near_any(const std::vector<double>& v, double x, double tol) {
  for (double y : v)
    if (std::abs(x - y) <= tol) return true;
  return false;
}

}  // namespace

KernelResult kernel(const DiracOperator& op, int k_max, const KernelOptions& opt) {
  if (!opt.allow_wall && !is_fredholm(*op.path, op.z_raw, op.weight))
    throw NotFredholm("weight lies on a wall of the Fredholm grid");
  KernelResult r;
  KernelPart k = kernel_part(op, k_max, opt.seed, true);
  r.basis = std::move(k.basis);
  r.singular_values = std::move(k.sing);
  r.dim_ker = k.dim;
  r.threshold_report = k.report;
  if (opt.with_coker) {
    KernelPart c = kernel_part(op.adjoint(), 0, opt.seed, false);
    r.dim_coker = c.dim;
  }
  r.index = r.dim_ker - r.dim_coker;
  return r;
}

bool FredholmGrid::is_on_wall(const Weight& d, double tol) const {
  return near_any(spec_minus, d.minus, tol) || near_any(spec_plus, d.plus, tol);
}

FredholmGrid fredholm_grid(const ConnectionPath& A, const Vec3& z, double cutoff) {
  FredholmGrid g;
  TorusPoint zp(z);
  g.minus_multiset = exact_spectrum(TorusPoint(A.limit_w(End::minus)), zp, cutoff);
  g.plus_multiset = exact_spectrum(TorusPoint(A.limit_w(End::plus)), zp, cutoff);
  g.spec_minus = distinct_values(g.minus_multiset);
  g.spec_plus = distinct_values(g.plus_multiset);
  return g;
}

bool is_fredholm(const ConnectionPath& A, const Vec3& z, const Weight& delta) {
  double cutoff = std::max(std::abs(delta.minus), std::abs(delta.plus)) + 1.0;
  return !fredholm_grid(A, z, cutoff).is_on_wall(delta, 1e-10);
}

WallCrossing wall_crossing_check(const ConnectionPath& A, const Vec3& z, const Weight& delta,
                                 const Weight& eta, const Discretization& disc) {
  double cutoff = std::max({std::abs(delta.minus), std::abs(delta.plus), std::abs(eta.minus), std::abs(eta.plus)}) + 1.0;
  FredholmGrid g = fredholm_grid(A, z, cutoff);
  auto between = [](const std::vector<double>& v, double a, double b) {
    std::vector<double> out;
    for (double x : v)
      if (x > std::min(a, b) && x < std::max(a, b)) out.push_back(x);
    return out;
  };
  auto wp = between(g.spec_plus, delta.plus, eta.plus);
  auto wm = between(g.spec_minus, delta.minus, eta.minus);
  if (wp.size() + wm.size() > 1) throw NotAdjacent("more than one wall separates the weights");

  WallCrossing out;
  out.wall = NAN;
  if (wp.size() == 1) {
    out.wall = wp[0];
    out.plus_family = true;
    out.eigenspace_rank = eigenspace(TorusPoint(A.limit_w(End::plus)), TorusPoint(z), -wp[0]).rank();
    out.predicted = (eta.plus > delta.plus ? -1 : 1) * out.eigenspace_rank;
  } else if (wm.size() == 1) {
    out.wall = wm[0];
    out.plus_family = false;
    out.eigenspace_rank = eigenspace(TorusPoint(A.limit_w(End::minus)), TorusPoint(z), -wm[0]).rank();
    out.predicted = (eta.minus > delta.minus ? 1 : -1) * out.eigenspace_rank;
  }
  KernelResult kd = kernel(assemble_dirac(A, z, delta, disc, Which::D), 0);
  KernelResult ke = kernel(assemble_dirac(A, z, eta, disc, Which::D), 0);
  out.measured = kd.index - ke.index;
  return out;
}

SpectralFlow spectral_flow_events(const ConnectionPath& A, const Vec3& z, const Discretization& disc) {
  disc.validate();
  TorusPoint zp(z);
  for (End e : {End::minus, End::plus})
    if (exact_spectrum(TorusPoint(A.limit_w(e)), zp, 1.0).multiplicity_of(0.0) > 0)
      throw CrossingAtBoundary("0 is in the spectrum of a limit operator");
  const int n = disc.n_t;
  std::vector<CoefficientField> samples(n);
  for (int j = 0; j < n; ++j) samples[j] = A.value(disc.t(j));
  auto groups = coupling_blocks(samples, disc.fourier_cut);
  SpectralFlow sf;
  for (const auto& comps : groups) {
    std::vector<int> neg(n, 0);
    for (int j = 0; j < n; ++j) {
      Eigen::SelfAdjointEigenSolver<Mat> es(twisted_operator(samples[j], z, comps, disc.fourier_cut), Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      if (j == 0 || j == n - 1)
        for (Eigen::Index i = 0; i < ev.size(); ++i)
          if (std::abs(ev[i]) < 1e-9) throw CrossingAtBoundary("eigenvalue near 0 at t=+-T");
      for (Eigen::Index i = 0; i < ev.size(); ++i) neg[j] += ev[i] < 0;
    }
    for (int j = 0; j + 1 < n; ++j) {
      int d = neg[j] - neg[j + 1];
      for (int k = 0; k < std::abs(d); ++k) sf.events.push_back({disc.t_mid(j), d > 0 ? 1 : -1});
      sf.flow += d;
    }
  }
  std::stable_sort(sf.events.begin(), sf.events.end(),
                   [](const SpectralFlowEvent& a, const SpectralFlowEvent& b) { return a.t < b.t; });
  return sf;
}

int spectral_flow(const ConnectionPath& A, const Vec3& z, const Discretization& disc) {
  return spectral_flow_events(A, z, disc).flow;
}

}  // namespace nahm
