#pragma once
// Weighted kernels, index, the Fredholm wall grid, wall crossing and spectral flow.
#include <cstdint>
#include <vector>

#include "nahm/dirac.hpp"

namespace nahm {

struct ThresholdReport {
  double threshold = 0;   // singular values below count as kernel
  double gap_ratio = 10;  // nothing may lie in [threshold, gap_ratio*threshold)
  int below = 0;
  int below_outer = 0;
};

struct KernelResult {
  std::vector<SpinorField> basis;   // unit weighted norm, physical (unconjugated) values
  std::vector<double> singular_values;
  int dim_ker = 0;
  int dim_coker = 0;
  int index = 0;
  ThresholdReport threshold_report;
};

struct KernelOptions {
  bool allow_wall = false;     // compute the L^2_delta kernel even on a wall
  bool with_coker = true;
  std::uint64_t seed = 0x5eed;
};

KernelResult kernel(const DiracOperator& op, int k_max, const KernelOptions& opt = {});

struct FredholmGrid {
  std::vector<double> spec_minus, spec_plus;  // distinct values, ascending
  SpectrumMultiset minus_multiset, plus_multiset;
  bool is_on_wall(const Weight& d, double tol = 1e-12) const;
};

FredholmGrid fredholm_grid(const ConnectionPath& A, const Vec3& z, double cutoff);
bool is_fredholm(const ConnectionPath& A, const Vec3& z, const Weight& delta);

struct WallCrossing {
  int predicted = 0;
  int measured = 0;
  double wall = 0;       // the crossed level, NaN when none
  bool plus_family = true;
  int eigenspace_rank = 0;
};

// measured = ind_D(delta) - ind_D(eta) for the operator D at the given weights
WallCrossing wall_crossing_check(const ConnectionPath& A, const Vec3& z, const Weight& delta,
                                 const Weight& eta, const Discretization& disc);

struct SpectralFlowEvent {
  double t;
  int direction;  // +1 upward crossing
};

struct SpectralFlow {
  int flow = 0;
  std::vector<SpectralFlowEvent> events;
};

SpectralFlow spectral_flow_events(const ConnectionPath& A, const Vec3& z, const Discretization& disc);
int spectral_flow(const ConnectionPath& A, const Vec3& z, const Discretization& disc);

}  // namespace nahm
