#pragma once
// Exponential asymptotics of spinor fields on a flat tail.
#include "nahm/field.hpp"

namespace nahm {

struct AsymptoticFit {
  double lambda_hat = 0;
  double level = 0;            // eigenvalue of the dominant exact eigenspace
  Vec boundary_vector;         // one time slice, in that eigenspace
  double remainder_rate = 0;   // fitted exponent of the remainder, -inf if it vanishes
  double remainder_norm = 0;   // max over the window of |remainder| / |phi|
};

AsymptoticFit asymptotic_fit(const SpinorField& phi, const FlatLimit& limit, const Vec3& z,
                             double t_lo, double t_hi);

// Least-squares slope of log y against t.
double log_linear_slope(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace nahm
