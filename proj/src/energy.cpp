#include <cmath>
#include <numbers>

#include "nahm/models.hpp"

namespace nahm {

namespace {

double field_norm2(const CoefficientField& f) {
  double s = 0;
  for (const auto& arr : f.a)
    for (const auto& m : arr) s += m.squaredNorm();
  return s;
}

// sum over modes and directions of Re tr(x^dagger y)
double field_inner(const CoefficientField& x, const CoefficientField& y) {
  double s = 0;
  for (int m = 0; m < x.modes.size(); ++m) {
    int k = y.modes.index(x.modes.mode(m));
    if (k < 0) continue;
    for (int l = 0; l < 3; ++l) s += std::real((x.a[m][l].adjoint() * y.a[k][l]).trace());
  }
  return s;
}

}  // namespace

FieldIntegrals energy_charge(const ConnectionPath& A, const Discretization& disc) {
  disc.validate();
  const int n = disc.n_t;
  const double h = disc.h();
  std::vector<CoefficientField> a(n);
  for (int j = 0; j < n; ++j) a[j] = A.value(disc.t(j));

  FieldIntegrals out;
  std::vector<double> q(n);
  for (int j = 0; j < n; ++j) {
    CoefficientField e;
    if (j == 0)
      e = (0.5 / h) * (-3.0 * a[0] + 4.0 * a[1] - a[2]);
    else if (j == n - 1)
      e = (0.5 / h) * (3.0 * a[n - 1] - 4.0 * a[n - 2] + a[n - 3]);
    else
      e = (0.5 / h) * (a[j + 1] - a[j - 1]);
    CoefficientField b = magnetic_field(a[j]);
    out.t.push_back(disc.t(j));
    out.density.push_back(field_norm2(e) + field_norm2(b));
    q[j] = 2 * field_inner(e, b);
  }
  for (int j = 0; j < n; ++j) {
    double wgt = (j == 0 || j == n - 1) ? 0.5 * h : h;
    out.energy += wgt * out.density[j];
    out.charge += wgt * q[j];
  }
  out.charge /= 8 * std::numbers::pi * std::numbers::pi;

  double c = 0;
  for (int j = 0; j < n; ++j)
    if (std::abs(out.t[j]) >= 0.5 * disc.t_max)
      c = std::max(c, out.density[j] * std::exp(2 * A.beta() * std::abs(out.t[j])));
  out.truncation_tail_bound = c * std::exp(-2 * A.beta() * disc.t_max);
  return out;
}

}  // namespace nahm
