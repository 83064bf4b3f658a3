#include "nahm/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nahm/errors.hpp"

namespace nahm {

double log_linear_slope(const std::vector<double>& t, const std::vector<double>& y) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > 0)) continue;
    double ly = std::log(y[i]);
    n += 1;
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  if (n < 2) return -INFINITY;
  return (n * sty - st * sy) / (n * stt - st * st);
}

AsymptoticFit asymptotic_fit(const SpinorField& phi, const FlatLimit& limit, const Vec3& z,
                             double t_lo, double t_hi) {
  std::vector<int> idx;
  for (int j = 0; j < phi.time_points(); ++j)
    if (phi.time(j) >= t_lo - 1e-12 && phi.time(j) <= t_hi + 1e-12) idx.push_back(j);
  if (idx.size() < 8) throw WindowTooShort("fewer than 8 gridpoints in the window");

  ModeLattice L(phi.disc.fourier_cut);
  const int units = 2 * L.size();
  // eigenvectors of the limit operator, unit by unit
  std::vector<Mat2> vecs(units);
  std::vector<Eigen::Vector2d> vals(units);
  for (int u = 0; u < units; ++u) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(flat_mode_operator(L.mode(u / 2), u % 2 == 0 ? 1 : -1, limit.embedding_w, z));
    vecs[u] = es.eigenvectors();
    vals[u] = es.eigenvalues();
  }
  // levels merged within 1e-9
  std::vector<double> levels;
  auto level_of = [&](double v) {
    for (size_t k = 0; k < levels.size(); ++k)
      if (std::abs(levels[k] - v) <= 1e-9) return static_cast<int>(k);
    levels.push_back(v);
    return static_cast<int>(levels.size() - 1);
  };
  std::vector<std::array<int, 2>> lev(units);
  for (int u = 0; u < units; ++u)
    for (int s = 0; s < 2; ++s) lev[u][s] = level_of(vals[u][s]);

  auto project = [&](int j, int level) {
    Vec out = Vec::Zero(phi.slice());
    Vec f = phi.slice_at(j);
    for (int u = 0; u < units; ++u)
      for (int s = 0; s < 2; ++s) {
        if (lev[u][s] != level) continue;
        Eigen::Vector2cd v = vecs[u].col(s);
        cplx c = v.dot(f.segment<2>(2 * u));
        out.segment<2>(2 * u) += c * v;
      }
    return out;
  };

  int jh = idx.back();
  std::vector<double> mags(levels.size(), 0);
  for (size_t k = 0; k < levels.size(); ++k) mags[k] = project(jh, static_cast<int>(k)).norm();
  std::vector<size_t> order(levels.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return mags[a] > mags[b]; });
  if (order.size() > 1 && mags[order[1]] * 3 > mags[order[0]])
    throw NoDominantMode("two eigencomponents of comparable size at t_hi");
  int dom = static_cast<int>(order[0]);

  AsymptoticFit fit;
  fit.level = levels[dom];
  std::vector<double> ts, ys;
  for (int j : idx) {
    ts.push_back(phi.time(j));
    ys.push_back(project(j, dom).norm());
  }
  fit.lambda_hat = log_linear_slope(ts, ys);
  fit.boundary_vector = Vec::Zero(phi.slice());
  for (int j : idx) fit.boundary_vector += std::exp(-fit.lambda_hat * phi.time(j)) * project(j, dom);
  fit.boundary_vector /= static_cast<double>(idx.size());

  std::vector<double> rs;
  for (int j : idx) {
    Vec r = phi.slice_at(j) - std::exp(fit.lambda_hat * phi.time(j)) * fit.boundary_vector;
    double fn = phi.slice_at(j).norm();
    fit.remainder_norm = std::max(fit.remainder_norm, fn > 0 ? r.norm() / fn : 0.0);
    rs.push_back(r.norm() > 1e-14 * fn ? r.norm() : 0.0);
  }
  fit.remainder_rate = log_linear_slope(ts, rs);
  return fit;
}

}  // namespace nahm
