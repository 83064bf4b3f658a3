#include "nahm/field.hpp"

#include <cmath>
#include <numbers>

#include "nahm/errors.hpp"

namespace nahm {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

CoefficientField::CoefficientField(int cut) : modes(cut), a(modes.size()) {
  for (auto& arr : a)
    for (auto& m : arr) m.setZero();
}

CoefficientField CoefficientField::flat(const Vec3& w, int cut) {
  CoefficientField f(cut);
  for (int i = 0; i < 3; ++i)
    f.at(Int3::Zero(), i) = Mat2(Eigen::Vector2cd(cplx(0, kTwoPi * w[i]), cplx(0, -kTwoPi * w[i])).asDiagonal());
  return f;
}

CoefficientField& CoefficientField::operator+=(const CoefficientField& o) {
  if (o.modes.cut() > modes.cut()) *this = resized(o.modes.cut());
  for (int m = 0; m < o.modes.size(); ++m) {
    int k = modes.index(o.modes.mode(m));
    for (int i = 0; i < 3; ++i) a[k][i] += o.a[m][i];
  }
  return *this;
}

CoefficientField& CoefficientField::operator*=(double s) {
  for (auto& arr : a)
    for (auto& m : arr) m *= s;
  return *this;
}

CoefficientField CoefficientField::resized(int cut) const {
  CoefficientField f(cut);
  for (int m = 0; m < modes.size(); ++m) {
    int k = f.modes.index(modes.mode(m));
    if (k >= 0) f.a[k] = a[m];
  }
  return f;
}

double CoefficientField::max_abs() const {
  double r = 0;
  for (const auto& arr : a)
    for (const auto& m : arr) r = std::max(r, m.cwiseAbs().maxCoeff());
  return r;
}

double CoefficientField::reality_defect() const {
  double r = 0;
  for (int m = 0; m < modes.size(); ++m) {
    int k = modes.index(-modes.mode(m));
    for (int i = 0; i < 3; ++i) {
      r = std::max(r, (a[k][i] + a[m][i].adjoint()).cwiseAbs().maxCoeff());
      r = std::max(r, std::abs(a[m][i].trace()));
    }
  }
  return r;
}

CoefficientField operator+(CoefficientField a, const CoefficientField& b) { return a += b; }
CoefficientField operator-(CoefficientField a, const CoefficientField& b) {
  CoefficientField nb = b;
  nb *= -1.0;
  return a += nb;
}
CoefficientField operator*(double s, CoefficientField a) { return a *= s; }

CoefficientField magnetic_field(const CoefficientField& a) {
  int cut = a.modes.cut();
  CoefficientField b(2 * cut);
  const ModeLattice& L = a.modes;
  // (l, j, k) cyclic
  const int jk[3][2] = {{1, 2}, {2, 0}, {0, 1}};
  for (int l = 0; l < 3; ++l) {
    int j = jk[l][0], k = jk[l][1];
    for (int m = 0; m < L.size(); ++m) {
      Int3 n = L.mode(m);
      Mat2& out = b.at(n, l);
      out += cplx(0, kTwoPi * n[j]) * a.a[m][k] - cplx(0, kTwoPi * n[k]) * a.a[m][j];
    }
    for (int p = 0; p < L.size(); ++p)
      for (int q = 0; q < L.size(); ++q) {
        const Mat2 &aj = a.a[p][j], &ak = a.a[q][k];
        if (aj.isZero(0) || ak.isZero(0)) continue;
        b.at(L.mode(p) + L.mode(q), l) += aj * ak - ak * aj;
      }
  }
  return b;
}

double smoothstep(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  return x * x * x * (10 + x * (-15 + 6 * x));
}

double smoothstep_derivative(double x) {
  if (x <= 0 || x >= 1) return 0;
  return 30 * x * x * (1 - x) * (1 - x);
}

double weight_factor(const Weight& d, double t) {
  double rho;
  if (t < -1)
    rho = d.minus * t;
  else if (t > 1)
    rho = d.plus * t;
  else
    rho = t * (d.minus + (d.plus - d.minus) * smoothstep(0.5 * (t + 1)));
  return std::exp(-rho);
}

void Discretization::validate() const {
  if (!(t_max > 0)) throw InvalidArgument("t_max must be positive");
  if (n_t < 16) throw InvalidArgument("n_t must be at least 16");
  if (fourier_cut < 1) throw InvalidArgument("fourier_cut must be at least 1");
  if (fd_order != 2 && fd_order != 4) throw InvalidArgument("fd_order must be 2 or 4");
}

ConnectionPath::ConnectionPath(std::shared_ptr<const FieldSource> src, const Vec3& w_minus,
                               const Vec3& w_plus, double beta, const Discretization& check)
    : src_(std::move(src)),
      w_minus_(w_minus),
      w_plus_(w_plus),
      gamma_minus_(CoefficientField::flat(w_minus)),
      gamma_plus_(CoefficientField::flat(w_plus)),
      beta_(beta) {
  if (!(beta > 0)) throw InvalidConnection("decay rate must be positive");
  check.validate();
  for (int j = 0; j < check.n_t; ++j) {
    double d = src_->value(check.t(j)).reality_defect();
    if (d > 1e-12) throw InvalidConnection("coefficients violate reality/tracelessness at t=" + std::to_string(check.t(j)));
  }
  // last quarter of the grid: C from its inner half, the outer half must stay below 2C
  int q = check.n_t / 4;
  for (End e : {End::plus, End::minus}) {
    double s = e == End::plus ? 1.0 : -1.0;
    double c_fit = 0, worst = 0;
    for (int i = 0; i < q; ++i) {
      int j = e == End::plus ? check.n_t - q + i : q - 1 - i;
      double t = check.t(j);
      double dev = (src_->value(t) - limit(e)).max_abs() * std::exp(beta_ * s * t);
      if (i < q / 2)
        c_fit = std::max(c_fit, dev);
      else
        worst = std::max(worst, dev);
    }
    if (worst > 2 * c_fit + 1e-10)
      throw InvalidConnection("declared decay rate not observed on the tail");
  }
}

bool ConnectionPath::equal_limits() const {
  return same_point(TorusPoint(w_plus_), TorusPoint(w_minus_)) ||
         same_point(TorusPoint(w_plus_), TorusPoint(-w_minus_));
}

SpinorField::SpinorField(const Discretization& d, GridKind g) : disc(d), grid(g) {
  values = Vec::Zero(static_cast<Eigen::Index>(time_points()) * slice());
}

cplx SpinorField::inner(const SpinorField& o, const Weight& d) const {
  cplx s = 0;
  for (int j = 0; j < time_points(); ++j) {
    double w = weight_factor(d, time(j));
    double q = grid == GridKind::nodes && (j == 0 || j == time_points() - 1) ? 0.5 : 1.0;
    s += q * w * w * slice_at(j).dot(o.slice_at(j));
  }
  return s * disc.h();
}

SpinorField gauge_shift(const SpinorField& phi, const Int3& shift) {
  SpinorField out(phi.disc, phi.grid);
  ModeLattice L(phi.disc.fourier_cut);
  for (int j = 0; j < phi.time_points(); ++j)
    for (int m = 0; m < L.size(); ++m) {
      int target = L.index(L.mode(m) + shift);
      for (int c = 0; c < 4; ++c) {
        cplx v = phi.at(j, m, c);
        if (v == cplx(0)) continue;
        if (target < 0) throw ModeOverflow("shift pushes an occupied mode past fourier_cut");
        out.at(j, target, c) = v;
      }
    }
  return out;
}

}  // namespace nahm
