#pragma once
// Fourier-truncated su(2) connections in temporal gauge, weights and spinor
// fields on the truncated cylinder [-T, T] x T^3.
#include <Eigen/Dense>
#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "nahm/torus_spectral.hpp"

namespace nahm {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;

// Modes n with |n_i| <= cut, lexicographic order.
class ModeLattice {
public:
  explicit ModeLattice(int cut = 0) : cut_(cut), side_(2 * cut + 1) {}
  int cut() const { return cut_; }
  int size() const { return side_ * side_ * side_; }
  Int3 mode(int m) const {
    return Int3(m / (side_ * side_) - cut_, (m / side_) % side_ - cut_, m % side_ - cut_);
  }
  // -1 when outside the lattice
  int index(const Int3& n) const {
    for (int i = 0; i < 3; ++i)
      if (n[i] < -cut_ || n[i] > cut_) return -1;
    return ((n[0] + cut_) * side_ + (n[1] + cut_)) * side_ + (n[2] + cut_);
  }

private:
  int cut_, side_;
};

// su(2)-valued spatial 1-form a = sum_i a_i dx^i in Fourier modes.
struct CoefficientField {
  ModeLattice modes;
  std::vector<std::array<Mat2, 3>> a;

  CoefficientField() = default;
  explicit CoefficientField(int cut);
  static CoefficientField flat(const Vec3& w, int cut = 0);

  Mat2& at(const Int3& n, int dir) { return a[modes.index(n)][dir]; }
  const Mat2& at(const Int3& n, int dir) const { return a[modes.index(n)][dir]; }
  CoefficientField& operator+=(const CoefficientField& o);
  CoefficientField& operator*=(double s);
  CoefficientField resized(int cut) const;
  double max_abs() const;
  // mode-reflection a(-n) = -a(n)^dagger and tracelessness
  double reality_defect() const;
};

CoefficientField operator+(CoefficientField a, const CoefficientField& b);
CoefficientField operator-(CoefficientField a, const CoefficientField& b);
CoefficientField operator*(double s, CoefficientField a);

// Spatial curvature B_l = (1/2) eps_ljk F_jk with F_jk = d_j a_k - d_k a_j + [a_j, a_k].
CoefficientField magnetic_field(const CoefficientField& a);

// A time-dependent connection. Implementations provide exact values and time
// derivatives; everything downstream samples through this interface.
class FieldSource {
public:
  virtual ~FieldSource() = default;
  virtual int coefficient_cut() const = 0;
  virtual CoefficientField value(double t) const = 0;
  virtual CoefficientField time_derivative(double t) const = 0;
  // true when value(t) is exactly constant for |t| >= this radius
  virtual std::optional<double> flat_radius() const { return std::nullopt; }
};

// Flat connection at constant w.
class FlatSource : public FieldSource {
public:
  explicit FlatSource(const Vec3& w) : w_(w) {}
  int coefficient_cut() const override { return 0; }
  CoefficientField value(double) const override { return CoefficientField::flat(w_); }
  CoefficientField time_derivative(double) const override { return CoefficientField(0); }
  std::optional<double> flat_radius() const override { return 0.0; }

private:
  Vec3 w_;
};

struct Weight {
  double minus = 0, plus = 0;
  Weight operator-() const { return {-minus, -plus}; }
  bool operator==(const Weight&) const = default;
};

// sigma_delta(t) = exp(-rho(t)); rho = delta_- t for t < -1, delta_+ t for
// t > 1, quintic blend of the slope on [-1, 1].
double weight_factor(const Weight& d, double t);

struct WeightSextet {
  double eps;
  Weight upper_left() const { return {-eps, eps}; }
  Weight upper() const { return {0, eps}; }
  Weight upper_right() const { return {eps, eps}; }
  Weight lower_left() const { return {-eps, -eps}; }
  Weight lower() const { return {0, -eps}; }
  Weight lower_right() const { return {eps, -eps}; }
};

struct Discretization {
  double t_max = 6.0;
  int n_t = 64;
  int fourier_cut = 1;
  int fd_order = 2;

  void validate() const;
  double h() const { return 2.0 * t_max / (n_t - 1); }
  double t(int j) const { return -t_max + j * h(); }
  double t_mid(int j) const { return -t_max + (j + 0.5) * h(); }
  int mode_count() const { return ModeLattice(fourier_cut).size(); }
};

// Quintic smoothstep on [0,1], clamped.
double smoothstep(double x);
double smoothstep_derivative(double x);

class ConnectionPath {
public:
  // Validates reality, tracelessness and the declared decay on the tails of
  // `check` (throws InvalidConnection).
  ConnectionPath(std::shared_ptr<const FieldSource> src, const Vec3& w_minus, const Vec3& w_plus,
                 double beta, const Discretization& check);

  CoefficientField value(double t) const { return src_->value(t); }
  CoefficientField time_derivative(double t) const { return src_->time_derivative(t); }
  const CoefficientField& limit(End e) const { return e == End::plus ? gamma_plus_ : gamma_minus_; }
  // raw holonomy parameter of the limit, before canonical reduction
  const Vec3& limit_w(End e) const { return e == End::plus ? w_plus_ : w_minus_; }
  FlatLimit flat_limit(End e) const {
    FlatLimit f(TorusPoint(limit_w(e)), e);
    f.embedding_w = limit_w(e);
    return f;
  }
  bool equal_limits() const;
  double beta() const { return beta_; }
  int coefficient_cut() const { return src_->coefficient_cut(); }
  const std::shared_ptr<const FieldSource>& source() const { return src_; }

private:
  std::shared_ptr<const FieldSource> src_;
  Vec3 w_minus_, w_plus_;
  CoefficientField gamma_minus_, gamma_plus_;
  double beta_;
};

enum class GridKind { nodes, midpoints };

// Values indexed (time sample j, mode m, component c) with c = 2*bundle + spinor.
struct SpinorField {
  Discretization disc;
  GridKind grid = GridKind::nodes;
  Vec values;

  SpinorField() = default;
  SpinorField(const Discretization& d, GridKind g);
  int time_points() const { return grid == GridKind::nodes ? disc.n_t : disc.n_t - 1; }
  int slice() const { return 4 * disc.mode_count(); }
  double time(int j) const { return grid == GridKind::nodes ? disc.t(j) : disc.t_mid(j); }
  cplx& at(int j, int m, int c) { return values[(j * disc.mode_count() + m) * 4 + c]; }
  cplx at(int j, int m, int c) const { return values[(j * disc.mode_count() + m) * 4 + c]; }
  auto slice_at(int j) { return values.segment(j * slice(), slice()); }
  auto slice_at(int j) const { return values.segment(j * slice(), slice()); }

  // weighted inner product h sum_j q_j sigma^2 <f_j, g_j>; q_j = 1/2 at the
  // end nodes of the node grid (trapezoid), 1 otherwise
  cplx inner(const SpinorField& o, const Weight& d = {}) const;
  double norm(const Weight& d = {}) const { return std::sqrt(std::real(inner(*this, d))); }
};

SpinorField gauge_shift(const SpinorField& phi, const Int3& shift);

}  // namespace nahm
