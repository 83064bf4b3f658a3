#pragma once
// Test configurations: abelian paths, cutoff interpolations a_R / a_R^s,
// random decaying perturbations of flat connections, and field integrals.
#include <cstdint>
#include <optional>
#include <string>

#include "nahm/field.hpp"

namespace nahm {

enum class Profile { linear_smoothed, tanh };

// q(t) rises from 0 to 1; exactly constant for |t| >= t_flat.
struct ProfileShape {
  Profile kind = Profile::linear_smoothed;
  double t_flat = 2.0;
  double kappa = 1.0;  // tanh steepness
  double q(double t) const;
  double dq(double t) const;
};

// a(t) = 2 pi i diag(1,-1) w(t) . dx with w(t) = w_- + q(t) (w_+ - w_-).
class AbelianSource : public FieldSource {
public:
  AbelianSource(const Vec3& w_minus, const Vec3& w_plus, ProfileShape shape)
      : wm_(w_minus), wp_(w_plus), shape_(shape) {}
  int coefficient_cut() const override { return 0; }
  CoefficientField value(double t) const override { return CoefficientField::flat(w(t)); }
  CoefficientField time_derivative(double t) const override { return CoefficientField::flat(dw(t)); }
  std::optional<double> flat_radius() const override { return shape_.t_flat; }
  Vec3 w(double t) const { return wm_ + shape_.q(t) * (wp_ - wm_); }
  Vec3 dw(double t) const { return shape_.dq(t) * (wp_ - wm_); }

private:
  Vec3 wm_, wp_;
  ProfileShape shape_;
};

struct AbelianPath {
  Vec3 w_minus, w_plus;
  ProfileShape shape;
  double beta;
  std::shared_ptr<const AbelianSource> source;
  ConnectionPath path;

  Vec3 w_of(double t) const { return source->w(t); }
  // closed-form E_l = F_{t l}; the magnetic part vanishes
  CoefficientField electric(double t) const { return source->time_derivative(t); }
};

// beta defaults to 2 kappa for tanh and to 1 for linear_smoothed.
AbelianPath make_abelian_path(const Vec3& w_minus, const Vec3& w_plus, Profile profile, double t_flat,
                              double kappa = 1.0, std::optional<double> beta = std::nullopt);

// Straight path of flat connections Gamma_s, s in [0,1].
struct FlatSegment {
  Vec3 from, to;
  Vec3 at(double s) const { return from + s * (to - from); }
};

class CutoffSource : public FieldSource {
public:
  CutoffSource(std::shared_ptr<const FieldSource> base, CoefficientField g_minus, CoefficientField g_plus, double R);
  int coefficient_cut() const override;
  CoefficientField value(double t) const override;
  CoefficientField time_derivative(double t) const override;
  std::optional<double> flat_radius() const override { return r_ + 1; }
  // partition of unity (chi_-, chi_0, chi_+)
  std::array<double, 3> partition(double t) const;

private:
  std::shared_ptr<const FieldSource> base_;
  CoefficientField gm_, gp_;
  double r_;
};

struct CutoffInterpolation {
  ConnectionPath base;
  double R;
  std::optional<FlatSegment> flat_path;

  ConnectionPath a_R() const;
  // the + end follows Gamma_s; requires flat_path
  ConnectionPath a_R_s(double s) const;
};

// Throws WallHit if the flat path meets a wall at twist z.
CutoffInterpolation make_cutoff_interpolation(const ConnectionPath& base, double R,
                                              std::optional<FlatSegment> flat_path = std::nullopt,
                                              std::optional<Vec3> twist = std::nullopt);

// Flat Gamma_w plus eps * exp(-beta sqrt(1+t^2)) * B with B a seeded random
// su(2)-valued field on modes |n|_inf <= cut, normalized to max entry 1.
class PerturbedFlatSource : public FieldSource {
public:
  PerturbedFlatSource(const Vec3& w, double eps, double beta, std::uint64_t seed, int cut = 1);
  int coefficient_cut() const override { return cut_; }
  CoefficientField value(double t) const override;
  CoefficientField time_derivative(double t) const override;

private:
  Vec3 w_;
  double eps_, beta_;
  int cut_;
  CoefficientField b_;
};

ConnectionPath make_perturbed_flat(const Vec3& w, double eps, double beta, std::uint64_t seed, int cut = 1);

// Piecewise cubic Hermite interpolation of sampled coefficients; the flat
// limits are returned outside the sampled interval.
class SampledSource : public FieldSource {
public:
  SampledSource(std::vector<double> t, std::vector<CoefficientField> a, CoefficientField g_minus,
                CoefficientField g_plus);
  int coefficient_cut() const override { return a_.front().modes.cut(); }
  CoefficientField value(double t) const override;
  CoefficientField time_derivative(double t) const override;

private:
  std::vector<double> t_;
  std::vector<CoefficientField> a_, da_;
  CoefficientField gm_, gp_;
};

// JSON header <stem>.json plus coefficient container <stem>.nahm
void export_path(const std::string& stem, const ConnectionPath& A, const Discretization& disc);
ConnectionPath import_path(const std::string& stem);

struct FieldIntegrals {
  double energy = 0;
  double charge = 0;
  double truncation_tail_bound = 0;
  std::vector<double> t, density;  // |F|^2 integrated over T^3
};

FieldIntegrals energy_charge(const ConnectionPath& A, const Discretization& disc);

}  // namespace nahm
