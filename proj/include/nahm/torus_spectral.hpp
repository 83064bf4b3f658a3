#pragma once
// Flat twisted Dirac operators on T^3 = R^3/Z^3: spectra, eigenspaces, the
// singular set W and the safe radius.
#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>

namespace nahm {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Int3 = Eigen::Vector3i;

struct TorusPoint {
  Vec3 coords = Vec3::Zero();

  TorusPoint() = default;
  explicit TorusPoint(const Vec3& v) : coords(reduce(v)) {}
  TorusPoint(double a, double b, double c) : TorusPoint(Vec3(a, b, c)) {}

  static Vec3 reduce(const Vec3& v);
  TorusPoint negated() const { return TorusPoint(-coords); }
  double operator[](int i) const { return coords[i]; }
};

// Component-wise representative of v in (-1/2, 1/2].
Vec3 centered(const Vec3& v);
// Distance on the torus.
double torus_distance(const TorusPoint& a, const TorusPoint& b);
bool same_point(const TorusPoint& a, const TorusPoint& b, double tol = 1e-12);

enum class End { minus, plus };

struct FlatLimit {
  TorusPoint w;             // canonical representative
  Vec3 embedding_w = Vec3::Zero();  // representative used by the bundle splitting
  End label = End::plus;

  FlatLimit() = default;
  FlatLimit(const TorusPoint& p, End l);
};

struct Witness {
  Int3 n;
  int branch;  // +1 for the L_w summand, -1 for L_{-w}
  int sign;
};

struct SpectrumEntry {
  double value;
  int multiplicity;
  std::vector<Witness> witnesses;
};

struct SpectrumMultiset {
  std::vector<SpectrumEntry> entries;

  int total_multiplicity() const;
  // Multiplicity of the level closest to value within tol, 0 if absent.
  int multiplicity_of(double value, double tol = 1e-12) const;
  double smallest_positive() const;
};

struct EigenVector {
  Int3 n;
  int branch;
  Eigen::Vector2cd spinor;
};

struct Eigenspace {
  double level = 0;
  std::vector<EigenVector> basis;
  int rank() const { return static_cast<int>(basis.size()); }
};

// Flat operator on a single mode: sigma . 2pi(n + branch*w - z).
Eigen::Matrix2cd flat_mode_operator(const Int3& n, int branch, const Vec3& w, const Vec3& z);

SpectrumMultiset exact_spectrum(const TorusPoint& w, const TorusPoint& z, double cutoff);
Eigenspace eigenspace(const TorusPoint& w, const TorusPoint& z, double level);
std::vector<TorusPoint> singular_set(const FlatLimit& gamma_plus, const FlatLimit& gamma_minus);
double safe_radius(const TorusPoint& w, const std::vector<TorusPoint>& W, double beta);

// Smallest distance from z to W modulo the lattice.
double distance_to_set(const TorusPoint& z, const std::vector<TorusPoint>& W);

}  // namespace nahm
