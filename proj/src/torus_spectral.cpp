#include "nahm/torus_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nahm/errors.hpp"

namespace nahm {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMergeTol = 1e-12;

// +|k| eigenvector of sigma.k; for k = 0 returns e_1.
Eigen::Vector2cd positive_spinor(const Vec3& k) {
  double r = k.norm();
  if (r == 0.0) return Eigen::Vector2cd(1, 0);
  cplx a(k.z() + r, 0), b(k.x(), k.y());
  cplx c(k.x(), -k.y()), d(r - k.z(), 0);
  Eigen::Vector2cd v = std::norm(a) + std::norm(b) >= std::norm(c) + std::norm(d)
                           ? Eigen::Vector2cd(a, b)
                           : Eigen::Vector2cd(c, d);
  return v.normalized();
}

bool lex_less(const Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(a[i] - b[i]) > kMergeTol) return a[i] < b[i];
  }
  return false;
}
}  // namespace

Vec3 TorusPoint::reduce(const Vec3& v) {
  Vec3 r;
  for (int i = 0; i < 3; ++i) {
    double x = v[i] - std::floor(v[i]);
    // snap values that round to 1 back to 0
    if (x >= 1.0 - 1e-15) x = 0.0;
    r[i] = x;
  }
  return r;
}

Vec3 centered(const Vec3& v) {
  Vec3 r;
  for (int i = 0; i < 3; ++i) r[i] = v[i] - std::round(v[i]);
  return r;
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  return centered(a.coords - b.coords).norm();
}

bool same_point(const TorusPoint& a, const TorusPoint& b, double tol) {
  return torus_distance(a, b) <= tol;
}

FlatLimit::FlatLimit(const TorusPoint& p, End l) : embedding_w(p.coords), label(l) {
  TorusPoint q = p.negated();
  w = lex_less(q.coords, p.coords) ? q : p;
}

int SpectrumMultiset::total_multiplicity() const {
  int s = 0;
  for (const auto& e : entries) s += e.multiplicity;
  return s;
}

int SpectrumMultiset::multiplicity_of(double value, double tol) const {
  for (const auto& e : entries)
    if (std::abs(e.value - value) <= tol) return e.multiplicity;
  return 0;
}

double SpectrumMultiset::smallest_positive() const {
  for (const auto& e : entries)
    if (e.value > kMergeTol) return e.value;
  return INFINITY;
}

Eigen::Matrix2cd flat_mode_operator(const Int3& n, int branch, const Vec3& w, const Vec3& z) {
  Vec3 k = kTwoPi * (n.cast<double>() + branch * w - z);
  Eigen::Matrix2cd h;
  h << k.z(), cplx(k.x(), -k.y()), cplx(k.x(), k.y()), -k.z();
  return h;
}

SpectrumMultiset exact_spectrum(const TorusPoint& w, const TorusPoint& z, double cutoff) {
  if (!(cutoff > 0)) throw InvalidArgument("cutoff must be positive");
  double radius = cutoff / kTwoPi + w.coords.norm() + z.coords.norm() + 1.0;
  int b = static_cast<int>(std::ceil(radius));

  struct Raw {
    double value;
    Witness wit;
  };
  std::vector<Raw> raw;
  for (int branch : {1, -1}) {
    for (int i = -b; i <= b; ++i)
      for (int j = -b; j <= b; ++j)
        for (int k = -b; k <= b; ++k) {
          Int3 n(i, j, k);
          if (n.cast<double>().norm() > radius) continue;
          double v = kTwoPi * (n.cast<double>() + branch * w.coords - z.coords).norm();
          if (v > cutoff + kMergeTol) continue;
          // a vanishing mode carries both spinor directions at level 0
          raw.push_back({v, {n, branch, 1}});
          raw.push_back({-v, {n, branch, -1}});
        }
  }
  for (auto& r : raw)
    if (std::abs(r.value) <= kMergeTol) r.value = 0.0;
  std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.value < b.value; });

  SpectrumMultiset out;
  for (const auto& r : raw) {
    if (!out.entries.empty() && std::abs(out.entries.back().value - r.value) <= kMergeTol) {
      auto& e = out.entries.back();
      e.multiplicity += 1;
      e.witnesses.push_back(r.wit);
    } else {
      out.entries.push_back({r.value, 1, {r.wit}});
    }
  }
  return out;
}

Eigenspace eigenspace(const TorusPoint& w, const TorusPoint& z, double level) {
  SpectrumMultiset s = exact_spectrum(w, z, std::abs(level) + 1.0);
  const SpectrumEntry* hit = nullptr;
  for (const auto& e : s.entries)
    if (std::abs(e.value - level) <= kMergeTol) hit = &e;
  if (!hit) throw LevelNotInSpectrum("level " + std::to_string(level) + " not in spectrum");

  Eigenspace out;
  out.level = hit->value;
  for (const auto& wit : hit->witnesses) {
    Vec3 k = wit.n.cast<double>() + wit.branch * w.coords - z.coords;
    Eigen::Vector2cd vp = positive_spinor(k);
    Eigen::Vector2cd vm(-std::conj(vp[1]), std::conj(vp[0]));
    // at level 0 the two witnesses of a mode take the two spinor directions
    out.basis.push_back({wit.n, wit.branch, wit.sign > 0 ? vp : vm});
  }
  return out;
}

std::vector<TorusPoint> singular_set(const FlatLimit& gamma_plus, const FlatLimit& gamma_minus) {
  std::vector<TorusPoint> out;
  for (const TorusPoint& p : {gamma_plus.w, gamma_plus.w.negated(), gamma_minus.w, gamma_minus.w.negated()}) {
    bool dup = false;
    for (const auto& q : out) dup = dup || same_point(p, q);
    if (!dup) out.push_back(p);
  }
  return out;
}

double distance_to_set(const TorusPoint& z, const std::vector<TorusPoint>& W) {
  double d = INFINITY;
  for (const auto& p : W) d = std::min(d, torus_distance(z, p));
  return d;
}

double safe_radius(const TorusPoint& w, const std::vector<TorusPoint>& W, double beta) {
  if (!(beta > 0)) throw InvalidArgument("beta must be positive");
  bool member = false;
  for (size_t i = 0; i < W.size(); ++i) {
    member = member || same_point(W[i], w);
    for (size_t j = i + 1; j < W.size(); ++j)
      if (same_point(W[i], W[j]))
        throw DegenerateConfiguration("two elements of W coincide");
  }
  if (!member) throw InvalidArgument("w is not an element of W");

  // nearest point of Z^3 + W other than w itself; lattice translates of w sit at distance >= 1
  double d = 1.0;
  for (const auto& p : W)
    if (!same_point(p, w)) d = std::min(d, torus_distance(p, w));
  return 0.25 * std::min(beta, d);
}

}  // namespace nahm
