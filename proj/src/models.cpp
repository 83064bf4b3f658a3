#include "nahm/models.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"
#include "nahm/cache.hpp"
#include "nahm/errors.hpp"

namespace nahm {

namespace {

Discretization check_grid(double t_max) {
  Discretization d;
  d.t_max = t_max;
  d.n_t = 64;
  return d;
}

// distance from z to the segment {sign * seg.at(s)} modulo Z^3
double segment_distance(const FlatSegment& seg, const Vec3& z, int sign) {
  Vec3 a = sign * seg.from, b = sign * seg.to;
  double best = INFINITY;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      for (int k = -2; k <= 2; ++k) {
        Vec3 p = z + Vec3(i, j, k);
        Vec3 d = b - a;
        double s = d.squaredNorm() > 0 ? std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0) : 0.0;
        best = std::min(best, (a + s * d - p).norm());
      }
  return best;
}

}  // namespace

double ProfileShape::q(double t) const {
  if (kind == Profile::linear_smoothed) return smoothstep((t + t_flat) / (2 * t_flat));
  double raw = 0.5 * (1 + std::tanh(kappa * t));
  double lim = t > 0 ? 1.0 : 0.0;
  double b = smoothstep(std::abs(t) - (t_flat - 1));
  return (1 - b) * raw + b * lim;
}

double ProfileShape::dq(double t) const {
  if (kind == Profile::linear_smoothed) return smoothstep_derivative((t + t_flat) / (2 * t_flat)) / (2 * t_flat);
  double raw = 0.5 * (1 + std::tanh(kappa * t));
  double sech = 1 / std::cosh(kappa * t);
  double draw = 0.5 * kappa * sech * sech;
  double lim = t > 0 ? 1.0 : 0.0;
  double x = std::abs(t) - (t_flat - 1);
  double b = smoothstep(x);
  double db = smoothstep_derivative(x) * (t > 0 ? 1 : -1);
  return (1 - b) * draw + db * (lim - raw);
}

AbelianPath make_abelian_path(const Vec3& w_minus, const Vec3& w_plus, Profile profile, double t_flat,
                              double kappa, std::optional<double> beta) {
  if (!(t_flat > 0)) throw InvalidArgument("t_flat must be positive");
  if (profile == Profile::tanh && t_flat < 1) throw InvalidArgument("tanh profile needs t_flat >= 1");
  ProfileShape shape{profile, t_flat, kappa};
  double b = beta ? *beta : (profile == Profile::tanh ? 2 * kappa : 1.0);
  auto src = std::make_shared<const AbelianSource>(w_minus, w_plus, shape);
  ConnectionPath path(src, w_minus, w_plus, b, check_grid(std::max(t_flat + 2, 4.0)));
  return AbelianPath{w_minus, w_plus, shape, b, src, path};
}

CutoffSource::CutoffSource(std::shared_ptr<const FieldSource> base, CoefficientField g_minus,
                           CoefficientField g_plus, double R)
    : base_(std::move(base)), gm_(std::move(g_minus)), gp_(std::move(g_plus)), r_(R) {}

int CutoffSource::coefficient_cut() const {
  return std::max({base_->coefficient_cut(), gm_.modes.cut(), gp_.modes.cut()});
}

std::array<double, 3> CutoffSource::partition(double t) const {
  double cp = smoothstep(t - r_), cm = smoothstep(-t - r_);
  return {cm, 1 - cp - cm, cp};
}

CoefficientField CutoffSource::value(double t) const {
  auto [cm, c0, cp] = partition(t);
  CoefficientField out(coefficient_cut());
  if (cm != 0) out += cm * gm_;
  if (cp != 0) out += cp * gp_;
  if (c0 != 0) out += c0 * base_->value(t);
  return out;
}

CoefficientField CutoffSource::time_derivative(double t) const {
  auto [cm, c0, cp] = partition(t);
  double dp = smoothstep_derivative(t - r_), dm = -smoothstep_derivative(-t - r_);
  CoefficientField out(coefficient_cut());
  if (dm != 0) out += dm * gm_;
  if (dp != 0) out += dp * gp_;
  if (dm != 0 || dp != 0) out += (-dm - dp) * base_->value(t);
  if (c0 != 0) out += c0 * base_->time_derivative(t);
  return out;
}

ConnectionPath CutoffInterpolation::a_R() const {
  auto src = std::make_shared<const CutoffSource>(base.source(), base.limit(End::minus), base.limit(End::plus), R);
  return ConnectionPath(src, base.limit_w(End::minus), base.limit_w(End::plus), base.beta(), check_grid(R + 3));
}

ConnectionPath CutoffInterpolation::a_R_s(double s) const {
  if (!flat_path) throw InvalidArgument("a_R^s needs a flat path");
  Vec3 ws = flat_path->at(s);
  auto src = std::make_shared<const CutoffSource>(base.source(), base.limit(End::minus), CoefficientField::flat(ws), R);
  return ConnectionPath(src, base.limit_w(End::minus), ws, base.beta(), check_grid(R + 3));
}

CutoffInterpolation make_cutoff_interpolation(const ConnectionPath& base, double R,
                                              std::optional<FlatSegment> flat_path, std::optional<Vec3> twist) {
  if (!(R > 0)) throw InvalidArgument("R must be positive");
  if (flat_path && twist)
    for (int sign : {1, -1})
      if (segment_distance(*flat_path, *twist, sign) < 1e-9)
        throw WallHit("flat path meets a wall at the working twist");
  return CutoffInterpolation{base, R, flat_path};
}

PerturbedFlatSource::PerturbedFlatSource(const Vec3& w, double eps, double beta, std::uint64_t seed, int cut)
    : w_(w), eps_(eps), beta_(beta), cut_(cut), b_(cut) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const Mat2 s[3] = {(Mat2() << 0, 1, 1, 0).finished(), (Mat2() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
                     (Mat2() << 1, 0, 0, -1).finished()};
  const ModeLattice& L = b_.modes;
  for (int m = 0; m < L.size(); ++m) {
    int mm = L.index(-L.mode(m));
    if (mm < m) continue;
    for (int dir = 0; dir < 3; ++dir) {
      Mat2 x = Mat2::Zero();
      for (int k = 0; k < 3; ++k) {
        cplx c = m == mm ? cplx(nd(rng), 0) : cplx(nd(rng), nd(rng));
        x += cplx(0, 1) * c * s[k];
      }
      b_.a[m][dir] = x;
      if (mm != m) b_.a[mm][dir] = -x.adjoint();
    }
  }
  b_ *= 1.0 / b_.max_abs();
}

CoefficientField PerturbedFlatSource::value(double t) const {
  double f = eps_ * std::exp(-beta_ * std::sqrt(1 + t * t));
  return CoefficientField::flat(w_, cut_) + f * b_;
}

CoefficientField PerturbedFlatSource::time_derivative(double t) const {
  double r = std::sqrt(1 + t * t);
  double df = -eps_ * beta_ * t / r * std::exp(-beta_ * r);
  return df * b_;
}

ConnectionPath make_perturbed_flat(const Vec3& w, double eps, double beta, std::uint64_t seed, int cut) {
  auto src = std::make_shared<const PerturbedFlatSource>(w, eps, beta, seed, cut);
  return ConnectionPath(src, w, w, beta, check_grid(std::max(4.0, 4.0 / beta)));
}

SampledSource::SampledSource(std::vector<double> t, std::vector<CoefficientField> a, CoefficientField g_minus,
                             CoefficientField g_plus)
    : t_(std::move(t)), a_(std::move(a)), gm_(std::move(g_minus)), gp_(std::move(g_plus)) {
  const size_t n = t_.size();
  if (n < 4 || a_.size() != n) throw InvalidArgument("sampled path needs at least 4 samples");
  da_.resize(n);
  for (size_t j = 0; j < n; ++j) {
    size_t lo = j == 0 ? 0 : j - 1, hi = j + 1 == n ? n - 1 : j + 1;
    da_[j] = (1.0 / (t_[hi] - t_[lo])) * (a_[hi] - a_[lo]);
  }
}

CoefficientField SampledSource::value(double t) const {
  if (t <= t_.front()) return t == t_.front() ? a_.front() : gm_.resized(coefficient_cut());
  if (t >= t_.back()) return t == t_.back() ? a_.back() : gp_.resized(coefficient_cut());
  size_t j = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin() - 1;
  double h = t_[j + 1] - t_[j], x = (t - t_[j]) / h;
  double h00 = 2 * x * x * x - 3 * x * x + 1, h10 = x * x * x - 2 * x * x + x;
  double h01 = -2 * x * x * x + 3 * x * x, h11 = x * x * x - x * x;
  return h00 * a_[j] + (h10 * h) * da_[j] + h01 * a_[j + 1] + (h11 * h) * da_[j + 1];
}

CoefficientField SampledSource::time_derivative(double t) const {
  if (t < t_.front() || t > t_.back()) return CoefficientField(coefficient_cut());
  size_t j = std::min<size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin() - 1, t_.size() - 2);
  double h = t_[j + 1] - t_[j], x = (t - t_[j]) / h;
  double d00 = (6 * x * x - 6 * x) / h, d10 = 3 * x * x - 4 * x + 1;
  double d01 = (-6 * x * x + 6 * x) / h, d11 = 3 * x * x - 2 * x;
  return d00 * a_[j] + d10 * da_[j] + d01 * a_[j + 1] + d11 * da_[j + 1];
}

void export_path(const std::string& stem, const ConnectionPath& A, const Discretization& disc) {
  disc.validate();
  int cut = A.coefficient_cut();
  ModeLattice L(cut);
  BinaryContainer c;
  c.n_t = disc.n_t;
  c.fourier_cut = cut;
  c.rank = 4;
  c.count = 3;
  std::vector<CoefficientField> samples(disc.n_t);
  for (int j = 0; j < disc.n_t; ++j) samples[j] = A.value(disc.t(j)).resized(cut);
  for (int dir = 0; dir < 3; ++dir)
    for (int j = 0; j < disc.n_t; ++j)
      for (int m = 0; m < L.size(); ++m)
        for (int e = 0; e < 4; ++e) c.data.push_back(samples[j].a[m][dir](e / 2, e % 2));
  write_container(stem + ".nahm", c);

  nlohmann::json j;
  const Vec3 &wm = A.limit_w(End::minus), &wp = A.limit_w(End::plus);
  j["format"] = "nahm-path";
  j["w_minus"] = {wm[0], wm[1], wm[2]};
  j["w_plus"] = {wp[0], wp[1], wp[2]};
  j["beta"] = A.beta();
  j["grid"] = {{"t_max", disc.t_max}, {"n_t", disc.n_t}};
  j["coefficient_cut"] = cut;
  j["temporal_gauge"] = true;
  std::ofstream os(stem + ".json");
  os << j.dump(2) << "\n";
}

ConnectionPath import_path(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw FormatError("missing header " + stem + ".json");
  nlohmann::json j = nlohmann::json::parse(js);
  if (j.value("format", "") != "nahm-path") throw FormatError("not a path header");
  Vec3 wm(j["w_minus"][0], j["w_minus"][1], j["w_minus"][2]);
  Vec3 wp(j["w_plus"][0], j["w_plus"][1], j["w_plus"][2]);
  Discretization disc;
  disc.t_max = j["grid"]["t_max"];
  disc.n_t = j["grid"]["n_t"];
  int cut = j["coefficient_cut"];
  BinaryContainer c = read_container(stem + ".nahm");
  ModeLattice L(cut);
  if (c.n_t != static_cast<std::uint64_t>(disc.n_t) || c.fourier_cut != static_cast<std::uint64_t>(cut) || c.count != 3 ||
      c.data.size() != static_cast<size_t>(3 * disc.n_t * L.size() * 4))
    throw FormatError("path container does not match its header");
  std::vector<double> ts(disc.n_t);
  std::vector<CoefficientField> samples(disc.n_t, CoefficientField(cut));
  size_t k = 0;
  for (int dir = 0; dir < 3; ++dir)
    for (int jt = 0; jt < disc.n_t; ++jt)
      for (int m = 0; m < L.size(); ++m)
        for (int e = 0; e < 4; ++e) samples[jt].a[m][dir](e / 2, e % 2) = c.data[k++];
  for (int jt = 0; jt < disc.n_t; ++jt) ts[jt] = disc.t(jt);
  auto src = std::make_shared<const SampledSource>(ts, samples, CoefficientField::flat(wm, cut), CoefficientField::flat(wp, cut));
  return ConnectionPath(src, wm, wp, j["beta"], disc);
}

}  // namespace nahm
