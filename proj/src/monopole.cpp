#include <Eigen/Eigenvalues>
#include <algorithm>
#include <exception>
#include <fstream>
#include <thread>
#include <cmath>
#include <numbers>

#include "nahm/errors.hpp"
#include "nahm/transform.hpp"
#include "json.hpp"

namespace nahm {

namespace {
Mat polar_unitary(const Mat& o) {
  Eigen::JacobiSVD<Mat> svd(o, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

void rotate(TransformPoint& p, const Mat& r) {
  std::vector<SpinorField> nb;
  for (int j = 0; j < p.rank; ++j) {
    SpinorField f(p.basis[0].disc, p.basis[0].grid);
    for (int i = 0; i < p.rank; ++i) f.values += r(i, j) * p.basis[i].values;
    nb.push_back(std::move(f));
  }
  p.basis = std::move(nb);
  p.higgs = r.adjoint() * p.higgs * r;
}

std::string site_name(int i, int j, int k) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")";
}

const std::array<int, 3> kUnit[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
}  // namespace

MonopoleField assemble_monopole(const ConnectionPath& A, const ZBox& box, double h, const Discretization& disc,
                                int tree_order, const TransformOptions& opt, int workers) {
  MonopoleField M;
  M.box = box;
  M.h = h;
  const auto& c = box.counts;
  const int total = c[0] * c[1] * c[2];
  M.points.resize(total);
  std::vector<std::exception_ptr> errors(std::max(1, workers));
  auto work = [&](int tid) {
    try {
      for (int s = tid; s < total; s += std::max(1, workers)) {
        int i = s / (c[1] * c[2]), j = (s / c[2]) % c[1], k = s % c[2];
        M.points[s] = transform_fiber(A, box.origin + h * Vec3(i, j, k), disc, opt);
      }
    } catch (...) {
      errors[tid] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  M.rank = M.points.empty() ? 0 : M.points[0].rank;

  auto inside = [&](int i, int j, int k) { return i >= 0 && j >= 0 && k >= 0 && i < c[0] && j < c[1] && k < c[2]; };
  for (int i = 0; i < c[0]; ++i)
    for (int j = 0; j < c[1]; ++j)
      for (int k = 0; k < c[2]; ++k)
        for (int mu = 0; mu < 3; ++mu) {
          int a = i + kUnit[mu][0], b = j + kUnit[mu][1], d = k + kUnit[mu][2];
          if (inside(a, b, d) && M.points[M.index_of(i, j, k)].rank != M.points[M.index_of(a, b, d)].rank)
            throw RankJump("fiber rank changes between " + site_name(i, j, k) + " and " + site_name(a, b, d));
        }

  // gauge alignment along a spanning tree; parents precede children lexicographically
  if (M.rank > 0) {
    for (int i = 0; i < c[0]; ++i)
      for (int j = 0; j < c[1]; ++j)
        for (int k = 0; k < c[2]; ++k) {
          std::array<int, 3> par;
          if (tree_order == 0) {
            if (k > 0) par = {i, j, k - 1};
            else if (j > 0) par = {i, j - 1, 0};
            else if (i > 0) par = {i - 1, 0, 0};
            else continue;
          } else {
            if (i > 0) par = {i - 1, j, k};
            else if (j > 0) par = {0, j - 1, k};
            else if (k > 0) par = {0, 0, k - 1};
            else continue;
          }
          auto& child = M.points[M.index_of(i, j, k)];
          const auto& parent = M.points[M.index_of(par[0], par[1], par[2])];
          rotate(child, polar_unitary(fiber_overlap(parent, child)).adjoint());
        }
  }

  M.links.resize(M.points.size());
  M.unitarity_defect.assign(M.points.size(), 0.0);
  for (int i = 0; i < c[0]; ++i)
    for (int j = 0; j < c[1]; ++j)
      for (int k = 0; k < c[2]; ++k) {
        int s = M.index_of(i, j, k);
        for (int mu = 0; mu < 3; ++mu) {
          int a = i + kUnit[mu][0], b = j + kUnit[mu][1], d = k + kUnit[mu][2];
          if (!inside(a, b, d) || M.rank == 0) continue;
          Mat o = fiber_overlap(M.points[s], M.points[M.index_of(a, b, d)]);
          M.unitarity_defect[s] = std::max(
              M.unitarity_defect[s], (o.adjoint() * o - Mat::Identity(M.rank, M.rank)).cwiseAbs().maxCoeff());
          M.points[s].overlaps[mu] = o;
          M.links[s][mu] = polar_unitary(o);
        }
      }
  for (const auto& p : M.points) M.higgs.push_back(p.higgs);
  return M;
}

std::vector<PlaquetteSample> curvature_fd(const MonopoleField& M) {
  std::vector<PlaquetteSample> out;
  if (M.rank == 0) return out;
  const auto& c = M.box.counts;
  for (int i = 0; i < c[0]; ++i)
    for (int j = 0; j < c[1]; ++j)
      for (int k = 0; k < c[2]; ++k) {
        std::array<int, 3> x = {i, j, k};
        for (int mu = 0; mu < 3; ++mu)
          for (int nu = mu + 1; nu < 3; ++nu) {
            if (x[mu] + 1 >= c[mu] || x[nu] + 1 >= c[nu]) continue;
            auto xm = x, xn = x;
            ++xm[mu];
            ++xn[nu];
            const Mat& u1 = M.links[M.index_of(i, j, k)][mu];
            const Mat& u2 = M.links[M.index_of(xm[0], xm[1], xm[2])][nu];
            const Mat& u3 = M.links[M.index_of(xn[0], xn[1], xn[2])][mu];
            const Mat& u4 = M.links[M.index_of(i, j, k)][nu];
            Mat p = u1 * u2 * u3.adjoint() * u4.adjoint();
            Eigen::ComplexEigenSolver<Mat> es(p);
            Eigen::VectorXcd l = es.eigenvalues();
            for (Eigen::Index q = 0; q < l.size(); ++q) {
              if (std::abs(std::arg(l[q])) > std::numbers::pi - 1e-9)
                throw BranchCut("plaquette eigenvalue on the negative real axis at " + site_name(i, j, k));
              l[q] = std::log(l[q]);
            }
            Mat v = es.eigenvectors();
            Mat f = v * l.asDiagonal() * v.inverse() / (M.h * M.h);
            out.push_back({x, mu, nu, 0.5 * (f - f.adjoint())});
          }
      }
  return out;
}

BogomolnyResult bogomolny_residual(const MonopoleField& M) {
  BogomolnyResult r;
  r.local.assign(M.points.size(), NAN);
  if (M.rank == 0) {
    r.rank_zero = true;
    return r;
  }
  auto plaq = curvature_fd(M);
  const auto& c = M.box.counts;
  // plaquette lookup (site, plane)
  std::vector<std::array<const Mat*, 3>> fmap(M.points.size(), {nullptr, nullptr, nullptr});
  auto plane = [](int mu, int nu) { return 3 - mu - nu; };  // (1,2)->0, (0,2)->1, (0,1)->2
  for (const auto& p : plaq) fmap[M.index_of(p.site[0], p.site[1], p.site[2])][plane(p.mu, p.nu)] = &p.f;
  double num = 0, den_a = 0, den_b = 0;
  for (int i = 1; i + 1 < c[0]; ++i)
    for (int j = 1; j + 1 < c[1]; ++j)
      for (int k = 1; k + 1 < c[2]; ++k) {
        std::array<int, 3> x = {i, j, k};
        int s = M.index_of(i, j, k);
        double loc_num = 0, loc_den = 0;
        for (int l = 0; l < 3; ++l) {
          auto xp = x, xm = x;
          ++xp[l];
          --xm[l];
          int sp = M.index_of(xp[0], xp[1], xp[2]), sm = M.index_of(xm[0], xm[1], xm[2]);
          const Mat& up = M.links[s][l];
          const Mat& um = M.links[sm][l];
          Mat dphi = (up * M.higgs[sp] * up.adjoint() - um.adjoint() * M.higgs[sm] * um) / (2 * M.h);
          // (*F)_l = F_{jk} for cyclic (l, j, k): average of the four plaquettes around x in that plane
          int a = (l + 1) % 3, b = (l + 2) % 3;
          double orient = a < b ? 1.0 : -1.0;
          int lo = std::min(a, b), hi = std::max(a, b);
          Mat f = Mat::Zero(M.rank, M.rank);
          for (int da = 0; da < 2; ++da)
            for (int db = 0; db < 2; ++db) {
              auto y = x;
              y[lo] -= da;
              y[hi] -= db;
              const Mat* pf = fmap[M.index_of(y[0], y[1], y[2])][l];
              Mat g = *pf;
              // transport from y back to x
              auto step = [&](std::array<int, 3> from, int dir) {
                const Mat& u = M.links[M.index_of(from[0], from[1], from[2])][dir];
                g = u.adjoint() * g * u;
              };
              auto cur = y;
              if (db) {
                step(cur, hi);
                ++cur[hi];
              }
              if (da) {
                step(cur, lo);
                ++cur[lo];
              }
              f += g;
            }
          f *= 0.25 * orient;
          loc_num += (dphi - f).squaredNorm();
          loc_den += dphi.squaredNorm() + f.squaredNorm();
          den_a += dphi.squaredNorm();
          den_b += f.squaredNorm();
        }
        num += loc_num;
        r.local[s] = loc_den > 0 ? std::sqrt(loc_num) / std::sqrt(loc_den) : 0.0;
      }
  double den = std::sqrt(den_a) + std::sqrt(den_b);
  r.residual = den > 0 ? std::sqrt(num) / den : 0.0;
  return r;
}

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

const Mat2& pauli(int i) {
  static const Mat2 s[3] = {
      (Mat2() << 0, 1, 1, 0).finished(),
      (Mat2() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
      (Mat2() << 1, 0, 0, -1).finished(),
  };
  return s[i];
}

// d/dz_mu of the D* rows applied to a node field
SpinorField omega(const GreenSolver& gs, const SpinorField& phi, int mu) {
  const auto& op = gs.op();
  const int n = op.disc.n_t;
  const double h = op.disc.h();
  SpinorField out(op.disc, GridKind::midpoints);
  for (const auto& blk : op.blocks) {
    const auto b = static_cast<Eigen::Index>(blk.comps.size());
    Mat s = Mat::Zero(b, b);
    for (Eigen::Index r = 0; r < b; ++r)
      for (Eigen::Index c = 0; c < b; ++c)
        if (blk.comps[r] / 2 == blk.comps[c] / 2) s(r, c) = -kTwoPi * pauli(mu)(blk.comps[r] % 2, blk.comps[c] % 2);
    for (int r = 0; r + 1 < n; ++r) {
      Mat da = 0.5 * s, db = 0.5 * s;
      if (op.disc.fd_order == 4) {
        da += (h / 12) * (s * blk.h[r] + blk.h[r] * s);
        db -= (h / 12) * (s * blk.h[r + 1] + blk.h[r + 1] * s);
      }
      Vec x0(b), x1(b);
      for (Eigen::Index k = 0; k < b; ++k) {
        x0[k] = phi.slice_at(r)[blk.comps[k]];
        x1[k] = phi.slice_at(r + 1)[blk.comps[k]];
      }
      Vec y = da * x0 + db * x1;
      for (Eigen::Index k = 0; k < b; ++k) out.slice_at(r)[blk.comps[k]] = y[k];
    }
  }
  return out;
}

std::vector<SpinorField> plain_basis(const ConnectionPath& A, const Vec3& z, const Discretization& disc) {
  return kernel(assemble_dirac(A, z, {0, 0}, disc, Which::DStar), 0).basis;
}

Mat plain_link(const std::vector<SpinorField>& a, const std::vector<SpinorField>& b) {
  Mat o(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) o(i, j) = a[i].inner(b[j]);
  return polar_unitary(o);
}

Mat principal_log(const Mat& p) {
  Eigen::ComplexEigenSolver<Mat> es(p);
  Eigen::VectorXcd l = es.eigenvalues();
  for (Eigen::Index q = 0; q < l.size(); ++q) {
    if (std::abs(std::arg(l[q])) > std::numbers::pi - 1e-9) throw BranchCut("plaquette eigenvalue at -1");
    l[q] = std::log(l[q]);
  }
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().inverse();
}

double end_norm(const SpinorField& f, int j) { return f.slice_at(j).norm(); }
}  // namespace

CurvatureIdentity curvature_identity_check(const ConnectionPath& A, const Vec3& z, int a, int b, int mu, int nu,
                                           double h, const Discretization& disc) {
  if (mu == nu) throw InvalidArgument("curvature_identity_check needs mu != nu");
  Vec3 em = Vec3::Zero(), en = Vec3::Zero();
  em[mu] = h;
  en[nu] = h;
  auto b0 = plain_basis(A, z, disc);
  const int k = static_cast<int>(b0.size());
  if (k == 0) throw RankZero("no kernel at z");
  if (a < 0 || b < 0 || a >= k || b >= k) throw InvalidArgument("basis index out of range");
  auto bm = plain_basis(A, z + em, disc), bn = plain_basis(A, z + en, disc), bmn = plain_basis(A, z + em + en, disc);
  if (static_cast<int>(bm.size()) != k || static_cast<int>(bn.size()) != k || static_cast<int>(bmn.size()) != k)
    throw RankJump("kernel rank changes inside the plaquette");
  Mat p = plain_link(b0, bm) * plain_link(bm, bmn) * plain_link(bn, bmn).adjoint() * plain_link(b0, bn).adjoint();
  Mat f = principal_log(p) / (h * h);

  CurvatureIdentity out;
  out.lhs = f(a, b);
  GreenSolver gs(A, z, disc);
  SpinorField om_a = omega(gs, b0[a], mu), on_a = omega(gs, b0[a], nu);
  SpinorField gm_b = gs.apply(omega(gs, b0[b], mu)), gn_b = gs.apply(omega(gs, b0[b], nu));
  out.rhs = om_a.inner(gn_b) - on_a.inner(gm_b);
  // surface term: endpoint values of the kernel elements against the
  // (1 - P) d_z phi vectors built from the Green vectors
  SpinorField wm_b = gs.d(gm_b), wn_b = gs.d(gn_b);
  SpinorField wm_a = gs.d(gs.apply(om_a)), wn_a = gs.d(gs.apply(on_a));
  const int last = disc.n_t - 1;
  for (int j : {0, last})
    out.boundary_estimate += end_norm(b0[a], j) * (end_norm(wm_b, j) + end_norm(wn_b, j)) +
                             end_norm(b0[b], j) * (end_norm(wm_a, j) + end_norm(wn_a, j));
  return out;
}

double selfdual_contraction_defect() {
  // Clifford action on S+ (+) S-: cl(dt) maps S- to S+ by -1 and S+ to S- by +1,
  // cl(dx^j) = -i sigma_j both ways.
  using Mat4 = Eigen::Matrix4cd;
  auto gamma = [](int mu) {
    Mat4 g = Mat4::Zero();
    if (mu == 0) {
      g.block<2, 2>(0, 2) = -Mat2::Identity();
      g.block<2, 2>(2, 0) = Mat2::Identity();
    } else {
      g.block<2, 2>(0, 2) = cplx(0, -1) * pauli(mu - 1);
      g.block<2, 2>(2, 0) = cplx(0, -1) * pauli(mu - 1);
    }
    return g;
  };
  auto wedge = [&](int m, int n) -> Mat4 { return 0.5 * (gamma(m) * gamma(n) - gamma(n) * gamma(m)); };
  // Omega ^ Omega = (2 pi i)^2 sum_{j<k} cl(dx^j) cl(dx^k) - (j <-> k) dz^j dz^k; identifying dz with dx
  // its Lambda^+ part pairs each spatial plane with dt ^ dx^l.
  double worst = 0;
  const double c = -kTwoPi * kTwoPi;
  for (int l = 0; l < 3; ++l) {
    int j = (l + 1) % 3, k = (l + 2) % 3;
    Mat4 sd = c * (wedge(0, l + 1) - wedge(j + 1, k + 1));
    worst = std::max(worst, sd.block<2, 2>(2, 2).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {
// number of pole-sized eigenvalues; the cluster boundary must be a gap of factor >= 5
int pole_cluster(const Eigen::VectorXd& mu, double r, bool strict) {
  std::vector<double> a;
  for (Eigen::Index i = 0; i < mu.size(); ++i) a.push_back(std::abs(mu[i]));
  std::sort(a.rbegin(), a.rend());
  const double pole_size = 0.1 / r;
  int count = 0;
  while (count < static_cast<int>(a.size()) && a[count] >= pole_size) ++count;
  if (strict && count > 0 && count < static_cast<int>(a.size()) && a[count - 1] < 5 * a[count])
    throw ClusterAmbiguous("pole and bounded clusters separated by less than a factor 5 at r=" + std::to_string(r));
  return count;
}

std::vector<SpinorField> l2_orthonormal(const std::vector<SpinorField>& v) {
  const int k = static_cast<int>(v.size());
  if (k == 0) return {};
  Mat g(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) g(a, b) = v[a].inner(v[b]);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.adjoint()));
  Mat s = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  std::vector<SpinorField> out;
  for (int b = 0; b < k; ++b) {
    SpinorField f(v[0].disc, v[0].grid);
    for (int a = 0; a < k; ++a) f.values += s(a, b) * v[a].values;
    out.push_back(std::move(f));
  }
  return out;
}

cplx moment(const SpinorField& f, const SpinorField& g) {
  cplx s = 0;
  for (int j = 0; j < f.time_points(); ++j) s += f.time(j) * f.slice_at(j).dot(g.slice_at(j));
  return s * f.disc.h();
}
}  // namespace

SingularReport higgs_singularity_scan(const ConnectionPath& A, const Vec3& w, const std::vector<Vec3>& rays,
                                      const std::vector<double>& radii, const Discretization& disc,
                                      std::optional<double> eps) {
  if (radii.empty() || rays.empty()) throw InvalidArgument("empty rays or radii");
  auto W = singular_set(A.flat_limit(End::plus), A.flat_limit(End::minus));
  if (distance_to_set(TorusPoint(w), W) > 1e-9) throw InvalidArgument("w is not in the singular set");
  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end());
  SingularReport rep;
  rep.w = w;
  TransformOptions topt;
  topt.h_z = 0.5 * rs.front();
  std::vector<double> coeffs;
  for (const auto& dir : rays) {
    RaySamples rs_out;
    rs_out.direction = dir.normalized();
    rs_out.radii = rs;
    for (size_t q = 0; q < rs.size(); ++q) {
      Vec3 z = w + rs[q] * rs_out.direction;
      TransformPoint p = transform_fiber(A, z, disc, topt);
      rep.rank = std::max(rep.rank, p.rank);
      Eigen::VectorXd mu = higgs_spectrum(p);
      rs_out.eigenvalues.push_back(mu);
      rs_out.pole_count.push_back(pole_cluster(mu, rs[q], q == 0));
      if (eps) {
        auto vc = l2_orthonormal(kernel(assemble_dirac(A, z, WeightSextet{*eps}.lower_right(), disc, Which::DStar), 0).basis);
        double nrm = 0;
        if (!vc.empty() && p.rank > 0) {
          Mat n(p.rank, vc.size());
          for (int a = 0; a < p.rank; ++a)
            for (size_t b = 0; b < vc.size(); ++b) n(a, b) = moment(p.basis[a], vc[b]);
          nrm = kTwoPi * Eigen::JacobiSVD<Mat>(n).singularValues()[0];
        }
        rs_out.vcorner_norm.push_back(nrm);
      }
    }
    // pole fit over the three smallest radii: mean pole eigenvalue = c / r + d
    const int pc = rs_out.pole_count[0];
    rep.pole_rank = std::max(rep.pole_rank, pc);
    if (pc > 0) {
      const size_t m = std::min<size_t>(3, rs.size());
      Eigen::MatrixXd X(m, 2);
      Eigen::VectorXd y(m);
      for (size_t q = 0; q < m; ++q) {
        const auto& mu = rs_out.eigenvalues[q];
        std::vector<double> s(mu.data(), mu.data() + mu.size());
        std::sort(s.begin(), s.end(), [](double x, double y2) { return std::abs(x) > std::abs(y2); });
        double mean = 0;
        for (int i = 0; i < pc; ++i) mean += s[i];
        X(q, 0) = 1.0 / rs[q];
        X(q, 1) = 1.0;
        y[q] = mean / pc;
      }
      Eigen::Vector2d sol = m >= 2 ? Eigen::Vector2d(X.colPivHouseholderQr().solve(y))
                                   : Eigen::Vector2d(y[0] * rs[0], 0.0);
      rs_out.coefficient = sol[0];
      coeffs.push_back(sol[0]);
    }
    rep.rays.push_back(std::move(rs_out));
  }
  // rays without a pole make the spread undefined
  if (!coeffs.empty() && coeffs.size() == rays.size()) {
    double mean = 0;
    for (double c : coeffs) mean += c;
    mean /= coeffs.size();
    double spread = 0;
    for (double c : coeffs) spread = std::max(spread, std::abs(c - mean) / std::abs(mean));
    rep.isotropy_spread = spread;
  }
  return rep;
}

namespace {
nlohmann::json complex_list(const Eigen::VectorXcd& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }
}  // namespace

void write_monopole_jsonl(const std::string& path, const MonopoleField& M) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path);
  std::vector<PlaquetteSample> plaq = curvature_fd(M);
  BogomolnyResult bog = bogomolny_residual(M);
  std::vector<std::vector<double>> pn(M.points.size());
  for (const auto& p : plaq) pn[M.index_of(p.site[0], p.site[1], p.site[2])].push_back(p.f.norm());
  for (size_t s = 0; s < M.points.size(); ++s) {
    const auto& p = M.points[s];
    Eigen::VectorXcd ev = p.rank ? Eigen::ComplexEigenSolver<Mat>(M.higgs[s]).eigenvalues() : Eigen::VectorXcd();
    std::sort(ev.data(), ev.data() + ev.size(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
    nlohmann::json rec = {{"z", {p.z[0], p.z[1], p.z[2]}},
                          {"rank", p.rank},
                          {"index", p.index},
                          {"higgs_eigenvalues", complex_list(ev)},
                          {"plaquette_curvature_norms", pn[s]},
                          {"bogomolny_residual_local", finite_or_null(bog.local[s])}};
    os << rec.dump() << "\n";
  }
}

void write_singular_report(const std::string& path, const SingularReport& r) {
  nlohmann::json j;
  j["w"] = {r.w[0], r.w[1], r.w[2]};
  j["rank"] = r.rank;
  j["pole_rank"] = r.pole_rank;
  j["isotropy_spread"] = finite_or_null(r.isotropy_spread);
  j["rays"] = nlohmann::json::array();
  for (const auto& ray : r.rays) {
    nlohmann::json t;
    t["direction"] = {ray.direction[0], ray.direction[1], ray.direction[2]};
    t["coefficient"] = finite_or_null(ray.coefficient);
    t["samples"] = nlohmann::json::array();
    for (size_t q = 0; q < ray.radii.size(); ++q) {
      nlohmann::json s = {{"r", ray.radii[q]},
                          {"eigenvalues", std::vector<double>(ray.eigenvalues[q].data(),
                                                              ray.eigenvalues[q].data() + ray.eigenvalues[q].size())},
                          {"pole_count", ray.pole_count[q]}};
      if (q < ray.vcorner_norm.size()) s["vcorner_norm"] = ray.vcorner_norm[q];
      t["samples"].push_back(s);
    }
    j["rays"].push_back(t);
  }
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path);
  os << j.dump(2) << "\n";
}

}  // namespace nahm
