#pragma once
// The Nahm transform: Green's operator, projector, fibers, Higgs field,
// monopole assembly, curvature, singularity scans and rank audits.
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nahm/kernel.hpp"

namespace nahm {

// G = (D*D)^{-1} on midpoint fields at weight 0, by preconditioned CG on M M^dagger.
class GreenSolver {
public:
  GreenSolver(const ConnectionPath& A, const Vec3& z, const Discretization& disc);
  const DiracOperator& op() const { return op_; }
  SpinorField apply(const SpinorField& b, int* iterations = nullptr, double* residual = nullptr) const;
  // D*D x for midpoint fields
  SpinorField normal(const SpinorField& x) const;
  // P psi for node fields, psi first restricted to the boundary-compatible subspace
  SpinorField project(const SpinorField& psi) const;
  // D* restricted to boundary-compatible node fields, and its discrete adjoint
  SpinorField dstar(const SpinorField& psi) const;
  SpinorField d(const SpinorField& y) const;

private:
  struct Precond {
    std::vector<int> local;  // positions inside the operator block
    BlockCholesky chol;
  };
  DiracOperator op_;
  std::vector<std::vector<Precond>> pre_;
};

SpinorField greens_apply(const ConnectionPath& A, const Vec3& z, const SpinorField& b, const Discretization& disc,
                         int* iterations = nullptr);
SpinorField project(const ConnectionPath& A, const Vec3& z, const SpinorField& psi, const Discretization& disc);

// Limit eigen-data per operator block, used to continue kernel elements
// analytically beyond t = +-T.
struct TailData {
  std::vector<std::vector<int>> comps;
  std::vector<Eigen::VectorXd> lam_minus, lam_plus;
  std::vector<Mat> vec_minus, vec_plus;
  double t_max = 0;
};

// Trapezoid inner product on [-T, T] plus the exact flat-tail integrals.
// With moment = true the integrand carries a factor t.
cplx tail_inner(const SpinorField& f, const TailData& tf, const SpinorField& g, const TailData& tg, bool moment = false);

struct TransformOptions {
  double h_z = 1e-3;   // minimal distance to W
  bool require_index_rank = false;
};

struct TransformPoint {
  Vec3 z = Vec3::Zero();
  std::vector<SpinorField> basis;  // orthonormal for tail_inner
  TailData tails;
  Mat higgs;                        // anti-Hermitian
  std::array<Mat, 3> overlaps;      // filled by assemble_monopole
  int rank = 0;
  int index = 0;                    // index of D* at weight 0
  std::vector<double> singular_values;
};

TransformPoint transform_fiber(const ConnectionPath& A, const Vec3& z, const Discretization& disc,
                               const TransformOptions& opt = {});
// <basis(a), basis(b)> k_a x k_b overlap matrix
Mat fiber_overlap(const TransformPoint& a, const TransformPoint& b);
// Gauge-covariant Higgs spectrum check helper: eigenvalues of i Phi, ascending
Eigen::VectorXd higgs_spectrum(const TransformPoint& p);

struct ZBox {
  Vec3 origin = Vec3::Zero();
  std::array<int, 3> counts = {2, 2, 2};
};

struct MonopoleField {
  ZBox box;
  double h = 0;
  std::vector<TransformPoint> points;   // lexicographic in (i, j, k)
  std::vector<std::array<Mat, 3>> links;  // unitary links to +e_mu neighbours (aligned gauge)
  std::vector<Mat> higgs;                // Phi in the aligned gauge
  std::vector<double> unitarity_defect;  // max over directions of ||U^dag U - 1|| before polar decomposition
  int rank = 0;
  int index_of(int i, int j, int k) const { return (i * box.counts[1] + j) * box.counts[2] + k; }
};

// tree_order selects the spanning tree: 0 = x-major, 1 = z-major. Fibers are
// computed by `workers` threads; alignment is sequential.
MonopoleField assemble_monopole(const ConnectionPath& A, const ZBox& box, double h, const Discretization& disc,
                                int tree_order = 0, const TransformOptions& opt = {}, int workers = 1);

struct PlaquetteSample {
  std::array<int, 3> site;
  int mu, nu;
  Mat f;  // log(plaquette) / h^2, anti-Hermitian
};

std::vector<PlaquetteSample> curvature_fd(const MonopoleField& M);

struct BogomolnyResult {
  double residual = 0;
  bool rank_zero = false;
  std::vector<double> local;  // per site with a full stencil, NaN elsewhere
};

BogomolnyResult bogomolny_residual(const MonopoleField& M);

struct CurvatureIdentity {
  cplx lhs = 0, rhs = 0;
  double boundary_estimate = 0;
};

// <F_{mu nu} phi_a, phi_b> from plaquettes at step h against the Green's-operator
// expression, for basis indices (a, b) of the fiber at z.
CurvatureIdentity curvature_identity_check(const ConnectionPath& A, const Vec3& z, int a, int b, int mu, int nu,
                                           double h, const Discretization& disc);

// Largest |entry| of the Lambda^+ part of Omega ^ Omega acting on S^- (x E).
double selfdual_contraction_defect();

struct RaySamples {
  Vec3 direction;
  std::vector<double> radii;
  std::vector<Eigen::VectorXd> eigenvalues;  // of i Phi per radius
  std::vector<int> pole_count;
  double coefficient = NAN;                  // fitted c in c / r (signed)
  std::vector<double> vcorner_norm;           // ||Phi restricted to V_corner|| per radius
};

struct SingularReport {
  Vec3 w = Vec3::Zero();
  std::vector<RaySamples> rays;
  int pole_rank = 0;
  double isotropy_spread = NAN;  // NaN unless every ray has a pole
  int rank = 0;                   // largest fiber rank met
};

SingularReport higgs_singularity_scan(const ConnectionPath& A, const Vec3& w, const std::vector<Vec3>& rays,
                                      const std::vector<double>& radii, const Discretization& disc,
                                      std::optional<double> eps = std::nullopt);

struct RankAudit {
  int dim_vbar = 0, dim_vcorner = 0, dim_kbar = 0, dim_h = 0, dim_ehat = 0;
  int dim_wprime = 0;
  int dim_dh = 0;  // rk H - dim Kbar
  int rk_h_case = 0;
  // z != w: dim Vbar - dim Ehat - dim W'; z = w: dim Vbar - dim Ehat - dim W'_0 + dim Kbar
  int residual_hatbar = 0;
  // z != w: dim Ehat - dim Vcorner - dim W' + dim Kbar; z = w: dim Ehat - dim Vcorner
  int residual_hatv = 0;
  int residual_split = 0;    // dim Vbar - dim Vcorner - dim DH
  int residual_rk_h = 0;     // dim H - rk_h_case
  bool passed() const { return !residual_hatbar && !residual_hatv && !residual_split && !residual_rk_h; }
};

RankAudit rank_audit(const ConnectionPath& A, const Vec3& z, const Vec3& w, double eps, const Discretization& disc);

// Laplacian kernel ker(nabla* nabla) at the weight delta, as node fields (spinor-expanded).
std::vector<SpinorField> laplacian_kernel(const ConnectionPath& A, const Vec3& z, const Weight& delta,
                                          const Discretization& disc);

// Exports
void write_monopole_jsonl(const std::string& path, const MonopoleField& M);
void write_singular_report(const std::string& path, const SingularReport& r);

}  // namespace nahm
