#pragma once
// Discrete twisted Dirac operators D*_{A_z} = -d/dt + D_{A(t),z} on [-T, T] x T^3.
//
// D* is discretized by a one-step box scheme (rows on the midpoints, unknowns
// on the nodes) with spectral boundary conditions eliminated from the
// unknowns; D at weight delta is the exact discrete adjoint of D* at -delta.
#include <memory>
#include <vector>

#include "nahm/block_tridiag.hpp"
#include "nahm/field.hpp"

namespace nahm {

enum class Which { D, DStar };

// sigma . (2 pi (n - z) + B) restricted to a set of components, B_i = -i a_i.
// With twist = false only the connection part is built.
Mat twisted_operator(const CoefficientField& a, const Vec3& z, const std::vector<int>& comps,
                     int fourier_cut, bool twist = true);

// Components decoupled from each other by every field in `fields`.
std::vector<std::vector<int>> coupling_blocks(const std::vector<CoefficientField>& fields, int fourier_cut);

struct OperatorBlock {
  std::vector<int> comps;
  std::vector<Mat> h;                     // D_{A(t_j),z} on the nodes
  Eigen::VectorXd lam_minus, lam_plus;    // limit spectra, ascending
  Mat vec_minus, vec_plus;                // limit eigenvectors
  Mat u_minus, u_plus;                    // allowed endpoint directions of the D* system
  std::vector<Mat> a_full, b_full;        // box rows before elimination
  BoxSystem system;
};

struct DiracOperator {
  Discretization disc;
  TorusPoint z;
  Vec3 z_raw = Vec3::Zero();
  Weight weight;       // weight of this operator
  Weight star_weight;  // weight of the underlying D* system
  Which which = Which::DStar;
  std::vector<OperatorBlock> blocks;
  double scale = 1;
  std::shared_ptr<const ConnectionPath> path;

  // the operator's formal adjoint at weight -weight (same matrices)
  DiracOperator adjoint() const;
  // Conjugated operator on an unconstrained field: D* maps nodes to
  // midpoints, D maps midpoints to nodes.
  SpinorField apply(const SpinorField& in) const;
  // norm of the endpoint components that the boundary conditions remove
  double boundary_residual(const SpinorField& phi) const;
  // (sigma_{-T}, sigma_{+T}) weights are handled internally; these map
  // reduced coordinates of one block to/from a full field.
  SpinorField expand(int block, const Vec& x) const;
  Vec restrict_to(int block, const SpinorField& f) const;
};

struct AssembleOptions {
  double wall_tol = 1e-10;
};

DiracOperator assemble_dirac(const ConnectionPath& A, const Vec3& z, const Weight& delta,
                             const Discretization& disc, Which which, const AssembleOptions& opt = {});

// Collocated central differences (order 2 or 4), no boundary conditions.
// Returns ||D*D phi - nabla*nabla phi - cl(F+) phi|| / ||phi|| over interior nodes.
double weitzenbock_residual(const ConnectionPath& A, const Vec3& z, const SpinorField& phi,
                            const Discretization& disc);

}  // namespace nahm
