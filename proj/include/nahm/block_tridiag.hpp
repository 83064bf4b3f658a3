#pragma once
// Hermitian block-tridiagonal matrices and rectangular block-bidiagonal maps,
// the shape every per-block operator on the truncated cylinder takes.
#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace nahm {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using cplx = std::complex<double>;

struct BlockTridiag {
  std::vector<Mat> diag;   // Hermitian
  std::vector<Mat> upper;  // coupling (j, j+1)

  int blocks() const { return static_cast<int>(diag.size()); }
  int size() const;
  std::vector<int> offsets() const;
  Mat apply(const Mat& x) const;
  Mat dense() const;
  double norm_bound() const;
  // number of eigenvalues strictly below theta (Sylvester inertia of T - theta)
  int count_below(double theta) const;
};

// Block Cholesky of T + shift (must be positive definite).
class BlockCholesky {
public:
  BlockCholesky(const BlockTridiag& t, double shift);
  bool ok() const { return ok_; }
  Mat solve(const Mat& b) const;

private:
  std::vector<Eigen::LLT<Mat>> l_;
  std::vector<Mat> w_;
  std::vector<int> off_;
  bool ok_ = true;
};

struct EigenPairs {
  Eigen::VectorXd values;  // ascending
  Mat vectors;
  int iterations = 0;
  bool converged = false;
};

// p smallest eigenpairs of a positive semidefinite T by shifted inverse
// subspace iteration with Rayleigh-Ritz; the starting block is seeded.
EigenPairs smallest_eigenpairs(const BlockTridiag& t, int p, std::uint64_t seed, int max_iter = 300);

// Rectangular map with row block r touching column blocks r and r+1.
struct BoxSystem {
  std::vector<Mat> A, B;
  std::vector<int> col_width;
  int row_width = 0;

  int rows() const { return static_cast<int>(A.size()) * row_width; }
  int cols() const;
  std::vector<int> col_offsets() const;
  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& y) const;
  BlockTridiag normal_cols() const;  // M^dagger M
  BlockTridiag normal_rows() const;  // M M^dagger
};

}  // namespace nahm
