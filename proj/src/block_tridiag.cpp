#include "nahm/block_tridiag.hpp"

#include <cmath>
#include <random>

namespace nahm {

int BlockTridiag::size() const {
  int s = 0;
  for (const auto& d : diag) s += static_cast<int>(d.rows());
  return s;
}

std::vector<int> BlockTridiag::offsets() const {
  std::vector<int> off(diag.size() + 1, 0);
  for (size_t j = 0; j < diag.size(); ++j) off[j + 1] = off[j] + static_cast<int>(diag[j].rows());
  return off;
}

Mat BlockTridiag::apply(const Mat& x) const {
  auto off = offsets();
  Mat y(x.rows(), x.cols());
  for (int j = 0; j < blocks(); ++j) {
    int n = off[j + 1] - off[j];
    auto yj = y.middleRows(off[j], n);
    yj = diag[j] * x.middleRows(off[j], n);
    if (j > 0) yj += upper[j - 1].adjoint() * x.middleRows(off[j - 1], off[j] - off[j - 1]);
    if (j + 1 < blocks()) yj += upper[j] * x.middleRows(off[j + 1], off[j + 2] - off[j + 1]);
  }
  return y;
}

Mat BlockTridiag::dense() const {
  auto off = offsets();
  Mat d = Mat::Zero(size(), size());
  for (int j = 0; j < blocks(); ++j) {
    d.block(off[j], off[j], diag[j].rows(), diag[j].cols()) = diag[j];
    if (j + 1 < blocks()) {
      d.block(off[j], off[j + 1], upper[j].rows(), upper[j].cols()) = upper[j];
      d.block(off[j + 1], off[j], upper[j].cols(), upper[j].rows()) = upper[j].adjoint();
    }
  }
  return d;
}

double BlockTridiag::norm_bound() const {
  // max row sum of block norms
  double r = 0;
  for (int j = 0; j < blocks(); ++j) {
    double s = diag[j].size() ? diag[j].norm() : 0.0;
    if (j > 0 && upper[j - 1].size()) s += upper[j - 1].norm();
    if (j + 1 < blocks() && upper[j].size()) s += upper[j].norm();
    r = std::max(r, s);
  }
  return r;
}

int BlockTridiag::count_below(double theta) const {
  int neg = 0;
  Mat prev;  // S_{j-1}^{-1} U_{j-1}
  for (int j = 0; j < blocks(); ++j) {
    Mat s = diag[j];
    s.diagonal().array() -= theta;
    if (j > 0 && prev.size()) s -= upper[j - 1].adjoint() * prev;
    if (s.rows() == 0) {
      prev.resize(0, j + 1 < blocks() ? upper[j].cols() : 0);
      continue;
    }
    Eigen::LDLT<Mat> f(s);
    auto d = f.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (std::real(d[i]) < 0) ++neg;
    if (j + 1 < blocks()) prev = f.solve(upper[j]);
  }
  return neg;
}

BlockCholesky::BlockCholesky(const BlockTridiag& t, double shift) : off_(t.offsets()) {
  int n = t.blocks();
  l_.resize(n);
  w_.resize(n);
  for (int j = 0; j < n; ++j) {
    Mat s = t.diag[j];
    s.diagonal().array() += shift;
    if (j > 0 && w_[j - 1].size()) s -= w_[j - 1].adjoint() * w_[j - 1];
    l_[j].compute(s);
    if (s.rows() && l_[j].info() != Eigen::Success) ok_ = false;
    if (j + 1 < n) {
      if (s.rows())
        w_[j] = l_[j].matrixL().solve(t.upper[j]);
      else
        w_[j].resize(0, t.upper[j].cols());
    }
  }
}

Mat BlockCholesky::solve(const Mat& b) const {
  int n = static_cast<int>(l_.size());
  Mat y = b;
  for (int j = 0; j < n; ++j) {
    int nj = off_[j + 1] - off_[j];
    if (nj == 0) continue;
    auto yj = y.middleRows(off_[j], nj);
    if (j > 0 && w_[j - 1].size()) yj -= w_[j - 1].adjoint() * y.middleRows(off_[j - 1], off_[j] - off_[j - 1]);
    yj = l_[j].matrixL().solve(Mat(yj));
  }
  for (int j = n - 1; j >= 0; --j) {
    int nj = off_[j + 1] - off_[j];
    if (nj == 0) continue;
    auto yj = y.middleRows(off_[j], nj);
    if (j + 1 < n && w_[j].size()) yj -= w_[j] * y.middleRows(off_[j + 1], off_[j + 2] - off_[j + 1]);
    yj = l_[j].matrixU().solve(Mat(yj));
  }
  return y;
}

EigenPairs smallest_eigenpairs(const BlockTridiag& t, int p, std::uint64_t seed, int max_iter) {
  EigenPairs out;
  int n = t.size();
  p = std::min(p, n);
  if (p <= 0) {
    out.values.resize(0);
    out.vectors.resize(n, 0);
    out.converged = true;
    return out;
  }
  if (n <= 48) {
    Eigen::SelfAdjointEigenSolver<Mat> es(t.dense());
    out.values = es.eigenvalues().head(p);
    out.vectors = es.eigenvectors().leftCols(p);
    out.converged = true;
    return out;
  }
  double scale = t.norm_bound();
  double shift = 1e-13 * scale + 1e-300;
  BlockCholesky chol(t, shift);
  while (!chol.ok()) {
    shift *= 100;
    chol = BlockCholesky(t, shift);
  }
  // guard vectors speed up convergence of the wanted ones
  int q = std::min(n, p + 3);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Mat x(n, q);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = cplx(nd(rng), nd(rng));
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(q, INFINITY);
  for (int it = 1; it <= max_iter; ++it) {
    Mat y = chol.solve(x);
    Eigen::HouseholderQR<Mat> qr(y);
    Mat qm = qr.householderQ() * Mat::Identity(n, q);
    Mat k = qm.adjoint() * t.apply(qm);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (k + k.adjoint()));
    x = qm * es.eigenvectors();
    Eigen::VectorXd vals = es.eigenvalues();
    double change = 0;
    for (int i = 0; i < p; ++i) change = std::max(change, std::abs(vals[i] - prev[i]) / (std::abs(vals[i]) + shift + 1e-14 * scale));
    prev = vals;
    out.iterations = it;
    if (change < 1e-10 && it > 1) {
      out.converged = true;
      break;
    }
  }
  out.values = prev.head(p);
  out.vectors = x.leftCols(p);
  return out;
}

int BoxSystem::cols() const {
  int s = 0;
  for (int w : col_width) s += w;
  return s;
}

std::vector<int> BoxSystem::col_offsets() const {
  std::vector<int> off(col_width.size() + 1, 0);
  for (size_t j = 0; j < col_width.size(); ++j) off[j + 1] = off[j] + col_width[j];
  return off;
}

Vec BoxSystem::apply(const Vec& x) const {
  auto off = col_offsets();
  Vec y(rows());
  for (size_t r = 0; r < A.size(); ++r)
    y.segment(r * row_width, row_width) = A[r] * x.segment(off[r], col_width[r]) +
                                          B[r] * x.segment(off[r + 1], col_width[r + 1]);
  return y;
}

Vec BoxSystem::apply_adjoint(const Vec& y) const {
  auto off = col_offsets();
  Vec x = Vec::Zero(cols());
  for (size_t r = 0; r < A.size(); ++r) {
    auto yr = y.segment(r * row_width, row_width);
    x.segment(off[r], col_width[r]) += A[r].adjoint() * yr;
    x.segment(off[r + 1], col_width[r + 1]) += B[r].adjoint() * yr;
  }
  return x;
}

BlockTridiag BoxSystem::normal_cols() const {
  BlockTridiag t;
  int nc = static_cast<int>(col_width.size());
  for (int j = 0; j < nc; ++j) t.diag.push_back(Mat::Zero(col_width[j], col_width[j]));
  for (size_t r = 0; r < A.size(); ++r) {
    t.diag[r] += A[r].adjoint() * A[r];
    t.diag[r + 1] += B[r].adjoint() * B[r];
    t.upper.push_back(A[r].adjoint() * B[r]);
  }
  return t;
}

BlockTridiag BoxSystem::normal_rows() const {
  BlockTridiag t;
  for (size_t r = 0; r < A.size(); ++r) {
    t.diag.push_back(A[r] * A[r].adjoint() + B[r] * B[r].adjoint());
    if (r + 1 < A.size()) t.upper.push_back(B[r] * A[r + 1].adjoint());
  }
  return t;
}

}  // namespace nahm
