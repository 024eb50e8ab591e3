#include "mmar/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "mmar/error.hpp"

namespace mmar {

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix mat(const Vector& v, Index rows, Index cols) {
  if (rows <= 0 || cols <= 0 || v.size() != rows * cols) {
    throw DimensionError("mat: vector of length " + std::to_string(v.size()) +
                         " cannot be reshaped to " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

bool is_symmetric(const Matrix& s, double rel_tol) {
  if (s.rows() != s.cols()) return false;
  if (s.size() == 0) return true;
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  return (s - s.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Vector vech(const Matrix& s) {
  if (s.rows() != s.cols()) throw DimensionError("vech: matrix is not square");
  if (!is_symmetric(s)) throw InvalidParameter("vech: matrix is not symmetric");
  const Index n = s.rows();
  Vector out(vech_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) out(k++) = s(i, j);
  return out;
}

Matrix unvech(const Vector& v) {
  // n(n+1)/2 = len  =>  n = (sqrt(8 len + 1) - 1) / 2
  const auto len = v.size();
  const auto n = static_cast<Index>(std::llround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  if (n <= 0 || vech_size(n) != len)
    throw DimensionError("unvech: length " + std::to_string(len) + " is not triangular");
  Matrix s(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) {
      s(i, j) = v(k);
      s(j, i) = v(k);
      ++k;
    }
  return s;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix commutation_matrix(Index m, Index n) {
  // vec(M)(i + j m) = M(i,j) = vec(M^T)(j + i n)
  Matrix k = Matrix::Zero(m * n, m * n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) k(j + i * n, i + j * m) = 1.0;
  return k;
}

Matrix expansion_matrix(Index m) {
  Matrix g = Matrix::Zero(m * m, vech_size(m));
  Index col = 0;
  for (Index j = 0; j < m; ++j)
    for (Index i = j; i < m; ++i) {
      g(i + j * m, col) = 1.0;
      g(j + i * m, col) = 1.0;
      ++col;
    }
  return g;
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_radius: matrix is not square");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0)
    throw DimensionError("SpdMatrix: matrix is not square");
  if (!m_.allFinite()) throw InvalidParameter("SpdMatrix: non-finite entries");
  if (!is_symmetric(m_)) throw InvalidParameter("SpdMatrix: matrix is not symmetric");
  llt_.compute(m_);
  if (llt_.info() != Eigen::Success)
    throw InvalidParameter("SpdMatrix: matrix is not positive definite");
  const auto& l = llt_.matrixLLT();
  double ld = 0.0;
  for (Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) throw InvalidParameter("SpdMatrix: matrix is not positive definite");
    ld += std::log(l(i, i));
  }
  log_det_ = 2.0 * ld;
}

Matrix SpdMatrix::inverse() const {
  Matrix inv = llt_.solve(Matrix::Identity(dim(), dim()));
  return 0.5 * (inv + inv.transpose());
}

Matrix whiten(const Matrix& resid, const SpdMatrix& u, const SpdMatrix& v) {
  if (resid.rows() != u.dim() || resid.cols() != v.dim())
    throw DimensionError("whiten: residual does not conform to scale matrices");
  // X = L_U^{-1} E, then W = X L_V^{-T} = (L_V^{-1} X^T)^T
  Matrix x = u.llt().matrixL().solve(resid);
  Matrix xt = x.transpose();
  v.llt().matrixL().solveInPlace(xt);
  return xt.transpose();
}

double matrix_normal_logpdf(const Matrix& y, const Matrix& mean, const SpdMatrix& u,
                            const SpdMatrix& v) {
  if (y.rows() != mean.rows() || y.cols() != mean.cols())
    throw DimensionError("matrix_normal_logpdf: Y and M differ in shape");
  const auto m = static_cast<double>(y.rows());
  const auto n = static_cast<double>(y.cols());
  const double q = whiten(y - mean, u, v).squaredNorm();
  return -0.5 * m * n * kLog2Pi - 0.5 * m * v.log_det() - 0.5 * n * u.log_det() - 0.5 * q;
}

Matrix contract_rows(const Eigen::Ref<const Matrix>& s, const Matrix& m_nn, Index m, Index n) {
  Matrix out = Matrix::Zero(m, m);
  for (Index d = 0; d < n; ++d)
    for (Index c = 0; c < n; ++c) {
      const double w = m_nn(c, d);
      if (w != 0.0) out.noalias() += w * s.block(c * m, d * m, m, m);
    }
  return out;
}

Matrix contract_cols(const Eigen::Ref<const Matrix>& s, const Matrix& m_mm, Index m, Index n) {
  Matrix out(n, n);
  for (Index d = 0; d < n; ++d)
    for (Index c = 0; c < n; ++c) out(c, d) = m_mm.cwiseProduct(s.block(c * m, d * m, m, m)).sum();
  return out;
}

}  // namespace mmar
