#pragma once

// Dense linear-algebra primitives for matrix-valued autoregression.
//
// Every matrix is an Eigen::MatrixXd, stored column-major. All packing in
// this library uses the column-stacking convention: vec(M) lists M(0,0),
// M(1,0), ..., M(m-1,0), M(0,1), ... and vech(S) lists the on-and-below
// diagonal entries of S column by column. Eigen's storage order coincides
// with vec, so vec/mat are plain reshapes.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstddef>

namespace mmar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

Vector vec(const Matrix& m);
Matrix mat(const Vector& v, Index rows, Index cols);

Vector vech(const Matrix& s);
Matrix unvech(const Vector& v);
// Number of entries in vech of an n x n matrix.
constexpr Index vech_size(Index n) { return n * (n + 1) / 2; }

Matrix kron(const Matrix& a, const Matrix& b);

// K_{m,n}: the mn x mn permutation with K vec(M) = vec(M^T) for M m x n.
Matrix commutation_matrix(Index m, Index n);

// G_m: the m^2 x m(m+1)/2 matrix with vec(P) = G_m vech(P) for symmetric P.
Matrix expansion_matrix(Index m);

// Largest eigenvalue modulus, via a general (nonsymmetric) dense eigensolver.
double spectral_radius(const Matrix& m);

// Relative symmetry test: max|S - S^T| <= tol * max(1, max|S|).
bool is_symmetric(const Matrix& s, double rel_tol = 1e-10);

// Symmetric positive definite matrix validated at construction. Positive
// definiteness is established by a successful Cholesky factorization; no
// repair is attempted.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  const Matrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  // Lower Cholesky factor L with L L^T = matrix().
  Matrix lower() const { return llt_.matrixL(); }
  const Eigen::LLT<Matrix>& llt() const { return llt_; }
  double log_det() const { return log_det_; }
  Matrix inverse() const;

 private:
  Matrix m_;
  Eigen::LLT<Matrix> llt_;
  double log_det_ = 0.0;
};

// Whitened residual L_U^{-1} (Y - M) L_V^{-T}; its squared Frobenius norm is
// tr(V^{-1} E^T U^{-1} E).
Matrix whiten(const Matrix& resid, const SpdMatrix& u, const SpdMatrix& v);

// log MN(Y | M, U, V), the matrix-normal log-density with row covariance U
// and column covariance V (vec covariance V (x) U).
double matrix_normal_logpdf(const Matrix& y, const Matrix& mean, const SpdMatrix& u,
                            const SpdMatrix& v);

// Weighted-moment contractions used throughout estimation. For a cross
// moment S = sum_t w_t vec(X_t) vec(Y_t)^T of m x n matrices:
//   contract_rows(S, M, m, n) = sum_t w_t X_t M Y_t^T      (m x m, M is n x n)
//   contract_cols(S, M, m, n) = sum_t w_t X_t^T M Y_t      (n x n, M is m x m)
Matrix contract_rows(const Eigen::Ref<const Matrix>& s, const Matrix& m_nn, Index m, Index n);
Matrix contract_cols(const Eigen::Ref<const Matrix>& s, const Matrix& m_mm, Index m, Index n);

}  // namespace mmar
