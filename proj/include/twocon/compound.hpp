// Second additive compound matrices and the vectorization maps that relate
// them to skew-symmetric matrix coordinates.
//
// Conventions used throughout the library:
//  * vec(X) stacks the rows of X (row-major), so vec(X)[i*cols + j] = X(i,j).
//  * skew_vec(X) lists the strict upper triangle of a skew-symmetric X row by
//    row: (0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1).
//  * All public indices are 0-based.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace twocon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Number of unordered index pairs {i,j}, i < j < n.
constexpr inline Index pair_count(Index n) { return n * (n - 1) / 2; }

/// Position of the pair (i,j), i < j, in the row-major strict-upper order.
inline Index pair_index(Index i, Index j, Index n) {
    if (i < 0 || j <= i || j >= n)
        throw std::invalid_argument("pair_index: need 0 <= i < j < n");
    // closed form: offset of row i plus distance past the diagonal
    auto c2 = [](Index x) { return x * (x - 1) / 2; };
    return (j - i) + pair_count(n) - c2(n - i) - 1;
}

inline Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

/// Kronecker sum A (+) B = A x I + I x B for square A (n x n), B (m x m).
/// Its eigenvalues are all sums lambda_i(A) + mu_j(B).
inline Matrix kron_sum(const Matrix& A, const Matrix& B) {
    if (A.rows() != A.cols() || B.rows() != B.cols())
        throw std::invalid_argument("kron_sum: square matrices required");
    return kron(A, Matrix::Identity(B.rows(), B.rows())) +
           kron(Matrix::Identity(A.rows(), A.rows()), B);
}

/// Lifting matrix (n^2 x C(n,2)): maps skew_vec(X) to vec(X) for skew X.
/// Entry +1 on strict-upper positions, -1 on the mirrored lower positions.
inline Matrix skew_lift(Index n) {
    Matrix M = Matrix::Zero(n * n, pair_count(n));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            if (i == j) continue;
            Index k = pair_index(std::min(i, j), std::max(i, j), n);
            M(i * n + j, k) = (j > i) ? 1.0 : -1.0;
        }
    return M;
}

/// Projection matrix (C(n,2) x n^2): reads the strict upper triangle out of
/// vec(X). Left inverse of skew_lift on skew-symmetric coordinates.
inline Matrix skew_project(Index n) {
    Matrix L = Matrix::Zero(pair_count(n), n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            L(pair_index(i, j, n), i * n + j) = 1.0;
    return L;
}

/// Permutation (pq x pq) sending vec(Y) to vec(Y^T) for Y of size p x q.
inline Matrix transpose_permutation(Index p, Index q) {
    Matrix Q = Matrix::Zero(p * q, p * q);
    for (Index h = 0; h < p; ++h)
        for (Index k = 0; k < q; ++k)
            Q(k * p + h, h * q + k) = 1.0;
    return Q;
}

/// Second additive compound of a square matrix (C(n,2) x C(n,2)), built as
/// the action of X -> AX + XA^T on strict-upper skew coordinates. Its
/// spectrum consists of all pairwise eigenvalue sums lambda_i + lambda_j,
/// i < j. The map A -> compound is affine in the entries of A.
inline Matrix additive_compound2(const Matrix& A) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("additive_compound2: square matrix required");
    if (A.rows() < 2)
        throw std::invalid_argument("additive_compound2: need n >= 2");
    const Index n = A.rows();
    return skew_project(n) * kron_sum(A, A) * skew_lift(n);
}

inline Vector skew_vec(const Matrix& X) {
    if (X.rows() != X.cols())
        throw std::invalid_argument("skew_vec: square matrix required");
    const Index n = X.rows();
    Vector v(pair_count(n));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            v(pair_index(i, j, n)) = X(i, j);
    return v;
}

inline Matrix skew_unvec(const Vector& v, Index n) {
    if (v.size() != pair_count(n))
        throw std::invalid_argument("skew_unvec: length must be C(n,2)");
    Matrix X = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            double x = v(pair_index(i, j, n));
            X(i, j) = x;
            X(j, i) = -x;
        }
    return X;
}

/// Skew-symmetric matrix enforced by construction: stores (X - X^T)/2.
class SkewSymmetric {
  public:
    explicit SkewSymmetric(const Matrix& X) : m_((X - X.transpose()) / 2.0) {
        if (X.rows() != X.cols())
            throw std::invalid_argument("SkewSymmetric: square matrix required");
    }
    const Matrix& matrix() const { return m_; }
    Vector coordinates() const { return skew_vec(m_); }

  private:
    Matrix m_;
};

}  // namespace twocon
