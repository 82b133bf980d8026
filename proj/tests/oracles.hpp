// Independent oracles for the test suite.
//
// Everything here is computed by a different route than the library uses:
// entrywise index formulas instead of lifted Kronecker algebra, frequency
// sweeps instead of LMIs, power iteration instead of eigensolves. Agreement
// between the two routes is what the tests certify.
#pragma once

#include <complex>
#include <random>
#include <vector>

#include "twocon/compound.hpp"
#include "twocon/partition.hpp"

namespace oracle {

using twocon::Index;
using twocon::Matrix;
using twocon::Vector;

/// Uniform double in [0, 1) drawn through a fixed 53-bit ladder.
inline double urand(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double urand(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * urand(rng);
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols,
                            double scale = 1.0) {
    Matrix A(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) A(i, j) = scale * urand(rng, -1.0, 1.0);
    return A;
}

/// Random Hurwitz matrix: random entries shifted left of the imaginary axis
/// by a random margin.
inline Matrix random_hurwitz(std::mt19937_64& rng, Index n, double margin_lo = 0.2,
                             double margin_hi = 1.5) {
    Matrix A = random_matrix(rng, n, n);
    const double shift = Eigen::EigenSolver<Matrix>(A, false)
                             .eigenvalues()
                             .real()
                             .maxCoeff();
    A -= (shift + urand(rng, margin_lo, margin_hi)) * Matrix::Identity(n, n);
    return A;
}

/// Random partition with total dimension in [2, max_total].
inline twocon::BlockPartition random_partition(std::mt19937_64& rng, Index max_total = 8) {
    const Index blocks = 1 + static_cast<Index>(rng() % 4);  // 1..4
    std::vector<Index> sizes;
    Index total = 0;
    for (Index i = 0; i < blocks; ++i) {
        const Index remaining = max_total - total - (blocks - 1 - i);
        const Index cap = std::min<Index>(4, remaining);
        const Index s = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(cap));
        sizes.push_back(s);
        total += s;
    }
    if (total < 2) sizes.back() += 1;
    return twocon::BlockPartition(sizes);
}

/// Second additive compound assembled entry by entry from the index formula:
/// the coefficient of x_(k,l) in d/dt x_(i,j) along dX/dt = AX + XA^T is
///   a_ik [j=l] + a_jl [i=k] - a_il [j=k] - a_jk [i=l].
inline Matrix compound2_entrywise(const Matrix& A) {
    const Index n = A.rows();
    std::vector<std::pair<Index, Index>> pairs;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    const Index m = static_cast<Index>(pairs.size());
    Matrix C(m, m);
    for (Index r = 0; r < m; ++r) {
        const auto [i, j] = pairs[r];
        for (Index c = 0; c < m; ++c) {
            const auto [k, l] = pairs[c];
            double v = 0.0;
            if (j == l) v += A(i, k);
            if (i == k) v += A(j, l);
            if (j == k) v -= A(i, l);
            if (i == l) v -= A(j, k);
            C(r, c) = v;
        }
    }
    return C;
}

/// Largest singular value of (iw I - A)^{-1} B.
inline double forced_response_peak(const Matrix& A, const Matrix& B, double w) {
    using Cx = std::complex<double>;
    const Index n = A.rows();
    Eigen::MatrixXcd M = -A.cast<Cx>();
    for (Index i = 0; i < n; ++i) M(i, i) += Cx(0.0, w);
    const Eigen::MatrixXcd G = M.partialPivLu().solve(B.cast<Cx>());
    return G.jacobiSvd().singularValues()(0);
}

/// H-infinity norm of the channel u -> x of dx/dt = Ax + Bu, by dense
/// logarithmic frequency sweep plus golden-section refinement around the
/// grid peak. A must be Hurwitz.
inline double hinf_freq_sweep(const Matrix& A, const Matrix& B, int grid_points = 10000) {
    double best_w = 0.0;
    double best = forced_response_peak(A, B, 0.0);
    const double lo = 1e-4, hi = 1e4;
    for (int k = 0; k < grid_points; ++k) {
        const double w =
            lo * std::pow(hi / lo, static_cast<double>(k) / (grid_points - 1));
        const double s = forced_response_peak(A, B, w);
        if (s > best) {
            best = s;
            best_w = w;
        }
    }
    double wl = best_w > 0.0 ? best_w / std::pow(hi / lo, 1.0 / (grid_points - 1))
                             : 0.0;
    double wr = best_w > 0.0 ? best_w * std::pow(hi / lo, 1.0 / (grid_points - 1))
                             : lo;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = wl, b = wr;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = forced_response_peak(A, B, x1), f2 = forced_response_peak(A, B, x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = forced_response_peak(A, B, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = forced_response_peak(A, B, x1);
        }
    }
    return std::max(best, std::max(f1, f2));
}

/// Spectral radius of a nonnegative matrix by plain power iteration from a
/// positive start.
inline double power_radius(const Matrix& M, int iterations = 2000) {
    if (M.rows() == 0) return 0.0;
    Vector v = Vector::Ones(M.rows());
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vector w = M * v;
        const double norm = w.maxCoeff();
        if (norm <= 0.0) return 0.0;
        lambda = norm;
        v = w / norm;
    }
    return lambda;
}

/// Greedy matching distance between two complex spectra (multisets).
inline double spectrum_distance(Eigen::VectorXcd a, Eigen::VectorXcd b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
    double worst = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Index arg = -1;
        for (Index j = 0; j < b.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(a(i) - b(j));
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[static_cast<std::size_t>(arg)] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace oracle
