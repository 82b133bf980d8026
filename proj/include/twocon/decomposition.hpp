// Block decomposition of the second additive compound of a partitioned
// matrix.
//
// For X skew-symmetric and partitioned like A, the matrix ODE
// Xdot = AX + XA^T splits into one equation per diagonal block (in strict
// upper skew coordinates of X_ii) and one per off-diagonal block (i<j, in
// row-major vec coordinates of X_ij). Each equation is driven by its own
// block plus a fixed set of coupling operators built from the off-diagonal
// blocks of A. Assembling all equations and permuting coordinates recovers
// the second additive compound of the full matrix exactly.
#pragma once

#include <vector>

#include "twocon/partition.hpp"

namespace twocon {

/// Coupling operators of the block-compound decomposition for one
/// partitioned matrix. All indices are block indices; pair slots follow
/// BlockPartition::block_pairs() order. Operators that do not exist for a
/// given partition (diagonal blocks of size one) are stored empty.
struct InterconnectionOperators {
    BlockPartition partition;

    /// into_diag[i][k]: drives the diagonal equation of block i from the
    /// off-diagonal coordinates shared with block k (vec(X_ki) for k<i,
    /// vec(X_ik) for k>i). Size C(n_i,2) x (n_i*n_k). Empty when i==k or
    /// n_i < 2.
    std::vector<std::vector<Matrix>> into_diag;

    /// pair_from_diag_i / _j: drive the pair equation (i,j) from the skew
    /// coordinates of the diagonal blocks i and j respectively.
    /// Sizes (n_i*n_j) x C(n_i,2) and (n_i*n_j) x C(n_j,2).
    std::vector<Matrix> pair_from_diag_i;
    std::vector<Matrix> pair_from_diag_j;

    /// pair_from_shared_j[p][k]: drives pair equation (i,j) = pairs[p] from
    /// the off-diagonal coordinates of the pair {k,j} (k != i,j);
    /// pair_from_shared_i[p][k]: same for the pair {k,i}. Empty for k in
    /// {i,j}.
    std::vector<std::vector<Matrix>> pair_from_shared_j;
    std::vector<std::vector<Matrix>> pair_from_shared_i;
};

inline InterconnectionOperators build_operators(const PartitionedMatrix& A) {
    const BlockPartition& part = A.partition;
    const Index N = part.blocks();
    InterconnectionOperators ops;
    ops.partition = part;

    auto eye = [](Index n) { return Matrix::Identity(n, n); };

    ops.into_diag.assign(N, std::vector<Matrix>(N));
    for (Index i = 0; i < N; ++i) {
        const Index ni = part.sizes[i];
        if (ni < 2) continue;
        const Matrix Li = skew_project(ni);
        for (Index k = 0; k < N; ++k) {
            if (k == i) continue;
            const Index nk = part.sizes[k];
            const Matrix Aik = A.block(i, k);
            if (k < i) {
                // input vec(X_ki), X_ki is n_k x n_i
                ops.into_diag[i][k] =
                    Li * (kron(Aik, eye(ni)) -
                          kron(eye(ni), Aik) * transpose_permutation(nk, ni));
            } else {
                // input vec(X_ik), X_ik is n_i x n_k
                ops.into_diag[i][k] =
                    Li * (kron(eye(ni), Aik) -
                          kron(Aik, eye(ni)) * transpose_permutation(ni, nk));
            }
        }
    }

    const auto pairs = part.block_pairs();
    const Index P = static_cast<Index>(pairs.size());
    ops.pair_from_diag_i.resize(P);
    ops.pair_from_diag_j.resize(P);
    ops.pair_from_shared_j.assign(P, std::vector<Matrix>(N));
    ops.pair_from_shared_i.assign(P, std::vector<Matrix>(N));

    for (Index p = 0; p < P; ++p) {
        const auto [i, j] = pairs[p];
        const Index ni = part.sizes[i], nj = part.sizes[j];
        if (ni >= 2)
            ops.pair_from_diag_i[p] = kron(eye(ni), A.block(j, i)) * skew_lift(ni);
        if (nj >= 2)
            ops.pair_from_diag_j[p] = kron(A.block(i, j), eye(nj)) * skew_lift(nj);
        for (Index k = 0; k < N; ++k) {
            if (k == i || k == j) continue;
            const Index nk = part.sizes[k];
            // coordinates shared with column block j
            if (k < j)
                ops.pair_from_shared_j[p][k] = kron(A.block(i, k), eye(nj));
            else
                ops.pair_from_shared_j[p][k] =
                    -kron(A.block(i, k), eye(nj)) * transpose_permutation(nj, nk);
            // coordinates shared with row block i
            if (k > i)
                ops.pair_from_shared_i[p][k] = kron(eye(ni), A.block(j, k));
            else
                ops.pair_from_shared_i[p][k] =
                    -kron(eye(ni), A.block(j, k)) * transpose_permutation(nk, ni);
        }
    }
    return ops;
}

/// Generator of the stacked block-compound coordinates together with the
/// permutation tying them to the canonical skew coordinates of the full
/// matrix.
///
/// Stacked coordinate layout: first the skew coordinates of every diagonal
/// block with n_i >= 2 (ascending i), then vec(X_ij) for every block pair
/// (i<j) in row-major pair order. perm[c] gives the stacked position of
/// canonical skew coordinate c, so with the permutation matrix
/// Pi[perm[c], c] = 1 the generator satisfies T = Pi * C * Pi^T where C is
/// the second additive compound of the full matrix.
struct BlockGenerator {
    BlockPartition partition;
    Matrix generator;
    std::vector<Index> perm;

    Matrix permutation_matrix() const {
        Matrix Pi = Matrix::Zero(generator.rows(), generator.rows());
        for (std::size_t c = 0; c < perm.size(); ++c)
            Pi(perm[c], static_cast<Index>(c)) = 1.0;
        return Pi;
    }
};

inline BlockGenerator assemble_block_generator(const PartitionedMatrix& A) {
    const BlockPartition& part = A.partition;
    const Index N = part.blocks();
    const Index n = part.total();
    if (n < 2)
        throw std::invalid_argument("assemble_block_generator: need total dimension >= 2");
    const auto pairs = part.block_pairs();
    const Index P = static_cast<Index>(pairs.size());

    // section offsets in the stacked coordinate vector
    std::vector<Index> diag_off(N, -1), pair_off(P, -1);
    Index pos = 0;
    for (Index i = 0; i < N; ++i) {
        if (part.sizes[i] < 2) continue;
        diag_off[i] = pos;
        pos += pair_count(part.sizes[i]);
    }
    for (Index p = 0; p < P; ++p) {
        pair_off[p] = pos;
        pos += part.sizes[pairs[p].first] * part.sizes[pairs[p].second];
    }
    const Index total = pos;

    const InterconnectionOperators ops = build_operators(A);
    Matrix T = Matrix::Zero(total, total);

    for (Index i = 0; i < N; ++i) {
        if (diag_off[i] < 0) continue;
        const Index r = diag_off[i];
        const Index h = pair_count(part.sizes[i]);
        T.block(r, r, h, h) = additive_compound2(A.block(i, i));
        for (Index k = 0; k < N; ++k) {
            if (k == i) continue;
            const Index p = part.block_pair_index(std::min(i, k), std::max(i, k));
            const Matrix& op = ops.into_diag[i][k];
            T.block(r, pair_off[p], op.rows(), op.cols()) = op;
        }
    }
    for (Index p = 0; p < P; ++p) {
        const auto [i, j] = pairs[p];
        const Index r = pair_off[p];
        const Index h = part.sizes[i] * part.sizes[j];
        T.block(r, r, h, h) = kron_sum(A.block(i, i), A.block(j, j));
        if (diag_off[i] >= 0) {
            const Matrix& op = ops.pair_from_diag_i[p];
            T.block(r, diag_off[i], op.rows(), op.cols()) = op;
        }
        if (diag_off[j] >= 0) {
            const Matrix& op = ops.pair_from_diag_j[p];
            T.block(r, diag_off[j], op.rows(), op.cols()) = op;
        }
        for (Index k = 0; k < N; ++k) {
            if (k == i || k == j) continue;
            {
                const Index q = part.block_pair_index(std::min(k, j), std::max(k, j));
                const Matrix& op = ops.pair_from_shared_j[p][k];
                T.block(r, pair_off[q], op.rows(), op.cols()) += op;
            }
            {
                const Index q = part.block_pair_index(std::min(k, i), std::max(k, i));
                const Matrix& op = ops.pair_from_shared_i[p][k];
                T.block(r, pair_off[q], op.rows(), op.cols()) += op;
            }
        }
    }

    // canonical skew coordinate (u,v), u < v, -> stacked coordinate
    BlockGenerator out;
    out.partition = part;
    out.generator = std::move(T);
    out.perm.resize(pair_count(n));
    std::vector<Index> owner(n);
    for (Index bi = 0; bi < N; ++bi)
        for (Index l = 0; l < part.sizes[bi]; ++l) owner[part.offsets[bi] + l] = bi;
    for (Index u = 0; u < n; ++u) {
        for (Index v = u + 1; v < n; ++v) {
            const Index c = pair_index(u, v, n);
            const Index bi = owner[u], bj = owner[v];
            if (bi == bj) {
                const Index lu = u - part.offsets[bi], lv = v - part.offsets[bi];
                out.perm[c] = diag_off[bi] + pair_index(lu, lv, part.sizes[bi]);
            } else {
                const Index p = part.block_pair_index(bi, bj);
                const Index lu = u - part.offsets[bi], lv = v - part.offsets[bj];
                out.perm[c] = pair_off[p] + lu * part.sizes[bj] + lv;
            }
        }
    }
    return out;
}

}  // namespace twocon
