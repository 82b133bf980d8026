// Block partitions of state vectors and matrices partitioned by them.
#pragma once

#include <numeric>
#include <utility>
#include <vector>

#include "twocon/compound.hpp"

namespace twocon {

struct BlockPartition {
    std::vector<Index> sizes;
    std::vector<Index> offsets;

    BlockPartition() = default;
    explicit BlockPartition(std::vector<Index> s) : sizes(std::move(s)) {
        if (sizes.empty())
            throw std::invalid_argument("BlockPartition: empty partition");
        offsets.resize(sizes.size());
        Index off = 0;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (sizes[i] < 1)
                throw std::invalid_argument("BlockPartition: block sizes must be >= 1");
            offsets[i] = off;
            off += sizes[i];
        }
        total_ = off;
    }

    Index blocks() const { return static_cast<Index>(sizes.size()); }
    Index total() const { return total_; }

    /// Ordered block pairs (i,j), i < j, in row-major order.
    std::vector<std::pair<Index, Index>> block_pairs() const {
        std::vector<std::pair<Index, Index>> out;
        for (Index i = 0; i < blocks(); ++i)
            for (Index j = i + 1; j < blocks(); ++j)
                out.emplace_back(i, j);
        return out;
    }

    Index block_pair_index(Index i, Index j) const { return pair_index(i, j, blocks()); }

    bool operator==(const BlockPartition& o) const { return sizes == o.sizes; }

  private:
    Index total_ = 0;
};

/// A square matrix together with a conforming block partition.
struct PartitionedMatrix {
    BlockPartition partition;
    Matrix full;

    PartitionedMatrix() = default;
    PartitionedMatrix(BlockPartition p, Matrix m) : partition(std::move(p)), full(std::move(m)) {
        if (full.rows() != full.cols() || full.rows() != partition.total())
            throw std::invalid_argument("PartitionedMatrix: matrix does not conform to partition");
    }

    Matrix block(Index i, Index j) const {
        return full.block(partition.offsets[i], partition.offsets[j],
                          partition.sizes[i], partition.sizes[j]);
    }
};

}  // namespace twocon
