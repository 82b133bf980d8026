// Per-channel L2 gain tables for interconnected systems with polytopic
// Jacobian uncertainty.
//
// The model is a jointly indexed vertex family: vertex q fixes every block
// of the partitioned matrix simultaneously, and the admissible matrix set
// is the convex hull of the vertices. Each coupling channel of the block
// compound decomposition touches only a few blocks, so its LMI family is
// the set of distinct (A-part, B-part) tuples across vertices; deduplication
// keeps families small when blocks vary independently.
#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>

#include "twocon/decomposition.hpp"
#include "twocon/lmi.hpp"
#include "twocon/worker_pool.hpp"

namespace twocon {

struct InterconnectionModel {
    BlockPartition partition;
    std::vector<Matrix> vertices;  // full matrices, jointly indexed

    void validate() const {
        if (vertices.empty())
            throw std::invalid_argument("InterconnectionModel: no vertices");
        for (const auto& v : vertices)
            if (v.rows() != partition.total() || v.cols() != partition.total())
                throw std::invalid_argument(
                    "InterconnectionModel: vertex does not conform to partition");
    }

    PartitionedMatrix vertex(std::size_t q) const {
        return PartitionedMatrix(partition, vertices[q]);
    }

    /// FNV-1a over the partition and raw vertex bytes; identifies the model
    /// for caching and ties gain tables to the model they were computed from.
    std::uint64_t content_hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto eat = [&h](const void* data, std::size_t len) {
            const unsigned char* b = static_cast<const unsigned char*>(data);
            for (std::size_t i = 0; i < len; ++i) {
                h ^= b[i];
                h *= 1099511628211ull;
            }
        };
        for (Index s : partition.sizes) eat(&s, sizeof(s));
        for (const auto& v : vertices)
            eat(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
        return h;
    }
};

struct ChannelGain {
    std::string name;
    double gamma = 0.0;
    bool structural_zero = true;
    int family_size = 0;
    int lmi_solves = 0;
    int newton_steps = 0;
    int indeterminate_count = 0;
    double certificate_margin = 0.0;

    bool finite() const { return std::isfinite(gamma); }
};

struct StabilityCheck {
    std::string name;
    FeasStatus status = FeasStatus::indeterminate;
    int family_size = 0;
    int newton_steps = 0;
};

struct GainTable {
    BlockPartition partition;
    std::uint64_t model_hash = 0;

    // channel gains; indices follow the decomposition layout
    std::vector<std::vector<ChannelGain>> into_diag;      // [i][k]
    std::vector<ChannelGain> pair_from_diag_i;            // [pair]
    std::vector<ChannelGain> pair_from_diag_j;            // [pair]
    std::vector<std::vector<ChannelGain>> pair_shared_j;  // [pair][k]
    std::vector<std::vector<ChannelGain>> pair_shared_i;  // [pair][k]

    // base quadratic stability of every block family (needed for any gain
    // to exist, checked even when every channel into a family is zero)
    std::vector<StabilityCheck> diag_stability;  // [i], skipped when n_i < 2
    std::vector<StabilityCheck> pair_stability;  // [pair]

    // summing-junction input counts used by the small-gain rescaling
    std::vector<int> diag_weight;  // active channels into each diagonal equation
    std::vector<int> pair_weight;  // active channels into each pair equation

    int total_lmi_solves = 0;
    int total_newton_steps = 0;
    int total_indeterminate = 0;

    bool all_finite() const {
        auto ok = [](const ChannelGain& c) { return c.finite(); };
        for (const auto& row : into_diag)
            for (const auto& c : row)
                if (!ok(c)) return false;
        for (const auto& c : pair_from_diag_i)
            if (!ok(c)) return false;
        for (const auto& c : pair_from_diag_j)
            if (!ok(c)) return false;
        for (const auto& row : pair_shared_j)
            for (const auto& c : row)
                if (!ok(c)) return false;
        for (const auto& row : pair_shared_i)
            for (const auto& c : row)
                if (!ok(c)) return false;
        return true;
    }

    bool all_stable() const {
        for (const auto& s : diag_stability)
            if (s.family_size > 0 && s.status != FeasStatus::feasible) return false;
        for (const auto& s : pair_stability)
            if (s.family_size > 0 && s.status != FeasStatus::feasible) return false;
        return true;
    }

    bool any_indeterminate_stability() const {
        for (const auto& s : diag_stability)
            if (s.family_size > 0 && s.status == FeasStatus::indeterminate) return true;
        for (const auto& s : pair_stability)
            if (s.family_size > 0 && s.status == FeasStatus::indeterminate) return true;
        return false;
    }
};

namespace detail {

inline std::uint64_t matrix_bytes_hash(std::uint64_t h, const Matrix& m) {
    const unsigned char* b = reinterpret_cast<const unsigned char*>(m.data());
    const std::size_t len = sizeof(double) * static_cast<std::size_t>(m.size());
    for (std::size_t i = 0; i < len; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

/// Distinct (A,B) tuples of a channel across the joint vertex list.
inline VertexChannel dedup_family(const std::vector<Matrix>& As,
                                  const std::vector<Matrix>& Bs) {
    VertexChannel ch;
    std::map<std::uint64_t, std::size_t> seen;
    for (std::size_t q = 0; q < As.size(); ++q) {
        std::uint64_t h = matrix_bytes_hash(1469598103934665603ull, As[q]);
        if (!Bs.empty()) h = matrix_bytes_hash(h, Bs[q]);
        if (seen.emplace(h, q).second) {
            ch.A.push_back(As[q]);
            if (!Bs.empty()) ch.B.push_back(Bs[q]);
        }
    }
    return ch;
}

inline bool is_zero(const Matrix& m) { return (m.array() == 0.0).all(); }

}  // namespace detail

/// Computes every channel gain and base stability check of the model.
/// Channels whose operator is zero at every vertex are marked structural
/// zeros and never enter an LMI. Jobs run on a bounded worker pool; results
/// land in fixed slots so the table does not depend on scheduling.
inline GainTable compute_gains(const InterconnectionModel& model,
                               const LmiOptions& opt = {}, int workers = 1) {
    model.validate();
    const BlockPartition& part = model.partition;
    const Index N = part.blocks();
    const auto pairs = part.block_pairs();
    const Index P = static_cast<Index>(pairs.size());
    const std::size_t Q = model.vertices.size();

    // per-vertex coupling operators and compound/sum families
    std::vector<InterconnectionOperators> ops;
    ops.reserve(Q);
    for (std::size_t q = 0; q < Q; ++q) ops.push_back(build_operators(model.vertex(q)));

    std::vector<std::vector<Matrix>> diag_family(N);   // compound of A_ii per vertex
    std::vector<std::vector<Matrix>> pair_family(P);   // kron sum of (A_ii, A_jj)
    for (std::size_t q = 0; q < Q; ++q) {
        const PartitionedMatrix A = model.vertex(q);
        for (Index i = 0; i < N; ++i)
            if (part.sizes[i] >= 2)
                diag_family[i].push_back(additive_compound2(A.block(i, i)));
        for (Index p = 0; p < P; ++p)
            pair_family[p].push_back(kron_sum(A.block(pairs[p].first, pairs[p].first),
                                              A.block(pairs[p].second, pairs[p].second)));
    }

    GainTable table;
    table.partition = part;
    table.model_hash = model.content_hash();
    table.into_diag.assign(N, std::vector<ChannelGain>(N));
    table.pair_from_diag_i.resize(P);
    table.pair_from_diag_j.resize(P);
    table.pair_shared_j.assign(P, std::vector<ChannelGain>(N));
    table.pair_shared_i.assign(P, std::vector<ChannelGain>(N));
    table.diag_stability.resize(N);
    table.pair_stability.resize(P);
    table.diag_weight.assign(N, 0);
    table.pair_weight.assign(P, 0);

    std::vector<std::function<void()>> jobs;

    auto name_of = [](const std::string& kind, Index a, Index b, Index c) {
        std::ostringstream os;
        os << kind << "(" << a + 1;
        if (b >= 0) os << "," << b + 1;
        os << ")";
        if (c >= 0) os << "<-" << c + 1;
        return os.str();
    };

    // base stability jobs
    for (Index i = 0; i < N; ++i) {
        StabilityCheck& slot = table.diag_stability[i];
        slot.name = name_of("block", i, -1, -1);
        if (part.sizes[i] < 2) continue;
        VertexChannel fam = detail::dedup_family(diag_family[i], {});
        slot.family_size = static_cast<int>(fam.A.size());
        jobs.push_back([&slot, fam = std::move(fam), &opt] {
            FeasibilityResult r = channel_feasible(fam, 1.0, opt);
            slot.status = r.status;
            slot.newton_steps = r.newton_steps;
        });
    }
    for (Index p = 0; p < P; ++p) {
        StabilityCheck& slot = table.pair_stability[p];
        slot.name = name_of("pair", pairs[p].first, pairs[p].second, -1);
        VertexChannel fam = detail::dedup_family(pair_family[p], {});
        slot.family_size = static_cast<int>(fam.A.size());
        jobs.push_back([&slot, fam = std::move(fam), &opt] {
            FeasibilityResult r = channel_feasible(fam, 1.0, opt);
            slot.status = r.status;
            slot.newton_steps = r.newton_steps;
        });
    }

    auto add_gain_job = [&](ChannelGain& slot, const std::string& name,
                            const std::vector<Matrix>& Afam,
                            const std::vector<Matrix>& Bfam, int* weight) {
        slot.name = name;
        const bool zero = std::all_of(Bfam.begin(), Bfam.end(), detail::is_zero);
        if (zero) return;  // structural zero: gain 0, no LMI, no weight
        if (weight) ++*weight;
        slot.structural_zero = false;
        VertexChannel fam = detail::dedup_family(Afam, Bfam);
        slot.family_size = static_cast<int>(fam.A.size());
        jobs.push_back([&slot, fam = std::move(fam), &opt] {
            GainResult g = minimize_gain(fam, opt);
            slot.gamma = g.gamma;
            slot.lmi_solves = g.lmi_solves;
            slot.newton_steps = g.newton_steps;
            slot.indeterminate_count = g.indeterminate_count;
            if (g.certificate) slot.certificate_margin = g.certificate->margin;
        });
    };

    // channels into diagonal equations
    for (Index i = 0; i < N; ++i) {
        if (part.sizes[i] < 2) continue;
        for (Index k = 0; k < N; ++k) {
            if (k == i) continue;
            std::vector<Matrix> Bfam;
            Bfam.reserve(Q);
            for (std::size_t q = 0; q < Q; ++q) Bfam.push_back(ops[q].into_diag[i][k]);
            add_gain_job(table.into_diag[i][k], name_of("diag", i, -1, k),
                         diag_family[i], Bfam, &table.diag_weight[i]);
        }
    }
    // channels into pair equations
    for (Index p = 0; p < P; ++p) {
        const auto [i, j] = pairs[p];
        // channels from the two diagonal skew coordinates; blocks of size
        // one have no such coordinates and stay structural zeros
        if (part.sizes[i] >= 2) {
            std::vector<Matrix> Bfam;
            for (std::size_t q = 0; q < Q; ++q) Bfam.push_back(ops[q].pair_from_diag_i[p]);
            add_gain_job(table.pair_from_diag_i[p], name_of("pair", i, j, i),
                         pair_family[p], Bfam, &table.pair_weight[p]);
        } else {
            table.pair_from_diag_i[p].name = name_of("pair", i, j, i);
        }
        if (part.sizes[j] >= 2) {
            std::vector<Matrix> Bfam;
            for (std::size_t q = 0; q < Q; ++q) Bfam.push_back(ops[q].pair_from_diag_j[p]);
            add_gain_job(table.pair_from_diag_j[p], name_of("pair", i, j, j),
                         pair_family[p], Bfam, &table.pair_weight[p]);
        } else {
            table.pair_from_diag_j[p].name = name_of("pair", i, j, j);
        }
        for (Index k = 0; k < N; ++k) {
            if (k == i || k == j) continue;
            {
                std::vector<Matrix> Bfam;
                for (std::size_t q = 0; q < Q; ++q)
                    Bfam.push_back(ops[q].pair_from_shared_j[p][k]);
                add_gain_job(table.pair_shared_j[p][k], name_of("pair", i, j, k),
                             pair_family[p], Bfam, &table.pair_weight[p]);
            }
            {
                std::vector<Matrix> Bfam;
                for (std::size_t q = 0; q < Q; ++q)
                    Bfam.push_back(ops[q].pair_from_shared_i[p][k]);
                add_gain_job(table.pair_shared_i[p][k], name_of("pair", i, j, k),
                             pair_family[p], Bfam, &table.pair_weight[p]);
            }
        }
    }

    run_jobs(jobs, workers);

    for (const auto& s : table.diag_stability) table.total_newton_steps += s.newton_steps;
    for (const auto& s : table.pair_stability) table.total_newton_steps += s.newton_steps;
    auto tally = [&table](const ChannelGain& c) {
        table.total_lmi_solves += c.lmi_solves;
        table.total_newton_steps += c.newton_steps;
        table.total_indeterminate += c.indeterminate_count;
    };
    for (const auto& row : table.into_diag)
        for (const auto& c : row) tally(c);
    for (const auto& c : table.pair_from_diag_i) tally(c);
    for (const auto& c : table.pair_from_diag_j) tally(c);
    for (const auto& row : table.pair_shared_j)
        for (const auto& c : row) tally(c);
    for (const auto& row : table.pair_shared_i)
        for (const auto& c : row) tally(c);
    return table;
}

}  // namespace twocon
