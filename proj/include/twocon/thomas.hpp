// Three cyclically coupled Thomas systems: the ring of 3-dimensional
// oscillators used as the library's built-in case study.
//
// Subsystem 1 has damping b, subsystems 2 and 3 have damping a (fixed at 2),
// and the ring coupling feeds -d times the first state of each neighbour:
//
//   dx1/dt = -b x1 + sin x2 - d x4      (and cyclically for x4, x7)
//
// All cosine bounds come from a forward-invariant box; its x1/x4/x7 extents
// solve the worst-case inflow balance b X1 = 1 + |d| X4, a X4 = 1 + |d| X7,
// a X7 = 1 + |d| X1, which has a positive solution exactly when
// 1 - (|d|/b)(|d|/a)^2 > 0.
#pragma once

#include <array>
#include <numbers>
#include <random>

#include "twocon/odesim.hpp"
#include "twocon/smallgain.hpp"

namespace twocon {

struct ThomasParams {
    double b = 0.5;
    double d = 0.0;
    double a = 2.0;

    void validate() const {
        if (!(b > 0.0) || !(a > 0.0))
            throw std::invalid_argument("ThomasParams: damping rates must be positive");
        if (!(d >= -1.0 && d <= 1.0))
            throw std::invalid_argument("ThomasParams: coupling d must lie in [-1, 1]");
    }
};

inline VectorField thomas_rhs(const ThomasParams& p) {
    p.validate();
    return [p](double, const Vector& x) -> Vector {
        Vector dx(9);
        dx(0) = -p.b * x(0) + std::sin(x(1)) - p.d * x(3);
        dx(1) = -p.b * x(1) + std::sin(x(2));
        dx(2) = -p.b * x(2) + std::sin(x(0));
        dx(3) = -p.a * x(3) + std::sin(x(4)) - p.d * x(6);
        dx(4) = -p.a * x(4) + std::sin(x(5));
        dx(5) = -p.a * x(5) + std::sin(x(3));
        dx(6) = -p.a * x(6) + std::sin(x(7)) - p.d * x(0);
        dx(7) = -p.a * x(7) + std::sin(x(8));
        dx(8) = -p.a * x(8) + std::sin(x(6));
        return dx;
    };
}

/// Jacobian as a function of the nine cosine values c_i = cos x_i, with the
/// natural (3,3,3) partition.
inline PartitionedMatrix thomas_jacobian(const ThomasParams& p, const Vector& c) {
    p.validate();
    if (c.size() != 9)
        throw std::invalid_argument("thomas_jacobian: nine cosines expected");
    if (c.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
        throw std::invalid_argument("thomas_jacobian: cosines must lie in [-1, 1]");
    Matrix J = Matrix::Zero(9, 9);
    const double rate[3] = {p.b, p.a, p.a};
    for (Index blk = 0; blk < 3; ++blk) {
        const Index o = 3 * blk;
        J(o, o) = J(o + 1, o + 1) = J(o + 2, o + 2) = -rate[blk];
        J(o, o + 1) = c(o + 1);
        J(o + 1, o + 2) = c(o + 2);
        J(o + 2, o) = c(o);
    }
    J(0, 3) = J(3, 6) = J(6, 0) = -p.d;
    return PartitionedMatrix(BlockPartition({3, 3, 3}), J);
}

inline PartitionedMatrix thomas_jacobian_at(const ThomasParams& p, const Vector& x) {
    if (x.size() != 9)
        throw std::invalid_argument("thomas_jacobian_at: nine states expected");
    return thomas_jacobian(p, x.array().cos().matrix());
}

struct InvariantBox {
    std::array<double, 9> bound;  // |x_i| <= bound[i]
    double denominator = 0.0;     // 1 - (|d|/b)(|d|/a)^2

    bool contains(const Vector& x, double slack = 0.0) const {
        for (int i = 0; i < 9; ++i)
            if (std::abs(x(i)) > bound[i] + slack) return false;
        return true;
    }
};

/// Forward-invariant hyper-rectangle of the coupled system. Throws
/// std::domain_error when the coupling is too strong for the damping rates
/// (nonpositive denominator); the bounds do not exist in that regime.
inline InvariantBox invariant_box(const ThomasParams& p) {
    p.validate();
    const double dd = std::abs(p.d);
    const double ra = dd / p.a;
    const double den = 1.0 - (dd / p.b) * ra * ra;
    if (!(den > 0.0))
        throw std::domain_error(
            "invariant_box: 1 - (|d|/b)(|d|/a)^2 <= 0, no invariant box for these "
            "parameters");
    InvariantBox box;
    box.denominator = den;
    box.bound[0] = (1.0 + ra + ra * ra) / (p.b * den);
    box.bound[3] = (1.0 + ra + dd * dd / (p.a * p.b)) / (p.a * den);
    box.bound[6] = (1.0 + dd / p.b + dd * dd / (p.a * p.b)) / (p.a * den);
    box.bound[1] = box.bound[2] = 1.0 / p.b;
    box.bound[4] = box.bound[5] = box.bound[7] = box.bound[8] = 1.0 / p.a;
    return box;
}

/// Uniform sample inside the box. Draws through a fixed 53-bit ladder so the
/// stream depends only on the engine state, not on library internals.
inline Vector sample_box(const InvariantBox& box, std::mt19937_64& rng) {
    Vector x(9);
    for (int i = 0; i < 9; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x(i) = (2.0 * u - 1.0) * box.bound[i];
    }
    return x;
}

/// Polytopic Jacobian model over the invariant box: each cosine ranges over
/// [cos bound_i, 1], jointly enumerated into 2^9 = 512 vertices. A bound
/// beyond pi leaves the monotone range of the cosine; the interval then
/// widens to [-1, 1] and a warning is recorded.
inline InterconnectionModel vertex_hulls(const ThomasParams& p,
                                         std::vector<std::string>* warnings = nullptr) {
    const InvariantBox box = invariant_box(p);
    std::array<double, 9> lo;
    for (int i = 0; i < 9; ++i) {
        if (box.bound[i] <= std::numbers::pi) {
            lo[i] = std::cos(box.bound[i]);
        } else {
            lo[i] = -1.0;
            if (warnings)
                warnings->push_back("cosine interval for x" + std::to_string(i + 1) +
                                    " widened to [-1, 1] (box bound exceeds pi)");
        }
    }
    InterconnectionModel model;
    model.partition = BlockPartition({3, 3, 3});
    model.vertices.reserve(512);
    Vector c(9);
    for (int mask = 0; mask < 512; ++mask) {
        for (int i = 0; i < 9; ++i) c(i) = (mask >> i & 1) ? 1.0 : lo[i];
        model.vertices.push_back(thomas_jacobian(p, c).full);
    }
    return model;
}

/// Full certification pipeline at one parameter point: invariant box, vertex
/// hulls, channel gains, small-gain matrices, spectral radius.
inline CertificationReport certify(const ThomasParams& p, const CertifyOptions& opt = {}) {
    std::vector<std::string> warnings;
    const InterconnectionModel model = vertex_hulls(p, &warnings);
    CertificationReport rep = certify_model(model, opt);
    rep.warnings.insert(rep.warnings.begin(), warnings.begin(), warnings.end());
    return rep;
}

struct CurvePoint {
    double d = 0.0;
    double b = std::numeric_limits<double>::quiet_NaN();
    bool bracketed = false;      // endpoints straddled the boundary
    bool grid_fallback = false;  // bisection result failed its probes, rescanned
    int evaluations = 0;
};

struct CurveOptions {
    double b_lo = 0.05;
    double b_hi = 2.0;
    double b_tol = 1e-3;
    bool probe_monotone = true;  // re-test +/- 0.05 around the boundary
    CertifyOptions certify;
};

/// Smallest certified damping b per coupling value, by bisection on each d
/// slice. Parameter points whose invariant box does not exist count as
/// uncertified. Slices that fail the monotonicity probes fall back to a
/// descending grid scan and are flagged.
inline std::vector<CurvePoint> certification_curve(const std::vector<double>& d_grid,
                                                   const CurveOptions& opt = {}) {
    if (d_grid.empty())
        throw std::invalid_argument("certification_curve: empty d grid");
    std::vector<CurvePoint> out;
    out.reserve(d_grid.size());
    for (const double d : d_grid) {
        CurvePoint pt;
        pt.d = d;
        auto certified_at = [&](double b) {
            ++pt.evaluations;
            try {
                return certify(ThomasParams{b, d}, opt.certify).certified();
            } catch (const std::domain_error&) {
                return false;
            }
        };
        if (!certified_at(opt.b_hi)) {
            out.push_back(pt);  // nothing certifiable on this slice
            continue;
        }
        if (certified_at(opt.b_lo)) {
            pt.b = opt.b_lo;  // boundary below the search range
            out.push_back(pt);
            continue;
        }
        pt.bracketed = true;
        double lo = opt.b_lo, hi = opt.b_hi;
        while (hi - lo > opt.b_tol) {
            const double mid = 0.5 * (lo + hi);
            (certified_at(mid) ? hi : lo) = mid;
        }
        pt.b = hi;
        if (opt.probe_monotone) {
            const bool above_ok = pt.b + 0.05 > opt.b_hi || certified_at(pt.b + 0.05);
            const bool below_ok = pt.b - 0.05 < opt.b_lo || !certified_at(pt.b - 0.05);
            if (!(above_ok && below_ok)) {
                pt.grid_fallback = true;
                pt.b = std::numeric_limits<double>::quiet_NaN();
                const int K = 40;
                for (int k = K; k >= 0; --k) {
                    const double b = opt.b_lo + (opt.b_hi - opt.b_lo) * k / K;
                    if (!certified_at(b)) break;
                    pt.b = b;
                }
            }
        }
        out.push_back(pt);
    }
    return out;
}

/// Largest sum of real parts over distinct eigenvalue pairs; negative iff
/// every pairwise sum is in the open left half plane.
inline double max_pair_eigenvalue_sum(const Matrix& A) {
    if (A.rows() != A.cols() || A.rows() < 2)
        throw std::invalid_argument("max_pair_eigenvalue_sum: square matrix, n >= 2");
    Eigen::EigenSolver<Matrix> es(A, false);
    Vector re = es.eigenvalues().real();
    std::sort(re.data(), re.data() + re.size(), std::greater<double>());
    return re(0) + re(1);
}

/// Damping b at which the pairwise eigenvalue sums of the origin Jacobian
/// cross zero, per coupling value. A slice with no sign change over the
/// search range reports an absent point.
inline std::vector<CurvePoint> marginal_stability_curve(const std::vector<double>& d_grid,
                                                        double b_lo = 0.05,
                                                        double b_hi = 2.0,
                                                        double b_tol = 1e-6) {
    if (d_grid.empty())
        throw std::invalid_argument("marginal_stability_curve: empty d grid");
    const Vector ones = Vector::Ones(9);
    std::vector<CurvePoint> out;
    out.reserve(d_grid.size());
    for (const double d : d_grid) {
        CurvePoint pt;
        pt.d = d;
        auto margin = [&](double b) {
            ++pt.evaluations;
            return max_pair_eigenvalue_sum(thomas_jacobian(ThomasParams{b, d}, ones).full);
        };
        if (!(margin(b_lo) > 0.0 && margin(b_hi) < 0.0)) {
            out.push_back(pt);
            continue;
        }
        pt.bracketed = true;
        double lo = b_lo, hi = b_hi;
        while (hi - lo > b_tol) {
            const double mid = 0.5 * (lo + hi);
            (margin(mid) <= 0.0 ? hi : lo) = mid;
        }
        pt.b = 0.5 * (lo + hi);
        out.push_back(pt);
    }
    return out;
}

}  // namespace twocon
