// L2-gain certification for vertex families of linear channels.
//
// A channel is a family of vertex pairs (A_q, B_q). Feasibility of
//
//   [ A_q^T P + P A_q + I   P B_q  ]
//   [      B_q^T P         -g^2 I  ]  <= 0   for all q,   P = P^T > 0
//
// certifies that every system xdot = A(t)x + B(t)u with (A(t),B(t)) in the
// convex hull of the vertices has L2 gain at most g from u to x. The block
// constraint is affine in (A_q, B_q), so checking the vertices covers the
// hull.
//
// The feasibility oracle is a phase-I interior-point method on the epigraph
// variable t: minimize t subject to F_q(P) <= t*I, eps*I - P <= t*I and
// P <= (cap + t)*I, following the central path of the log-det barrier with
// exact Newton steps. The cap bounds the search region; without it the
// domain stretches into a nearly flat valley for weakly coupled channels
// and the Hessian degenerates below double precision. t < 0 yields a
// strictly feasible P; a central point with t - mu*nu > 0 proves that no
// certificate exists inside the search region (mu*nu bounds the duality gap
// at the mu-center), and the verdict is reported as infeasible only when
// the cap multiplier shows the region was not binding. Every accepted
// certificate is re-verified independently with a symmetric eigensolver on
// the original (unscaled) blocks; acceptance is defined by that check alone.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twocon/compound.hpp"

namespace twocon {

struct LmiOptions {
    double feasibility_slack = 1e-7;   // verification: max eigenvalue of each block
    double definiteness_floor = 1e-9;  // verification: min eigenvalue of P
    double p_norm_cap = 1e4;           // search region: certificates with P <= cap * I
    double gamma_max = 1e6;            // bisection cap; beyond this a gain counts as infinite
    double gain_rel_tol = 1e-3;        // relative bisection tolerance on the gain
    double mu_min = 1e-11;             // smallest barrier parameter before giving up
    int max_newton_total = 800;
    int max_newton_per_stage = 60;
};

enum class FeasStatus { feasible, infeasible, indeterminate };

struct Certificate {
    Matrix P;
    double gamma = 0.0;
    double margin = 0.0;  // largest block eigenvalue found during verification
};

struct FeasibilityResult {
    FeasStatus status = FeasStatus::indeterminate;
    std::optional<Certificate> certificate;
    int newton_steps = 0;
};

/// Vertex family of one channel. B may have zero columns (no input), in
/// which case only internal stability of the A family is checked.
struct VertexChannel {
    std::vector<Matrix> A;
    std::vector<Matrix> B;

    Index state_dim() const { return A.empty() ? 0 : A.front().rows(); }
    Index input_dim() const { return B.empty() ? 0 : B.front().cols(); }

    void validate() const {
        if (A.empty()) throw std::invalid_argument("VertexChannel: no vertices");
        const Index m = A.front().rows();
        for (const auto& a : A)
            if (a.rows() != m || a.cols() != m)
                throw std::invalid_argument("VertexChannel: inconsistent A dimensions");
        if (!B.empty()) {
            if (B.size() != A.size())
                throw std::invalid_argument("VertexChannel: A/B vertex counts differ");
            const Index p = B.front().cols();
            for (const auto& b : B)
                if (b.rows() != m || b.cols() != p)
                    throw std::invalid_argument("VertexChannel: inconsistent B dimensions");
        }
    }
};

/// Independent certificate check: symmetric eigensolves on the original
/// blocks. Returns true iff every block has max eigenvalue <= slack and
/// P is symmetric positive definite with min eigenvalue >= floor.
inline bool verify_certificate(const VertexChannel& ch, double gamma, const Matrix& P,
                               const LmiOptions& opt, double* margin_out = nullptr) {
    const Index m = ch.state_dim();
    const Index p = ch.input_dim();
    const Matrix Ps = (P + P.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.compute(Ps, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < opt.definiteness_floor) return false;
    double margin = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < ch.A.size(); ++q) {
        Matrix F(m + p, m + p);
        F.topLeftCorner(m, m) =
            ch.A[q].transpose() * Ps + Ps * ch.A[q] + Matrix::Identity(m, m);
        if (p > 0) {
            F.topRightCorner(m, p) = Ps * ch.B[q];
            F.bottomLeftCorner(p, m) = F.topRightCorner(m, p).transpose();
            F.bottomRightCorner(p, p) = -gamma * gamma * Matrix::Identity(p, p);
        }
        es.compute(F, Eigen::EigenvaluesOnly);
        margin = std::max(margin, es.eigenvalues().maxCoeff());
    }
    if (margin_out) *margin_out = margin;
    return margin <= opt.feasibility_slack;
}

namespace detail {

/// Interior-point phase-I solver for one channel at a fixed gain.
/// Internally rescales B by 1/gamma so the (2,2) block is -I regardless of
/// the gain; congruence keeps feasibility unchanged.
class PhaseOneSolver {
  public:
    PhaseOneSolver(const VertexChannel& ch, double gamma, const LmiOptions& opt)
        : opt_(opt), m_(ch.state_dim()), p_(ch.input_dim()), Q_(static_cast<Index>(ch.A.size())) {
        A_ = ch.A;
        Bt_.reserve(ch.A.size());
        for (std::size_t q = 0; q < ch.A.size(); ++q)
            Bt_.push_back(p_ > 0 ? Matrix(ch.B[q] / gamma) : Matrix(m_, 0));
        nP_ = m_ * (m_ + 1) / 2;
        ai_.resize(nP_);
        bi_.resize(nP_);
        Index c = 0;
        for (Index a = 0; a < m_; ++a)
            for (Index b = a; b < m_; ++b) {
                ai_[c] = a;
                bi_[c] = b;
                ++c;
            }
        nu_ = static_cast<double>(Q_ * (m_ + p_) + 2 * m_);
    }

    FeasibilityResult run(const Matrix* warm) {
        Matrix P = warm && warm->rows() == m_ ? *warm : Matrix(Matrix::Identity(m_, m_));
        double t = initial_t(P);
        double mu = 0.1 * std::max(1.0, std::abs(t));
        FeasibilityResult res;
        while (res.newton_steps < opt_.max_newton_total) {
            const int centered = center(P, t, mu, res.newton_steps);
            if (t < 0.0) {
                res.status = FeasStatus::feasible;
                res.certificate = Certificate{P, 0.0, 0.0};
                return res;
            }
            if (centered && infeasibility_certified(P, t, mu)) {
                res.status = FeasStatus::infeasible;
                return res;
            }
            mu *= 0.125;
            if (mu < opt_.mu_min) break;
        }
        res.status = FeasStatus::indeterminate;
        return res;
    }

  private:
    double initial_t(const Matrix& P) const {
        double t = -std::numeric_limits<double>::infinity();
        Eigen::SelfAdjointEigenSolver<Matrix> es;
        for (Index q = 0; q < Q_; ++q) {
            es.compute(block_F(P, q), Eigen::EigenvaluesOnly);
            t = std::max(t, es.eigenvalues().maxCoeff());
        }
        es.compute(opt_.definiteness_floor * Matrix::Identity(m_, m_) - P,
                   Eigen::EigenvaluesOnly);
        t = std::max(t, es.eigenvalues().maxCoeff());
        es.compute(P - opt_.p_norm_cap * Matrix::Identity(m_, m_), Eigen::EigenvaluesOnly);
        t = std::max(t, es.eigenvalues().maxCoeff());
        return t + 0.1 * std::max(1.0, std::abs(t));
    }

    // The duality gap at the mu-center is mu*nu, so t - mu*nu > 0 rules out
    // any certificate inside the search region. A certificate beyond the cap
    // would need lambda_max(P) >= (t - mu*nu) / tr(mu * W_cap); the verdict
    // is trusted only when that exceeds the cap with a wide factor, i.e. the
    // cap constraint carried no weight at the center.
    bool infeasibility_certified(const Matrix& P, double t, double mu) const {
        const double gap = t - mu * nu_;
        if (gap <= 0.0) return false;
        Eigen::LLT<Matrix> llt(barrier_block(P, t, Q_ + 1));
        if (llt.info() != Eigen::Success) return false;
        const double tr_wcap = llt.solve(Matrix::Identity(m_, m_)).trace();
        return mu * tr_wcap * 4.0 * opt_.p_norm_cap <= gap;
    }

    Matrix block_F(const Matrix& P, Index q) const {
        Matrix F(m_ + p_, m_ + p_);
        F.topLeftCorner(m_, m_) =
            A_[q].transpose() * P + P * A_[q] + Matrix::Identity(m_, m_);
        if (p_ > 0) {
            F.topRightCorner(m_, p_) = P * Bt_[q];
            F.bottomLeftCorner(p_, m_) = F.topRightCorner(m_, p_).transpose();
            F.bottomRightCorner(p_, p_) = -Matrix::Identity(p_, p_);
        }
        return F;
    }

    // Slack blocks of the barrier: q < Q_ are the vertex LMIs, q == Q_ keeps
    // P above the definiteness floor, q == Q_ + 1 keeps P inside the cap.
    Matrix barrier_block(const Matrix& P, double t, Index q) const {
        if (q < Q_) return t * Matrix::Identity(m_ + p_, m_ + p_) - block_F(P, q);
        if (q == Q_)
            return t * Matrix::Identity(m_, m_) + P -
                   opt_.definiteness_floor * Matrix::Identity(m_, m_);
        return (t + opt_.p_norm_cap) * Matrix::Identity(m_, m_) - P;
    }

    // Barrier value t - mu*sum(logdet S); +inf outside the domain.
    double barrier_value(const Matrix& P, double t, double mu) const {
        double v = t;
        Eigen::LLT<Matrix> llt;
        for (Index q = 0; q < Q_ + 2; ++q) {
            const Matrix S = barrier_block(P, t, q);
            llt.compute(S);
            if (llt.info() != Eigen::Success)
                return std::numeric_limits<double>::infinity();
            double ld = 0.0;
            for (Index i = 0; i < S.rows(); ++i) ld += std::log(llt.matrixL()(i, i));
            v -= mu * 2.0 * ld;
        }
        return v;
    }

    // tr(S_k X S_l Y) summed over the symmetric-basis expansion of the
    // coordinates k=(a,b), l=(c,d).
    static double expand(const Matrix& X, const Matrix& Y, Index a, Index b, Index c,
                         Index d) {
        if (a == b && c == d) return X(a, c) * Y(c, a);
        if (a == b) return X(a, c) * Y(d, a) + X(a, d) * Y(c, a);
        if (c == d) return X(b, c) * Y(c, a) + X(a, c) * Y(c, b);
        return X(b, c) * Y(d, a) + X(b, d) * Y(c, a) + X(a, c) * Y(d, b) +
               X(a, d) * Y(c, b);
    }

    // One centering run; returns 1 when the Newton decrement converged at a
    // point where the Newton system itself is trustworthy.
    int center(Matrix& P, double& t, double mu, int& steps) {
        Eigen::VectorXd g(nP_ + 1), dx(nP_ + 1);
        Matrix H(nP_ + 1, nP_ + 1);
        for (int it = 0; it < opt_.max_newton_per_stage; ++it) {
            if (t < 0.0) return 0;
            if (steps >= opt_.max_newton_total) return 0;

            // inverses of all barrier blocks
            std::vector<Matrix> Ws(Q_ + 2);
            bool domain_ok = true;
            Eigen::LLT<Matrix> llt;
            for (Index q = 0; q < Q_ + 2; ++q) {
                const Matrix S = barrier_block(P, t, q);
                llt.compute(S);
                if (llt.info() != Eigen::Success) {
                    domain_ok = false;
                    break;
                }
                Ws[q] = llt.solve(Matrix::Identity(S.rows(), S.rows()));
            }
            if (!domain_ok) return 0;

            const Matrix& W0 = Ws[Q_];
            const Matrix& Wc = Ws[Q_ + 1];
            const Matrix W02 = W0 * W0;
            const Matrix Wc2 = Wc * Wc;
            double trW = W0.trace() + Wc.trace();
            double trW2 = W02.trace() + Wc2.trace();
            Matrix Gm = Wc - W0;   // gradient in matrix form
            Matrix Cm = W02 - Wc2; // cross-term (t row) in matrix form
            H.setZero();
            for (Index q = 0; q < Q_; ++q) {
                const Matrix& W = Ws[q];
                const Matrix W2 = W * W;
                trW += W.trace();
                trW2 += W2.trace();
                Matrix G(m_, m_ + p_);
                G.leftCols(m_) = A_[q];
                if (p_ > 0) G.rightCols(p_) = Bt_[q];
                const Matrix K = G * W.leftCols(m_);
                const Matrix K2 = G * W2.leftCols(m_);
                const Matrix Mq = G * W * G.transpose();
                const Matrix Tq = W.topLeftCorner(m_, m_);
                Gm += K + K.transpose();
                Cm -= K2 + K2.transpose();
                for (Index k = 0; k < nP_; ++k) {
                    const Index a = ai_[k], b = bi_[k];
                    for (Index l = k; l < nP_; ++l) {
                        const Index c = ai_[l], d = bi_[l];
                        H(k, l) += 2.0 * expand(K, K, a, b, c, d) +
                                   2.0 * expand(Mq, Tq, a, b, c, d);
                    }
                }
            }
            for (Index k = 0; k < nP_; ++k) {
                const Index a = ai_[k], b = bi_[k];
                for (Index l = k; l < nP_; ++l) {
                    const Index c = ai_[l], d = bi_[l];
                    H(k, l) += expand(W0, W0, a, b, c, d) + expand(Wc, Wc, a, b, c, d);
                }
            }
            for (Index k = 0; k < nP_; ++k) {
                const Index a = ai_[k], b = bi_[k];
                g(k) = mu * (a == b ? Gm(a, a) : Gm(a, b) + Gm(b, a));
                H(k, nP_) = mu * (a == b ? Cm(a, a) : Cm(a, b) + Cm(b, a));
                for (Index l = k; l < nP_; ++l) {
                    H(k, l) *= mu;
                    H(l, k) = H(k, l);
                }
                H(nP_, k) = H(k, nP_);
            }
            g(nP_) = 1.0 - mu * trW;
            H(nP_, nP_) = mu * trW2;

            // A negative decrement means the assembled Hessian lost positive
            // definiteness to roundoff and dx is noise; regularize until dx
            // is a genuine descent direction.
            const double hscale = std::max(1.0, H.diagonal().maxCoeff());
            double ridge = 0.0;
            double decrement2 = -1.0;
            for (;;) {
                Eigen::LDLT<Matrix> ldlt(
                    ridge == 0.0 ? H
                                 : Matrix(H + ridge * Matrix::Identity(nP_ + 1, nP_ + 1)));
                dx = ldlt.solve(-g);
                if (ldlt.info() == Eigen::Success && dx.allFinite()) {
                    decrement2 = -g.dot(dx);
                    if (decrement2 >= 0.0) break;
                }
                ridge = ridge == 0.0 ? 1e-14 * hscale : ridge * 1e3;
                if (ridge > 1e-2 * hscale) return 0;
            }
            // Only an unregularized solve certifies centrality; a ridged one
            // still stops the stage but proves nothing.
            if (decrement2 / 2.0 < 1e-10) return ridge == 0.0 ? 1 : 0;

            const double f0 = barrier_value(P, t, mu);
            const double slope = g.dot(dx);
            double alpha = 1.0;
            while (alpha > 1e-12) {
                Matrix Pn = P;
                for (Index k = 0; k < nP_; ++k) {
                    Pn(ai_[k], bi_[k]) += alpha * dx(k);
                    if (ai_[k] != bi_[k]) Pn(bi_[k], ai_[k]) += alpha * dx(k);
                }
                const double tn = t + alpha * dx(nP_);
                if (barrier_value(Pn, tn, mu) <= f0 + 0.25 * alpha * slope) {
                    P = Pn;
                    t = tn;
                    break;
                }
                alpha *= 0.5;
            }
            ++steps;
            if (alpha <= 1e-12) return 0;
        }
        return 0;
    }

    LmiOptions opt_;
    Index m_, p_, Q_, nP_;
    double nu_;
    std::vector<Matrix> A_, Bt_;
    std::vector<Index> ai_, bi_;
};

}  // namespace detail

/// Feasibility of the channel LMI at a fixed gain. gamma must be positive
/// unless the channel has no input columns (pure stability check, pass any
/// value). Certificates are returned only after independent verification.
inline FeasibilityResult channel_feasible(const VertexChannel& ch, double gamma,
                                          const LmiOptions& opt = {},
                                          const Matrix* warm = nullptr) {
    ch.validate();
    if (ch.input_dim() > 0 && !(gamma > 0.0))
        throw std::invalid_argument("channel_feasible: gain must be positive");
    // A warm-started P may already verify: skip the solve.
    if (warm && warm->rows() == ch.state_dim()) {
        double margin = 0.0;
        LmiOptions strict = opt;
        strict.feasibility_slack = -1e-9;
        if (verify_certificate(ch, gamma, *warm, strict, &margin)) {
            FeasibilityResult res;
            res.status = FeasStatus::feasible;
            res.certificate = Certificate{(*warm + warm->transpose()) / 2.0, gamma, margin};
            return res;
        }
    }
    detail::PhaseOneSolver solver(ch, ch.input_dim() > 0 ? gamma : 1.0, opt);
    FeasibilityResult res = solver.run(warm);
    if (res.status == FeasStatus::feasible) {
        double margin = 0.0;
        if (verify_certificate(ch, gamma, res.certificate->P, opt, &margin)) {
            res.certificate->gamma = gamma;
            res.certificate->margin = margin;
        } else {
            // solver claims feasibility the eigensolver cannot confirm
            res.status = FeasStatus::indeterminate;
            res.certificate.reset();
        }
    } else {
        res.certificate.reset();
    }
    return res;
}

struct GainResult {
    double gamma = std::numeric_limits<double>::infinity();
    bool structural_zero = false;
    std::optional<Certificate> certificate;
    int lmi_solves = 0;
    int newton_steps = 0;
    int indeterminate_count = 0;

    bool finite() const { return std::isfinite(gamma); }
};

/// Smallest certified gain of a channel, located by bisection over the
/// feasibility oracle. Returns the upper bracket endpoint (always verified
/// feasible) once the bracket is tighter than rel_tol times the gain.
/// Indeterminate oracle calls are counted and treated as infeasible, which
/// can only increase the returned bound. A channel whose input matrices are
/// all exactly zero has gain 0 provided its A family is quadratically
/// stable; an unstable family yields an infinite gain.
inline GainResult minimize_gain(const VertexChannel& ch, const LmiOptions& opt = {}) {
    ch.validate();
    GainResult out;

    const bool zero_input =
        ch.input_dim() == 0 ||
        std::all_of(ch.B.begin(), ch.B.end(),
                    [](const Matrix& b) { return (b.array() == 0.0).all(); });

    // internal stability first; it is necessary for any finite gain and
    // cheap to refute
    VertexChannel stab{ch.A, {}};
    FeasibilityResult sres = channel_feasible(stab, 1.0, opt);
    out.lmi_solves++;
    out.newton_steps += sres.newton_steps;
    if (sres.status == FeasStatus::indeterminate) out.indeterminate_count++;
    if (sres.status != FeasStatus::feasible) return out;  // gamma stays +inf

    if (zero_input) {
        out.gamma = 0.0;
        out.structural_zero = true;
        out.certificate = sres.certificate;
        out.certificate->gamma = 0.0;
        return out;
    }

    Matrix warm = sres.certificate->P;
    double lo = 0.0, hi = 1.0;
    std::optional<Certificate> best;
    for (;;) {
        FeasibilityResult r = channel_feasible(ch, hi, opt, &warm);
        out.lmi_solves++;
        out.newton_steps += r.newton_steps;
        if (r.status == FeasStatus::indeterminate) out.indeterminate_count++;
        if (r.status == FeasStatus::feasible) {
            best = r.certificate;
            warm = r.certificate->P;
            break;
        }
        lo = hi;
        hi *= 4.0;
        if (hi > opt.gamma_max) return out;  // infinite
    }
    while (hi - lo > opt.gain_rel_tol * std::max(hi, 1e-12)) {
        const double mid = 0.5 * (lo + hi);
        FeasibilityResult r = channel_feasible(ch, mid, opt, &warm);
        out.lmi_solves++;
        out.newton_steps += r.newton_steps;
        if (r.status == FeasStatus::indeterminate) out.indeterminate_count++;
        if (r.status == FeasStatus::feasible) {
            hi = mid;
            best = r.certificate;
            warm = r.certificate->P;
        } else {
            lo = mid;
        }
    }
    out.gamma = hi;
    out.certificate = best;
    return out;
}

/// sqrt(count)-rescaled copy of a gain family: each input of a summing
/// junction with `count` active inputs may be charged sqrt(count) times its
/// individual gain.
inline std::vector<double> rescale_gains(const std::vector<double>& gains, int count) {
    if (count < 0) throw std::invalid_argument("rescale_gains: negative count");
    std::vector<double> out(gains.size());
    const double s = std::sqrt(static_cast<double>(count));
    for (std::size_t i = 0; i < gains.size(); ++i) out[i] = s * gains[i];
    return out;
}

/// Optional combined check: a single LMI with one P per channel and all
/// channels' blocks on the diagonal, evaluated at fixed gains. Feasibility
/// confirms the whole gain family at once; this is never used to produce
/// gains, only to double-check a family.
inline FeasStatus joint_family_feasible(const std::vector<VertexChannel>& channels,
                                        const std::vector<double>& gains,
                                        const LmiOptions& opt = {}) {
    if (channels.size() != gains.size())
        throw std::invalid_argument("joint_family_feasible: size mismatch");
    for (std::size_t c = 0; c < channels.size(); ++c) {
        FeasibilityResult r = channel_feasible(channels[c], gains[c], opt);
        if (r.status != FeasStatus::feasible) return r.status;
    }
    return FeasStatus::feasible;
}

}  // namespace twocon
