// Fixed-step RK4 integration, trajectory classification, and empirical
// L2 gain measurement.
//
// Everything here is deterministic given its inputs: fixed step, no
// adaptivity, no hidden state. Golden outputs stay byte-identical.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>

#include "twocon/compound.hpp"

namespace twocon {

using VectorField = std::function<Vector(double, const Vector&)>;
using MatrixField = std::function<Matrix(double)>;

struct Trajectory {
    std::string label;
    double step = 0.0;          // integration step
    std::vector<double> times;  // sampled instants (stride * step apart)
    std::vector<Vector> states;

    const Vector& initial() const { return states.front(); }
    const Vector& final_state() const { return states.back(); }
};

namespace detail {

inline Vector rk4_step(const VectorField& f, double t, const Vector& x, double h) {
    const Vector k1 = f(t, x);
    const Vector k2 = f(t + 0.5 * h, x + (0.5 * h) * k1);
    const Vector k3 = f(t + 0.5 * h, x + (0.5 * h) * k2);
    const Vector k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Integrates dx/dt = f(t, x) from x0 over [0, T] with fixed step h,
/// recording every `stride`-th point (plus the endpoint). Throws on
/// non-finite states.
inline Trajectory integrate(const VectorField& f, const Vector& x0, double h,
                            double T, long stride = 1) {
    if (!(h > 0.0) || !(T > 0.0))
        throw std::invalid_argument("integrate: need h > 0 and T > 0");
    if (stride < 1) throw std::invalid_argument("integrate: stride must be >= 1");
    const long steps = std::lround(T / h);
    if (steps < 1) throw std::invalid_argument("integrate: horizon shorter than one step");
    Trajectory traj;
    traj.step = h;
    traj.times.reserve(static_cast<std::size_t>(steps / stride) + 2);
    traj.states.reserve(static_cast<std::size_t>(steps / stride) + 2);
    Vector x = x0;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        x = detail::rk4_step(f, t, x, h);
        if (!x.allFinite())
            throw std::runtime_error("integrate: state diverged at t = " +
                                     std::to_string(t + h));
        if ((k + 1) % stride == 0 || k + 1 == steps) {
            traj.times.push_back(static_cast<double>(k + 1) * h);
            traj.states.push_back(x);
        }
    }
    return traj;
}

struct MatrixTrajectory {
    double step = 0.0;
    std::vector<double> times;
    std::vector<Matrix> values;
};

/// Integrates the skew-symmetric matrix equation dX/dt = A(t)X + XA(t)^T.
/// The skew subspace is invariant in exact arithmetic; each accepted step is
/// re-antisymmetrized so roundoff cannot accumulate a symmetric component.
inline MatrixTrajectory integrate_skew(const MatrixField& A, const Matrix& X0,
                                       double h, double T, long stride = 1) {
    if (X0.rows() != X0.cols())
        throw std::invalid_argument("integrate_skew: square matrix required");
    if (!(h > 0.0) || !(T > 0.0) || stride < 1)
        throw std::invalid_argument("integrate_skew: bad step, horizon, or stride");
    const long steps = std::lround(T / h);
    auto f = [&A](double t, const Matrix& X) -> Matrix {
        const Matrix At = A(t);
        return At * X + X * At.transpose();
    };
    MatrixTrajectory traj;
    traj.step = h;
    Matrix X = 0.5 * (X0 - X0.transpose());
    traj.times.push_back(0.0);
    traj.values.push_back(X);
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const Matrix k1 = f(t, X);
        const Matrix k2 = f(t + 0.5 * h, X + (0.5 * h) * k1);
        const Matrix k3 = f(t + 0.5 * h, X + (0.5 * h) * k2);
        const Matrix k4 = f(t + h, X + h * k3);
        X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        X = 0.5 * (X - X.transpose());
        if (!X.allFinite())
            throw std::runtime_error("integrate_skew: state diverged");
        if ((k + 1) % stride == 0 || k + 1 == steps) {
            traj.times.push_back(static_cast<double>(k + 1) * h);
            traj.values.push_back(X);
        }
    }
    return traj;
}

struct ClassifyOptions {
    double tail_fraction = 0.10;
    double speed_tol = 1e-6;      // max ||f(x)|| over the tail
    double drift_tol = 1e-6;      // max state excursion over the tail
    double amplitude_min = 1e-3;  // oscillation amplitude threshold
};

struct Classification {
    enum class Kind { converged, oscillatory, undecided };

    Kind kind = Kind::undecided;
    Vector equilibrium;      // populated when converged
    double tail_amplitude = 0.0;
    double tail_speed = 0.0;

    const char* name() const {
        switch (kind) {
            case Kind::converged: return "converged";
            case Kind::oscillatory: return "oscillatory";
            default: return "undecided";
        }
    }
};

/// Classifies the tail of a trajectory: settled to an equilibrium of f,
/// sustained oscillation, or neither (surfaced as undecided).
inline Classification classify(const VectorField& f, const Trajectory& traj,
                               const ClassifyOptions& opt = {}) {
    const std::size_t n = traj.states.size();
    if (n < 2) throw std::invalid_argument("classify: trajectory too short");
    std::size_t tail =
        static_cast<std::size_t>(static_cast<double>(n) * opt.tail_fraction);
    tail = std::max<std::size_t>(tail, 2);
    const std::size_t start = n - tail;

    Classification c;
    Vector lo = traj.states[start], hi = traj.states[start];
    double drift = 0.0;
    for (std::size_t k = start; k < n; ++k) {
        const Vector& x = traj.states[k];
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
        c.tail_speed = std::max(c.tail_speed, f(traj.times[k], x).norm());
        drift = std::max(drift, (x - traj.states.back()).cwiseAbs().maxCoeff());
    }
    c.tail_amplitude = 0.5 * (hi - lo).maxCoeff();
    if (c.tail_speed < opt.speed_tol && drift < opt.drift_tol) {
        c.kind = Classification::Kind::converged;
        c.equilibrium = traj.states.back();
    } else if (c.tail_amplitude > opt.amplitude_min) {
        c.kind = Classification::Kind::oscillatory;
    }
    return c;
}

/// Measures sqrt(integral ||y||^2 / integral ||u||^2) for the forced linear
/// channel dy/dt = A(t)y + B(t)u(t) from rest. The energies ride along as
/// two quadrature states of the same RK4 pass, so the ratio carries the
/// integrator's order. By causality this is a lower bound on any valid gain.
inline double empirical_l2_gain(const MatrixField& A, const MatrixField& B,
                                const std::function<Vector(double)>& u, double h,
                                double T) {
    const Matrix B0 = B(0.0);
    const Index n = B0.rows();
    auto f = [&](double t, const Vector& z) -> Vector {
        const Vector y = z.head(n);
        const Vector ut = u(t);
        Vector dz(n + 2);
        dz.head(n) = A(t) * y + B(t) * ut;
        dz(n) = y.squaredNorm();
        dz(n + 1) = ut.squaredNorm();
        return dz;
    };
    const Trajectory traj = integrate(f, Vector::Zero(n + 2), h, T, 1 << 10);
    const double out_energy = traj.final_state()(n);
    const double in_energy = traj.final_state()(n + 1);
    if (!(in_energy > 1e-12))
        throw std::domain_error("empirical_l2_gain: input has no energy");
    return std::sqrt(out_energy / in_energy);
}

/// Writes "t,x1,...,xn" rows with round-trip-exact floating point.
inline void write_csv(const Trajectory& traj, std::ostream& os) {
    const Index n = traj.states.empty() ? 0 : traj.states.front().size();
    os << "t";
    for (Index i = 0; i < n; ++i) os << ",x" << (i + 1);
    os << "\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << traj.times[k];
        for (Index i = 0; i < n; ++i) os << "," << traj.states[k](i);
        os << "\n";
    }
}

}  // namespace twocon
