// Acceptance gate for the library: nine end-to-end checks, one line each.
// Exit status is the number of failed checks.

#include <array>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "twocon/decomposition.hpp"
#include "twocon/odesim.hpp"
#include "twocon/smallgain.hpp"
#include "twocon/thomas.hpp"

using namespace twocon;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int num, const char* title, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", num, title,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// 1: assembled block generator vs permuted second compound
void criterion_block_generator() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const BlockPartition part = oracle::random_partition(rng);
        const Matrix A = oracle::random_matrix(rng, part.total(), part.total());
        const PartitionedMatrix pm(part, A);
        const BlockGenerator bg = assemble_block_generator(pm);
        const Matrix Pi = bg.permutation_matrix();
        const Matrix lhs = Pi * additive_compound2(A) * Pi.transpose();
        worst = std::max(worst, (lhs - bg.generator).cwiseAbs().maxCoeff());
    }
    const double elapsed = seconds_since(t0);
    report(1, "block generator equals permuted compound",
           worst <= 1e-12 && elapsed < 10.0,
           fmt("max error %.2e over 200 instances, %.1f s", worst, elapsed));
}

// 2: skew-matrix flow vs compound-coordinate flow
void criterion_dynamic_consistency() {
    std::mt19937_64 rng(1002);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + static_cast<Index>(rng() % 5);
        Matrix A = oracle::random_matrix(rng, n, n);
        A *= 1.5 / A.norm();
        const Matrix raw = oracle::random_matrix(rng, n, n);
        const Matrix X0 = raw - raw.transpose();

        const MatrixTrajectory mt =
            integrate_skew([&A](double) { return A; }, X0, 1e-3, 1.0, 10);
        const Matrix A2 = additive_compound2(A);
        const Trajectory zt = integrate(
            [&A2](double, const Vector& z) -> Vector { return A2 * z; }, skew_vec(X0),
            1e-3, 1.0, 10);
        for (std::size_t k = 0; k < mt.values.size(); ++k)
            worst = std::max(worst, (skew_vec(mt.values[k]) - zt.states[k])
                                        .cwiseAbs()
                                        .maxCoeff());
    }
    report(2, "matrix and coordinate flows agree", worst <= 1e-6,
           fmt("max deviation %.2e over 50 systems", worst));
}

// 3: certified gains vs frequency sweep, and vs measured energy ratios
void criterion_gain_oracle() {
    std::mt19937_64 rng(1003);
    double worst_rel = 0.0;
    double worst_excess = -1.0;
    struct Sys {
        Matrix A, B;
        double gamma;
    };
    std::vector<Sys> kept;
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + static_cast<Index>(rng() % 5);
        const Index m = 1 + static_cast<Index>(rng() % 3);
        const Matrix A = oracle::random_hurwitz(rng, n);
        const Matrix B = oracle::random_matrix(rng, n, m);
        const GainResult g = minimize_gain(VertexChannel{{A}, {B}});
        if (!g.finite()) {
            worst_rel = 1.0;
            break;
        }
        const double sweep = oracle::hinf_freq_sweep(A, B);
        worst_rel = std::max(worst_rel, std::abs(g.gamma - sweep) / sweep);
        if (kept.size() < 10) kept.push_back({A, B, g.gamma});
    }
    for (const Sys& s : kept) {
        const Index m = s.B.cols();
        for (int probe = 0; probe < 20; ++probe) {
            std::vector<std::array<double, 12>> coef(static_cast<std::size_t>(m));
            for (auto& ch : coef)
                for (int k = 0; k < 4; ++k) {
                    ch[3 * k] = oracle::urand(rng, 0.2, 1.0);
                    ch[3 * k + 1] = oracle::urand(rng, 0.05, 8.0);
                    ch[3 * k + 2] = oracle::urand(rng, 0.0, 6.283185307179586);
                }
            auto u = [m, coef](double t) {
                Vector v = Vector::Zero(m);
                for (Index j = 0; j < m; ++j)
                    for (int k = 0; k < 4; ++k) {
                        const auto& ch = coef[static_cast<std::size_t>(j)];
                        v(j) += ch[3 * k] * std::sin(ch[3 * k + 1] * t + ch[3 * k + 2]);
                    }
                return v;
            };
            const double ratio = empirical_l2_gain([&s](double) { return s.A; },
                                                   [&s](double) { return s.B; }, u,
                                                   0.005, 60.0);
            worst_excess = std::max(worst_excess,
                                    ratio - (s.gamma * (1.0 + 1e-6) + 1e-9));
        }
    }
    report(3, "gains match frequency sweeps and bound energy ratios",
           worst_rel <= 0.01 && worst_excess <= 0.0,
           fmt("max relative gap %.2e, max ratio excess %.2e", worst_rel, worst_excess));
}

// 4: three equivalent contraction conditions on random nonnegative triples
void criterion_equivalence() {
    std::mt19937_64 rng(1004);
    int checked = 0, agreed = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Index N = 2 + static_cast<Index>(rng() % 3);
        const Index P = N * (N - 1) / 2;
        auto rand_pos = [&rng](Index r, Index c) {
            Matrix M(r, c);
            for (Index i = 0; i < r; ++i)
                for (Index j = 0; j < c; ++j) M(i, j) = 0.01 + oracle::urand(rng);
            return M;
        };
        GainMatrices m;
        m.pair_pair = rand_pos(P, P);
        m.diag_pair = rand_pos(N, P);
        m.pair_diag = rand_pos(P, N);
        const double target = std::exp(oracle::urand(rng, std::log(0.5), std::log(2.0)));
        const double s = target / spectral_radius(m.composite());
        m.pair_pair *= s;
        m.diag_pair *= s;
        m.pair_diag *= s;

        const EquivalenceResult r = equivalence_check(m);
        const double rho_pp = spectral_radius(m.pair_pair);
        if (std::abs(r.rho_loop - 1.0) < 1e-10 || std::abs(r.rho_composite - 1.0) < 1e-10 ||
            std::abs(rho_pp - 1.0) < 1e-10)
            continue;
        ++checked;
        if (r.loop_contractive == r.composite_contractive &&
            r.loop_contractive == r.nested_contractive)
            ++agreed;
    }
    report(4, "contraction conditions agree", agreed == checked && checked >= 450,
           fmt("%.0f of %.0f non-marginal triples agree", agreed, checked));
}

// 5: certified boundary of the decoupled ring
void criterion_decoupled_threshold() {
    const auto t0 = std::chrono::steady_clock::now();
    CurveOptions opt;
    opt.b_tol = 5e-3;
    const std::vector<CurvePoint> curve = certification_curve({0.0}, opt);
    const double elapsed = seconds_since(t0);
    const double b = curve[0].b;
    report(5, "decoupled certification threshold",
           curve[0].bracketed && std::abs(b - 0.442) <= 0.02 && elapsed < 300.0,
           fmt("b = %.4f, %.1f s", b, elapsed));
}

// 6: eigenvalue boundary at d=0 and curve ordering across the coupling range
std::vector<CurvePoint> criterion_curve_ordering() {
    std::vector<double> grid;
    for (int k = 0; k < 9; ++k) grid.push_back(-1.0 + 0.25 * k);

    const std::vector<CurvePoint> black = marginal_stability_curve(grid);
    CurveOptions opt;
    opt.b_tol = 0.05;
    opt.probe_monotone = false;
    std::vector<CurvePoint> blue;
    for (const double d : grid) {
        std::fprintf(stderr, "criterion 6: certification slice d = %+.2f\n", d);
        blue.push_back(certification_curve({d}, opt)[0]);
    }

    bool ordered = true;
    double min_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 9; ++k) {
        if (!black[k].bracketed || !blue[k].bracketed) ordered = false;
        if (ordered) {
            ordered = blue[k].b >= black[k].b;
            min_gap = std::min(min_gap, blue[k].b - black[k].b);
        }
    }
    const double black0 = black[4].b;
    report(6, "certified curve sits above the eigenvalue curve",
           std::abs(black0 - 0.25) <= 1e-3 && ordered,
           fmt("black(0) = %.4f, min curve gap %.3f", black0, min_gap));
    return blue;
}

// 7: qualitative behaviour at the two reference parameter points
void criterion_reference_behaviour() {
    std::mt19937_64 rng(1007);
    auto run = [&rng](double b, double d, int count, int* converged, int* oscillatory) {
        const ThomasParams p{b, d};
        const InvariantBox box = invariant_box(p);
        const VectorField f = thomas_rhs(p);
        *converged = *oscillatory = 0;
        for (int k = 0; k < count; ++k) {
            const Trajectory traj = integrate(f, sample_box(box, rng), 1e-3, 500.0, 100);
            const Classification c = classify(f, traj);
            if (c.kind == Classification::Kind::converged) ++*converged;
            if (c.kind == Classification::Kind::oscillatory) ++*oscillatory;
        }
    };
    int conv_hi = 0, osc_hi = 0, conv_lo = 0, osc_lo = 0;
    run(0.4, 0.6, 20, &conv_hi, &osc_hi);
    run(0.3, 0.6, 20, &conv_lo, &osc_lo);
    report(7, "reference points separate settling from oscillation",
           conv_hi == 20 && osc_lo >= 1,
           fmt("b=0.4: %.0f/20 converged; b=0.3: %.0f oscillatory", conv_hi, osc_lo));
}

// 8: certified parameter points exhibit global convergence in the box
void criterion_soundness_sweep(const std::vector<CurvePoint>& blue) {
    std::vector<ThomasParams> points;
    for (const CurvePoint& pt : blue)
        if (std::isfinite(pt.b) && points.size() < 9)
            points.push_back(ThomasParams{pt.b + 0.05, pt.d});
    points.push_back(ThomasParams{1.2, 0.0});
    while (points.size() < 10) points.push_back(ThomasParams{1.0, 0.0});

    std::mt19937_64 rng(1008);
    int certified = 0, converged = 0;
    const int per_point = 50;
    for (const ThomasParams& p : points) {
        std::fprintf(stderr, "criterion 8: point b = %.3f, d = %+.2f\n", p.b, p.d);
        if (!certify(p).certified()) continue;
        ++certified;
        const InvariantBox box = invariant_box(p);
        const VectorField f = thomas_rhs(p);
        for (int k = 0; k < per_point; ++k) {
            const Trajectory traj = integrate(f, sample_box(box, rng), 1e-3, 500.0, 100);
            if (classify(f, traj).kind == Classification::Kind::converged) ++converged;
        }
    }
    report(8, "certified points settle from everywhere in the box",
           certified == 10 && converged == 10 * per_point,
           fmt("%.0f/10 certified, %.0f/500 converged", certified, converged));
}

// 9: trajectories started on the box boundary never leave it
void criterion_box_invariance() {
    std::mt19937_64 rng(1009);
    const double settings[][2] = {{1.0, 0.5}, {0.5, 0.6}, {0.8, -0.8}};
    int total = 0, stayed = 0;
    for (const auto& bd : settings) {
        const ThomasParams p{bd[0], bd[1]};
        const InvariantBox box = invariant_box(p);
        const VectorField f = thomas_rhs(p);
        for (int k = 0; k < 34; ++k) {
            Vector x0 = sample_box(box, rng);
            const int face = static_cast<int>(rng() % 9);
            x0(face) = (rng() & 1 ? 1.0 : -1.0) * box.bound[face];
            const Trajectory traj = integrate(f, x0, 1e-3, 100.0, 10);
            bool inside = true;
            for (const Vector& x : traj.states) inside = inside && box.contains(x, 1e-7);
            ++total;
            if (inside) ++stayed;
        }
    }
    report(9, "boundary-started trajectories stay in the box",
           total >= 100 && stayed == total,
           fmt("%.0f/%.0f trajectories contained", stayed, total));
}

}  // namespace

int main() {
    criterion_block_generator();
    criterion_dynamic_consistency();
    criterion_gain_oracle();
    criterion_equivalence();
    criterion_decoupled_threshold();
    const std::vector<CurvePoint> blue = criterion_curve_ordering();
    criterion_reference_behaviour();
    criterion_soundness_sweep(blue);
    criterion_box_invariance();
    return failures;
}
