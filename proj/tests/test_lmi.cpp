#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "twocon/lmi.hpp"

using namespace twocon;

namespace {

Matrix scalar(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}

VertexChannel scalar_channel(double a, double b) {
    return VertexChannel{{scalar(a)}, {scalar(b)}};
}

}  // namespace

TEST_CASE("scalar channel feasibility flips at the exact gain", "[lmi]") {
    // xdot = -x + u has L2 gain exactly 1
    const VertexChannel ch = scalar_channel(-1.0, 1.0);
    REQUIRE(channel_feasible(ch, 1.05).status == FeasStatus::feasible);
    REQUIRE(channel_feasible(ch, 0.95).status == FeasStatus::infeasible);
    REQUIRE_THROWS_AS(channel_feasible(ch, 0.0), std::invalid_argument);
}

TEST_CASE("minimized scalar gains match closed forms", "[lmi]") {
    GainResult g1 = minimize_gain(scalar_channel(-1.0, 1.0));
    REQUIRE(g1.finite());
    REQUIRE(g1.gamma == Catch::Approx(1.0).margin(2e-3));
    REQUIRE(g1.certificate.has_value());

    GainResult g2 = minimize_gain(scalar_channel(-2.0, 1.0));
    REQUIRE(g2.gamma == Catch::Approx(0.5).margin(2e-3));
}

TEST_CASE("zero input means zero gain, instability means infinite gain", "[lmi]") {
    GainResult zero = minimize_gain(scalar_channel(-1.0, 0.0));
    REQUIRE(zero.structural_zero);
    REQUIRE(zero.gamma == 0.0);

    GainResult unstable = minimize_gain(scalar_channel(0.5, 1.0));
    REQUIRE_FALSE(unstable.finite());

    VertexChannel stability{{scalar(-0.3)}, {}};
    REQUIRE(channel_feasible(stability, 1.0).status == FeasStatus::feasible);
    stability.A[0](0, 0) = 0.3;
    REQUIRE(channel_feasible(stability, 1.0).status == FeasStatus::infeasible);
}

TEST_CASE("certificates survive independent verification, tampering does not", "[lmi]") {
    std::mt19937_64 rng(31);
    const Matrix A = oracle::random_hurwitz(rng, 4);
    const Matrix B = oracle::random_matrix(rng, 4, 2);
    const VertexChannel ch{{A}, {B}};
    const GainResult g = minimize_gain(ch);
    REQUIRE(g.finite());
    REQUIRE(g.certificate.has_value());

    LmiOptions opt;
    double margin = 0.0;
    REQUIRE(verify_certificate(ch, g.gamma, g.certificate->P, opt, &margin));
    REQUIRE(margin <= opt.feasibility_slack);

    REQUIRE_FALSE(verify_certificate(ch, g.gamma, Matrix(-g.certificate->P), opt));
    REQUIRE_FALSE(verify_certificate(ch, g.gamma / 2.0, g.certificate->P, opt));
}

TEST_CASE("polytopic gain dominates every vertex response peak", "[lmi]") {
    std::mt19937_64 rng(32);
    const Matrix A1 = oracle::random_hurwitz(rng, 3);
    const Matrix A2 = oracle::random_hurwitz(rng, 3);
    const Matrix B = oracle::random_matrix(rng, 3, 2);
    const GainResult g = minimize_gain(VertexChannel{{A1, A2}, {B, B}});
    REQUIRE(g.finite());
    const double worst = std::max(oracle::hinf_freq_sweep(A1, B, 2000),
                                  oracle::hinf_freq_sweep(A2, B, 2000));
    REQUIRE(g.gamma >= worst * (1.0 - 1e-6) - 1e-9);

    // enlarging the family can only increase the gain
    const GainResult single = minimize_gain(VertexChannel{{A1}, {B}});
    REQUIRE(g.gamma >= single.gamma - 1e-9);
}

TEST_CASE("feasibility is monotone in the gain", "[lmi]") {
    std::mt19937_64 rng(33);
    const Matrix A = oracle::random_hurwitz(rng, 3);
    const Matrix B = oracle::random_matrix(rng, 3, 1);
    const VertexChannel ch{{A}, {B}};
    const GainResult g = minimize_gain(ch);
    REQUIRE(channel_feasible(ch, 1.5 * g.gamma).status == FeasStatus::feasible);
    REQUIRE(channel_feasible(ch, 0.5 * g.gamma).status == FeasStatus::infeasible);
}

TEST_CASE("warm start short-circuits a repeat solve", "[lmi]") {
    const VertexChannel ch = scalar_channel(-1.0, 1.0);
    const GainResult g = minimize_gain(ch);
    const Matrix warm = g.certificate->P;
    const FeasibilityResult r = channel_feasible(ch, g.gamma * 1.01, LmiOptions{}, &warm);
    REQUIRE(r.status == FeasStatus::feasible);
    REQUIRE(r.newton_steps == 0);
}

TEST_CASE("gain rescaling multiplies by the square root of the count", "[lmi]") {
    const std::vector<double> out = rescale_gains({1.0, 2.0}, 4);
    REQUIRE(out[0] == Catch::Approx(2.0));
    REQUIRE(out[1] == Catch::Approx(4.0));
    REQUIRE_THROWS_AS(rescale_gains({1.0}, -1), std::invalid_argument);
}

TEST_CASE("joint family check agrees with per-channel results", "[lmi]") {
    const VertexChannel c1 = scalar_channel(-1.0, 1.0);
    const VertexChannel c2 = scalar_channel(-2.0, 1.0);
    REQUIRE(joint_family_feasible({c1, c2}, {1.05, 0.55}) == FeasStatus::feasible);
    REQUIRE(joint_family_feasible({c1, c2}, {1.05, 0.45}) == FeasStatus::infeasible);
    REQUIRE_THROWS_AS(joint_family_feasible({c1}, {1.0, 2.0}), std::invalid_argument);
}
