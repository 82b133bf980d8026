// Command-line front end: certification runs, (d,b) sweeps, and simulation
// of the built-in coupled Thomas model or a user-supplied model.json.
//
// Exit codes: 0 = certified / completed, 1 = not certified,
// 2 = error or indeterminate.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "twocon/model_io.hpp"
#include "twocon/thomas.hpp"

namespace fs = std::filesystem;
using namespace twocon;

namespace {

struct Config {
    std::string model = "thomas";
    double b = 0.5;
    double d = 0.0;
    std::string d_grid = "-1:1:41";
    double b_tol = 1e-3;
    double gain_tol = 1e-3;
    std::string out = ".";
    int workers = 1;
    unsigned long seed = 0;
    double horizon = 500.0;
    int count = 20;
};

std::vector<double> parse_grid(const std::string& s) {
    double lo = 0, hi = 0;
    int n = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1)
        throw std::runtime_error("--d-grid expects lo:hi:n with n >= 1, got '" + s + "'");
    std::vector<double> grid;
    if (n == 1) {
        grid.push_back(lo);
        return grid;
    }
    for (int k = 0; k < n; ++k)
        grid.push_back(lo + (hi - lo) * static_cast<double>(k) / (n - 1));
    return grid;
}

void write_curve_csv(const fs::path& path, const std::vector<CurvePoint>& pts) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write: " + path.string());
    os << "d,b\n";
    char line[80];
    for (const auto& p : pts) {
        std::snprintf(line, sizeof line, "%.10g,%.10g\n", p.d, p.b);
        os << line;
    }
}

int run_certify(const Config& cfg) {
    CertifyOptions opt;
    opt.lmi.gain_rel_tol = cfg.gain_tol;
    opt.workers = cfg.workers;
    CertificationReport rep;
    nlohmann::json params;
    if (cfg.model == "thomas") {
        const ThomasParams p{cfg.b, cfg.d};
        rep = certify(p, opt);
        params["model"] = "thomas";
        params["b"] = p.b;
        params["d"] = p.d;
        params["a"] = p.a;
    } else {
        rep = certify_model(load_model(cfg.model), opt);
        params["model"] = cfg.model;
    }
    nlohmann::json j = rep.to_json();
    j["parameters"] = params;
    fs::create_directories(cfg.out);
    write_json(j, (fs::path(cfg.out) / "report.json").string());
    for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    switch (rep.verdict) {
        case CertificationReport::Verdict::certified:
            std::printf("certified  rho=%.6f\n", rep.rho);
            return 0;
        case CertificationReport::Verdict::not_certified:
            std::printf("not certified  (%s)\n", rep.reason.c_str());
            return 1;
        default:
            std::printf("indeterminate  (%s)\n", rep.reason.c_str());
            return 2;
    }
}

int run_sweep(const Config& cfg) {
    if (cfg.model != "thomas")
        throw std::runtime_error("sweep supports only the built-in thomas model");
    const std::vector<double> grid = parse_grid(cfg.d_grid);
    CurveOptions copt;
    copt.b_tol = cfg.b_tol;
    copt.certify.lmi.gain_rel_tol = cfg.gain_tol;
    copt.certify.workers = cfg.workers;
    std::fprintf(stderr, "sweeping %zu coupling values...\n", grid.size());
    const auto certified = certification_curve(grid, copt);
    const auto marginal = marginal_stability_curve(grid);
    fs::create_directories(cfg.out);
    write_curve_csv(fs::path(cfg.out) / "certification_curve.csv", certified);
    write_curve_csv(fs::path(cfg.out) / "marginal_curve.csv", marginal);
    {
        std::ofstream os(fs::path(cfg.out) / "curves.csv");
        os << "d,b_certified,b_marginal\n";
        char line[120];
        for (std::size_t k = 0; k < grid.size(); ++k) {
            std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", grid[k],
                          certified[k].b, marginal[k].b);
            os << line;
        }
    }
    for (std::size_t k = 0; k < grid.size(); ++k)
        std::printf("d=%+.4f  b_certified=%.4f  b_marginal=%.4f%s\n", grid[k],
                    certified[k].b, marginal[k].b,
                    certified[k].grid_fallback ? "  [grid fallback]" : "");
    return 0;
}

int run_simulate(const Config& cfg) {
    if (cfg.model != "thomas")
        throw std::runtime_error("simulate supports only the built-in thomas model");
    if (cfg.count < 1) throw std::runtime_error("--count must be >= 1");
    const ThomasParams p{cfg.b, cfg.d};
    const InvariantBox box = invariant_box(p);
    const VectorField f = thomas_rhs(p);
    std::mt19937_64 rng(cfg.seed);
    fs::create_directories(cfg.out);

    nlohmann::json summary;
    summary["parameters"] = {{"model", "thomas"}, {"b", p.b}, {"d", p.d}, {"a", p.a}};
    summary["seed"] = cfg.seed;
    summary["horizon"] = cfg.horizon;
    summary["trajectories"] = nlohmann::json::array();
    int converged = 0, oscillatory = 0, undecided = 0;
    for (int k = 0; k < cfg.count; ++k) {
        const Vector x0 = sample_box(box, rng);
        const Trajectory traj = integrate(f, x0, 1e-3, cfg.horizon, 100);
        char name[40];
        std::snprintf(name, sizeof name, "trajectory_%02d.csv", k + 1);
        std::ofstream os(fs::path(cfg.out) / name);
        write_csv(traj, os);
        const Classification cls = classify(f, traj);
        nlohmann::json entry;
        entry["file"] = name;
        entry["kind"] = cls.name();
        entry["tail_amplitude"] = cls.tail_amplitude;
        entry["initial"] = std::vector<double>(x0.data(), x0.data() + x0.size());
        switch (cls.kind) {
            case Classification::Kind::converged:
                ++converged;
                entry["equilibrium"] = std::vector<double>(
                    cls.equilibrium.data(), cls.equilibrium.data() + cls.equilibrium.size());
                break;
            case Classification::Kind::oscillatory: ++oscillatory; break;
            default: ++undecided; break;
        }
        summary["trajectories"].push_back(entry);
    }
    summary["counts"] = {{"converged", converged},
                         {"oscillatory", oscillatory},
                         {"undecided", undecided}};
    write_json(summary, (fs::path(cfg.out) / "summary.json").string());
    std::printf("%d trajectories: %d converged, %d oscillatory, %d undecided\n",
                cfg.count, converged, oscillatory, undecided);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2-contraction certification of block-interconnected systems"};
    app.require_subcommand(1);
    Config cfg;

    auto add_common = [&cfg](CLI::App* cmd) {
        cmd->add_option("--out", cfg.out, "output directory")->capture_default_str();
        cmd->add_option("--workers", cfg.workers, "worker threads")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    CLI::App* certify_cmd =
        app.add_subcommand("certify", "certify one parameter point or model file");
    certify_cmd->add_option("--model", cfg.model, "'thomas' or path to a model.json")
        ->capture_default_str();
    certify_cmd->add_option("--b", cfg.b, "damping of the first subsystem")
        ->capture_default_str();
    certify_cmd->add_option("--d", cfg.d, "ring coupling strength")->capture_default_str();
    certify_cmd->add_option("--gain-tol", cfg.gain_tol, "relative gain bisection tolerance")
        ->capture_default_str();
    add_common(certify_cmd);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "trace certification and marginal-stability curves");
    sweep_cmd->add_option("--model", cfg.model, "only 'thomas' is sweepable")
        ->capture_default_str();
    sweep_cmd->add_option("--d-grid", cfg.d_grid, "coupling grid as lo:hi:n")
        ->capture_default_str();
    sweep_cmd->add_option("--b-tol", cfg.b_tol, "bisection tolerance on b")
        ->capture_default_str();
    sweep_cmd->add_option("--gain-tol", cfg.gain_tol, "relative gain bisection tolerance")
        ->capture_default_str();
    add_common(sweep_cmd);

    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "integrate random initial conditions and classify");
    simulate_cmd->add_option("--model", cfg.model, "only 'thomas' is simulable")
        ->capture_default_str();
    simulate_cmd->add_option("--b", cfg.b, "damping of the first subsystem")
        ->capture_default_str();
    simulate_cmd->add_option("--d", cfg.d, "ring coupling strength")->capture_default_str();
    simulate_cmd->add_option("--count", cfg.count, "number of trajectories")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate_cmd->add_option("--horizon", cfg.horizon, "integration horizon T")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate_cmd->add_option("--seed", cfg.seed, "random seed for initial conditions")
        ->capture_default_str();
    add_common(simulate_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify_cmd->parsed()) return run_certify(cfg);
        if (sweep_cmd->parsed()) return run_sweep(cfg);
        return run_simulate(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
