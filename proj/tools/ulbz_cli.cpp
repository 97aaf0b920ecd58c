#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ulbz/harness.hpp"
#include "ulbz/reference.hpp"

namespace {

using namespace ulbz;
namespace fs = std::filesystem;

void print_checks(const VerificationReport& vr) {
    for (const auto& c : vr.checks) {
        std::printf("  [%s] %-20s measured=%-13.6g bound=%-13.6g %s\n",
                    c.verdict == "pass" ? "PASS" : (c.verdict == "skip" ? "SKIP" : "FAIL"), c.name.c_str(),
                    c.measured, c.bound, c.detail.c_str());
        if (!c.statement.empty()) std::printf("         %s\n", c.statement.c_str());
    }
}

int run_one(const ExperimentConfig& cfg, const RunOptions& opt) {
    auto start = std::chrono::steady_clock::now();
    RunResult res = run_experiment(cfg, opt);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("run: eps=%g D0=%.6g K0=%.6g T=%.6g T*=%.6g C_kappa=%.6g (%.1fs)\n", cfg.eps, res.D0,
                res.time_choice.K0, res.time_choice.T_choice, res.T_star, res.C_kappa_calibrated, secs);
    std::printf("iteration: %s after n=%d, residual_max=%.3g\n",
                res.iteration.converged ? "converged" : "NOT converged", res.iteration.n_final,
                res.iteration.residual_max);
    print_checks(res.verification);
    std::printf("artifacts: %s\n", res.out_dir.string().c_str());
    return res.verification.all_passed() && res.iteration.converged ? 0 : 1;
}

std::string eps_tag(double e) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", e);
    std::string s = buf;
    std::replace(s.begin(), s.end(), '.', 'p');
    return "eps_" + s;
}

int do_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
    std::vector<CsvRow> summary;
    int status = 0;
    for (double e : cfg.eps_list) {
        ExperimentConfig c = cfg;
        c.eps = e;
        c.eps_list = {e};
        RunOptions o = opt;
        o.out_dir = opt.out_dir / eps_tag(e);
        std::printf("---- eps = %g ----\n", e);
        int rc = run_one(c, o);
        status = std::max(status, rc);
        VerificationReport vr = verify_run(o.out_dir);
        double fails = 0;
        for (const auto& ck : vr.checks)
            if (ck.verdict == "fail") fails += 1;
        summary.push_back({e, "check_failures", 0, 0, fails});
        for (const auto& row : read_csv(o.out_dir / "timeseries.csv"))
            if (row.t == 0.0 && (row.quantity == "D0" || row.quantity == "T_choice" || row.quantity == "T_star" ||
                                 row.quantity == "C_kappa" || row.quantity == "residual_max"))
                summary.push_back({e, row.quantity, row.k, row.ell, row.value});
    }
    write_csv(opt.out_dir / "sweep_summary.csv", summary);
    std::printf("sweep summary: %s\n", (opt.out_dir / "sweep_summary.csv").string().c_str());
    return status;
}

int do_verify(const fs::path& dir) {
    VerificationReport vr = verify_run(dir);
    print_checks(vr);
    return vr.all_passed() ? 0 : 1;
}

double rel_diff(const DistributionField& a, const DistributionField& b) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        scale = std::max(scale, std::abs(b.values[i]));
        diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
    }
    return diff / std::max(scale, 1e-300);
}

// fast kernels against the naive serial path on a size-capped instance
int do_oracle(ExperimentConfig cfg) {
    cfg.n_v = std::min(cfg.n_v, 6);
    cfg.n_x = 4;
    std::printf("oracle instance: n_v=%d n_x=%d dims=%d\n", cfg.n_v, cfg.n_x, cfg.active_dims);
    ModelContext mc = make_context(cfg);
    CollisionContext cx = mc.collision();

    DistributionField U = make_scenario(cfg, mc.sg, mc.vg);
    ExperimentConfig c2 = cfg;
    c2.scenario = "random_smooth";
    c2.seed = cfg.seed + 1;
    DistributionField V = make_scenario(c2, mc.sg, mc.vg);
    double t_probe = 0.3 * mc.wt.T0();
    std::vector<double> M = sample_mu(t_probe, mc.vg, mc.wt);
    std::vector<double> ones(mc.vg.total(), 1.0);

    struct Case {
        const char* name;
        double diff;
    };
    std::vector<Case> cases;
    cases.push_back({"gain", rel_diff(gain_quadrature(U, V, M, cx), reference::gain(U, V, M, cx))});
    cases.push_back({"loss", rel_diff(loss_quadrature(U, M, cx), reference::loss(U, M, cx))});
    cases.push_back({"t_form", rel_diff(t_form(U, V, M, cx), reference::t_form(U, V, M, cx))});
    cases.push_back({"q_bilinear", rel_diff(q_bilinear(U, V, cx), reference::q_bilinear(U, V, cx))});
    cases.push_back(
        {"gamma_gain", rel_diff(gamma_gain(U, V, t_probe, mc.wt, cx), reference::gamma_gain(U, V, t_probe, mc.wt, cx))});
    cases.push_back({"loss_multiplier", rel_diff(loss_multiplier(U, t_probe, mc.wt, cx),
                                                 reference::loss_multiplier(U, t_probe, mc.wt, cx))});

    double n_fast = ul_sobolev_norm(U, mc.sg, mc.vg, mc.norm);
    double n_ref = reference::ul_sobolev_norm(U, mc.sg, mc.vg, mc.norm);
    cases.push_back({"ul_norm", std::abs(n_fast - n_ref) / std::max(n_ref, 1e-300)});
    std::vector<DistributionField> seq{U, V};
    seq[0].time = 0.0;
    seq[1].time = 0.1;
    double m_fast = spacetime_norm(seq, mc.sg, mc.vg, mc.norm);
    double m_ref = reference::spacetime_norm(seq, mc.sg, mc.vg, mc.norm);
    cases.push_back({"spacetime_norm", std::abs(m_fast - m_ref) / std::max(m_ref, 1e-300)});

    const double tol = 1e-10;
    int status = 0;
    for (const auto& c : cases) {
        bool ok = std::isfinite(c.diff) && c.diff <= tol;
        std::printf("  [%s] %-16s max rel diff %.3e\n", ok ? "PASS" : "FAIL", c.name, c.diff);
        if (!ok) status = 1;
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uniformly local Boltzmann laboratory"};
    app.require_subcommand(1);

    std::string config_file, out_dir;
    bool force = false;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("config", config_file, "config file")->required()->check(CLI::ExistingFile);
        if (with_out) {
            sub->add_option("--out", out_dir, "output directory")->required();
            sub->add_flag("--force", force, "overwrite a non-empty output directory");
        }
        sub->add_option("--threads", threads, "worker thread count (0 = default)");
        sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { seed_set = true; });
    };

    auto* run = app.add_subcommand("run", "run one experiment and verify it");
    add_common(run, true);
    auto* sweep = app.add_subcommand("sweep", "run the config's eps list");
    add_common(sweep, true);
    std::string run_dir;
    auto* verify = app.add_subcommand("verify", "re-derive verdicts from a run directory");
    verify->add_option("run_dir", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
    auto* oracle = app.add_subcommand("oracle", "cross-check fast kernels against the naive path");
    add_common(oracle, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return do_verify(run_dir);
        ExperimentConfig cfg = load_config(config_file);
        RunOptions opt;
        opt.out_dir = out_dir;
        opt.force = force;
        opt.threads = threads;
        if (seed_set) opt.seed = seed;
        if (run->parsed()) return run_one(cfg, opt);
        if (sweep->parsed()) return do_sweep(cfg, opt);
        if (oracle->parsed()) return do_oracle(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
