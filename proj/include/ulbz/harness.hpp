#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ulbz/solver.hpp"

namespace ulbz {

struct ExperimentConfig {
    // grids
    int active_dims = 1;
    int n_x = 32;
    double L = 4.0;
    int n_v = 8;
    double v_max = 5.0;
    int n_theta = 4;
    int n_phi = 8;
    // kernel
    double gamma = -0.5;
    double s = 0.25;
    double K = 1.0;
    double eps = 0.2;
    std::vector<double> eps_list;          // sweep values; defaults to {eps}
    std::optional<double> r_floor;         // default h_v / 2
    // weights
    double rho = 1.0;
    double kappa = 0.5;
    // norms
    int norm_k = 1;
    double norm_ell = 3.0;
    int fd_order = 2;
    // solver
    std::optional<double> dt;              // absent = auto (T_choice / 8)
    double tol = 1e-6;
    int n_max = 25;
    double C1 = 1.0;
    double C2 = 1.0;
    // scenario
    std::string scenario = "periodic";
    double amplitude = 1.0;
    double mod_depth = 0.5;
    int mode = 1;
    double width = 1.0;
    double amplitude2 = 0.5;
    double width2 = 2.0;
    std::uint64_t seed = 12345;

    std::map<std::string, std::string> raw;  // echo of parsed keys
};

// Flat "key = value" text, '#' comments; unknown keys are errors; parameter
// constraints are validated naming the violated inequality.
ExperimentConfig load_config(const std::filesystem::path& file);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
std::string config_echo_text(const ExperimentConfig& cfg);

ModelContext make_context(const ExperimentConfig& cfg, double eps_override = -1.0);

// Initial data in g-representation; deterministic in cfg.seed.
DistributionField make_scenario(const ExperimentConfig& cfg, const SpatialGrid& sg, const VelocityGrid& vg);

// ------------------------------------------------------------------ artifacts

struct CsvRow {
    double t = 0.0;
    std::string quantity;
    int k = 0;
    double ell = 0.0;
    double value = 0.0;
};

void write_csv(const std::filesystem::path& file, const std::vector<CsvRow>& rows);
std::vector<CsvRow> read_csv(const std::filesystem::path& file);

// Binary dump: magic "ULBZ", u32 LE version, three u32 LE dims
// (n_t, n_x, n_v), then row-major (t, x, v) f64 LE values.
void write_dump(const std::filesystem::path& file, const std::vector<DistributionField>& seq);
std::vector<DistributionField> read_dump(const std::filesystem::path& file);

struct CheckRecord {
    std::string name;
    std::string statement;   // the inequality or identity being checked
    double measured = 0.0;
    double bound = 0.0;
    std::string verdict;     // "pass" | "fail" | "skip"
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckRecord> checks;
    bool all_passed() const;
};

struct RunResult {
    TimeChoice time_choice;
    double D0 = 0.0;
    double T_star = 0.0;
    double C_kappa_calibrated = 0.0;
    double C_calibrated = 0.0;
    IterationReport iteration;
    VerificationReport verification;
    std::filesystem::path out_dir;
};

struct RunOptions {
    std::filesystem::path out_dir;
    bool force = false;       // without it an existing non-empty out_dir is an error
    int threads = 0;          // 0 = library default
    std::optional<std::uint64_t> seed;
};

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

// Re-derive check verdicts from a run directory's artifacts; missing pieces
// become "skip" records with the reason.
VerificationReport verify_run(const std::filesystem::path& run_dir);

void write_report(const std::filesystem::path& file, const RunResult& run, const ExperimentConfig& cfg);

}  // namespace ulbz
