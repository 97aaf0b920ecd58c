#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <random>

#include "ulbz/harness.hpp"

using namespace ulbz;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("ulbz_test_" + tag + "_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string tiny_config_text() {
    return "n_v = 4\n"
           "n_x = 4\n"
           "n_theta = 2\n"
           "n_phi = 2\n"
           "v_max = 3.0\n"
           "amplitude = 0.3\n"
           "tol = 1e-5\n"
           "n_max = 10\n";
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config parsing, comments, defaults") {
    ExperimentConfig c = parse_config_text("# comment line\n"
                                           "s = 0.3   # trailing\n"
                                           "gamma = -1.0\n"
                                           "\n"
                                           "eps_list = 0.4, 0.2, 0.1\n"
                                           "dt = auto\n");
    CHECK(c.s == doctest::Approx(0.3));
    CHECK(c.gamma == doctest::Approx(-1.0));
    CHECK(c.n_v == 8);  // untouched default
    REQUIRE(c.eps_list.size() == 3);
    CHECK(c.eps_list[1] == doctest::Approx(0.2));
    CHECK_FALSE(c.dt.has_value());
    ExperimentConfig d = parse_config_text("dt = 0.002\n");
    REQUIRE(d.dt.has_value());
    CHECK(*d.dt == doctest::Approx(0.002));
    ExperimentConfig e = parse_config_text("");
    REQUIRE(e.eps_list.size() == 1);
    CHECK(e.eps_list[0] == e.eps);
}

TEST_CASE("config rejections name the violated constraint") {
    CHECK_THROWS_WITH_AS(parse_config_text("bogus_key = 1\n"), doctest::Contains("bogus_key"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("s = 0.6\n"), doctest::Contains("0 < s < 1/2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("gamma = -2.0\n"), doctest::Contains("gamma > -3/2"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("gamma = 0.9\n"), doctest::Contains("2s + gamma < 1"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("L = 1.0\n"), doctest::Contains("L >= 2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("eps = 1.0\n"), doctest::Contains("eps < pi/4"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("kappa = -1\n"), doctest::Contains("kappa > 0"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("scenario = wobble\n"), doctest::Contains("scenario"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("s = 0.2\ns = 0.3\n"), doctest::Contains("duplicate"),
                         std::invalid_argument);
    CHECK_THROWS(parse_config_text("just words\n"));
    CHECK_THROWS(parse_config_text("n_v = 4.5\n"));
}

TEST_CASE("scenario fields are nonnegative and seeded") {
    ExperimentConfig c;
    c.n_v = 4;
    c.n_x = 8;
    ModelContext mc = make_context(c);
    for (const char* name : {"periodic", "near_vacuum", "near_maxwellian", "two_maxwellian", "random_smooth"}) {
        c.scenario = name;
        DistributionField g = make_scenario(c, mc.sg, mc.vg);
        CHECK(g.rep == Rep::G);
        CHECK(g.time == 0.0);
        for (double v : g.values) CHECK(v >= 0.0);
    }
    c.scenario = "random_smooth";
    DistributionField a = make_scenario(c, mc.sg, mc.vg);
    DistributionField b = make_scenario(c, mc.sg, mc.vg);
    for (std::size_t p = 0; p < a.values.size(); ++p) CHECK(a.values[p] == b.values[p]);
    c.seed = 999;
    DistributionField other = make_scenario(c, mc.sg, mc.vg);
    double diff = 0.0;
    for (std::size_t p = 0; p < a.values.size(); ++p) diff += std::abs(a.values[p] - other.values[p]);
    CHECK(diff > 0.0);
}

TEST_CASE("the spatially homogeneous scenario really is x-independent") {
    ExperimentConfig c;
    c.n_v = 4;
    c.n_x = 8;
    c.scenario = "near_maxwellian";
    ModelContext mc = make_context(c);
    DistributionField g = make_scenario(c, mc.sg, mc.vg);
    for (int j = 0; j < g.nv; ++j)
        for (int x = 1; x < g.nx; ++x) CHECK(g.at(x, j) == g.at(0, j));
}

TEST_CASE("csv rows survive a write/read round trip") {
    TempDir tmp("csv");
    std::vector<CsvRow> rows{{0.0, "D0", 1, 3.0, 1.234567890123456789},
                             {0.1, "ul_norm", 2, 3.0, 9.87e-13},
                             {3.0, "contraction_ratio", 0, 0.0, 0.4999999999999999}};
    write_csv(tmp.path / "t.csv", rows);
    auto back = read_csv(tmp.path / "t.csv");
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].t == rows[i].t);
        CHECK(back[i].quantity == rows[i].quantity);
        CHECK(back[i].k == rows[i].k);
        CHECK(back[i].ell == rows[i].ell);
        CHECK(back[i].value == rows[i].value);  // %.17g round-trips doubles exactly
    }
    CHECK_THROWS(read_csv(tmp.path / "absent.csv"));
}

TEST_CASE("field dumps are bit-exact round trips") {
    TempDir tmp("dump");
    SpatialGrid sg = make_spatial_grid(1, 4.0, 4);
    VelocityGrid vg = make_velocity_grid(2.0, 4);
    std::vector<DistributionField> seq;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 3; ++i) {
        DistributionField f = make_field(sg, vg, 0.1 * i);
        for (auto& v : f.values) v = u(rng);
        seq.push_back(f);
    }
    write_dump(tmp.path / "f.ulbz", seq);
    auto back = read_dump(tmp.path / "f.ulbz");
    REQUIRE(back.size() == seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        REQUIRE(back[i].values.size() == seq[i].values.size());
        for (std::size_t p = 0; p < seq[i].values.size(); ++p) CHECK(back[i].values[p] == seq[i].values[p]);
    }
    // corrupted magic is rejected
    {
        std::ofstream bad(tmp.path / "bad.ulbz", std::ios::binary);
        bad << "NOPE1234567890";
    }
    CHECK_THROWS(read_dump(tmp.path / "bad.ulbz"));
}

TEST_CASE("config echo is stable") {
    ExperimentConfig c = parse_config_text(tiny_config_text());
    CHECK(config_echo_text(c) == config_echo_text(c));
    CHECK(config_echo_text(c).find("n_v = 4") != std::string::npos);
    // echoes resolve auto dt textually
    CHECK(config_echo_text(c).find("dt = auto") != std::string::npos);
}

TEST_CASE("experiment pipeline writes verifiable artifacts") {
    TempDir tmp("run");
    ExperimentConfig cfg = parse_config_text(tiny_config_text());
    RunOptions opt;
    opt.out_dir = tmp.path / "out";
    RunResult res = run_experiment(cfg, opt);

    CHECK(fs::exists(opt.out_dir / "timeseries.csv"));
    CHECK(fs::exists(opt.out_dir / "fields.ulbz"));
    CHECK(fs::exists(opt.out_dir / "config_echo.txt"));
    CHECK(fs::exists(opt.out_dir / "report.json"));
    CHECK(res.iteration.converged);
    CHECK(res.D0 > 0.0);
    CHECK(res.time_choice.T_choice > 0.0);

    VerificationReport vr = verify_run(opt.out_dir);
    bool any_fail = false;
    for (const auto& c : vr.checks) any_fail = any_fail || c.verdict == "fail";
    CHECK_FALSE(any_fail);

    // refusing to clobber an existing run without force
    CHECK_THROWS(run_experiment(cfg, opt));
    RunOptions forced = opt;
    forced.force = true;
    CHECK_NOTHROW(run_experiment(cfg, forced));
}

TEST_CASE("identical runs produce identical artifacts") {
    TempDir tmp("det");
    ExperimentConfig cfg = parse_config_text(tiny_config_text());
    RunOptions a, b;
    a.out_dir = tmp.path / "a";
    b.out_dir = tmp.path / "b";
    run_experiment(cfg, a);
    run_experiment(cfg, b);
    CHECK(slurp(a.out_dir / "timeseries.csv") == slurp(b.out_dir / "timeseries.csv"));
    CHECK(slurp(a.out_dir / "fields.ulbz") == slurp(b.out_dir / "fields.ulbz"));
    CHECK(slurp(a.out_dir / "config_echo.txt") == slurp(b.out_dir / "config_echo.txt"));
}

TEST_CASE("verification skips gracefully on missing artifacts") {
    TempDir tmp("verify");
    VerificationReport vr = verify_run(tmp.path);
    REQUIRE_FALSE(vr.checks.empty());
    for (const auto& c : vr.checks) CHECK(c.verdict == "skip");
}
