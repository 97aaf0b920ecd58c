#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ulbz/collision.hpp"
#include "ulbz/reference.hpp"

using namespace ulbz;

namespace {

struct Instance {
    SpatialGrid sg;
    VelocityGrid vg;
    SphereQuadrature quad;
    CrossSectionParams kern;
    WeightParams wt;

    CollisionContext cx() const { return {sg, vg, quad, kern}; }
};

Instance make_instance(int nv, int nx, double gamma = -0.5, double s = 0.25, double eps = 0.2) {
    Instance in{make_spatial_grid(1, 4.0, nx), make_velocity_grid(4.0, nv),
                build_sphere_quadrature({0, 0, 1}, 4, 4),
                make_cross_section_params(gamma, s, 1.0, eps, 4.0 / nv),
                make_weight_params(1.0, 0.5)};
    return in;
}

DistributionField random_field(const Instance& in, std::uint64_t seed, Rep rep = Rep::G) {
    DistributionField f = make_field(in.sg, in.vg, 0.0, rep);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int j = 0; j < f.nv; ++j) {
        double decay = std::exp(-0.4 * norm2(in.vg.node(j)));
        for (int x = 0; x < f.nx; ++x) f.at(x, j) = decay * (0.5 + u(rng));
    }
    return f;
}

double max_rel(const DistributionField& a, const DistributionField& b) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t p = 0; p < a.values.size(); ++p) {
        scale = std::max(scale, std::abs(b.values[p]));
        diff = std::max(diff, std::abs(a.values[p] - b.values[p]));
    }
    return diff / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("fast quadratures agree with the naive serial path") {
    Instance in = make_instance(4, 4);
    DistributionField U = random_field(in, 1), V = random_field(in, 2);
    std::vector<double> M = sample_mu(0.4, in.vg, in.wt);

    CHECK(max_rel(gain_quadrature(U, V, M, in.cx()), reference::gain(U, V, M, in.cx())) < 1e-12);
    CHECK(max_rel(loss_quadrature(U, M, in.cx()), reference::loss(U, M, in.cx())) < 1e-12);
    CHECK(max_rel(t_form(U, V, M, in.cx()), reference::t_form(U, V, M, in.cx())) < 1e-12);
    CHECK(max_rel(q_bilinear(U, V, in.cx()), reference::q_bilinear(U, V, in.cx())) < 1e-12);
    CHECK(max_rel(gamma_gain(U, V, 0.4, in.wt, in.cx()), reference::gamma_gain(U, V, 0.4, in.wt, in.cx())) < 1e-12);
    CHECK(max_rel(loss_multiplier(U, 0.4, in.wt, in.cx()), reference::loss_multiplier(U, 0.4, in.wt, in.cx())) <
          1e-12);
}

TEST_CASE("oracle agreement holds across kernel parameters") {
    for (auto [gamma, s, eps] : {std::tuple{-1.2, 0.1, 0.1}, {0.3, 0.2, 0.4}, {0.0, 0.45, 0.2}}) {
        Instance in = make_instance(6, 4, gamma, s, eps);
        DistributionField U = random_field(in, 3), V = random_field(in, 4);
        std::vector<double> M = sample_mu(0.2, in.vg, in.wt);
        CHECK(max_rel(gain_quadrature(U, V, M, in.cx()), reference::gain(U, V, M, in.cx())) < 1e-12);
        CHECK(max_rel(t_form(U, V, M, in.cx()), reference::t_form(U, V, M, in.cx())) < 1e-12);
    }
}

TEST_CASE("gain minus multiplier loss reproduces the fused form") {
    Instance in = make_instance(6, 8);
    DistributionField U = random_field(in, 5), V = random_field(in, 6);
    std::vector<double> M = sample_mu(0.3, in.vg, in.wt);
    DistributionField fused = t_form(U, V, M, in.cx());
    DistributionField gain = gain_quadrature(U, V, M, in.cx());
    DistributionField lossU = loss_quadrature(U, M, in.cx());
    double scale = 0.0;
    for (double v : gain.values) scale = std::max(scale, std::abs(v));
    for (std::size_t p = 0; p < fused.values.size(); ++p) {
        double split = gain.values[p] - V.values[p] * lossU.values[p];
        CHECK(std::abs(split - fused.values[p]) <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("gain preserves nonnegativity") {
    Instance in = make_instance(6, 4);
    DistributionField U = random_field(in, 7), V = random_field(in, 8);
    DistributionField g = gamma_gain(U, V, 0.1, in.wt, in.cx());
    for (double v : g.values) CHECK(v >= 0.0);
    DistributionField l = loss_multiplier(U, 0.1, in.wt, in.cx());
    for (double v : l.values) CHECK(v >= 0.0);
}

TEST_CASE("gain vanishes when operands vanish") {
    Instance in = make_instance(4, 4);
    DistributionField z = make_field(in.sg, in.vg);
    DistributionField U = random_field(in, 9);
    std::vector<double> M = sample_mu(0.0, in.vg, in.wt);
    for (double v : gain_quadrature(z, U, M, in.cx()).values) CHECK(v == 0.0);
    for (double v : gain_quadrature(U, z, M, in.cx()).values) CHECK(v == 0.0);
    for (double v : loss_quadrature(z, M, in.cx()).values) CHECK(v == 0.0);
}

TEST_CASE("collision operands must match the grids") {
    Instance in = make_instance(4, 4);
    DistributionField U = random_field(in, 10);
    DistributionField bad = U;
    bad.nx = 2;
    bad.values.resize(static_cast<std::size_t>(bad.nx) * bad.nv);
    std::vector<double> M(in.vg.total(), 1.0);
    CHECK_THROWS(gain_quadrature(bad, U, M, in.cx()));
    CHECK_THROWS(loss_quadrature(bad, M, in.cx()));
    std::vector<double> shortM(3, 1.0);
    CHECK_THROWS(gain_quadrature(U, U, shortM, in.cx()));
}

TEST_CASE("discrete moments of a Maxwellian") {
    VelocityGrid vg = make_velocity_grid(5.0, 10);
    std::vector<double> slice(vg.total());
    for (int j = 0; j < vg.total(); ++j) slice[j] = std::exp(-norm2(vg.node(j)));
    Moments m = moments_of(slice.data(), vg);
    // midpoint rule on a centered Gaussian: odd moments vanish by symmetry
    CHECK(std::abs(m.momentum[0]) < 1e-15);
    CHECK(std::abs(m.momentum[1]) < 1e-15);
    CHECK(std::abs(m.momentum[2]) < 1e-15);
    CHECK(m.mass == doctest::Approx(std::pow(M_PI, 1.5)).epsilon(1e-3));
    CHECK(m.energy == doctest::Approx(1.5 * std::pow(M_PI, 1.5)).epsilon(1e-2));
}

TEST_CASE("moment projection zeroes the five collision invariants") {
    Instance in = make_instance(6, 4);
    DistributionField f = random_field(in, 11, Rep::F);
    Moments before = conservation_residual(f, 1, in.cx());
    DistributionField q = q_bilinear(f, f, in.cx());
    std::vector<double> q_slice(q.nv), f_slice(q.nv);
    for (int v = 0; v < q.nv; ++v) {
        q_slice[v] = q.at(1, v);
        f_slice[v] = f.at(1, v);
    }
    std::vector<double> fixed = conservation_project(q_slice, f_slice, in.vg);
    Moments after = moments_of(fixed.data(), in.vg);
    double scale = std::max(1.0, before.max_abs());
    CHECK(after.max_abs() < 1e-12 * scale);
    // the correction is a second projection's fixed point
    double slice_scale = 0.0;
    for (double v : fixed) slice_scale = std::max(slice_scale, std::abs(v));
    std::vector<double> twice = conservation_project(fixed, f_slice, in.vg);
    for (int v = 0; v < q.nv; ++v) CHECK(std::abs(twice[v] - fixed[v]) <= 1e-11 * std::max(1.0, slice_scale));
}

TEST_CASE("collision moment defect shrinks under v-refinement") {
    auto defect = [](int nv) {
        Instance in = make_instance(nv, 4);
        DistributionField f = make_field(in.sg, in.vg, 0.0, Rep::F);
        for (int j = 0; j < f.nv; ++j) {
            double m = std::exp(-norm2(in.vg.node(j)));
            for (int x = 0; x < f.nx; ++x) f.at(x, j) = m;
        }
        return conservation_residual(f, 0, in.cx()).max_abs();
    };
    double coarse = defect(6), fine = defect(10);
    CHECK(fine < coarse);
}

TEST_CASE("zero-temperature limit: loss scales linearly in the weight") {
    Instance in = make_instance(4, 4);
    DistributionField U = random_field(in, 12);
    std::vector<double> M1(in.vg.total(), 1.0), M2(in.vg.total(), 2.0);
    DistributionField l1 = loss_quadrature(U, M1, in.cx());
    DistributionField l2 = loss_quadrature(U, M2, in.cx());
    for (std::size_t p = 0; p < l1.values.size(); ++p)
        CHECK(l2.values[p] == doctest::Approx(2.0 * l1.values[p]).epsilon(1e-14));
}
