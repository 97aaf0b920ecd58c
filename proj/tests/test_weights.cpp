#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ulbz/collision.hpp"
#include "ulbz/weights.hpp"

using namespace ulbz;

TEST_CASE("weight horizon and pinned values") {
    WeightParams w = make_weight_params(1.0, 0.5);
    CHECK(w.T0() == doctest::Approx(1.0));
    // at the horizon the exponent rate is rho/2
    CHECK(mu(w.T0(), {0, 0, 0}, w) == doctest::Approx(0.6065306597126334).epsilon(1e-15));
    CHECK(mu(0.0, {0, 0, 0}, w) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    Vec3 v{1.0, 2.0, -1.0};
    CHECK(mu(0.3, v, w) == doctest::Approx(std::exp(-(1.0 - 0.5 * 0.3) * (1.0 + 6.0))).epsilon(1e-14));
    CHECK(mu_speed2(0.3, 6.0, w) == mu(0.3, v, w));
    CHECK_THROWS(mu(-0.1, v, w));
    CHECK_THROWS(mu(1.1, v, w));
    CHECK_THROWS(make_weight_params(0.0, 0.5));
    CHECK_THROWS(make_weight_params(1.0, 0.0));
}

TEST_CASE("polynomial weight") {
    Vec3 v{1.0, 0.0, -2.0};
    CHECK(weight_W(v, 0.0) == 1.0);
    CHECK(weight_W(v, 2.0) == doctest::Approx(6.0));
    CHECK(weight_W(v, -2.0) == doctest::Approx(1.0 / 6.0));
    CHECK(weight_W(v, 3.0) == doctest::Approx(std::pow(6.0, 1.5)));
}

TEST_CASE("a pure Maxwellian transforms to a constant") {
    // f = e^{-|v|^2} with rho = 1 at t = 0 gives g = e^{1 + |v|^2} e^{-|v|^2} = e
    WeightParams w = make_weight_params(1.0, 0.5);
    VelocityGrid vg = make_velocity_grid(3.0, 6);
    SpatialGrid sg = make_spatial_grid(1, 4.0, 4);
    DistributionField f = make_field(sg, vg, 0.0, Rep::F);
    for (int j = 0; j < f.nv; ++j)
        for (int x = 0; x < f.nx; ++x) f.at(x, j) = std::exp(-norm2(vg.node(j)));
    DistributionField g = transform(f, vg, TransformDirection::FToG, w);
    CHECK(g.rep == Rep::G);
    for (double val : g.values) CHECK(val == doctest::Approx(M_E).epsilon(1e-13));
}

TEST_CASE("transform round trip is the identity") {
    WeightParams w = make_weight_params(2.0, 0.7);
    VelocityGrid vg = make_velocity_grid(4.0, 6);
    SpatialGrid sg = make_spatial_grid(1, 4.0, 8);
    DistributionField g = make_field(sg, vg, 0.8, Rep::G);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto& v : g.values) v = u(rng);
    DistributionField f = transform(g, vg, TransformDirection::GToF, w);
    CHECK(f.rep == Rep::F);
    CHECK(f.time == g.time);
    DistributionField back = transform(f, vg, TransformDirection::FToG, w);
    for (std::size_t p = 0; p < g.values.size(); ++p)
        CHECK(back.values[p] == doctest::Approx(g.values[p]).epsilon(1e-13));
}

TEST_CASE("underflowed weights map to zero and are tallied") {
    WeightParams w = make_weight_params(60.0, 1.0);
    VelocityGrid vg = make_velocity_grid(5.0, 8);  // exponent -60 * 26 at the far corner underflows
    SpatialGrid sg = make_spatial_grid(1, 4.0, 4);
    DistributionField f = make_field(sg, vg, 0.0, Rep::F);
    for (auto& v : f.values) v = 1.0;
    std::size_t count = 0;
    DistributionField g = transform(f, vg, TransformDirection::FToG, w, &count);
    CHECK(count > 0);
    for (double val : g.values) CHECK(std::isfinite(val));
    Vec3 far = vg.node(0);
    CHECK(mu(0.0, far, w) == 0.0);
    CHECK(g.at(0, 0) == 0.0);
}

TEST_CASE("weight factorization along collisions is exact") {
    WeightParams w = make_weight_params(1.3, 0.4);
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    for (int it = 0; it < 2000; ++it) {
        Vec3 v{u(rng), u(rng), u(rng)}, vs{u(rng), u(rng), u(rng)};
        Vec3 sig{gauss(rng), gauss(rng), gauss(rng)};
        double n = norm(sig);
        if (n < 1e-9) continue;
        sig = (1.0 / n) * sig;
        double t = 0.3 * w.T0();
        worst = std::max(worst, mu_factorization_residual(t, v, vs, sig, w));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("polynomial weights are collision submultiplicative") {
    // |v|^2 <= |v'|^2 + |v'_*|^2 gives W_ell(v) <= W_ell(v') W_ell(v'_*), ell >= 0
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int it = 0; it < 2000; ++it) {
        Vec3 v{u(rng), u(rng), u(rng)}, vs{u(rng), u(rng), u(rng)};
        Vec3 sig{gauss(rng), gauss(rng), gauss(rng)};
        double n = norm(sig);
        if (n < 1e-9) continue;
        sig = (1.0 / n) * sig;
        auto [vp, vsp] = post_collision(v, vs, sig);
        for (double ell : {0.0, 1.0, 3.0, 5.0}) {
            double lhs = weight_W(v, ell);
            double rhs = weight_W(vp, ell) * weight_W(vsp, ell);
            CHECK(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
