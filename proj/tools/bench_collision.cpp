#include <chrono>
#include <cmath>
#include <cstdio>

#include "ulbz/harness.hpp"
#include "ulbz/reference.hpp"

// Times the production gain/loss quadratures against the serial naive path on a
// small instance, then times the production path alone at the default scale.

using namespace ulbz;

namespace {

template <class F>
double time_of(F&& f, int reps) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

double max_rel(const DistributionField& a, const DistributionField& b) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        scale = std::max(scale, std::abs(b.values[i]));
        diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
    }
    return diff / std::max(scale, 1e-300);
}

}  // namespace

int main() {
    ExperimentConfig small;
    small.n_v = 6;
    small.n_x = 8;
    {
        ModelContext mc = make_context(small);
        CollisionContext cx = mc.collision();
        DistributionField U = make_scenario(small, mc.sg, mc.vg);
        ExperimentConfig c2 = small;
        c2.scenario = "two_maxwellian";
        DistributionField V = make_scenario(c2, mc.sg, mc.vg);
        std::vector<double> M = sample_mu(0.2, mc.vg, mc.wt);

        DistributionField fast_g = gain_quadrature(U, V, M, cx);
        DistributionField ref_g = reference::gain(U, V, M, cx);
        DistributionField fast_l = loss_quadrature(U, M, cx);
        DistributionField ref_l = reference::loss(U, M, cx);

        double tf = time_of([&] { gain_quadrature(U, V, M, cx); }, 5);
        double tr = time_of([&] { reference::gain(U, V, M, cx); }, 1);
        std::printf("small instance (n_v=%d, n_x=%d):\n", small.n_v, small.n_x);
        std::printf("  %-18s %10s %12s\n", "op", "time", "vs naive");
        std::printf("  %-18s %9.4fs %11.1fx   rel diff %.2e\n", "gain", tf, tr / tf, max_rel(fast_g, ref_g));
        double tlf = time_of([&] { loss_quadrature(U, M, cx); }, 20);
        double tlr = time_of([&] { reference::loss(U, M, cx); }, 2);
        std::printf("  %-18s %9.4fs %11.1fx   rel diff %.2e\n", "loss", tlf, tlr / tlf, max_rel(fast_l, ref_l));
    }

    ExperimentConfig full;  // default configuration scale
    {
        ModelContext mc = make_context(full);
        CollisionContext cx = mc.collision();
        DistributionField U = make_scenario(full, mc.sg, mc.vg);
        std::vector<double> M = sample_mu(0.2, mc.vg, mc.wt);
        double tg = time_of([&] { gain_quadrature(U, U, M, cx); }, 3);
        double tl = time_of([&] { loss_quadrature(U, M, cx); }, 10);
        double tn = time_of([&] { ul_sobolev_norm(U, mc.sg, mc.vg, mc.norm); }, 3);
        std::printf("default instance (n_v=%d, n_x=%d):\n", full.n_v, full.n_x);
        std::printf("  %-18s %9.4fs\n", "gain", tg);
        std::printf("  %-18s %9.4fs\n", "loss", tl);
        std::printf("  %-18s %9.4fs\n", "ul_norm", tn);
    }
    return 0;
}
