#include "ulbz/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ulbz/weights.hpp"

namespace ulbz {

double phi1_radial(double r) {
    r = std::abs(r);
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    double u = r - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double phi1(const Vec3& x) { return phi1_radial(norm(x)); }

double phi_R_radial(double r, double R) { return phi1_radial(r / R); }

namespace {

struct Tap {
    int i;
    double c;
};

// first-derivative taps at position i of a non-periodic line of length n
int d1_taps(int n, int i, int order, Tap out[5]) {
    if (order == 2) {
        if (n < 3) throw std::invalid_argument("fd_order 2 needs at least 3 nodes per axis");
        if (i == 0) {
            out[0] = {0, -1.5};
            out[1] = {1, 2.0};
            out[2] = {2, -0.5};
            return 3;
        }
        if (i == n - 1) {
            out[0] = {n - 1, 1.5};
            out[1] = {n - 2, -2.0};
            out[2] = {n - 3, 0.5};
            return 3;
        }
        out[0] = {i - 1, -0.5};
        out[1] = {i + 1, 0.5};
        return 2;
    }
    if (order == 4) {
        if (n < 5) throw std::invalid_argument("fd_order 4 needs at least 5 nodes per axis");
        static const double edge0[5] = {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -0.25};
        static const double edge1[5] = {-0.25, -5.0 / 6, 1.5, -0.5, 1.0 / 12};
        if (i == 0 || i == 1) {
            const double* c = i == 0 ? edge0 : edge1;
            for (int p = 0; p < 5; ++p) out[p] = {p, c[p]};
            return 5;
        }
        if (i == n - 1 || i == n - 2) {
            const double* c = i == n - 1 ? edge0 : edge1;
            for (int p = 0; p < 5; ++p) out[p] = {n - 1 - p, -c[p]};
            return 5;
        }
        out[0] = {i - 2, 1.0 / 12};
        out[1] = {i - 1, -2.0 / 3};
        out[2] = {i + 1, 2.0 / 3};
        out[3] = {i + 2, -1.0 / 12};
        return 4;
    }
    throw std::invalid_argument("fd_order must be 2 or 4");
}

// periodic variant: always the central stencil, indices wrapped
int d1_taps_periodic(int n, int i, int order, Tap out[5]) {
    auto wrap = [n](int j) { return ((j % n) + n) % n; };
    if (order == 2) {
        if (n < 3) throw std::invalid_argument("fd_order 2 needs at least 3 nodes per axis");
        out[0] = {wrap(i - 1), -0.5};
        out[1] = {wrap(i + 1), 0.5};
        return 2;
    }
    if (order == 4) {
        if (n < 5) throw std::invalid_argument("fd_order 4 needs at least 5 nodes per axis");
        out[0] = {wrap(i - 2), 1.0 / 12};
        out[1] = {wrap(i - 1), -2.0 / 3};
        out[2] = {wrap(i + 1), 2.0 / 3};
        out[3] = {wrap(i + 2), -1.0 / 12};
        return 4;
    }
    throw std::invalid_argument("fd_order must be 2 or 4");
}

DistributionField d_x_axis(const DistributionField& f, const SpatialGrid& sg, int axis, int order) {
    DistributionField out = f;
    const int n = sg.n;
    Tap taps[5];
    if (sg.active_dims == 1) {
        for (int v = 0; v < f.nv; ++v) {
            const double* in = f.row(v);
            double* o = out.row(v);
            for (int i = 0; i < n; ++i) {
                int nt = d1_taps_periodic(n, i, order, taps);
                double s = 0.0;
                for (int p = 0; p < nt; ++p) s += taps[p].c * in[taps[p].i];
                o[i] = s / sg.h;
            }
        }
        return out;
    }
    // stride of the chosen axis inside the flattened x index
    const int stride = axis == 0 ? n * n : axis == 1 ? n : 1;
    const int nlines = n * n;
    for (int v = 0; v < f.nv; ++v) {
        const double* in = f.row(v);
        double* o = out.row(v);
        for (int l = 0; l < nlines; ++l) {
            int a = l / n, b = l % n;
            int base;
            if (axis == 0) base = a * n + b;
            else if (axis == 1) base = a * n * n + b;
            else base = (a * n + b) * n;
            for (int i = 0; i < n; ++i) {
                int nt = d1_taps_periodic(n, i, order, taps);
                double s = 0.0;
                for (int p = 0; p < nt; ++p) s += taps[p].c * in[base + taps[p].i * stride];
                o[base + i * stride] = s / sg.h;
            }
        }
    }
    return out;
}

DistributionField d_v_axis(const DistributionField& f, const VelocityGrid& vg, int axis, int order) {
    DistributionField out = f;
    const int n = vg.n, nx = f.nx;
    const int vstride = axis == 0 ? n * n : axis == 1 ? n : 1;
    Tap taps[5];
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            int vbase;
            if (axis == 0) vbase = a * n + b;
            else if (axis == 1) vbase = a * n * n + b;
            else vbase = (a * n + b) * n;
            for (int i = 0; i < n; ++i) {
                int nt = d1_taps(n, i, order, taps);
                double* o = out.row(vbase + i * vstride);
                for (int x = 0; x < nx; ++x) o[x] = 0.0;
                for (int p = 0; p < nt; ++p) {
                    const double* in = f.row(vbase + taps[p].i * vstride);
                    const double c = taps[p].c / vg.h;
                    for (int x = 0; x < nx; ++x) o[x] += c * in[x];
                }
            }
        }
    return out;
}

}  // namespace

DistributionField finite_diff(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                              const MultiIndex& alpha, const MultiIndex& beta, int fd_order) {
    if (f.nx != sg.total() || f.nv != vg.total()) throw std::invalid_argument("field does not match the grids");
    for (int a = sg.active_dims; a < 3; ++a)
        if (alpha[a] > 0) {
            // constant in the suppressed directions
            DistributionField z = f;
            std::fill(z.values.begin(), z.values.end(), 0.0);
            return z;
        }
    DistributionField cur = f;
    for (int a = 0; a < sg.active_dims; ++a)
        for (int r = 0; r < alpha[a]; ++r) cur = d_x_axis(cur, sg, a, fd_order);
    for (int a = 0; a < 3; ++a)
        for (int r = 0; r < beta[a]; ++r) cur = d_v_axis(cur, vg, a, fd_order);
    return cur;
}

std::vector<std::pair<MultiIndex, MultiIndex>> derivative_set(int k, int active_dims) {
    std::vector<std::pair<MultiIndex, MultiIndex>> set;
    auto push_betas = [&](const MultiIndex& alpha, int budget) {
        for (int b0 = 0; b0 <= budget; ++b0)
            for (int b1 = 0; b1 + b0 <= budget; ++b1)
                for (int b2 = 0; b2 + b1 + b0 <= budget; ++b2) set.push_back({alpha, {b0, b1, b2}});
    };
    if (active_dims == 1) {
        for (int a = 0; a <= k; ++a) push_betas({a, 0, 0}, k - a);
    } else {
        for (int a0 = 0; a0 <= k; ++a0)
            for (int a1 = 0; a1 + a0 <= k; ++a1)
                for (int a2 = 0; a2 + a1 + a0 <= k; ++a2) push_betas({a0, a1, a2}, k - a0 - a1 - a2);
    }
    return set;
}

namespace {

// squared window profile at every x-offset, on the torus
std::vector<double> window_profile(const SpatialGrid& sg, double R) {
    const int nxt = sg.total();
    std::vector<double> c(nxt);
    if (sg.active_dims == 1) {
        for (int i = 0; i < sg.n; ++i) {
            double d = sg.min_image(i * sg.h);
            double w = phi1_radial(std::abs(d) / R);
            c[i] = w * w;
        }
        return c;
    }
    for (int i0 = 0; i0 < sg.n; ++i0)
        for (int i1 = 0; i1 < sg.n; ++i1)
            for (int i2 = 0; i2 < sg.n; ++i2) {
                Vec3 d{sg.min_image(i0 * sg.h), sg.min_image(i1 * sg.h), sg.min_image(i2 * sg.h)};
                double w = phi1_radial(norm(d) / R);
                c[(i0 * sg.n + i1) * sg.n + i2] = w * w;
            }
    return c;
}

// I(a) = h_x^d sum_x profile(x - a) S(x) for every center a
std::vector<double> windowed_integrals(const std::vector<double>& S, const std::vector<double>& profile,
                                       const SpatialGrid& sg) {
    const int nxt = sg.total();
    std::vector<double> I(nxt, 0.0);
    double hx = std::pow(sg.h, sg.active_dims);
    if (sg.active_dims == 1) {
        for (int a = 0; a < nxt; ++a) {
            double s = 0.0;
            for (int x = 0; x < nxt; ++x) s += profile[sg.wrap(x - a)] * S[x];
            I[a] = hx * s;
        }
        return I;
    }
    const int n = sg.n;
    for (int a0 = 0; a0 < n; ++a0)
        for (int a1 = 0; a1 < n; ++a1)
            for (int a2 = 0; a2 < n; ++a2) {
                double s = 0.0;
                for (int x0 = 0; x0 < n; ++x0)
                    for (int x1 = 0; x1 < n; ++x1)
                        for (int x2 = 0; x2 < n; ++x2)
                            s += profile[(sg.wrap(x0 - a0) * n + sg.wrap(x1 - a1)) * n + sg.wrap(x2 - a2)] *
                                 S[(x0 * n + x1) * n + x2];
                I[(a0 * n + a1) * n + a2] = hx * s;
            }
    return I;
}

std::vector<double> weighted_density(const DistributionField& D, const SpatialGrid& sg, const VelocityGrid& vg,
                                     double ell) {
    std::vector<double> S(sg.total(), 0.0);
    for (int v = 0; v < D.nv; ++v) {
        double w = weight_W(vg.node(v), ell);
        double w2 = w * w;
        const double* row = D.row(v);
        for (int x = 0; x < D.nx; ++x) S[x] += w2 * row[x] * row[x];
    }
    double h3 = vg.cell_volume();
    for (double& s : S) s *= h3;
    return S;
}

double ul_norm_sq_windowed(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                           const NormSpec& spec, double R) {
    std::vector<double> profile = window_profile(sg, R);
    double total = 0.0;
    for (const auto& [alpha, beta] : derivative_set(spec.k, sg.active_dims)) {
        DistributionField D = finite_diff(f, sg, vg, alpha, beta, spec.fd_order);
        std::vector<double> S = weighted_density(D, sg, vg, spec.ell);
        std::vector<double> I = windowed_integrals(S, profile, sg);
        total += *std::max_element(I.begin(), I.end());
    }
    return total;
}

void require_uniform_times(const std::vector<DistributionField>& seq, double& dt) {
    if (seq.size() < 2) {
        dt = 0.0;
        return;
    }
    dt = seq[1].time - seq[0].time;
    if (!(dt > 0.0)) throw std::invalid_argument("time sequence must be increasing");
    for (std::size_t i = 1; i < seq.size(); ++i) {
        double step = seq[i].time - seq[i - 1].time;
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("time sequence must be uniform");
    }
}

}  // namespace

double ul_sobolev_norm(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                       const NormSpec& spec) {
    return std::sqrt(ul_norm_sq_windowed(f, sg, vg, spec, 1.0));
}

double spacetime_norm(const std::vector<DistributionField>& seq, const SpatialGrid& sg, const VelocityGrid& vg,
                      const NormSpec& spec) {
    if (seq.empty()) return 0.0;
    double dt = 0.0;
    require_uniform_times(seq, dt);
    if (seq.size() < 2) return 0.0;

    std::vector<double> profile = window_profile(sg, 1.0);
    double total = 0.0;
    for (const auto& [alpha, beta] : derivative_set(spec.k, sg.active_dims)) {
        std::vector<double> acc(sg.total(), 0.0);
        for (std::size_t t = 0; t < seq.size(); ++t) {
            DistributionField D = finite_diff(seq[t], sg, vg, alpha, beta, spec.fd_order);
            std::vector<double> S = weighted_density(D, sg, vg, spec.ell);
            std::vector<double> I = windowed_integrals(S, profile, sg);
            double w = (t == 0 || t + 1 == seq.size()) ? 0.5 * dt : dt;
            for (int a = 0; a < sg.total(); ++a) acc[a] += w * I[a];
        }
        total += *std::max_element(acc.begin(), acc.end());
    }
    return std::sqrt(total);
}

double y_norm(const std::vector<DistributionField>& seq, const SpatialGrid& sg, const VelocityGrid& vg,
              const NormSpec& spec, double kappa) {
    double sup2 = 0.0;
    for (const auto& f : seq) sup2 = std::max(sup2, ul_norm_sq_windowed(f, sg, vg, spec, 1.0));
    NormSpec moment = spec;
    moment.ell = spec.ell + 1.0;
    double m = spacetime_norm(seq, sg, vg, moment);
    return std::sqrt(sup2 + kappa * m * m);
}

REquivalence r_equivalence_check(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                                 const NormSpec& spec, double R) {
    if (!(R > 1.0)) throw std::invalid_argument("r_equivalence_check requires R > 1");
    if (!(2.0 * R <= sg.L)) throw std::invalid_argument("window support 2R must fit inside the box half-width L");
    double n1 = std::sqrt(ul_norm_sq_windowed(f, sg, vg, spec, 1.0));
    double nR = std::sqrt(ul_norm_sq_windowed(f, sg, vg, spec, R));
    REquivalence r;
    if (n1 == 0.0 && nR == 0.0) {
        r.lower_ok = true;
        r.empirical_C = 0.0;
        return r;
    }
    r.lower_ok = n1 <= nR * (1.0 + 1e-12);
    r.empirical_C = nR / (R * R * R * n1);
    return r;
}

}  // namespace ulbz
