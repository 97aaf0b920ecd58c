#include "ulbz/reference.hpp"

#include <cmath>

#include "ulbz/weights.hpp"

// Naive-path implementations: straight nested loops over the same quadrature
// nodes and frames, evaluating the kernel through cross_section and the fields
// through interpolate_v, accumulating in long double.

namespace ulbz {
namespace reference {

namespace {

Vec3 pair_sigma(const SphereQuadrature& q, int m, const Vec3& k, const Vec3& e1, const Vec3& e2) {
    double ct = std::cos(q.theta[m]), st = std::sin(q.theta[m]);
    double cp = std::cos(q.phi[m]), sp = std::sin(q.phi[m]);
    return (ct)*k + (st * cp) * e1 + (st * sp) * e2;
}

}  // namespace

DistributionField gain(const DistributionField& U, const DistributionField& V, const std::vector<double>& M,
                       const CollisionContext& cx) {
    const VelocityGrid& vg = cx.vg;
    DistributionField out = U;
    const double h3 = vg.cell_volume();
    for (int x = 0; x < U.nx; ++x)
        for (int i = 0; i < vg.total(); ++i) {
            Vec3 vi = vg.node(i);
            long double acc = 0.0L;
            for (int j = 0; j < vg.total(); ++j) {
                if (j == i) continue;
                Vec3 vj = vg.node(j);
                Vec3 rel = vi - vj;
                double r = norm(rel);
                Vec3 k = (1.0 / r) * rel;
                Vec3 e1, e2;
                orthonormal_frame(k, e1, e2);
                Vec3 c = 0.5 * (vi + vj);
                for (int m = 0; m < cx.quad.size(); ++m) {
                    Vec3 sig = pair_sigma(cx.quad, m, k, e1, e2);
                    double B = cross_section(vi, vj, sig, cx.kern);
                    if (B == 0.0) continue;
                    Vec3 vp = c + (0.5 * r) * sig;
                    Vec3 vsp = c - (0.5 * r) * sig;
                    double a = interpolate_v(U, x, vsp, vg);
                    double b = interpolate_v(V, x, vp, vg);
                    acc += static_cast<long double>(cx.quad.weight[m]) * B * M[j] * a * b;
                }
            }
            out.at(x, i) = static_cast<double>(h3 * acc);
        }
    return out;
}

DistributionField loss(const DistributionField& U, const std::vector<double>& M, const CollisionContext& cx) {
    const VelocityGrid& vg = cx.vg;
    DistributionField out = U;
    const double h3 = vg.cell_volume();
    for (int x = 0; x < U.nx; ++x)
        for (int i = 0; i < vg.total(); ++i) {
            Vec3 vi = vg.node(i);
            long double acc = 0.0L;
            for (int j = 0; j < vg.total(); ++j) {
                if (j == i) continue;
                Vec3 vj = vg.node(j);
                Vec3 rel = vi - vj;
                double r = norm(rel);
                Vec3 k = (1.0 / r) * rel;
                Vec3 e1, e2;
                orthonormal_frame(k, e1, e2);
                for (int m = 0; m < cx.quad.size(); ++m) {
                    Vec3 sig = pair_sigma(cx.quad, m, k, e1, e2);
                    double B = cross_section(vi, vj, sig, cx.kern);
                    acc += static_cast<long double>(cx.quad.weight[m]) * B * M[j] * U.at(x, j);
                }
            }
            out.at(x, i) = static_cast<double>(h3 * acc);
        }
    return out;
}

DistributionField t_form(const DistributionField& U, const DistributionField& V, const std::vector<double>& M,
                         const CollisionContext& cx) {
    const VelocityGrid& vg = cx.vg;
    DistributionField out = U;
    out.time = V.time;
    const double h3 = vg.cell_volume();
    for (int x = 0; x < U.nx; ++x)
        for (int i = 0; i < vg.total(); ++i) {
            Vec3 vi = vg.node(i);
            long double acc = 0.0L;
            for (int j = 0; j < vg.total(); ++j) {
                if (j == i) continue;
                Vec3 vj = vg.node(j);
                Vec3 rel = vi - vj;
                double r = norm(rel);
                Vec3 k = (1.0 / r) * rel;
                Vec3 e1, e2;
                orthonormal_frame(k, e1, e2);
                Vec3 c = 0.5 * (vi + vj);
                for (int m = 0; m < cx.quad.size(); ++m) {
                    Vec3 sig = pair_sigma(cx.quad, m, k, e1, e2);
                    double B = cross_section(vi, vj, sig, cx.kern);
                    if (B == 0.0) continue;
                    Vec3 vp = c + (0.5 * r) * sig;
                    Vec3 vsp = c - (0.5 * r) * sig;
                    double bracket = interpolate_v(U, x, vsp, vg) * interpolate_v(V, x, vp, vg) -
                                     U.at(x, j) * V.at(x, i);
                    acc += static_cast<long double>(cx.quad.weight[m]) * B * M[j] * bracket;
                }
            }
            out.at(x, i) = static_cast<double>(h3 * acc);
        }
    return out;
}

DistributionField q_bilinear(const DistributionField& g, const DistributionField& f, const CollisionContext& cx) {
    return reference::t_form(g, f, std::vector<double>(cx.vg.total(), 1.0), cx);
}

DistributionField gamma_gain(const DistributionField& g, const DistributionField& h, double t,
                             const WeightParams& w, const CollisionContext& cx) {
    return gain(g, h, sample_mu(t, cx.vg, w), cx);
}

DistributionField loss_multiplier(const DistributionField& g, double t, const WeightParams& w,
                                  const CollisionContext& cx) {
    return loss(g, sample_mu(t, cx.vg, w), cx);
}

namespace {

// independent single-axis derivative: explicit stencils, no shared tap tables
double line_d1(const std::vector<double>& f, int i, double h, int order) {
    const int n = static_cast<int>(f.size());
    if (order == 2) {
        if (i == 0) return (-1.5 * f[0] + 2.0 * f[1] - 0.5 * f[2]) / h;
        if (i == n - 1) return (1.5 * f[n - 1] - 2.0 * f[n - 2] + 0.5 * f[n - 3]) / h;
        return (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    if (i == 0) return (-25.0 / 12 * f[0] + 4.0 * f[1] - 3.0 * f[2] + 4.0 / 3 * f[3] - 0.25 * f[4]) / h;
    if (i == 1) return (-0.25 * f[0] - 5.0 / 6 * f[1] + 1.5 * f[2] - 0.5 * f[3] + 1.0 / 12 * f[4]) / h;
    if (i == n - 1)
        return (25.0 / 12 * f[n - 1] - 4.0 * f[n - 2] + 3.0 * f[n - 3] - 4.0 / 3 * f[n - 4] + 0.25 * f[n - 5]) / h;
    if (i == n - 2)
        return (0.25 * f[n - 1] + 5.0 / 6 * f[n - 2] - 1.5 * f[n - 3] + 0.5 * f[n - 4] - 1.0 / 12 * f[n - 5]) / h;
    return (f[i - 2] / 12 - 2.0 / 3 * f[i - 1] + 2.0 / 3 * f[i + 1] - f[i + 2] / 12) / h;
}

double line_d1_periodic(const std::vector<double>& f, int i, double h, int order) {
    const int n = static_cast<int>(f.size());
    auto at = [&](int j) { return f[((j % n) + n) % n]; };
    if (order == 2) return (at(i + 1) - at(i - 1)) / (2.0 * h);
    return (at(i - 2) / 12 - 2.0 / 3 * at(i - 1) + 2.0 / 3 * at(i + 1) - at(i + 2) / 12) / h;
}

// D^alpha_x D^beta_v by repeated differentiation, one axis at a time
DistributionField naive_derivative(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                                   MultiIndex alpha, MultiIndex beta, int order) {
    DistributionField cur = f;
    for (int a = sg.active_dims; a < 3; ++a)
        if (alpha[a] > 0) {
            for (double& v : cur.values) v = 0.0;
            return cur;
        }
    // x axes (periodic)
    for (int a = 0; a < sg.active_dims; ++a)
        for (int rep = 0; rep < alpha[a]; ++rep) {
            DistributionField nxt = cur;
            const int n = sg.n;
            for (int v = 0; v < cur.nv; ++v) {
                if (sg.active_dims == 1) {
                    std::vector<double> line(cur.row(v), cur.row(v) + n);
                    for (int i = 0; i < n; ++i) nxt.at(i, v) = line_d1_periodic(line, i, sg.h, order);
                } else {
                    const int stride = a == 0 ? n * n : a == 1 ? n : 1;
                    for (int l0 = 0; l0 < n; ++l0)
                        for (int l1 = 0; l1 < n; ++l1) {
                            int base = a == 0 ? l0 * n + l1 : a == 1 ? l0 * n * n + l1 : (l0 * n + l1) * n;
                            std::vector<double> line(n);
                            for (int i = 0; i < n; ++i) line[i] = cur.at(base + i * stride, v);
                            for (int i = 0; i < n; ++i) nxt.at(base + i * stride, v) = line_d1_periodic(line, i, sg.h, order);
                        }
                }
            }
            cur = std::move(nxt);
        }
    // v axes
    for (int a = 0; a < 3; ++a)
        for (int rep = 0; rep < beta[a]; ++rep) {
            DistributionField nxt = cur;
            const int n = vg.n;
            const int stride = a == 0 ? n * n : a == 1 ? n : 1;
            for (int x = 0; x < cur.nx; ++x)
                for (int l0 = 0; l0 < n; ++l0)
                    for (int l1 = 0; l1 < n; ++l1) {
                        int base = a == 0 ? l0 * n + l1 : a == 1 ? l0 * n * n + l1 : (l0 * n + l1) * n;
                        std::vector<double> line(n);
                        for (int i = 0; i < n; ++i) line[i] = cur.at(x, base + i * stride);
                        for (int i = 0; i < n; ++i) nxt.at(x, base + i * stride) = line_d1(line, i, vg.h, order);
                    }
            cur = std::move(nxt);
        }
    return cur;
}

long double windowed_term(const DistributionField& D, const SpatialGrid& sg, const VelocityGrid& vg, double ell) {
    const double hx = std::pow(sg.h, sg.active_dims);
    const double h3 = vg.cell_volume();
    long double best = 0.0L;
    const int nxt = sg.total();
    for (int a = 0; a < nxt; ++a) {
        long double acc = 0.0L;
        for (int x = 0; x < nxt; ++x) {
            double w;
            if (sg.active_dims == 1) {
                w = phi1_radial(std::abs(sg.min_image((x - a) * sg.h)));
            } else {
                int x2 = x % sg.n, x1 = (x / sg.n) % sg.n, x0 = x / (sg.n * sg.n);
                int a2 = a % sg.n, a1 = (a / sg.n) % sg.n, a0 = a / (sg.n * sg.n);
                Vec3 d{sg.min_image((x0 - a0) * sg.h), sg.min_image((x1 - a1) * sg.h),
                       sg.min_image((x2 - a2) * sg.h)};
                w = phi1(d);
            }
            if (w == 0.0) continue;
            long double sv = 0.0L;
            for (int v = 0; v < D.nv; ++v) {
                double W = weight_W(vg.node(v), ell);
                double g = D.at(x, v);
                sv += static_cast<long double>(W * g) * (W * g);
            }
            acc += static_cast<long double>(w) * w * sv;
        }
        acc *= hx * h3;
        best = std::max(best, acc);
    }
    return best;
}

}  // namespace

double ul_sobolev_norm(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                       const NormSpec& spec) {
    long double total = 0.0L;
    for (const auto& [alpha, beta] : derivative_set(spec.k, sg.active_dims)) {
        DistributionField D = naive_derivative(f, sg, vg, alpha, beta, spec.fd_order);
        total += windowed_term(D, sg, vg, spec.ell);
    }
    return std::sqrt(static_cast<double>(total));
}

double spacetime_norm(const std::vector<DistributionField>& seq, const SpatialGrid& sg, const VelocityGrid& vg,
                      const NormSpec& spec) {
    if (seq.size() < 2) return 0.0;
    const double dt = seq[1].time - seq[0].time;
    long double total = 0.0L;
    for (const auto& [alpha, beta] : derivative_set(spec.k, sg.active_dims)) {
        // max over centers of the trapezoid-in-time windowed integral
        const int nxt = sg.total();
        std::vector<long double> acc(nxt, 0.0L);
        for (std::size_t t = 0; t < seq.size(); ++t) {
            DistributionField D = naive_derivative(seq[t], sg, vg, alpha, beta, spec.fd_order);
            double w = (t == 0 || t + 1 == seq.size()) ? 0.5 * dt : dt;
            for (int a = 0; a < nxt; ++a) {
                long double I = 0.0L;
                for (int x = 0; x < nxt; ++x) {
                    double ww;
                    if (sg.active_dims == 1) {
                        ww = phi1_radial(std::abs(sg.min_image((x - a) * sg.h)));
                    } else {
                        int x2 = x % sg.n, x1 = (x / sg.n) % sg.n, x0 = x / (sg.n * sg.n);
                        int a2 = a % sg.n, a1 = (a / sg.n) % sg.n, a0 = a / (sg.n * sg.n);
                        Vec3 d{sg.min_image((x0 - a0) * sg.h), sg.min_image((x1 - a1) * sg.h),
                               sg.min_image((x2 - a2) * sg.h)};
                        ww = phi1(d);
                    }
                    if (ww == 0.0) continue;
                    long double sv = 0.0L;
                    for (int v = 0; v < D.nv; ++v) {
                        double W = weight_W(vg.node(v), spec.ell);
                        double g = D.at(x, v);
                        sv += static_cast<long double>(W * g) * (W * g);
                    }
                    I += static_cast<long double>(ww) * ww * sv;
                }
                acc[a] += w * I * std::pow(sg.h, sg.active_dims) * vg.cell_volume();
            }
        }
        long double best = 0.0L;
        for (long double a : acc) best = std::max(best, a);
        total += best;
    }
    return std::sqrt(static_cast<double>(total));
}

}  // namespace reference
}  // namespace ulbz
