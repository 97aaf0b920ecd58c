#include "ulbz/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace ulbz {

VelocityGrid make_velocity_grid(double v_max, int n) {
    if (!(v_max > 0.0)) throw std::invalid_argument("velocity grid requires v_max > 0");
    if (n < 4) throw std::invalid_argument("velocity grid requires n >= 4");
    return {v_max, n, 2.0 * v_max / n};
}

SpatialGrid make_spatial_grid(int active_dims, double L, int n) {
    if (active_dims != 1 && active_dims != 3) throw std::invalid_argument("active_dims must be 1 or 3");
    if (!(L > 0.0)) throw std::invalid_argument("spatial grid requires L > 0");
    if (n < 4) throw std::invalid_argument("spatial grid requires n >= 4");
    return {active_dims, L, n, 2.0 * L / n};
}

namespace {

// Nodes and weights of q-point Gauss-Legendre on [-1, 1].
void gauss_legendre(int q, std::vector<double>& x, std::vector<double>& w) {
    x.assign(q, 0.0);
    w.assign(q, 0.0);
    for (int i = 0; i < q; ++i) {
        // Newton from the Chebyshev initial guess
        double t = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= q; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = q * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= q; ++k) {
            double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = q * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

int gl_points_per_panel(int n_theta) {
    if (n_theta % 4 == 0) return 4;
    if (n_theta % 3 == 0) return 3;
    if (n_theta % 2 == 0) return 2;
    return 1;
}

}  // namespace

void orthonormal_frame(const Vec3& k, Vec3& e1, Vec3& e2) {
    // seed axis: the coordinate direction least aligned with k
    int m = 0;
    if (std::abs(k[1]) < std::abs(k[m])) m = 1;
    if (std::abs(k[2]) < std::abs(k[m])) m = 2;
    Vec3 u{0, 0, 0};
    u[m] = 1.0;
    e1 = cross(k, u);
    double n1 = norm(e1);
    e1 = (1.0 / n1) * e1;
    e2 = cross(k, e1);
}

SphereQuadrature build_sphere_quadrature(const Vec3& axis, int n_theta, int n_phi, double theta_min) {
    if (std::abs(norm(axis) - 1.0) > 1e-12) throw std::invalid_argument("sphere quadrature axis must be unit length");
    if (n_theta < 2) throw std::invalid_argument("sphere quadrature requires n_theta >= 2");
    if (n_phi < 2) throw std::invalid_argument("sphere quadrature requires n_phi >= 2");
    if (theta_min < 0.0 || theta_min >= M_PI / 2) throw std::invalid_argument("theta_min must lie in [0, pi/2)");

    SphereQuadrature q;
    q.axis = axis;
    orthonormal_frame(axis, q.e1, q.e2);

    const double lo = theta_min;
    const double hi = M_PI / 2;
    const int per = gl_points_per_panel(n_theta);
    const int panels = n_theta / per;

    std::vector<double> gx, gw;
    gauss_legendre(per, gx, gw);

    // uniform panels: the cutoff kernel is bounded, so there is no endpoint
    // singularity to grade toward
    const double step = (hi - lo) / panels;
    const double dphi = 2.0 * M_PI / n_phi;
    q.theta.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    q.phi.reserve(q.theta.capacity());
    q.weight.reserve(q.theta.capacity());

    for (int p = 0; p < panels; ++p) {
        double a = lo + p * step;
        double b = (p + 1 == panels) ? hi : lo + (p + 1) * step;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int i = 0; i < per; ++i) {
            double th = mid + half * gx[i];
            double wt = half * gw[i] * std::sin(th);
            for (int j = 0; j < n_phi; ++j) {
                q.theta.push_back(th);
                q.phi.push_back((j + 0.5) * dphi);
                q.weight.push_back(wt * dphi);
            }
        }
    }
    return q;
}

DistributionField make_field(const SpatialGrid& sg, const VelocityGrid& vg, double time, Rep rep) {
    DistributionField f;
    f.time = time;
    f.rep = rep;
    f.nx = sg.total();
    f.nv = vg.total();
    f.values.assign(static_cast<std::size_t>(f.nx) * f.nv, 0.0);
    return f;
}

TrilinearStencil trilinear_stencil(const VelocityGrid& vg, const Vec3& w) {
    TrilinearStencil st{};
    const double lo = vg.first(), hi = vg.last();
    int c[3];
    double fr[3];
    for (int d = 0; d < 3; ++d) {
        if (w[d] < lo || w[d] > hi) return st;
        double u = (w[d] - lo) / vg.h;
        int i = static_cast<int>(u);
        if (i > vg.n - 2) i = vg.n - 2;
        c[d] = i;
        fr[d] = u - i;
    }
    st.inside = true;
    int p = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d, ++p) {
                st.idx[p] = vg.flat(c[0] + a, c[1] + b, c[2] + d);
                st.w[p] = (a ? fr[0] : 1.0 - fr[0]) * (b ? fr[1] : 1.0 - fr[1]) * (d ? fr[2] : 1.0 - fr[2]);
            }
    return st;
}

double interpolate_v(const DistributionField& f, int x_index, const Vec3& w, const VelocityGrid& vg) {
    TrilinearStencil st = trilinear_stencil(vg, w);
    if (!st.inside) return 0.0;
    double s = 0.0;
    for (int p = 0; p < 8; ++p) s += st.w[p] * f.at(x_index, st.idx[p]);
    return s;
}

void shift_row_periodic(const double* in, double* out, int n, double h, double offset) {
    double u = offset / h;
    double base = std::floor(u);
    double fr = u - base;
    int i0 = static_cast<int>(base) % n;
    if (i0 < 0) i0 += n;
    if (fr == 0.0) {
        for (int i = 0; i < n; ++i) out[i] = in[(i + i0) % n];
        return;
    }
    for (int i = 0; i < n; ++i) {
        int a = (i + i0) % n;
        int b = a + 1 == n ? 0 : a + 1;
        out[i] = (1.0 - fr) * in[a] + fr * in[b];
    }
}

namespace {

// 3-D periodic sampling: result(x) = f(x + d) with per-axis linear weights.
void shift_slab_3d(const double* in, double* out, const SpatialGrid& sg, const Vec3& d) {
    const int n = sg.n;
    int base[3];
    double fr[3];
    for (int a = 0; a < 3; ++a) {
        double u = d[a] / sg.h;
        double b = std::floor(u);
        fr[a] = u - b;
        base[a] = static_cast<int>(b) % n;
        if (base[a] < 0) base[a] += n;
    }
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2) {
                double acc = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        for (int c = 0; c < 2; ++c) {
                            double wgt = (a ? fr[0] : 1 - fr[0]) * (b ? fr[1] : 1 - fr[1]) * (c ? fr[2] : 1 - fr[2]);
                            if (wgt == 0.0) continue;
                            int j0 = (i0 + base[0] + a) % n;
                            int j1 = (i1 + base[1] + b) % n;
                            int j2 = (i2 + base[2] + c) % n;
                            acc += wgt * in[(j0 * n + j1) * n + j2];
                        }
                out[(i0 * n + i1) * n + i2] = acc;
            }
}

}  // namespace

DistributionField shift_x(const DistributionField& f, const SpatialGrid& sg, const Vec3& d) {
    DistributionField out = f;
    if (sg.active_dims == 1) {
        for (int v = 0; v < f.nv; ++v) shift_row_periodic(f.row(v), out.row(v), sg.n, sg.h, d[0]);
    } else {
        for (int v = 0; v < f.nv; ++v) shift_slab_3d(f.row(v), out.row(v), sg, d);
    }
    return out;
}

DistributionField transport(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg, double dt) {
    DistributionField out = f;
    for (int v = 0; v < f.nv; ++v) {
        Vec3 vel = vg.node(v);
        if (sg.active_dims == 1) {
            shift_row_periodic(f.row(v), out.row(v), sg.n, sg.h, -dt * vel[0]);
        } else {
            shift_slab_3d(f.row(v), out.row(v), sg, -dt * vel);
        }
    }
    return out;
}

}  // namespace ulbz
