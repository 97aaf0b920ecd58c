#pragma once

#include <cstdint>
#include <vector>

#include "ulbz/common.hpp"

namespace ulbz {

// Uniform cell-centered velocity grid on [-v_max, v_max]^3.
// Nodes per axis: v_i = -v_max + (i + 1/2) h, h = 2 v_max / n.
// Interpolation support is the node hull [v_0, v_{n-1}]^3; the half-cell margin
// between hull and box evaluates to 0 like the exterior.
struct VelocityGrid {
    double v_max = 0.0;
    int n = 0;
    double h = 0.0;

    double node1d(int i) const { return -v_max + (i + 0.5) * h; }
    double first() const { return node1d(0); }
    double last() const { return node1d(n - 1); }
    int total() const { return n * n * n; }
    int flat(int i0, int i1, int i2) const { return (i0 * n + i1) * n + i2; }
    Vec3 node(int f) const {
        int i2 = f % n, i1 = (f / n) % n, i0 = f / (n * n);
        return {node1d(i0), node1d(i1), node1d(i2)};
    }
    double cell_volume() const { return h * h * h; }
};

VelocityGrid make_velocity_grid(double v_max, int n);  // requires v_max > 0, n >= 4

// Periodic box [-L, L)^d, d = active_dims in {1, 3}; fields are constant in the
// suppressed directions and transport uses v_1 only when d = 1.
struct SpatialGrid {
    int active_dims = 1;
    double L = 0.0;
    int n = 0;
    double h = 0.0;

    double node1d(int i) const { return -L + i * h; }
    int total() const {
        int t = 1;
        for (int d = 0; d < active_dims; ++d) t *= n;
        return t;
    }
    int wrap(int i) const {
        i %= n;
        return i < 0 ? i + n : i;
    }
    int flat(int i0, int i1, int i2) const { return active_dims == 1 ? i0 : (i0 * n + i1) * n + i2; }
    // minimal-image displacement of one coordinate on the torus, in [-L, L)
    double min_image(double d) const {
        double w = 2.0 * L;
        d = std::remainder(d, w);
        if (d >= L) d -= w;
        if (d < -L) d += w;
        return d;
    }
};

SpatialGrid make_spatial_grid(int active_dims, double L, int n);  // active_dims in {1,3}, L > 0, n >= 4

// Quadrature on the hemisphere 0 <= theta <= pi/2 about `axis`: composite
// Gauss-Legendre in theta on uniform subintervals of [theta_min, pi/2],
// uniform midpoint rule in phi.  Weights carry the sin(theta) surface factor
// and the phi cell width.
struct SphereQuadrature {
    Vec3 axis{0, 0, 1}, e1{1, 0, 0}, e2{0, 1, 0};
    std::vector<double> theta, phi, weight;

    int size() const { return static_cast<int>(theta.size()); }
    // node m in the frame (e1, e2, axis)
    Vec3 sigma(int m) const {
        double st = std::sin(theta[m]), ct = std::cos(theta[m]);
        double cp = std::cos(phi[m]), sp = std::sin(phi[m]);
        return ct * axis + (st * cp) * e1 + (st * sp) * e2;
    }
    double weight_sum() const {
        double s = 0;
        for (double w : weight) s += w;
        return s;
    }
};

SphereQuadrature build_sphere_quadrature(const Vec3& axis, int n_theta, int n_phi, double theta_min = 0.0);

// Orthonormal frame (e1, e2) completing unit vector k; deterministic in k.
void orthonormal_frame(const Vec3& k, Vec3& e1, Vec3& e2);

enum class Rep : std::uint8_t { F, G };

// One time slice of a distribution, indexed (x-node, v-node).  Storage is
// v-major with x contiguous so per-row x loops vectorize.
struct DistributionField {
    double time = 0.0;
    Rep rep = Rep::G;
    int nx = 0, nv = 0;
    std::vector<double> values;

    double& at(int x, int v) { return values[static_cast<std::size_t>(v) * nx + x]; }
    double at(int x, int v) const { return values[static_cast<std::size_t>(v) * nx + x]; }
    double* row(int v) { return values.data() + static_cast<std::size_t>(v) * nx; }
    const double* row(int v) const { return values.data() + static_cast<std::size_t>(v) * nx; }
};

DistributionField make_field(const SpatialGrid& sg, const VelocityGrid& vg, double time = 0.0, Rep rep = Rep::G);

// Trilinear interpolation stencil at point w; inside == false means w lies
// outside the node hull and the value is 0.
struct TrilinearStencil {
    int idx[8];
    double w[8];
    bool inside = false;
};

TrilinearStencil trilinear_stencil(const VelocityGrid& vg, const Vec3& w);
double interpolate_v(const DistributionField& f, int x_index, const Vec3& w, const VelocityGrid& vg);

// Periodic linear/trilinear sampling along active x-axes: result(x) = field(x + d).
DistributionField shift_x(const DistributionField& f, const SpatialGrid& sg, const Vec3& d);

// Characteristic transport: each v-row shifted by d = -dt * v (active axes only).
DistributionField transport(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg, double dt);

// result(x) = row(x + offset) with periodic linear interpolation; offset in box units.
void shift_row_periodic(const double* in, double* out, int n, double h, double offset);

}  // namespace ulbz
