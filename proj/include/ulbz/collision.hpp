#pragma once

#include <utility>
#include <vector>

#include "ulbz/grid.hpp"
#include "ulbz/kernel.hpp"
#include "ulbz/weights.hpp"

namespace ulbz {

// sigma-representation: v' = (v + v_*)/2 + (|v - v_*|/2) sigma, v'_* the mirror.
std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v_star, const Vec3& sigma);

// Per-sigma-node direction cosines in the (e1, e2, k) frame plus the cutoff
// kernel values folded into the weights; reusable across x-slices and fields.
struct CollisionWorkspace {
    std::vector<double> ct, stcp, stsp;  // cos(theta), sin(theta)cos(phi), sin(theta)sin(phi)
    std::vector<double> wb;              // quadrature weight * b_cutoff(theta)
    double sum_wb = 0.0;                 // integral of b_cutoff over the hemisphere
    std::vector<double> acc_a, acc_b;    // x-row scratch

    static CollisionWorkspace create(const SphereQuadrature& q, const CrossSectionParams& p, int nx);
};

struct CollisionContext {
    const SpatialGrid& sg;
    const VelocityGrid& vg;
    const SphereQuadrature& quad;
    const CrossSectionParams& kern;
};

// Gain-form quadrature: out(x, v) = sum_j h^3 M_j Phi(r_ij) sum_m w_m b_eps(theta_m)
// U(x, v'_*) V(x, v'), with trilinear interpolation at the post-collision points.
// M is sampled per v-node.  OpenMP-parallel over output v-nodes.
DistributionField gain_quadrature(const DistributionField& U, const DistributionField& V,
                                  const std::vector<double>& M, const CollisionContext& cx);

// Loss convolution: out(x, v) = (integral of b_eps) * sum_j h^3 Phi(r_ij) M_j U(x, v_j).
DistributionField loss_quadrature(const DistributionField& U, const std::vector<double>& M,
                                  const CollisionContext& cx);

// Fused bilinear form T(U, V, M)(x, v) = sum_{j,m} h^3 w_m B_eps M_j
// { U(v'_*) V(v') - U(v_j) V(v) }; the bracket is evaluated inside the quadrature.
DistributionField t_form(const DistributionField& U, const DistributionField& V,
                         const std::vector<double>& M, const CollisionContext& cx);

std::vector<double> sample_mu(double t, const VelocityGrid& vg, const WeightParams& w);

// Gain/loss split of the weighted collision operator at time t:
//   Gamma^+ (g, h) = gain with M = mu(t),   Gamma^- (g, h) = h * L(g),
//   L(g) = loss with M = mu(t).
DistributionField gamma_gain(const DistributionField& g, const DistributionField& h, double t,
                             const WeightParams& w, const CollisionContext& cx);
DistributionField loss_multiplier(const DistributionField& g, double t, const WeightParams& w,
                                  const CollisionContext& cx);

// Unweighted operator Q(g, f) = t_form with M = 1.
DistributionField q_bilinear(const DistributionField& g, const DistributionField& f, const CollisionContext& cx);

struct Moments {
    double mass = 0.0;
    Vec3 momentum{0, 0, 0};
    double energy = 0.0;
    double max_abs() const;
};

// Discrete {1, v, |v|^2} moments of a v-slice against the cell measure h^3.
Moments moments_of(const double* slice, const VelocityGrid& vg);

// Moments of Q(f, f) on one x-slice; zero for the exact operator.
Moments conservation_residual(const DistributionField& f, int x_index, const CollisionContext& cx);

// Least-squares correction of q_slice so its five discrete moments vanish.
// The correction is independent of f_slice; the argument fixes the call shape.
std::vector<double> conservation_project(const std::vector<double>& q_slice, const std::vector<double>& f_slice,
                                         const VelocityGrid& vg);

}  // namespace ulbz
