#pragma once

#include <array>
#include <vector>

#include "ulbz/grid.hpp"

namespace ulbz {

// Smooth bump: 1 on |x| <= 1, 0 on |x| >= 2, exp(1 - 1/(1 - (|x|-1)^2)) between.
double phi1_radial(double r);
double phi1(const Vec3& x);
double phi_R_radial(double r, double R);  // phi1(|x| / R)

struct NormSpec {
    int k = 1;         // total derivative order
    double ell = 3.0;  // polynomial weight order
    int fd_order = 2;  // central-difference accuracy, 2 or 4
};

using MultiIndex = std::array<int, 3>;

// D^alpha_x D^beta_v by repeated single-axis first differences; periodic wrap
// in x, one-sided stencils of matching order at the v-hull edges.
DistributionField finite_diff(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                              const MultiIndex& alpha, const MultiIndex& beta, int fd_order);

// All (alpha, beta) with |alpha| + |beta| <= k; alpha restricted to active x-axes.
std::vector<std::pair<MultiIndex, MultiIndex>> derivative_set(int k, int active_dims);

// Uniformly local Sobolev norm: sum over (alpha, beta) of the max over window
// centers a (x-grid nodes) of integral phi1(x-a)^2 W_ell^2 |D g|^2 dx dv.
double ul_sobolev_norm(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                       const NormSpec& spec);

// Same windows applied under a trapezoid time integral over a uniform sequence;
// the max over a is taken after the time integration, per derivative pair.
double spacetime_norm(const std::vector<DistributionField>& seq, const SpatialGrid& sg, const VelocityGrid& vg,
                      const NormSpec& spec);

// ||g||_Y^2 = sup_t ul(k, ell)^2 + kappa * spacetime(k, ell + 1)^2.
double y_norm(const std::vector<DistributionField>& seq, const SpatialGrid& sg, const VelocityGrid& vg,
              const NormSpec& spec, double kappa);

struct REquivalence {
    bool lower_ok = false;   // norm with phi1 <= norm with phi_R
    double empirical_C = 0;  // norm_phiR / (R^3 norm_phi1), 0 for the zero field
};

// Window-scaling comparison with phi_R = phi1(./R); requires 2R <= L.
REquivalence r_equivalence_check(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                                 const NormSpec& spec, double R);

}  // namespace ulbz
