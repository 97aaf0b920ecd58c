#pragma once

#include <vector>

#include "ulbz/collision.hpp"
#include "ulbz/norms.hpp"

namespace ulbz {
// Serial naive implementations, written independently of the fast kernels:
// plain nested loops, long-double accumulation, no shared quadrature algebra.
// They exist for testing and for the oracle CLI path; nothing in the solver
// calls them.
namespace reference {

DistributionField gain(const DistributionField& U, const DistributionField& V, const std::vector<double>& M,
                       const CollisionContext& cx);
DistributionField loss(const DistributionField& U, const std::vector<double>& M, const CollisionContext& cx);
DistributionField t_form(const DistributionField& U, const DistributionField& V, const std::vector<double>& M,
                         const CollisionContext& cx);
DistributionField q_bilinear(const DistributionField& g, const DistributionField& f, const CollisionContext& cx);
DistributionField gamma_gain(const DistributionField& g, const DistributionField& h, double t,
                             const WeightParams& w, const CollisionContext& cx);
DistributionField loss_multiplier(const DistributionField& g, double t, const WeightParams& w,
                                  const CollisionContext& cx);

double ul_sobolev_norm(const DistributionField& f, const SpatialGrid& sg, const VelocityGrid& vg,
                       const NormSpec& spec);
double spacetime_norm(const std::vector<DistributionField>& seq, const SpatialGrid& sg, const VelocityGrid& vg,
                      const NormSpec& spec);

}  // namespace reference
}  // namespace ulbz
