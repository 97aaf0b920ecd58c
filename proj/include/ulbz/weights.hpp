#pragma once

#include <cstddef>

#include "ulbz/common.hpp"
#include "ulbz/grid.hpp"

namespace ulbz {

// Time-dependent Maxwellian weight mu(t, v) = exp(-(rho - kappa t)(1 + |v|^2)),
// valid on [0, T0] with T0 = rho / (2 kappa) so the exponent rate stays >= rho/2.
struct WeightParams {
    double rho = 1.0;
    double kappa = 0.5;
    double T0() const { return rho / (2.0 * kappa); }
};

WeightParams make_weight_params(double rho, double kappa);  // rho > 0, kappa > 0

double mu(double t, const Vec3& v, const WeightParams& w);      // rejects t outside [0, T0]
double mu_speed2(double t, double v2, const WeightParams& w);   // same, by |v|^2
double weight_W(const Vec3& v, double ell);                     // (1 + |v|^2)^(ell/2)

enum class TransformDirection { FToG, GToF };

// f = mu(t) g.  FToG divides by mu; nodes where mu underflowed to 0 map to 0
// and are tallied in *underflow_count when given.
DistributionField transform(const DistributionField& field, const VelocityGrid& vg, TransformDirection dir,
                            const WeightParams& w, std::size_t* underflow_count = nullptr);

// Relative defect of mu_* = mu^{-1} mu'_* mu' under exact collision kinematics.
double mu_factorization_residual(double t, const Vec3& v, const Vec3& v_star, const Vec3& sigma,
                                 const WeightParams& w);

}  // namespace ulbz
