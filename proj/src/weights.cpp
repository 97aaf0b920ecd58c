#include "ulbz/weights.hpp"

#include <cmath>
#include <stdexcept>

#include "ulbz/collision.hpp"

namespace ulbz {

WeightParams make_weight_params(double rho, double kappa) {
    if (!(rho > 0.0)) throw std::invalid_argument("weights require rho > 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("weights require kappa > 0");
    return {rho, kappa};
}

double mu_speed2(double t, double v2, const WeightParams& w) {
    if (t < 0.0 || t > w.T0() * (1.0 + 1e-12))
        throw std::domain_error("mu is only defined for t in [0, rho/(2 kappa)]");
    return std::exp(-(w.rho - w.kappa * t) * (1.0 + v2));
}

double mu(double t, const Vec3& v, const WeightParams& w) { return mu_speed2(t, norm2(v), w); }

double weight_W(const Vec3& v, double ell) { return std::pow(1.0 + norm2(v), 0.5 * ell); }

DistributionField transform(const DistributionField& field, const VelocityGrid& vg, TransformDirection dir,
                            const WeightParams& w, std::size_t* underflow_count) {
    DistributionField out = field;
    out.rep = dir == TransformDirection::FToG ? Rep::G : Rep::F;
    std::size_t zeros = 0;
    for (int v = 0; v < field.nv; ++v) {
        double m = mu_speed2(field.time, norm2(vg.node(v)), w);
        const double* in = field.row(v);
        double* o = out.row(v);
        if (dir == TransformDirection::GToF) {
            for (int x = 0; x < field.nx; ++x) o[x] = m * in[x];
        } else if (m == 0.0) {
            for (int x = 0; x < field.nx; ++x) o[x] = 0.0;
            zeros += static_cast<std::size_t>(field.nx);
        } else {
            for (int x = 0; x < field.nx; ++x) o[x] = in[x] / m;
        }
    }
    if (underflow_count) *underflow_count = zeros;
    return out;
}

double mu_factorization_residual(double t, const Vec3& v, const Vec3& v_star, const Vec3& sigma,
                                 const WeightParams& w) {
    auto [vp, vsp] = post_collision(v, v_star, sigma);
    double lhs = mu(t, v_star, w);
    double rhs = (1.0 / mu(t, v, w)) * mu(t, vsp, w) * mu(t, vp, w);
    return std::abs(lhs - rhs) / lhs;
}

}  // namespace ulbz
