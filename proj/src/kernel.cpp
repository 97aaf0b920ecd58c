#include "ulbz/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace ulbz {

CrossSectionParams make_cross_section_params(double gamma, double s, double K, double eps, double r_floor) {
    if (!(s > 0.0 && s < 0.5)) throw std::invalid_argument("cross-section requires 0 < s < 1/2");
    if (!(gamma > -1.5)) throw std::invalid_argument("cross-section requires gamma > -3/2");
    if (!(2.0 * s + gamma < 1.0)) throw std::invalid_argument("cross-section requires 2s + gamma < 1");
    if (!(eps > 0.0 && eps < M_PI / 4)) throw std::invalid_argument("cross-section requires 0 < eps < pi/4");
    if (!(K > 0.0)) throw std::invalid_argument("cross-section requires K > 0");
    if (!(r_floor >= 0.0)) throw std::invalid_argument("cross-section requires r_floor >= 0");
    return {gamma, s, K, eps, r_floor};
}

double b_angular(double theta, const CrossSectionParams& p) {
    if (!(theta > 0.0 && theta <= M_PI / 2)) throw std::domain_error("b_angular needs theta in (0, pi/2]");
    return p.K * std::pow(theta, -2.0 - 2.0 * p.s);
}

double b_cutoff(double theta, const CrossSectionParams& p) {
    if (!(theta > 0.0 && theta <= M_PI / 2)) throw std::domain_error("b_cutoff needs theta in (0, pi/2]");
    // tie at theta == 2 eps goes to the power branch
    return theta >= 2.0 * p.eps ? b_angular(theta, p) : b_angular(p.eps, p);
}

double phi_kinetic(double r, const CrossSectionParams& p) {
    if (r < 0.0) throw std::domain_error("phi_kinetic needs r >= 0");
    if (p.gamma == 0.0) return 1.0;
    if (p.gamma < 0.0) return std::pow(std::max(r, p.r_floor), p.gamma);
    return std::pow(r, p.gamma);
}

double cross_section(const Vec3& v, const Vec3& v_star, const Vec3& sigma, const CrossSectionParams& p) {
    Vec3 rel = v - v_star;
    double r = norm(rel);
    if (r == 0.0) return 0.0;
    double c = dot(rel, sigma) / r;
    if (c < 0.0) return 0.0;
    if (c > 1.0) c = 1.0;
    double theta = std::acos(c);
    double b = theta >= 2.0 * p.eps ? b_angular(std::min(theta, M_PI / 2), p) : b_angular(p.eps, p);
    return phi_kinetic(r, p) * b;
}

}  // namespace ulbz
