#pragma once

#include "ulbz/common.hpp"

namespace ulbz {

// Non-cutoff power-law cross-section B = |v - v_*|^gamma * K theta^(-2-2s),
// plateau-regularized below angle 2*eps.  Admissible ranges: 0 < s < 1/2,
// gamma > -3/2, 2s + gamma < 1.
struct CrossSectionParams {
    double gamma = -0.5;
    double s = 0.25;
    double K = 1.0;
    double eps = 0.2;
    double r_floor = 0.0;
};

// validates the admissibility inequalities, eps in (0, pi/4), K > 0, r_floor >= 0
CrossSectionParams make_cross_section_params(double gamma, double s, double K, double eps, double r_floor);

double b_angular(double theta, const CrossSectionParams& p);  // K theta^(-2-2s), theta in (0, pi/2]
double b_cutoff(double theta, const CrossSectionParams& p);   // b(theta) for theta >= 2 eps, else b(eps)
double phi_kinetic(double r, const CrossSectionParams& p);    // max(r, r_floor)^gamma for gamma < 0, r^gamma else

// Full kernel at (v, v_*, sigma); 0 when v = v_* or cos(theta) < 0.
double cross_section(const Vec3& v, const Vec3& v_star, const Vec3& sigma, const CrossSectionParams& p);

}  // namespace ulbz
