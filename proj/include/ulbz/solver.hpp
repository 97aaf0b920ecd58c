#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ulbz/collision.hpp"
#include "ulbz/norms.hpp"

namespace ulbz {

struct ModelContext {
    SpatialGrid sg;
    VelocityGrid vg;
    SphereQuadrature quad;
    CrossSectionParams kern;
    WeightParams wt;
    NormSpec norm;

    CollisionContext collision() const { return {sg, vg, quad, kern}; }
};

// K0 = (2 D0 + (1 + kappa)^2) / kappa and the horizon
// T = min( log 2 / (C1 K0), kappa / (16 C2 D0^2), T0 ) capped so that
// 16 C2 D0^2 T / kappa <= 1/4.
struct TimeChoice {
    double K0 = 0.0;
    double T_choice = 0.0;
};
TimeChoice select_T(double C1, double C2, double D0, const WeightParams& w);

// T_* = log(1 + 3 / (1 + 4 ||g0||^2)) / C_kappa
double t_star(double C_kappa, double g0_norm);

// Damping exponent V(t, s) at (x, v): trapezoid along the backward
// characteristic of the loss fields of the sequence, node times t_i <= t_j.
double v_factor(const std::vector<DistributionField>& g_seq, int j_t, int i_s, int x_index, int v_index,
                const ModelContext& mc);

// One Picard sweep in mild form: from iterate sequence g^n (uniform nodes over
// [0, T]) and data g0, produce g^{n+1} on the same nodes.  Gain and loss fields
// of g^n may be supplied pre-computed (matching the node times) to share work.
std::vector<DistributionField> mild_update(const std::vector<DistributionField>& g_seq,
                                           const DistributionField& g0, const ModelContext& mc,
                                           const std::vector<DistributionField>* gain_fields = nullptr,
                                           const std::vector<DistributionField>* loss_fields = nullptr);

struct IterationRecord {
    int n = 0;
    double y_norm = 0.0;
    double diff_y = 0.0;       // ||g^n - g^{n-1}||_Y
    double ratio = 0.0;        // diff_y(n) / diff_y(n-1), 0 when undefined
    double positivity_min = 0.0;
    Moments conservation;      // residual moments at the final node, slice x = 0
};

struct IterationReport {
    std::vector<IterationRecord> iterates;
    bool converged = false;
    bool nan_detected = false;
    int n_final = 0;
    double diff_threshold = 0.0;
    double residual_max = 0.0;  // strong-form defect of the returned sequence
    double residual_l2 = 0.0;
};

struct SolveParams {
    double T = 0.0;
    int n_steps = 8;       // nodes = n_steps + 1
    double tol = 1e-6;     // relative to the first Y-difference
    int n_max = 25;
};

std::pair<std::vector<DistributionField>, IterationReport> picard_solve(const DistributionField& g0,
                                                                        const ModelContext& mc,
                                                                        const SolveParams& sp);

// Discrete defect of the modified equation on interior time nodes:
// d_t g + v1 d_x g + kappa <v>^2 g - (gain - g loss); max-abs and L2 norms.
std::pair<double, double> strong_form_residual(const std::vector<DistributionField>& seq,
                                               const ModelContext& mc);

}  // namespace ulbz
