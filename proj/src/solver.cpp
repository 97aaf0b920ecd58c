#include "ulbz/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ulbz {

TimeChoice select_T(double C1, double C2, double D0, const WeightParams& w) {
    if (!(C1 > 0.0 && C2 > 0.0)) throw std::invalid_argument("select_T requires C1 > 0 and C2 > 0");
    if (!(D0 >= 0.0)) throw std::invalid_argument("select_T requires D0 >= 0");
    TimeChoice tc;
    tc.K0 = (2.0 * D0 + (1.0 + w.kappa) * (1.0 + w.kappa)) / w.kappa;
    double contraction_scale = w.kappa / (16.0 * C2 * D0 * D0);  // D0 = 0 gives +inf, harmless under min
    double T = std::min(std::log(2.0) / (C1 * tc.K0), contraction_scale);
    T = std::min(T, w.T0());
    T = std::min(T, 0.25 * contraction_scale);
    tc.T_choice = T;
    return tc;
}

double t_star(double C_kappa, double g0_norm) {
    if (!(C_kappa > 0.0)) throw std::invalid_argument("t_star requires C_kappa > 0");
    if (!(g0_norm >= 0.0)) throw std::invalid_argument("t_star requires a nonnegative norm");
    return std::log(1.0 + 3.0 / (1.0 + 4.0 * g0_norm * g0_norm)) / C_kappa;
}

namespace {

double uniform_dt(const std::vector<DistributionField>& seq) {
    if (seq.size() < 2) return 0.0;
    double dt = seq[1].time - seq[0].time;
    if (!(dt > 0.0)) throw std::invalid_argument("sequence times must increase");
    for (std::size_t i = 1; i < seq.size(); ++i)
        if (std::abs(seq[i].time - seq[i - 1].time - dt) > 1e-9 * std::max(1.0, dt))
            throw std::invalid_argument("sequence times must be uniform");
    return dt;
}

std::vector<double> damping_rates(const VelocityGrid& vg, double kappa) {
    std::vector<double> kv(vg.total());
    for (int v = 0; v < vg.total(); ++v) kv[v] = kappa * bracket2(vg.node(v));
    return kv;
}

}  // namespace

double v_factor(const std::vector<DistributionField>& g_seq, int j_t, int i_s, int x_index, int v_index,
                const ModelContext& mc) {
    if (j_t < 0 || j_t >= static_cast<int>(g_seq.size()) || i_s < 0 || i_s > j_t)
        throw std::invalid_argument("v_factor needs 0 <= i_s <= j_t < sequence length");
    double dt = uniform_dt(g_seq);
    if (i_s == j_t) return 0.0;

    double tj = g_seq[j_t].time;
    double acc = 0.0;
    for (int m = i_s; m <= j_t; ++m) {
        DistributionField L = loss_multiplier(g_seq[m], g_seq[m].time, mc.wt, mc.collision());
        DistributionField shifted = transport(L, mc.sg, mc.vg, tj - g_seq[m].time);
        double w = (m == i_s || m == j_t) ? 0.5 * dt : dt;
        acc += w * shifted.at(x_index, v_index);
    }
    return acc;
}

std::vector<DistributionField> mild_update(const std::vector<DistributionField>& g_seq,
                                           const DistributionField& g0, const ModelContext& mc,
                                           const std::vector<DistributionField>* gain_fields,
                                           const std::vector<DistributionField>* loss_fields) {
    const int nt = static_cast<int>(g_seq.size());
    if (nt == 0) throw std::invalid_argument("mild_update needs a nonempty sequence");
    if (std::abs(g_seq[0].time) > 1e-14) throw std::invalid_argument("sequence must start at t = 0");
    const double dt = uniform_dt(g_seq);
    const int nx = g0.nx, nv = g0.nv;

    std::vector<DistributionField> gains, losses;
    const std::vector<DistributionField>* G = gain_fields;
    const std::vector<DistributionField>* L = loss_fields;
    if (!G) {
        gains.reserve(nt);
        for (const auto& g : g_seq) gains.push_back(gamma_gain(g, g, g.time, mc.wt, mc.collision()));
        G = &gains;
    }
    if (!L) {
        losses.reserve(nt);
        for (const auto& g : g_seq) losses.push_back(loss_multiplier(g, g.time, mc.wt, mc.collision()));
        L = &losses;
    }

    const std::vector<double> kv = damping_rates(mc.vg, mc.wt.kappa);

    std::vector<DistributionField> out;
    out.reserve(nt);
    out.push_back(g0);
    out[0].time = g_seq[0].time;

    for (int j = 1; j < nt; ++j) {
        const double tj = g_seq[j].time;
        // everything sampled along the backward characteristic ending at (t_j, x, v)
        std::vector<DistributionField> SL, SG;
        SL.reserve(j + 1);
        SG.reserve(j + 1);
        for (int m = 0; m <= j; ++m) {
            SL.push_back(transport((*L)[m], mc.sg, mc.vg, tj - g_seq[m].time));
            SG.push_back(transport((*G)[m], mc.sg, mc.vg, tj - g_seq[m].time));
        }
        DistributionField T0 = transport(g0, mc.sg, mc.vg, tj);

        DistributionField res = g0;
        res.time = tj;

#pragma omp parallel for schedule(static)
        for (int v = 0; v < nv; ++v) {
            std::vector<double> Vx(nx, 0.0);
            double* o = res.row(v);
            const double* sgj = SG[j].row(v);
            for (int x = 0; x < nx; ++x) o[x] = 0.5 * dt * sgj[x];
            for (int m = j - 1; m >= 0; --m) {
                const double* slm = SL[m].row(v);
                const double* slm1 = SL[m + 1].row(v);
                for (int x = 0; x < nx; ++x) Vx[x] += 0.5 * dt * (slm[x] + slm1[x]);
                const double wm = m == 0 ? 0.5 * dt : dt;
                const double decay = std::exp(-kv[v] * (tj - g_seq[m].time));
                const double* sgm = SG[m].row(v);
                for (int x = 0; x < nx; ++x) o[x] += wm * decay * std::exp(-Vx[x]) * sgm[x];
            }
            const double e0 = std::exp(-kv[v] * tj);
            const double* t0 = T0.row(v);
            for (int x = 0; x < nx; ++x) o[x] += e0 * std::exp(-Vx[x]) * t0[x];
        }
        out.push_back(std::move(res));
    }
    return out;
}

std::pair<double, double> strong_form_residual(const std::vector<DistributionField>& seq,
                                               const ModelContext& mc) {
    const int nt = static_cast<int>(seq.size());
    if (nt < 3) return {0.0, 0.0};
    const double dt = uniform_dt(seq);
    const std::vector<double> kv = damping_rates(mc.vg, mc.wt.kappa);

    double rmax = 0.0;
    Kahan r2;
    for (int j = 1; j + 1 < nt; ++j) {
        DistributionField gain = gamma_gain(seq[j], seq[j], seq[j].time, mc.wt, mc.collision());
        DistributionField loss = loss_multiplier(seq[j], seq[j].time, mc.wt, mc.collision());
        DistributionField dx = finite_diff(seq[j], mc.sg, mc.vg, {1, 0, 0}, {0, 0, 0}, mc.norm.fd_order);
        for (int v = 0; v < seq[j].nv; ++v) {
            const double v1 = mc.vg.node(v)[0];
            const double* gp = seq[j + 1].row(v);
            const double* gm = seq[j - 1].row(v);
            const double* gc = seq[j].row(v);
            const double* dxr = dx.row(v);
            const double* gr = gain.row(v);
            const double* lr = loss.row(v);
            for (int x = 0; x < seq[j].nx; ++x) {
                double r = (gp[x] - gm[x]) / (2.0 * dt) + v1 * dxr[x] + kv[v] * gc[x] - (gr[x] - gc[x] * lr[x]);
                rmax = std::max(rmax, std::abs(r));
                r2.add(r * r);
            }
        }
    }
    double measure = std::pow(mc.sg.h, mc.sg.active_dims) * mc.vg.cell_volume() * dt;
    return {rmax, std::sqrt(measure * r2.value())};
}

std::pair<std::vector<DistributionField>, IterationReport> picard_solve(const DistributionField& g0,
                                                                        const ModelContext& mc,
                                                                        const SolveParams& sp) {
    if (!(sp.T > 0.0)) throw std::invalid_argument("picard_solve requires T > 0");
    if (sp.T > mc.wt.T0() * (1.0 + 1e-12))
        throw std::invalid_argument("picard_solve requires T <= rho/(2 kappa)");
    if (sp.n_steps < 1 || sp.n_max < 1) throw std::invalid_argument("picard_solve needs n_steps, n_max >= 1");

    const int nt = sp.n_steps + 1;
    const double dt = sp.T / sp.n_steps;

    std::vector<DistributionField> cur;
    cur.reserve(nt);
    for (int j = 0; j < nt; ++j) {
        cur.push_back(g0);
        cur.back().time = j * dt;
    }

    // t = 0 slot never changes across iterates
    const DistributionField gain0 = gamma_gain(g0, g0, 0.0, mc.wt, mc.collision());
    const DistributionField loss0 = loss_multiplier(g0, 0.0, mc.wt, mc.collision());

    IterationReport rep;
    double threshold = 0.0, prev_diff = 0.0;

    for (int n = 1; n <= sp.n_max; ++n) {
        std::vector<DistributionField> gains, losses;
        gains.reserve(nt);
        losses.reserve(nt);
        gains.push_back(gain0);
        losses.push_back(loss0);
        for (int j = 1; j < nt; ++j) {
            gains.push_back(gamma_gain(cur[j], cur[j], cur[j].time, mc.wt, mc.collision()));
            losses.push_back(loss_multiplier(cur[j], cur[j].time, mc.wt, mc.collision()));
        }

        std::vector<DistributionField> next = mild_update(cur, g0, mc, &gains, &losses);

        bool finite = true;
        double pos_min = 0.0;
        for (const auto& f : next)
            for (double x : f.values) {
                if (!std::isfinite(x)) finite = false;
                pos_min = std::min(pos_min, x);
            }

        IterationRecord rec;
        rec.n = n;
        rec.positivity_min = pos_min;
        if (!finite) {
            rep.nan_detected = true;
            rep.iterates.push_back(rec);
            rep.n_final = n;
            break;
        }

        std::vector<DistributionField> diff = next;
        for (int j = 0; j < nt; ++j)
            for (std::size_t p = 0; p < diff[j].values.size(); ++p) diff[j].values[p] -= cur[j].values[p];

        rec.y_norm = y_norm(next, mc.sg, mc.vg, mc.norm, mc.wt.kappa);
        rec.diff_y = y_norm(diff, mc.sg, mc.vg, mc.norm, mc.wt.kappa);
        rec.ratio = (n >= 2 && prev_diff > 0.0) ? rec.diff_y / prev_diff : 0.0;

        {
            DistributionField slice;  // x = 0 column of the final node, in f-representation
            slice.time = next.back().time;
            slice.rep = Rep::F;
            slice.nx = 1;
            slice.nv = next.back().nv;
            slice.values.resize(slice.nv);
            for (int v = 0; v < slice.nv; ++v)
                slice.values[v] = next.back().at(0, v) * mu_speed2(slice.time, norm2(mc.vg.node(v)), mc.wt);
            SpatialGrid point{1, mc.sg.L, 1, 2.0 * mc.sg.L};
            CollisionContext cx{point, mc.vg, mc.quad, mc.kern};
            rec.conservation = conservation_residual(slice, 0, cx);
        }

        rep.iterates.push_back(rec);
        rep.n_final = n;
        cur = std::move(next);

        if (n == 1) {
            threshold = sp.tol * rec.diff_y;
            rep.diff_threshold = threshold;
        }
        prev_diff = rec.diff_y;
        if (rec.diff_y <= threshold) {
            rep.converged = true;
            break;
        }
    }

    if (!rep.nan_detected) {
        auto [rmax, rl2] = strong_form_residual(cur, mc);
        rep.residual_max = rmax;
        rep.residual_l2 = rl2;
    }
    return {std::move(cur), rep};
}

}  // namespace ulbz
