#include "ulbz/collision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ulbz {

std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v_star, const Vec3& sigma) {
    Vec3 c = 0.5 * (v + v_star);
    double rh = 0.5 * norm(v - v_star);
    return {c + rh * sigma, c - rh * sigma};
}

CollisionWorkspace CollisionWorkspace::create(const SphereQuadrature& q, const CrossSectionParams& p, int nx) {
    CollisionWorkspace ws;
    int m = q.size();
    ws.ct.resize(m);
    ws.stcp.resize(m);
    ws.stsp.resize(m);
    ws.wb.resize(m);
    for (int i = 0; i < m; ++i) {
        ws.ct[i] = std::cos(q.theta[i]);
        double st = std::sin(q.theta[i]);
        ws.stcp[i] = st * std::cos(q.phi[i]);
        ws.stsp[i] = st * std::sin(q.phi[i]);
        ws.wb[i] = q.weight[i] * b_cutoff(q.theta[i], p);
        ws.sum_wb += ws.wb[i];
    }
    ws.acc_a.assign(nx, 0.0);
    ws.acc_b.assign(nx, 0.0);
    return ws;
}

namespace {

void check_shapes(const DistributionField& a, const DistributionField& b, const CollisionContext& cx) {
    if (a.nv != cx.vg.total() || b.nv != cx.vg.total() || a.nx != b.nx || a.nx != cx.sg.total())
        throw std::invalid_argument("collision operands must match the grids");
}

inline void gather8(const DistributionField& f, const TrilinearStencil& st, double* acc, int nx) {
    const double* r0 = f.row(st.idx[0]);
    for (int x = 0; x < nx; ++x) acc[x] = st.w[0] * r0[x];
    for (int p = 1; p < 8; ++p) {
        const double* r = f.row(st.idx[p]);
        const double w = st.w[p];
        for (int x = 0; x < nx; ++x) acc[x] += w * r[x];
    }
}

enum class Form { Gain, Bracket };

// Shared quadrature driver for the gain form and the fused bracket form.
template <Form FORM>
DistributionField quad_driver(const DistributionField& U, const DistributionField& V,
                              const std::vector<double>& M, const CollisionContext& cx) {
    check_shapes(U, V, cx);
    if (static_cast<int>(M.size()) != cx.vg.total())
        throw std::invalid_argument("weight sample must cover all v-nodes");

    const VelocityGrid& vg = cx.vg;
    const int nv = vg.total(), nx = U.nx, nm = cx.quad.size();
    const double h3 = vg.cell_volume();

    DistributionField out = U;
    out.time = V.time;
    std::fill(out.values.begin(), out.values.end(), 0.0);

    // compensation rows keep the mixed-sign bracket sums tight
    std::vector<double> comp;
    if (FORM == Form::Bracket) comp.assign(out.values.size(), 0.0);

    const CollisionWorkspace proto = CollisionWorkspace::create(cx.quad, cx.kern, nx);

#pragma omp parallel
    {
        std::vector<double> acc_a(nx), acc_b(nx);
#pragma omp for schedule(static)
        for (int i = 0; i < nv; ++i) {
            const Vec3 vi = vg.node(i);
            double* orow = out.row(i);
            double* crow = FORM == Form::Bracket ? comp.data() + static_cast<std::size_t>(i) * nx : nullptr;
            const double* vrow_i = V.row(i);
            for (int j = 0; j < nv; ++j) {
                if (j == i) continue;
                const Vec3 vj = vg.node(j);
                const Vec3 rel = vi - vj;
                const double r = norm(rel);
                const double amp = h3 * M[j] * phi_kinetic(r, cx.kern);
                if (amp == 0.0) continue;
                const Vec3 k = (1.0 / r) * rel;
                Vec3 e1, e2;
                orthonormal_frame(k, e1, e2);
                const Vec3 c = 0.5 * (vi + vj);
                const double rh = 0.5 * r;
                const double* urow_j = U.row(j);
                for (int m = 0; m < nm; ++m) {
                    const Vec3 sig{proto.ct[m] * k[0] + proto.stcp[m] * e1[0] + proto.stsp[m] * e2[0],
                                   proto.ct[m] * k[1] + proto.stcp[m] * e1[1] + proto.stsp[m] * e2[1],
                                   proto.ct[m] * k[2] + proto.stcp[m] * e1[2] + proto.stsp[m] * e2[2]};
                    const Vec3 vp = c + rh * sig;
                    const Vec3 vsp = c - rh * sig;
                    const TrilinearStencil sp = trilinear_stencil(vg, vp);
                    const TrilinearStencil ss = trilinear_stencil(vg, vsp);
                    const double s = amp * proto.wb[m];
                    const bool have_gain = sp.inside && ss.inside;
                    if (FORM == Form::Gain) {
                        if (!have_gain) continue;
                        gather8(U, ss, acc_a.data(), nx);
                        gather8(V, sp, acc_b.data(), nx);
                        for (int x = 0; x < nx; ++x) orow[x] += s * acc_a[x] * acc_b[x];
                    } else {
                        if (have_gain) {
                            gather8(U, ss, acc_a.data(), nx);
                            gather8(V, sp, acc_b.data(), nx);
                            for (int x = 0; x < nx; ++x) {
                                double term = s * (acc_a[x] * acc_b[x] - urow_j[x] * vrow_i[x]);
                                double t = orow[x] + term;
                                crow[x] += std::abs(orow[x]) >= std::abs(term) ? (orow[x] - t) + term
                                                                               : (term - t) + orow[x];
                                orow[x] = t;
                            }
                        } else {
                            for (int x = 0; x < nx; ++x) {
                                double term = -s * urow_j[x] * vrow_i[x];
                                double t = orow[x] + term;
                                crow[x] += std::abs(orow[x]) >= std::abs(term) ? (orow[x] - t) + term
                                                                               : (term - t) + orow[x];
                                orow[x] = t;
                            }
                        }
                    }
                }
            }
        }
    }
    if (FORM == Form::Bracket)
        for (std::size_t p = 0; p < out.values.size(); ++p) out.values[p] += comp[p];
    return out;
}

}  // namespace

DistributionField gain_quadrature(const DistributionField& U, const DistributionField& V,
                                  const std::vector<double>& M, const CollisionContext& cx) {
    return quad_driver<Form::Gain>(U, V, M, cx);
}

DistributionField t_form(const DistributionField& U, const DistributionField& V, const std::vector<double>& M,
                         const CollisionContext& cx) {
    return quad_driver<Form::Bracket>(U, V, M, cx);
}

DistributionField loss_quadrature(const DistributionField& U, const std::vector<double>& M,
                                  const CollisionContext& cx) {
    check_shapes(U, U, cx);
    const VelocityGrid& vg = cx.vg;
    const int nv = vg.total(), nx = U.nx;
    const double h3 = vg.cell_volume();
    const CollisionWorkspace proto = CollisionWorkspace::create(cx.quad, cx.kern, nx);

    DistributionField out = U;
    std::fill(out.values.begin(), out.values.end(), 0.0);

#pragma omp parallel for schedule(static)
    for (int i = 0; i < nv; ++i) {
        const Vec3 vi = vg.node(i);
        double* orow = out.row(i);
        for (int j = 0; j < nv; ++j) {
            if (j == i) continue;
            const double amp = h3 * M[j] * phi_kinetic(norm(vi - vg.node(j)), cx.kern) * proto.sum_wb;
            if (amp == 0.0) continue;
            const double* urow = U.row(j);
            for (int x = 0; x < nx; ++x) orow[x] += amp * urow[x];
        }
    }
    return out;
}

std::vector<double> sample_mu(double t, const VelocityGrid& vg, const WeightParams& w) {
    std::vector<double> M(vg.total());
    for (int j = 0; j < vg.total(); ++j) M[j] = mu_speed2(t, norm2(vg.node(j)), w);
    return M;
}

DistributionField gamma_gain(const DistributionField& g, const DistributionField& h, double t,
                             const WeightParams& w, const CollisionContext& cx) {
    return gain_quadrature(g, h, sample_mu(t, cx.vg, w), cx);
}

DistributionField loss_multiplier(const DistributionField& g, double t, const WeightParams& w,
                                  const CollisionContext& cx) {
    return loss_quadrature(g, sample_mu(t, cx.vg, w), cx);
}

DistributionField q_bilinear(const DistributionField& g, const DistributionField& f, const CollisionContext& cx) {
    return t_form(g, f, std::vector<double>(cx.vg.total(), 1.0), cx);
}

double Moments::max_abs() const {
    double m = std::max(std::abs(mass), std::abs(energy));
    for (double c : momentum) m = std::max(m, std::abs(c));
    return m;
}

Moments moments_of(const double* slice, const VelocityGrid& vg) {
    Kahan mass, m0, m1, m2, en;
    for (int j = 0; j < vg.total(); ++j) {
        Vec3 v = vg.node(j);
        double q = slice[j];
        mass.add(q);
        m0.add(q * v[0]);
        m1.add(q * v[1]);
        m2.add(q * v[2]);
        en.add(q * norm2(v));
    }
    double h3 = vg.cell_volume();
    return {h3 * mass.value(), {h3 * m0.value(), h3 * m1.value(), h3 * m2.value()}, h3 * en.value()};
}

Moments conservation_residual(const DistributionField& f, int x_index, const CollisionContext& cx) {
    DistributionField q = q_bilinear(f, f, cx);
    std::vector<double> slice(q.nv);
    for (int v = 0; v < q.nv; ++v) slice[v] = q.at(x_index, v);
    return moments_of(slice.data(), cx.vg);
}

std::vector<double> conservation_project(const std::vector<double>& q_slice, const std::vector<double>& f_slice,
                                         const VelocityGrid& vg) {
    (void)f_slice;
    const int nv = vg.total();
    if (static_cast<int>(q_slice.size()) != nv) throw std::invalid_argument("slice size must match the grid");
    if (vg.n < 4) throw std::invalid_argument("conservation projection needs n >= 4 (moment Gram degenerates)");

    // rows of the moment matrix: 1, v1, v2, v3, |v|^2 against the cell measure
    const double h3 = vg.cell_volume();
    std::array<std::vector<double>, 5> psi;
    for (auto& p : psi) p.resize(nv);
    for (int j = 0; j < nv; ++j) {
        Vec3 v = vg.node(j);
        psi[0][j] = h3;
        psi[1][j] = h3 * v[0];
        psi[2][j] = h3 * v[1];
        psi[3][j] = h3 * v[2];
        psi[4][j] = h3 * norm2(v);
    }

    double G[5][5], b[5];
    for (int a = 0; a < 5; ++a) {
        Kahan acc;
        for (int j = 0; j < nv; ++j) acc.add(psi[a][j] * q_slice[j]);
        b[a] = acc.value();
        for (int c = 0; c < 5; ++c) {
            Kahan g;
            for (int j = 0; j < nv; ++j) g.add(psi[a][j] * psi[c][j]);
            G[a][c] = g.value();
        }
    }

    // Gaussian elimination with partial pivoting on the 5x5 Gram system
    int piv[5] = {0, 1, 2, 3, 4};
    for (int c = 0; c < 5; ++c) {
        int best = c;
        for (int r2 = c + 1; r2 < 5; ++r2)
            if (std::abs(G[piv[r2]][c]) > std::abs(G[piv[best]][c])) best = r2;
        std::swap(piv[c], piv[best]);
        double d = G[piv[c]][c];
        if (d == 0.0) throw std::runtime_error("degenerate moment Gram matrix");
        for (int r2 = c + 1; r2 < 5; ++r2) {
            double f = G[piv[r2]][c] / d;
            for (int cc = c; cc < 5; ++cc) G[piv[r2]][cc] -= f * G[piv[c]][cc];
            b[piv[r2]] -= f * b[piv[c]];
        }
    }
    double lam[5];
    for (int c = 4; c >= 0; --c) {
        double s = b[piv[c]];
        for (int cc = c + 1; cc < 5; ++cc) s -= G[piv[c]][cc] * lam[cc];
        lam[c] = s / G[piv[c]][c];
    }

    std::vector<double> corrected = q_slice;
    for (int j = 0; j < nv; ++j)
        for (int a = 0; a < 5; ++a) corrected[j] -= lam[a] * psi[a][j];
    return corrected;
}

}  // namespace ulbz
