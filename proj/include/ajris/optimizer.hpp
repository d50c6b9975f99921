#ifndef AJRIS_OPTIMIZER_HPP
#define AJRIS_OPTIMIZER_HPP

#include "ajris/channel.hpp"
#include "ajris/qcqp.hpp"
#include "ajris/saa.hpp"
#include "ajris/system.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace ajris {

enum class Scheme {
    Active,  ///< self-sustained active RIS with the two-stage split
    Passive, ///< unit-modulus RIS, whole period for data
    NoRis,   ///< transmit beamforming only
};

inline const char* to_string(Scheme s)
{
    switch (s) {
    case Scheme::Active: return "active-harvesting";
    case Scheme::Passive: return "passive-ris";
    case Scheme::NoRis: return "no-ris";
    }
    return "unknown";
}

inline Scheme scheme_from_string(const std::string& name)
{
    if (name == "active-harvesting" || name == "active")
        return Scheme::Active;
    if (name == "passive-ris" || name == "passive")
        return Scheme::Passive;
    if (name == "no-ris" || name == "noris")
        return Scheme::NoRis;
    throw Error(ErrorCode::BadParams, "unknown scheme '" + name + "'");
}

// ---------------------------------------------------------------------------------------------
// tau

/// tau = P_R / (P_R + eta1 sum_k ||G w1_k||^2); makes the energy constraint hold with equality.
inline double update_tau(double p_r, const Beams& w1, const CMatrix& g_br, double eta1)
{
    const double harvest = harvested_energy(w1, 1.0, g_br, eta1);
    if (!(p_r >= 0.0) || !(harvest >= 0.0) || p_r + harvest <= 0.0)
        throw Error(ErrorCode::DegenerateTau, "update_tau: P_R and the harvest term are both zero");
    return p_r / (p_r + harvest);
}

// ---------------------------------------------------------------------------------------------
// quadratic transform

struct AuxVars {
    RVector omega;
    CVector nu;
};

/// omega_k = SINR_k, nu_k = sqrt(1 + omega_k) h_k^H w_k / D_k with D_k the full received power
/// sum_j |h_k^H w_j|^2 + extra_k.
inline AuxVars quadratic_transform_aux(const std::vector<CVector>& h, const Beams& w, const RVector& extra)
{
    const int K = static_cast<int>(h.size());
    AuxVars a;
    a.omega = RVector::Zero(K);
    a.nu = CVector::Zero(K);
    for (int k = 0; k < K; ++k) {
        const cplx s = h[k].dot(w[k]);
        double interf = extra(k);
        for (int j = 0; j < K; ++j)
            if (j != k)
                interf += std::norm(h[k].dot(w[j]));
        const double den = interf + std::norm(s);
        if (den <= 0.0)
            continue;
        a.omega(k) = interf > 0.0 ? std::norm(s) / interf : 0.0;
        a.nu(k) = std::sqrt(1.0 + a.omega(k)) * s / den;
    }
    return a;
}

/// sum_k [ln(1 + omega) - omega + 2 sqrt(1 + omega) Re{nu^* h^H w_k} - |nu|^2 D_k]
inline double quadratic_transform_value(const std::vector<CVector>& h, const Beams& w, const RVector& extra,
                                        const AuxVars& a)
{
    double v = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        double den = extra(static_cast<Eigen::Index>(k));
        for (const auto& wj : w)
            den += std::norm(h[k].dot(wj));
        const double om = a.omega(static_cast<Eigen::Index>(k));
        const cplx nu = a.nu(static_cast<Eigen::Index>(k));
        v += std::log1p(om) - om + 2.0 * std::sqrt(1.0 + om) * (std::conj(nu) * h[k].dot(w[k])).real() -
             std::norm(nu) * den;
    }
    return v;
}

namespace detail {

inline RVector stage1_extra(const SaaStats& s, double sigma1_sq)
{
    return (s.z1.array() + sigma1_sq).matrix();
}

inline std::vector<CVector> effective_channels(const ChannelSet& cs, const CVector& theta)
{
    std::vector<CVector> h;
    for (int k = 0; k < cs.k(); ++k)
        h.push_back(effective_channel(cs, k, theta));
    return h;
}

inline RVector stage2_extra(const ChannelSet& cs, const CVector& theta, const SaaStats& s, const PowerModel& pm)
{
    RVector e(cs.k());
    for (int k = 0; k < cs.k(); ++k)
        e(k) = pm.sigmar_sq * ris_noise_gain(cs, k, theta) + mean_stage2_interference(s, k, theta, cs) + pm.sigma2_sq;
    return e;
}

} // namespace detail

inline AuxVars update_aux_stage1(const Beams& w1, const ChannelSet& cs, const SaaStats& stats, double sigma1_sq)
{
    return quadratic_transform_aux(cs.h_bu, w1, detail::stage1_extra(stats, sigma1_sq));
}

inline double surrogate_stage1(const Beams& w1, const AuxVars& a, const ChannelSet& cs, const SaaStats& stats,
                               double sigma1_sq)
{
    return quadratic_transform_value(cs.h_bu, w1, detail::stage1_extra(stats, sigma1_sq), a);
}

inline AuxVars update_aux_stage2(const Beams& w2, const CVector& theta, const ChannelSet& cs, const SaaStats& stats,
                                 const PowerModel& pm)
{
    return quadratic_transform_aux(detail::effective_channels(cs, theta), w2,
                                   detail::stage2_extra(cs, theta, stats, pm));
}

inline double surrogate_stage2(const Beams& w2, const CVector& theta, const AuxVars& a, const ChannelSet& cs,
                               const SaaStats& stats, const PowerModel& pm)
{
    return quadratic_transform_value(detail::effective_channels(cs, theta), w2,
                                     detail::stage2_extra(cs, theta, stats, pm), a);
}

// ---------------------------------------------------------------------------------------------
// first-stage beams

/// Linearized energy coupling: 2 tau eta1 sum_k Re{w_k^(i)H K1 w_k} >= (1 - tau) P_R + tau eta1 sum_k w_k^(i)H K1 w_k^(i).
struct EnergyLink {
    CMatrix k1;          ///< G^H G
    double tau_eta = 0.0; ///< tau eta1
    double demand = 0.0;  ///< (1 - tau) P_R
};

struct BeamSolveResult {
    Beams w;
    int iterations = 0;
    std::vector<double> trace; ///< surrogate value after each SCA step
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double kkt_residual = 0.0;
};

/// sum_k 2 Re{K3_k^H w_k} - w_k^H K2 w_k with K2 = sum_k |nu_k|^2 h_k h_k^H and
/// K3_k = sqrt(1 + omega_k) nu_k h_k; equals the surrogate up to w-independent terms.
inline double beam_surrogate(const std::vector<CVector>& h, const AuxVars& a, const Beams& w)
{
    double v = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const Eigen::Index kk = static_cast<Eigen::Index>(k);
        const cplx k3w = std::sqrt(1.0 + a.omega(kk)) * std::conj(a.nu(kk)) * h[k].dot(w[k]);
        v += 2.0 * k3w.real();
        for (std::size_t j = 0; j < h.size(); ++j)
            v -= std::norm(a.nu(static_cast<Eigen::Index>(j))) * std::norm(h[j].dot(w[k]));
    }
    return v;
}

/// Per-iteration closed form w_k(l1, l2) = (K2 + l1 I)^-1 (K3_k + l2 tau eta1 K1 w_k^(i)),
/// with l2 from complementary slackness of the linear energy constraint and l1 by bisection on
/// the transmit power. Without an energy link this is the plain power-constrained solve.
inline BeamSolveResult solve_beams_closed_form(const std::vector<CVector>& h, const AuxVars& a, const Beams& w0,
                                               double p_max, const EnergyLink* energy, int i_max, double tol)
{
    const int K = static_cast<int>(h.size());
    const Eigen::Index N = h.empty() ? 0 : h[0].size();
    CMatrix k2 = CMatrix::Zero(N, N);
    for (int k = 0; k < K; ++k)
        k2 += std::norm(a.nu(k)) * h[k] * h[k].adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(k2));
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::NumericalFailure, "solve_w1: eigendecomposition failed");
    const CMatrix u = es.eigenvectors();
    const RVector d = es.eigenvalues().cwiseMax(0.0);
    const double dmax = std::max(d.size() ? d.maxCoeff() : 0.0, 1e-300);
    const double floor = 1e-13 * dmax;

    std::vector<CVector> beta(K);
    for (int k = 0; k < K; ++k)
        beta[k] = u.adjoint() * (std::sqrt(1.0 + a.omega(k)) * a.nu(k) * h[k]);

    BeamSolveResult res;
    res.w = w0;
    double f_cur = beam_surrogate(h, a, res.w);

    for (int it = 0; it < i_max; ++it) {
        std::vector<CVector> gam(K, CVector::Zero(N));
        double xi1 = 0.0;
        if (energy) {
            double lin = 0.0;
            for (int k = 0; k < K; ++k) {
                const CVector c = energy->tau_eta * (energy->k1 * res.w[k]);
                gam[k] = u.adjoint() * c;
                lin += res.w[k].dot(c).real();
            }
            xi1 = energy->demand + lin;
        }
        const bool use_energy = energy && xi1 > 0.0;

        // Terms with (d_i + l1) at the floor are dropped when their numerators vanish and make
        // the point infeasible otherwise.
        struct Point {
            double lambda2 = 0.0;
            double power = 0.0;
        };
        auto evaluate = [&](double l1) -> Point {
            Point p;
            if (use_energy) {
                double l0 = 0.0, lg = 0.0;
                for (int k = 0; k < K; ++k)
                    for (Eigen::Index i = 0; i < N; ++i) {
                        const double den = d(i) + l1;
                        if (den <= floor)
                            continue;
                        l0 += 2.0 * (std::conj(gam[k](i)) * beta[k](i)).real() / den;
                        lg += 2.0 * std::norm(gam[k](i)) / den;
                    }
                if (l0 < xi1) {
                    if (lg <= 0.0) {
                        p.power = std::numeric_limits<double>::infinity();
                        return p;
                    }
                    p.lambda2 = (xi1 - l0) / lg;
                }
            }
            for (int k = 0; k < K; ++k)
                for (Eigen::Index i = 0; i < N; ++i) {
                    const cplx num = beta[k](i) + p.lambda2 * gam[k](i);
                    const double den = d(i) + l1;
                    if (den <= floor) {
                        if (std::abs(num) > 1e-12 * (std::abs(beta[k](i)) + 1e-300) && std::abs(num) > 0.0)
                            p.power = std::numeric_limits<double>::infinity();
                        continue;
                    }
                    p.power += std::norm(num) / (den * den);
                }
            return p;
        };
        auto beams_at = [&](double l1, double l2) {
            Beams w(K);
            for (int k = 0; k < K; ++k) {
                CVector t(N);
                for (Eigen::Index i = 0; i < N; ++i) {
                    const double den = d(i) + l1;
                    t(i) = den <= floor ? cplx(0.0, 0.0) : (beta[k](i) + l2 * gam[k](i)) / den;
                }
                w[k] = u * t;
            }
            return w;
        };

        double l1 = 0.0;
        Point pt = evaluate(0.0);
        if (!(pt.power <= p_max)) {
            double hi = std::max(1e-9 * dmax, 1e-300);
            Point phi = evaluate(hi);
            int guard = 0;
            while (!(phi.power <= p_max) && guard++ < 400) {
                hi *= 2.0;
                phi = evaluate(hi);
            }
            if (!(phi.power <= p_max))
                break; // no feasible multiplier found; keep the current beams
            double lo = guard == 0 ? 0.0 : hi * 0.5;
            for (int b = 0; b < 200; ++b) {
                if (std::abs(phi.power - p_max) <= 1e-10 * p_max || hi - lo <= 1e-15 * hi)
                    break;
                const double mid = 0.5 * (lo + hi);
                const Point pm = evaluate(mid);
                if (pm.power <= p_max) {
                    hi = mid;
                    phi = pm;
                } else {
                    lo = mid;
                }
            }
            l1 = hi;
            pt = phi;
        }
        Beams w_new = beams_at(l1, pt.lambda2);
        const double pw = beam_power(w_new);
        if (pw > p_max)
            w_new = scale_beams(std::move(w_new), std::sqrt(p_max / pw));
        if (energy) {
            // The linearization under-estimates ||G w||^2, so the true constraint holds whenever
            // the linear one does; guard against round-off anyway.
            double harvest = 0.0;
            for (const auto& w : w_new)
                harvest += (energy->k1 * w).dot(w).real();
            if (energy->tau_eta * harvest < energy->demand * (1.0 - 1e-12))
                break;
        }
        const double f_new = beam_surrogate(h, a, w_new);
        ++res.iterations;
        if (f_new < f_cur - 1e-12 * std::abs(f_cur)) {
            res.trace.push_back(f_cur);
            break;
        }
        res.lambda1 = l1;
        res.lambda2 = pt.lambda2;
        const double change = std::abs(f_new - f_cur);
        res.w = std::move(w_new);
        f_cur = f_new;
        res.trace.push_back(f_cur);

        // stationarity of the Lagrangian at the returned point
        double r2 = 0.0, b2 = 0.0;
        for (int k = 0; k < K; ++k) {
            CVector g = (k2 * res.w[k] + l1 * res.w[k]) - u * beta[k];
            if (use_energy)
                g -= pt.lambda2 * (u * gam[k]);
            r2 += g.squaredNorm();
            b2 += beta[k].squaredNorm();
        }
        res.kkt_residual = std::sqrt(r2 / std::max(b2, 1e-300));
        if (change <= tol * std::abs(f_cur))
            break;
    }
    return res;
}

/// First-stage beams for the current tau, auxiliaries (st.omega1, st.nu1) and P_R(W2, theta).
inline BeamSolveResult solve_w1_detailed(const SolverState& st, const ChannelSet& cs, const PowerModel& pm, int i_max,
                                         double tol)
{
    AuxVars a{st.omega1, st.nu1};
    std::optional<EnergyLink> link;
    if (cs.m() > 0 && st.tau > 0.0) {
        EnergyLink e;
        e.k1 = hermitian_part(cs.g_br.adjoint() * cs.g_br);
        e.tau_eta = st.tau * pm.eta1;
        e.demand = (1.0 - st.tau) * ris_power(st.w2, st.theta, cs.g_br, pm);
        link = e;
    }
    return solve_beams_closed_form(cs.h_bu, a, st.w1, pm.p_max, link ? &*link : nullptr, i_max, tol);
}

inline Beams solve_w1(const SolverState& st, const ChannelSet& cs, const SaaStats& /*stats*/, const PowerModel& pm,
                      int i_max = 15, double tol = 1e-3)
{
    return solve_w1_detailed(st, cs, pm, i_max, tol).w;
}

// ---------------------------------------------------------------------------------------------
// second-stage beams

namespace detail {

inline CVector stack(const Beams& w)
{
    const Eigen::Index n = w.empty() ? 0 : w[0].size();
    CVector out(n * static_cast<Eigen::Index>(w.size()));
    for (std::size_t k = 0; k < w.size(); ++k)
        out.segment(static_cast<Eigen::Index>(k) * n, n) = w[k];
    return out;
}

inline Beams unstack(const CVector& x, int k_count)
{
    const Eigen::Index n = x.size() / k_count;
    Beams w(k_count);
    for (int k = 0; k < k_count; ++k)
        w[k] = x.segment(k * n, n);
    return w;
}

inline CMatrix block_diagonal(const CMatrix& blk, int copies)
{
    const Eigen::Index n = blk.rows();
    CMatrix out = CMatrix::Zero(n * copies, n * copies);
    for (int k = 0; k < copies; ++k)
        out.block(k * n, k * n, n, n) = blk;
    return out;
}

} // namespace detail

/// Data of the stacked problem max Re{y^H w} - w^H Y w, ||w||^2 <= P_max, w^H S w <= P_E.
struct W2Problem {
    CVector y;
    CMatrix big_y;
    CMatrix s;
    double p_e = 0.0;
    bool energy = true;
};

/// Builds y, Y = I_K (x) sum_k |nu_k|^2 h_k h_k^H, S = I_K (x) G^H Theta^H Theta G and
/// P_E = E_R / ((1 - tau) xi) - M (P_dc + P_sc) / xi - sigma_R^2 ||theta||^2.
inline W2Problem assemble_w2(const SolverState& st, const ChannelSet& cs, const PowerModel& pm, bool energy = true)
{
    const int K = cs.k();
    const std::vector<CVector> h = detail::effective_channels(cs, st.theta);
    const Eigen::Index N = cs.n();
    W2Problem p;
    p.energy = energy && cs.m() > 0;
    p.y = CVector(N * K);
    CMatrix blk = CMatrix::Zero(N, N);
    for (int k = 0; k < K; ++k) {
        p.y.segment(k * N, N) = 2.0 * std::sqrt(1.0 + st.omega2(k)) * st.nu2(k) * h[k];
        blk += std::norm(st.nu2(k)) * h[k] * h[k].adjoint();
    }
    p.big_y = detail::block_diagonal(hermitian_part(blk), K);
    if (p.energy) {
        const CMatrix tg = st.theta.asDiagonal() * cs.g_br;
        p.s = detail::block_diagonal(hermitian_part(tg.adjoint() * tg), K);
        const double er = harvested_energy(st.w1, st.tau, cs.g_br, pm.eta1);
        const double m = static_cast<double>(cs.m());
        p.p_e = er / ((1.0 - st.tau) * pm.xi) - m * (pm.p_dc + pm.p_sc) / pm.xi - pm.sigmar_sq * st.theta.squaredNorm();
    }
    return p;
}

inline double w2_objective(const W2Problem& p, const Beams& w)
{
    return concave_quadratic_value(p.big_y, p.y, detail::stack(w));
}

/// Maximizes the stacked second-stage objective over the ball and, when enabled, the energy
/// ellipsoid. Returns the stacked vector, shrunk onto both sets if round-off left it outside.
inline CVector solve_w2_problem(W2Problem p, double p_max, const CVector* warm = nullptr)
{
    QcqpProblem q;
    q.b = p.y;
    q.a = p.big_y;
    const Eigen::Index dim = p.y.size();
    q.constraints.push_back({CMatrix::Identity(dim, dim), p_max});
    if (p.energy) {
        const double scale = std::max({std::abs(p.p_e), p.s.cwiseAbs().maxCoeff() * p_max, 1e-300});
        if (p.p_e < 0.0 && p.p_e > -1e-12 * scale)
            p.p_e = 0.0;
        if (p.p_e < 0.0)
            throw Error(ErrorCode::EnergyInfeasible,
                        "solve_w2: harvested energy cannot cover the static and noise load (P_E = " +
                            std::to_string(p.p_e) + ")");
        q.constraints.push_back({p.s, p.p_e});
    }
    QcqpOptions opt;
    opt.validate = false;
    CVector x = solve_concave_qcqp_result(q, opt, warm).x;
    double shrink = 1.0;
    const double pw = x.squaredNorm();
    if (pw > p_max)
        shrink = std::min(shrink, std::sqrt(p_max / pw));
    if (p.energy) {
        const double se = quad_form(p.s, x);
        if (se > p.p_e)
            shrink = std::min(shrink, p.p_e > 0.0 ? std::sqrt(p.p_e / se) : 0.0);
    }
    return x * shrink;
}

/// Second-stage beams for the current auxiliaries (st.omega2, st.nu2). With `energy` false the
/// energy constraint is dropped (passive baseline). The current beams are kept if the solve does
/// not improve on them.
inline Beams solve_w2(const SolverState& st, const ChannelSet& cs, const SaaStats& /*stats*/, const PowerModel& pm,
                      bool energy = true)
{
    const W2Problem p = assemble_w2(st, cs, pm, energy);
    const CVector x = solve_w2_problem(p, pm.p_max);
    Beams w = detail::unstack(x, cs.k());
    if (w2_objective(p, w) < w2_objective(p, st.w2))
        return st.w2;
    return w;
}

// ---------------------------------------------------------------------------------------------
// reflection vector

/// Data of max Re{Lambda^H theta} - theta^H Gamma theta, theta^H V theta <= P_E~, |theta_m| <= cap.
struct ThetaProblem {
    CMatrix gamma;
    CVector lambda;
    RVector v;
    double p_e = 0.0;
};

/// Gamma = sum_k |nu_k|^2 [sum_q Mbar_qk + sum_j b_kj b_kj^H + sigma_R^2 diag(|h_RU,k|^2)],
/// Lambda = sum_k [2 sqrt(1 + omega_k) nu_k b_kk - 2 |nu_k|^2 (sum_j e_kj b_kj + conj(dt_k) .* h_RU,k)],
/// with b_kj = conj(G w2_j) .* h_RU,k, e_kj = h_BU,k^H w2_j and dt_k = sum_q mean(conj(d_qk) t_qk).
inline ThetaProblem assemble_theta(const SolverState& st, const ChannelSet& cs, const SaaStats& stats,
                                   const PowerModel& pm)
{
    const int K = cs.k();
    const Eigen::Index M = cs.m();
    ThetaProblem p;
    p.gamma = CMatrix::Zero(M, M);
    p.lambda = CVector::Zero(M);
    std::vector<CVector> mu(K);
    for (int j = 0; j < K; ++j)
        mu[j] = cs.g_br * st.w2[j];
    RVector v = RVector::Constant(M, pm.sigmar_sq);
    for (int j = 0; j < K; ++j)
        v += mu[j].cwiseAbs2();
    p.v = v;
    for (int k = 0; k < K; ++k) {
        const double nu2 = std::norm(st.nu2(k));
        const CVector& hr = cs.h_ru[k];
        CMatrix g = stats.mbar_sum(k, M);
        CVector lin = CVector::Zero(M);
        for (int j = 0; j < K; ++j) {
            const CVector b = mu[j].conjugate().cwiseProduct(hr);
            g += b * b.adjoint();
            lin += cs.h_bu[k].dot(st.w2[j]) * b;
        }
        g.diagonal() += (pm.sigmar_sq * hr.cwiseAbs2()).cast<cplx>();
        p.gamma += nu2 * g;
        const CVector bkk = mu[k].conjugate().cwiseProduct(hr);
        lin += stats.dt_sum(k, M).conjugate().cwiseProduct(hr);
        p.lambda += 2.0 * std::sqrt(1.0 + st.omega2(k)) * st.nu2(k) * bkk - 2.0 * nu2 * lin;
    }
    p.gamma = hermitian_part(p.gamma);
    const double er = harvested_energy(st.w1, st.tau, cs.g_br, pm.eta1);
    p.p_e = er / ((1.0 - st.tau) * pm.xi) - static_cast<double>(M) * (pm.p_dc + pm.p_sc) / pm.xi;
    return p;
}

inline double theta_objective(const ThetaProblem& p, const CVector& theta)
{
    return concave_quadratic_value(p.gamma, p.lambda, theta);
}

/// Maximizes the reflection objective under |theta_m| <= cap and the energy ellipsoid.
inline CVector solve_theta_problem(ThetaProblem p, double cap, const CVector* warm = nullptr,
                                   QcqpResult* detail_out = nullptr)
{
    const Eigen::Index m = p.lambda.size();
    const double scale = std::max({std::abs(p.p_e), p.v.maxCoeff() * cap * cap * static_cast<double>(m), 1e-300});
    if (p.p_e < 0.0 && p.p_e > -1e-12 * scale)
        p.p_e = 0.0;
    if (p.p_e < 0.0)
        throw Error(ErrorCode::EnergyInfeasible,
                    "solve_theta: harvested energy cannot cover the static load (P_E~ = " + std::to_string(p.p_e) +
                        ")");
    QcqpProblem q;
    q.b = p.lambda;
    q.a = p.gamma;
    q.caps = RVector::Constant(m, cap);
    q.constraints.push_back({CMatrix(p.v.cast<cplx>().asDiagonal()), p.p_e});
    QcqpOptions opt;
    opt.validate = false;
    const QcqpResult r = solve_concave_qcqp_result(q, opt, warm);
    if (detail_out)
        *detail_out = r;
    CVector x = project_magnitude_caps(r.x, *q.caps);
    const double load = p.v.dot(x.cwiseAbs2());
    if (load > p.p_e)
        x *= p.p_e > 0.0 ? std::sqrt(p.p_e / load) : 0.0;
    return x;
}

/// Active-RIS reflection update: caps A_max plus the energy ellipsoid, warm-started at the
/// current (feasible) theta, which is kept if the solve does not improve on it.
inline CVector solve_theta(const SolverState& st, const ChannelSet& cs, const SaaStats& stats, const PowerModel& pm)
{
    if (cs.m() == 0)
        return st.theta;
    const ThetaProblem p = assemble_theta(st, cs, stats, pm);
    const CVector x = solve_theta_problem(p, pm.a_max, &st.theta);
    if (theta_objective(p, x) < theta_objective(p, st.theta))
        return st.theta;
    return x;
}

/// Passive-RIS reflection update: relaxed solve with caps 1, then element-wise phase ascent on
/// the unit circle. Output has |theta_m| = 1.
inline CVector solve_theta_unit_modulus(const SolverState& st, const ChannelSet& cs, const SaaStats& stats,
                                        const PowerModel& pm, int sweeps = 50)
{
    const Eigen::Index M = cs.m();
    if (M == 0)
        return st.theta;
    const ThetaProblem p = assemble_theta(st, cs, stats, pm);
    auto to_unit = [](const CVector& x, const CVector& fallback) {
        CVector u(x.size());
        for (Eigen::Index m = 0; m < x.size(); ++m) {
            const double a = std::abs(x(m));
            u(m) = a > 0.0 ? x(m) / a : fallback(m) / std::abs(fallback(m));
        }
        return u;
    };
    auto ascend = [&](CVector th) {
        double f = theta_objective(p, th);
        for (int s = 0; s < sweeps; ++s) {
            for (Eigen::Index m = 0; m < M; ++m) {
                // linear coefficient of theta_m with the others fixed
                const cplx c = p.lambda(m) - 2.0 * (p.gamma.row(m).dot(th.conjugate()) - p.gamma(m, m) * th(m));
                // maximize Re{conj(c) theta_m}: theta_m = c / |c|
                if (std::abs(c) > 0.0)
                    th(m) = c / std::abs(c);
            }
            const double fn = theta_objective(p, th);
            const bool done = std::abs(fn - f) <= 1e-12 * std::abs(fn);
            f = fn;
            if (done)
                break;
        }
        return th;
    };

    QcqpProblem q;
    q.b = p.lambda;
    q.a = p.gamma;
    q.caps = RVector::Constant(M, 1.0);
    QcqpOptions opt;
    opt.validate = false;
    opt.max_iter = 5000;
    const QcqpResult relaxed = solve_concave_qcqp_result(q, opt, &st.theta);

    const CVector from_current = ascend(st.theta);
    const CVector from_relaxed = ascend(to_unit(relaxed.x, st.theta));
    CVector best = theta_objective(p, from_relaxed) > theta_objective(p, from_current) ? from_relaxed : from_current;
    if (theta_objective(p, best) < theta_objective(p, st.theta))
        return st.theta;
    return best;
}

// ---------------------------------------------------------------------------------------------
// alternating optimization

struct AoReport {
    Scheme scheme = Scheme::Active;
    std::vector<double> objective_nats; ///< per iteration, sample-mean interference
    std::vector<double> objective_bits;
    std::vector<double> tau_trace;
    std::vector<double> tau_tightness; ///< |E_R - (1 - tau) P_R| / max(E_R, (1 - tau) P_R) after each tau update
    std::vector<double> min_slack;     ///< worst constraint slack after each iteration
    double time_tau = 0.0;
    double time_w1 = 0.0;
    double time_w2 = 0.0;
    double time_theta = 0.0;
    SolverState state;
    SaaStats stats;
    bool converged = false;
    int iterations = 0;
    FeasibilityReport feasibility;
    bool energy_infeasible = false;
    int failed_iteration = -1;
    std::string error;
};

/// Equal-power matched filters towards h_BU,k.
inline Beams matched_filter_beams(const ChannelSet& cs, double p_max)
{
    Beams w;
    const double per = std::sqrt(p_max / static_cast<double>(cs.k()));
    for (int k = 0; k < cs.k(); ++k) {
        const double n = cs.h_bu[k].norm();
        w.push_back(n > 0.0 ? CVector(per * cs.h_bu[k] / n) : CVector::Zero(cs.n()));
    }
    return w;
}

/// Amplitude `amp` with phases that make every reflected contribution to UE 1 add in phase
/// with its direct signal under beams w.
inline CVector aligned_theta(const ChannelSet& cs, const Beams& w, double amp)
{
    const Eigen::Index M = cs.m();
    CVector th(M);
    if (M == 0)
        return th;
    const cplx direct = cs.h_bu[0].dot(w[0]);
    const CVector gw = cs.g_br * w[0];
    const double ref = std::arg(direct);
    for (Eigen::Index m = 0; m < M; ++m) {
        const cplx path = std::conj(cs.h_ru[0](m)) * gw(m);
        th(m) = std::polar(amp, ref - std::arg(path));
    }
    return th;
}

inline SolverState initial_state(const ChannelSet& cs, const PowerModel& pm, Scheme scheme)
{
    SolverState st;
    const int K = cs.k();
    st.w2 = matched_filter_beams(cs, pm.p_max);
    st.omega1 = st.omega2 = RVector::Zero(K);
    st.nu1 = st.nu2 = CVector::Zero(K);
    switch (scheme) {
    case Scheme::Active:
        st.w1 = st.w2;
        st.theta = aligned_theta(cs, st.w2, std::min(1.0, pm.a_max));
        st.tau = cs.m() > 0 ? update_tau(ris_power(st.w2, st.theta, cs.g_br, pm), st.w1, cs.g_br, pm.eta1) : 0.0;
        break;
    case Scheme::Passive:
        st.w1 = Beams(K, CVector::Zero(cs.n()));
        st.theta = aligned_theta(cs, st.w2, 1.0);
        st.tau = 0.0;
        break;
    case Scheme::NoRis:
        st.w1 = Beams(K, CVector::Zero(cs.n()));
        st.theta = CVector(0);
        st.tau = 0.0;
        break;
    }
    return st;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline FeasibilityReport scheme_feasibility(const SolverState& st, const ChannelSet& cs, const PowerModel& pm,
                                            Scheme scheme)
{
    switch (scheme) {
    case Scheme::Active: return check_feasibility(st, cs, pm, cs.m() > 0);
    case Scheme::Passive: return check_feasibility(st, cs, pm, false, 1.0);
    case Scheme::NoRis: return check_feasibility(st, cs, pm, false);
    }
    return {};
}

} // namespace detail

/// Runs the stochastic alternating optimization for one trial. Realization r (1-based) is drawn
/// from the trial's realization stream.
inline AoReport ssca_ao(const ChannelSet& cs, const ScenarioConfig& cfg, std::uint64_t trial_seed_value,
                        Scheme scheme = Scheme::Active)
{
    using clock = std::chrono::steady_clock;
    const PowerModel& pm = cfg.power;
    const AlgorithmKnobs& kn = cfg.knobs;
    AoReport rep;
    rep.scheme = scheme;
    rep.stats = make_saa_stats(cs);
    SolverState st = initial_state(cs, pm, scheme);
    const bool ris = cs.m() > 0 && scheme != Scheme::NoRis;
    const bool self_sustained = scheme == Scheme::Active && cs.m() > 0;

    for (int r = 1; r <= kn.r_max; ++r) {
        st.r = r;
        update_saa_stats(rep.stats, realization_for(cs, cfg, trial_seed_value, static_cast<std::uint64_t>(r)), cs);
        const double v = saa_objective_nats(st.tau, st.w1, st.w2, st.theta, rep.stats, cs, pm);
        rep.objective_nats.push_back(v);
        rep.objective_bits.push_back(nats_to_bits(v));
        rep.iterations = r;
        if (r >= 2) {
            const double prev = rep.objective_nats[r - 2];
            if (std::abs(v - prev) <= kn.tol_outer * std::abs(v)) {
                rep.converged = true;
                break;
            }
        }
        try {
            if (self_sustained) {
                auto t0 = clock::now();
                const double p_r = ris_power(st.w2, st.theta, cs.g_br, pm);
                st.tau = update_tau(p_r, st.w1, cs.g_br, pm.eta1);
                const double er = harvested_energy(st.w1, st.tau, cs.g_br, pm.eta1);
                const double need = (1.0 - st.tau) * p_r;
                rep.tau_tightness.push_back(std::abs(er - need) / std::max({er, need, 1e-300}));
                rep.time_tau += detail::seconds_since(t0);

                t0 = clock::now();
                const AuxVars a1 = update_aux_stage1(st.w1, cs, rep.stats, pm.sigma1_sq);
                st.omega1 = a1.omega;
                st.nu1 = a1.nu;
                st.w1 = solve_w1(st, cs, rep.stats, pm, kn.i_max, kn.tol_inner);
                rep.time_w1 += detail::seconds_since(t0);
            }
            rep.tau_trace.push_back(st.tau);

            auto t0 = clock::now();
            const AuxVars a2 = update_aux_stage2(st.w2, st.theta, cs, rep.stats, pm);
            st.omega2 = a2.omega;
            st.nu2 = a2.nu;
            if (scheme == Scheme::NoRis) {
                st.w2 = solve_beams_closed_form(detail::effective_channels(cs, st.theta), a2, st.w2, pm.p_max,
                                                nullptr, kn.i_max, kn.tol_inner)
                            .w;
            } else {
                st.w2 = solve_w2(st, cs, rep.stats, pm, self_sustained);
            }
            rep.time_w2 += detail::seconds_since(t0);

            if (ris) {
                t0 = clock::now();
                st.theta = scheme == Scheme::Active ? solve_theta(st, cs, rep.stats, pm)
                                                    : solve_theta_unit_modulus(st, cs, rep.stats, pm);
                rep.time_theta += detail::seconds_since(t0);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EnergyInfeasible)
                throw;
            rep.energy_infeasible = true;
            rep.failed_iteration = r;
            rep.error = e.what();
            break;
        }
        rep.min_slack.push_back(detail::scheme_feasibility(st, cs, pm, scheme).worst());
    }
    rep.state = st;
    rep.feasibility = detail::scheme_feasibility(st, cs, pm, scheme);
    return rep;
}

} // namespace ajris

#endif // AJRIS_OPTIMIZER_HPP
