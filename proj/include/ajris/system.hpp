#ifndef AJRIS_SYSTEM_HPP
#define AJRIS_SYSTEM_HPP

#include "ajris/channel.hpp"
#include "ajris/config.hpp"
#include "ajris/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ajris {

using Beams = std::vector<CVector>;

/// Optimization variables plus the quadratic-transform auxiliaries.
struct SolverState {
    double tau = 0.5;
    Beams w1;
    Beams w2;
    CVector theta;
    RVector omega1;
    CVector nu1;
    RVector omega2;
    CVector nu2;
    int r = 0;
};

inline double beam_power(const Beams& w)
{
    double s = 0.0;
    for (const auto& v : w)
        s += v.squaredNorm();
    return s;
}

inline Beams scale_beams(Beams w, double c)
{
    for (auto& v : w)
        v *= c;
    return w;
}

/// tau eta1 sum_k ||G w_k||^2
inline double harvested_energy(const Beams& w1, double tau, const CMatrix& g_br, double eta1)
{
    double s = 0.0;
    for (const auto& w : w1)
        s += (g_br * w).squaredNorm();
    return tau * eta1 * s;
}

/// Stage-2 channel seen by UE k: h_BU,k + G^H Theta^H h_RU,k, so that
/// h_eff^H w = h_BU^H w + h_RU^H diag(theta) G w.
inline CVector effective_channel(const ChannelSet& cs, int k, const CVector& theta)
{
    if (theta.size() == 0)
        return cs.h_bu[k];
    return cs.h_bu[k] + cs.g_br.adjoint() * theta.conjugate().cwiseProduct(cs.h_ru[k]);
}

/// sum_m |h_RU,k,m|^2 |theta_m|^2
inline double ris_noise_gain(const ChannelSet& cs, int k, const CVector& theta)
{
    if (theta.size() == 0)
        return 0.0;
    return cs.h_ru[k].cwiseAbs2().dot(theta.cwiseAbs2());
}

inline double interferer_power(int k, const Realization& r)
{
    double s = 0.0;
    for (std::size_t b = 0; b < r.h_iu.size(); ++b)
        s += std::norm(r.h_iu[b][k].dot(r.z_i[b][k]));
    return s;
}

/// Z_1,k: direct jamming plus interference.
inline double stage1_interference(int k, const Realization& r)
{
    double s = interferer_power(k, r);
    for (std::size_t q = 0; q < r.h_ju.size(); ++q)
        s += std::norm(r.h_ju[q][k].dot(r.z_j[q][k]));
    return s;
}

/// Z_2,k: jamming through the direct and reflected paths plus interference.
inline double stage2_interference(int k, const CVector& theta, const Realization& r, const ChannelSet& cs)
{
    double s = interferer_power(k, r);
    for (std::size_t q = 0; q < r.h_ju.size(); ++q) {
        cplx v = r.h_ju[q][k].dot(r.z_j[q][k]);
        if (theta.size() > 0) {
            const CVector t = r.g_jr[q] * r.z_j[q][k];
            v += (cs.h_ru[k].conjugate().cwiseProduct(theta).cwiseProduct(t)).sum();
        }
        s += std::norm(v);
    }
    return s;
}

inline double sinr_with(const CVector& h, int k, const Beams& w, double extra)
{
    const double sig = std::norm(h.dot(w[k]));
    double den = extra;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (static_cast<int>(j) != k)
            den += std::norm(h.dot(w[j]));
    return den > 0.0 ? sig / den : (sig > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
}

inline double stage1_sinr(int k, const Beams& w1, const Realization& r, const ChannelSet& cs, double sigma1_sq)
{
    return sinr_with(cs.h_bu[k], k, w1, stage1_interference(k, r) + sigma1_sq);
}

inline double stage2_sinr(int k, const Beams& w2, const CVector& theta, const Realization& r, const ChannelSet& cs,
                          const PowerModel& pm)
{
    const CVector h = effective_channel(cs, k, theta);
    const double extra = pm.sigmar_sq * ris_noise_gain(cs, k, theta) + stage2_interference(k, theta, r, cs) +
                         pm.sigma2_sq;
    return sinr_with(h, k, w2, extra);
}

/// sum_k [tau ln(1 + g1) + (1 - tau) ln(1 + g2)] for one realization.
inline double rate_nats(double tau, const Beams& w1, const Beams& w2, const CVector& theta, const Realization& r,
                        const ChannelSet& cs, const PowerModel& pm)
{
    double s = 0.0;
    for (int k = 0; k < cs.k(); ++k) {
        if (tau > 0.0)
            s += tau * std::log1p(stage1_sinr(k, w1, r, cs, pm.sigma1_sq));
        if (tau < 1.0)
            s += (1.0 - tau) * std::log1p(stage2_sinr(k, w2, theta, r, cs, pm));
    }
    return s;
}

inline double nats_to_bits(double nats)
{
    return nats / std::log(2.0);
}

/// Sample-average achievable rate in bits per channel use.
inline double sum_rate(double tau, const Beams& w1, const Beams& w2, const CVector& theta,
                       const std::vector<Realization>& reals, const ChannelSet& cs, const PowerModel& pm)
{
    if (reals.empty())
        throw Error(ErrorCode::BadParams, "sum_rate needs at least one realization");
    double s = 0.0;
    for (const auto& r : reals)
        s += rate_nats(tau, w1, w2, theta, r, cs, pm);
    return nats_to_bits(s / static_cast<double>(reals.size()));
}

/// xi (sum_k ||Theta G w2_k||^2 + sigma_R^2 ||theta||^2) + M (P_dc + P_sc)
inline double ris_power(const Beams& w2, const CVector& theta, const CMatrix& g_br, const PowerModel& pm)
{
    const Eigen::Index m = theta.size();
    if (m == 0)
        return 0.0;
    const RVector a2 = theta.cwiseAbs2();
    double out = 0.0;
    for (const auto& w : w2)
        out += a2.dot((g_br * w).cwiseAbs2());
    out += pm.sigmar_sq * a2.sum();
    return pm.xi * out + static_cast<double>(m) * (pm.p_dc + pm.p_sc);
}

struct FeasibilityReport {
    double power1_slack = 0.0;    ///< P_max - sum ||w1||^2 (W)
    double power2_slack = 0.0;    ///< P_max - sum ||w2||^2 (W)
    double energy_slack = 0.0;    ///< E_R - (1 - tau) P_R (W); zero when not applicable
    double amplitude_slack = 0.0; ///< min_m (cap - |theta_m|)
    bool energy_applies = true;
    bool tau_valid = true;

    double worst() const { return std::min({power1_slack, power2_slack, energy_slack, amplitude_slack}); }
    bool ok(double tol = 1e-8) const { return tau_valid && worst() >= -tol; }
};

/// Constraint slacks of a state. `self_sustained = false` skips the energy constraint (the
/// passive and no-RIS baselines), and `amplitude_cap` overrides A_max when given.
inline FeasibilityReport check_feasibility(const SolverState& s, const ChannelSet& cs, const PowerModel& pm,
                                           bool self_sustained = true, double amplitude_cap = -1.0)
{
    FeasibilityReport rep;
    rep.power1_slack = pm.p_max - beam_power(s.w1);
    rep.power2_slack = pm.p_max - beam_power(s.w2);
    const double cap = amplitude_cap > 0.0 ? amplitude_cap : pm.a_max;
    rep.amplitude_slack = s.theta.size() ? cap - s.theta.cwiseAbs().maxCoeff() : 0.0;
    rep.energy_applies = self_sustained;
    if (self_sustained) {
        rep.tau_valid = s.tau >= 0.0 && s.tau < 1.0;
        const double er = harvested_energy(s.w1, s.tau, cs.g_br, pm.eta1);
        rep.energy_slack = er - (1.0 - s.tau) * ris_power(s.w2, s.theta, cs.g_br, pm);
    } else {
        rep.tau_valid = s.tau >= 0.0 && s.tau <= 1.0;
    }
    return rep;
}

} // namespace ajris

#endif // AJRIS_SYSTEM_HPP
