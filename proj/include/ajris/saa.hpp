#ifndef AJRIS_SAA_HPP
#define AJRIS_SAA_HPP

#include "ajris/channel.hpp"
#include "ajris/system.hpp"

#include <vector>

namespace ajris {

/// Running means over the realizations seen so far. With d = h_JU^H z_J, t = G_JR z_J and
/// a = conj(t) .* h_RU, the jammer term of stage 2 is |d + a^H theta|^2, so these means are
/// all that the stage-2 surrogates need.
struct SaaStats {
    int count = 0;
    RVector z1;                           ///< [k] mean Z_1,k
    RVector zi;                           ///< [k] mean interferer power
    Eigen::MatrixXd d2;                   ///< [q, k] mean |d_qk|^2
    std::vector<std::vector<CVector>> dt; ///< [q][k] mean conj(d_qk) t_qk
    std::vector<std::vector<CMatrix>> mbar; ///< [q][k] mean a_qk a_qk^H

    /// sum over q of dt[q][k]
    CVector dt_sum(int k, Eigen::Index m) const
    {
        CVector s = CVector::Zero(m);
        for (const auto& row : dt)
            s += row[k];
        return s;
    }

    /// sum over q of mbar[q][k]
    CMatrix mbar_sum(int k, Eigen::Index m) const
    {
        CMatrix s = CMatrix::Zero(m, m);
        for (const auto& row : mbar)
            s += row[k];
        return s;
    }
};

inline SaaStats make_saa_stats(const ChannelSet& cs)
{
    SaaStats s;
    const int K = cs.k(), Q = cs.q(), M = cs.m();
    s.z1 = RVector::Zero(K);
    s.zi = RVector::Zero(K);
    s.d2 = Eigen::MatrixXd::Zero(Q, K);
    s.dt.assign(Q, std::vector<CVector>(K, CVector::Zero(M)));
    s.mbar.assign(Q, std::vector<CMatrix>(K, CMatrix::Zero(M, M)));
    return s;
}

/// Folds one realization into the means: mean += (sample - mean) / (count + 1).
inline void update_saa_stats(SaaStats& s, const Realization& r, const ChannelSet& cs)
{
    if (r.index != static_cast<std::uint64_t>(s.count) + 1)
        throw Error(ErrorCode::BadParams, "update_saa_stats: expected realization index " +
                                              std::to_string(s.count + 1) + ", got " + std::to_string(r.index));
    const int K = cs.k(), Q = cs.q();
    const double w = 1.0 / static_cast<double>(s.count + 1);
    for (int k = 0; k < K; ++k) {
        s.z1(k) += (stage1_interference(k, r) - s.z1(k)) * w;
        s.zi(k) += (interferer_power(k, r) - s.zi(k)) * w;
        for (int q = 0; q < Q; ++q) {
            const cplx d = r.h_ju[q][k].dot(r.z_j[q][k]);
            const CVector t = r.g_jr[q] * r.z_j[q][k];
            const CVector a = t.conjugate().cwiseProduct(cs.h_ru[k]);
            s.d2(q, k) += (std::norm(d) - s.d2(q, k)) * w;
            s.dt[q][k] += (std::conj(d) * t - s.dt[q][k]) * w;
            CMatrix& mb = s.mbar[q][k];
            mb += (a * a.adjoint() - mb) * w;
            mb = hermitian_part(mb);
        }
    }
    ++s.count;
}

/// Mean of Z_2,k over the realizations, at reflection vector theta.
inline double mean_stage2_interference(const SaaStats& s, int k, const CVector& theta, const ChannelSet& cs)
{
    double z = s.zi(k);
    const bool ris = theta.size() > 0;
    for (int q = 0; q < static_cast<int>(s.dt.size()); ++q) {
        z += s.d2(q, k);
        if (ris) {
            z += 2.0 * (cs.h_ru[k].conjugate().cwiseProduct(s.dt[q][k]).cwiseProduct(theta)).sum().real();
            z += quad_form(s.mbar[q][k], theta);
        }
    }
    return std::max(z, 0.0);
}

/// Stage-1 SINR with the interference replaced by its sample mean.
inline double saa_stage1_sinr(int k, const Beams& w1, const SaaStats& s, const ChannelSet& cs, double sigma1_sq)
{
    return sinr_with(cs.h_bu[k], k, w1, s.z1(k) + sigma1_sq);
}

inline double saa_stage2_sinr(int k, const Beams& w2, const CVector& theta, const SaaStats& s, const ChannelSet& cs,
                              const PowerModel& pm)
{
    const CVector h = effective_channel(cs, k, theta);
    const double extra =
        pm.sigmar_sq * ris_noise_gain(cs, k, theta) + mean_stage2_interference(s, k, theta, cs) + pm.sigma2_sq;
    return sinr_with(h, k, w2, extra);
}

/// The objective the alternating optimization ascends: tau-weighted sum of ln(1 + SINR) with
/// sample-mean interference, in nats.
inline double saa_objective_nats(double tau, const Beams& w1, const Beams& w2, const CVector& theta,
                                 const SaaStats& s, const ChannelSet& cs, const PowerModel& pm)
{
    double v = 0.0;
    for (int k = 0; k < cs.k(); ++k) {
        if (tau > 0.0)
            v += tau * std::log1p(saa_stage1_sinr(k, w1, s, cs, pm.sigma1_sq));
        if (tau < 1.0)
            v += (1.0 - tau) * std::log1p(saa_stage2_sinr(k, w2, theta, s, cs, pm));
    }
    return v;
}

} // namespace ajris

#endif // AJRIS_SAA_HPP
