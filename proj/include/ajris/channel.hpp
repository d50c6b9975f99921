#ifndef AJRIS_CHANNEL_HPP
#define AJRIS_CHANNEL_HPP

#include "ajris/config.hpp"
#include "ajris/linalg.hpp"
#include "ajris/rng.hpp"
#include "ajris/rwp.hpp"

#include <cstdint>
#include <vector>

namespace ajris {

/// 10^(-PL/10) with PL = zeta0 + 10 alpha log10(d / 1 m).
inline double path_loss_linear(double d, double alpha, double zeta0_db)
{
    if (!(d >= 1.0))
        throw Error(ErrorCode::BadDistance, "path loss needs d >= 1 m (got " + std::to_string(d) + ")");
    const double pl_db = zeta0_db + 10.0 * alpha * std::log10(d);
    return std::pow(10.0, -pl_db / 10.0);
}

/// Where everybody stands in one trial.
struct Placement {
    std::vector<Vec3> ue;
    std::vector<Vec3> jammer;
    std::vector<Vec3> interferer;
};

/// Channels fixed for a trial. The jammer and interferer entries are estimates; the actual
/// values come with each Realization.
struct ChannelSet {
    CMatrix g_br;                               ///< M x N
    std::vector<CVector> h_bu;                  ///< [k], N
    std::vector<CVector> h_ru;                  ///< [k], M
    std::vector<std::vector<CVector>> h_ju_hat; ///< [q][k], N_jam
    std::vector<CMatrix> g_jr_hat;              ///< [q], M x N_jam
    std::vector<std::vector<CVector>> h_iu_hat; ///< [b][k], N
    Placement placement;

    int n() const { return static_cast<int>(g_br.cols()); }
    int m() const { return static_cast<int>(g_br.rows()); }
    int k() const { return static_cast<int>(h_bu.size()); }
    int q() const { return static_cast<int>(h_ju_hat.size()); }
    int b() const { return static_cast<int>(h_iu_hat.size()); }
};

/// One draw of the uncertain channels and of the adversary transmit vectors.
struct Realization {
    std::uint64_t index = 0;
    std::vector<std::vector<CVector>> h_ju; ///< [q][k], N_jam
    std::vector<CMatrix> g_jr;              ///< [q], M x N_jam
    std::vector<std::vector<CVector>> h_iu; ///< [b][k], N
    std::vector<std::vector<CVector>> z_j;  ///< [q][k], N_jam
    std::vector<std::vector<CVector>> z_i;  ///< [b][k], N
};

namespace detail {

/// Unit-mean Nakagami-m fade: sqrt(Gamma(m, 1/m)) with uniform phase. Exact zeros are redrawn.
inline cplx nakagami_fade(Rng& rng, double m)
{
    std::gamma_distribution<double> gpow(m, 1.0 / m);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    double g = 0.0;
    do {
        g = gpow(rng);
    } while (g == 0.0);
    return std::polar(std::sqrt(g), phase(rng));
}

inline CMatrix fading_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double gain, double m)
{
    CMatrix out(rows, cols);
    const double amp = std::sqrt(gain);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            out(i, j) = amp * nakagami_fade(rng, m);
    return out;
}

inline CVector fading_vector(Rng& rng, Eigen::Index n, double gain, double m)
{
    return fading_matrix(rng, n, 1, gain, m).col(0);
}

inline CVector complex_gaussian(Rng& rng, Eigen::Index n, double variance)
{
    std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = cplx(g(rng), g(rng));
    return v;
}

inline Vec3 uniform_in_box(Rng& rng, const Vec3& lo, const Vec3& hi)
{
    Vec3 out{};
    for (int i = 0; i < 3; ++i) {
        if (hi[i] > lo[i])
            out[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
        else
            out[i] = lo[i];
    }
    return out;
}

/// Isotropic vectors rescaled so that their squared norms add up to `total`.
inline std::vector<CVector> isotropic_split(Rng& rng, int count, Eigen::Index dim, double total)
{
    std::vector<CVector> z(count);
    double sum = 0.0;
    do {
        sum = 0.0;
        for (int i = 0; i < count; ++i) {
            z[i] = complex_gaussian(rng, dim, 1.0);
            sum += z[i].squaredNorm();
        }
    } while (sum == 0.0);
    const double scale = std::sqrt(total / sum);
    for (auto& v : z)
        v *= scale;
    return z;
}

inline double mean_abs2(const CMatrix& x)
{
    return x.size() ? x.cwiseAbs2().sum() / static_cast<double>(x.size()) : 0.0;
}

} // namespace detail

/// UE positions inside the disc with the RWP radial density; jammers and interferers uniform in
/// their boxes.
inline Placement sample_placement(const ScenarioConfig& cfg, Rng& rng)
{
    const Geometry& g = cfg.geometry;
    RwpParams radial;
    radial.b_n = cfg.rwp_b;
    radial.upsilon = cfg.rwp_upsilon;
    radial.n_t = static_cast<int>(cfg.rwp_b.size());
    radial.d_l = 1e-9 * g.ue_radius;
    radial.d_u = g.ue_radius;
    const RwpDistanceSampler radius(radial, 2000);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);

    Placement pl;
    for (int k = 0; k < cfg.k; ++k) {
        const double r = radius(rng);
        const double phi = angle(rng);
        pl.ue.push_back(Vec3{g.ue_center[0] + r * std::cos(phi), g.ue_center[1] + r * std::sin(phi), g.ue_center[2]});
    }
    for (int q = 0; q < cfg.q; ++q)
        pl.jammer.push_back(detail::uniform_in_box(rng, g.jam_lo, g.jam_hi));
    for (int b = 0; b < cfg.b; ++b)
        pl.interferer.push_back(detail::uniform_in_box(rng, g.int_lo, g.int_hi));
    return pl;
}

/// Draws one trial's channels. Links that do not touch the RIS are drawn first so that their
/// values do not depend on M for a fixed seed.
inline ChannelSet sample_static_channels(const ScenarioConfig& cfg, Rng& rng)
{
    const Geometry& geo = cfg.geometry;
    const PathLossExponents& a = cfg.alpha;
    const double z0 = cfg.zeta0_db;
    const double mn = cfg.m_nakagami;

    ChannelSet cs;
    cs.placement = sample_placement(cfg, rng);
    const Placement& pl = cs.placement;

    for (int k = 0; k < cfg.k; ++k)
        cs.h_bu.push_back(detail::fading_vector(rng, cfg.n, path_loss_linear(distance(geo.bs, pl.ue[k]), a.bu, z0), mn));
    cs.h_ju_hat.assign(cfg.q, {});
    for (int q = 0; q < cfg.q; ++q)
        for (int k = 0; k < cfg.k; ++k)
            cs.h_ju_hat[q].push_back(detail::fading_vector(
                rng, cfg.n_jam, path_loss_linear(distance(pl.jammer[q], pl.ue[k]), a.ju, z0), mn));
    cs.h_iu_hat.assign(cfg.b, {});
    for (int b = 0; b < cfg.b; ++b)
        for (int k = 0; k < cfg.k; ++k)
            cs.h_iu_hat[b].push_back(detail::fading_vector(
                rng, cfg.n, path_loss_linear(distance(pl.interferer[b], pl.ue[k]), a.iu, z0), mn));

    cs.g_br = detail::fading_matrix(rng, cfg.m, cfg.n, path_loss_linear(distance(geo.bs, geo.ris), a.br, z0), mn);
    for (int k = 0; k < cfg.k; ++k)
        cs.h_ru.push_back(detail::fading_vector(rng, cfg.m, path_loss_linear(distance(geo.ris, pl.ue[k]), a.ru, z0), mn));
    for (int q = 0; q < cfg.q; ++q)
        cs.g_jr_hat.push_back(detail::fading_matrix(
            rng, cfg.m, cfg.n_jam, path_loss_linear(distance(pl.jammer[q], geo.ris), a.jr, z0), mn));
    return cs;
}

/// actual = estimate + CN(0, e_mse * mean|estimate|^2) per entry; adversary vectors are
/// redrawn and renormalized to their power budgets.
inline Realization sample_uncertain_realization(const ChannelSet& cs, double e_mse, const ScenarioConfig& cfg,
                                                Rng& rng, std::uint64_t index = 0)
{
    if (!(e_mse >= 0.0))
        throw Error(ErrorCode::BadParams, "e_mse must be >= 0");
    Realization r;
    r.index = index;
    const int K = cs.k();
    auto perturb = [&](const CMatrix& est) -> CMatrix {
        if (e_mse == 0.0)
            return est;
        const double var = e_mse * detail::mean_abs2(est);
        CMatrix out = est;
        for (Eigen::Index j = 0; j < est.cols(); ++j)
            out.col(j) += detail::complex_gaussian(rng, est.rows(), var);
        return out;
    };

    r.z_j.assign(cs.q(), {});
    for (int q = 0; q < cs.q(); ++q)
        r.z_j[q] = detail::isotropic_split(rng, K, cfg.n_jam, cfg.p_j);
    r.z_i.assign(cs.b(), {});
    for (int b = 0; b < cs.b(); ++b)
        r.z_i[b] = detail::isotropic_split(rng, K, cs.n(), cfg.p_i);

    r.h_ju.assign(cs.q(), {});
    for (int q = 0; q < cs.q(); ++q)
        for (int k = 0; k < K; ++k)
            r.h_ju[q].push_back(perturb(cs.h_ju_hat[q][k]).col(0));
    r.h_iu.assign(cs.b(), {});
    for (int b = 0; b < cs.b(); ++b)
        for (int k = 0; k < K; ++k)
            r.h_iu[b].push_back(perturb(cs.h_iu_hat[b][k]).col(0));
    for (int q = 0; q < cs.q(); ++q)
        r.g_jr.push_back(perturb(cs.g_jr_hat[q]));
    return r;
}

/// Realization number `index` of a trial, on its own derived stream.
inline Realization realization_for(const ChannelSet& cs, const ScenarioConfig& cfg, std::uint64_t trial_seed_value,
                                   std::uint64_t index)
{
    Rng rng = stream_rng(trial_seed_value, Stream::Realization, index);
    return sample_uncertain_realization(cs, cfg.e_mse, cfg, rng, index);
}

} // namespace ajris

#endif // AJRIS_CHANNEL_HPP
