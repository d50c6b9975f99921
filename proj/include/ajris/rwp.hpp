#ifndef AJRIS_RWP_HPP
#define AJRIS_RWP_HPP

#include "ajris/error.hpp"
#include "ajris/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace ajris {

/// Random-waypoint distance polynomial plus Nakagami-m power, see rwp_nakagami_pdf.
struct RwpParams {
    std::vector<double> b_n{735.0 / 72.0, -1190.0 / 72.0, 455.0 / 72.0};
    std::vector<double> upsilon{1.0, 3.0, 5.0};
    int n_t = 3;
    double m_n = 1.0;
    double alpha = 2.75;
    double d_l = 130.0;
    double d_u = 170.0;
    double p_t = 1.0;
    int n_f = 8;
};

inline void validate(const RwpParams& p)
{
    auto fail = [](const char* what) { throw Error(ErrorCode::BadParams, std::string("rwp: ") + what); };
    if (p.n_t < 1 || static_cast<int>(p.b_n.size()) != p.n_t || static_cast<int>(p.upsilon.size()) != p.n_t)
        fail("len(B_n) = len(Upsilon_n) = N_T required");
    if (!(p.d_l > 0.0) || !(p.d_u > p.d_l))
        fail("D_U > D_L > 0 required");
    if (!(p.m_n >= 0.5))
        fail("m_N >= 0.5 required");
    if (!(p.alpha > 0.0) || !(p.p_t > 0.0) || p.n_f < 1)
        fail("alpha, p_t and N_f must be positive");
}

/// Unnormalized polynomial distance density sum_n B_n r^Y_n / D^(Y_n+1), D = D_U.
inline double rwp_distance_poly(double r, const RwpParams& p)
{
    double s = 0.0;
    for (int n = 0; n < p.n_t; ++n)
        s += p.b_n[n] * std::pow(r, p.upsilon[n]) / std::pow(p.d_u, p.upsilon[n] + 1.0);
    return s;
}

/// Antiderivative of rwp_distance_poly, zero at r = 0.
inline double rwp_distance_poly_integral(double r, const RwpParams& p)
{
    double s = 0.0;
    for (int n = 0; n < p.n_t; ++n)
        s += p.b_n[n] * std::pow(r / p.d_u, p.upsilon[n] + 1.0) / (p.upsilon[n] + 1.0);
    return s;
}

/// Mass of the polynomial on [D_L, D_U]; the density is divided by this.
inline double rwp_distance_mass(const RwpParams& p)
{
    return rwp_distance_poly_integral(p.d_u, p) - rwp_distance_poly_integral(p.d_l, p);
}

inline double rwp_distance_pdf(double r, const RwpParams& p)
{
    if (r < p.d_l || r > p.d_u)
        return 0.0;
    return rwp_distance_poly(r, p) / rwp_distance_mass(p);
}

/// Density of the received power x = p_t r^-alpha g, where r follows the distance density on
/// [D_L, D_U] and g is the sum of N_f unit-mean Nakagami-m powers (Gamma(N_f m, 1/m)).
/// Term n contributes
///   B_n / (alpha x) * Gamma(s_n) / Gamma(N_f m) * u_U^(-(Y_n+1)/alpha) * [P(s_n, u_U) - P(s_n, u_L)]
/// with s_n = (Y_n+1)/alpha + N_f m and u = m x D^alpha / p_t.
inline double rwp_nakagami_pdf(double x, const RwpParams& p)
{
    validate(p);
    if (!(x > 0.0))
        throw Error(ErrorCode::BadParams, "rwp: x must be positive");
    using boost::math::gamma_p;
    using boost::math::gamma_q;
    const double s0 = p.n_f * p.m_n;
    const double u_u = p.m_n * x * std::pow(p.d_u, p.alpha) / p.p_t;
    const double u_l = p.m_n * x * std::pow(p.d_l, p.alpha) / p.p_t;
    double total = 0.0;
    for (int n = 0; n < p.n_t; ++n) {
        const double e = (p.upsilon[n] + 1.0) / p.alpha;
        const double s = e + s0;
        // difference of regularized lower incomplete gammas, taken on whichever side avoids
        // cancellation
        double diff = 0.0;
        if (u_l > s)
            diff = gamma_q(s, u_l) - gamma_q(s, u_u);
        else
            diff = gamma_p(s, u_u) - gamma_p(s, u_l);
        if (diff <= 0.0)
            continue;
        const double log_mag = std::lgamma(s) - std::lgamma(s0) - e * std::log(u_u) + std::log(diff);
        total += p.b_n[n] * std::exp(log_mag);
    }
    const double f = total / (p.alpha * x * rwp_distance_mass(p));
    return std::max(f, 0.0);
}

namespace detail {

/// Power range that holds all but a negligible tail of the density.
inline void rwp_support(const RwpParams& p, double* lo, double* hi)
{
    const double s0 = p.n_f * p.m_n;
    const double scale_lo = p.p_t / (p.m_n * std::pow(p.d_u, p.alpha));
    const double scale_hi = p.p_t / (p.m_n * std::pow(p.d_l, p.alpha));
    *lo = scale_lo * std::min(1e-12, 1e-6 * s0);
    *hi = scale_hi * (s0 + 60.0 + 12.0 * std::sqrt(s0));
}

} // namespace detail

/// Integral of rwp_nakagami_pdf over [a, b], done in log(x) on unit-width panels.
inline double rwp_nakagami_integral(double a, double b, const RwpParams& p)
{
    validate(p);
    if (!(a > 0.0) || !(b >= a))
        throw Error(ErrorCode::BadParams, "rwp: need 0 < a <= b");
    if (a == b)
        return 0.0;
    const double la = std::log(a);
    const double lb = std::log(b);
    const int panels = std::max(1, static_cast<int>(std::ceil(lb - la)));
    const double width = (lb - la) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double t0 = la + i * width;
        const double t1 = (i + 1 == panels) ? lb : t0 + width;
        auto g = [&](double t) {
            const double x = std::exp(t);
            return rwp_nakagami_pdf(x, p) * x;
        };
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, t0, t1, 8, 1e-12);
    }
    return total;
}

/// Integral of the density over its numerical support; equals 1 for a valid density.
inline double rwp_nakagami_total_mass(const RwpParams& p)
{
    double lo = 0.0, hi = 0.0;
    detail::rwp_support(p, &lo, &hi);
    return rwp_nakagami_integral(lo, hi, p);
}

inline double rwp_nakagami_cdf(double x, const RwpParams& p)
{
    double lo = 0.0, hi = 0.0;
    detail::rwp_support(p, &lo, &hi);
    if (x <= lo)
        return 0.0;
    return std::min(1.0, rwp_nakagami_integral(lo, x, p));
}

/// Inverse-CDF sampler for the distance density on a fixed grid.
class RwpDistanceSampler {
public:
    explicit RwpDistanceSampler(const RwpParams& p, int grid = 10000) : r_(grid), cdf_(grid)
    {
        validate(p);
        if (grid < 2)
            throw Error(ErrorCode::BadParams, "rwp: sampler grid needs at least two points");
        const double base = rwp_distance_poly_integral(p.d_l, p);
        const double mass = rwp_distance_mass(p);
        for (int i = 0; i < grid; ++i) {
            r_[i] = p.d_l + (p.d_u - p.d_l) * i / (grid - 1);
            cdf_[i] = (rwp_distance_poly_integral(r_[i], p) - base) / mass;
        }
        cdf_.front() = 0.0;
        cdf_.back() = 1.0;
    }

    double operator()(Rng& rng) const
    {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const std::size_t hi = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cdf_.begin(), 1), cdf_.size() - 1);
        const std::size_t lo = hi - 1;
        const double span = cdf_[hi] - cdf_[lo];
        const double w = span > 0.0 ? (u - cdf_[lo]) / span : 0.0;
        return r_[lo] + w * (r_[hi] - r_[lo]);
    }

private:
    std::vector<double> r_;
    std::vector<double> cdf_;
};

} // namespace ajris

#endif // AJRIS_RWP_HPP
