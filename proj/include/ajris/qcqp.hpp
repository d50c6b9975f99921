#ifndef AJRIS_QCQP_HPP
#define AJRIS_QCQP_HPP

#include "ajris/linalg.hpp"

#include <optional>
#include <vector>

namespace ajris {

/// x^H Q x <= bound, Q Hermitian PSD.
struct QuadConstraint {
    CMatrix q;
    double bound = 0.0;
};

/// maximize Re{b^H x} - x^H A x  subject to the quadratic constraints and |x_m| <= caps_m.
struct QcqpProblem {
    CVector b;
    CMatrix a;
    std::vector<QuadConstraint> constraints;
    std::optional<RVector> caps;
};

struct QcqpOptions {
    double tol = 1e-7;   ///< KKT residual / duality-gap tolerance, relative to 1 + |f|
    double slack = 1e-8; ///< admissible relative constraint violation
    int max_iter = 60000;
    bool validate = true; ///< PSD and shape checks on entry
};

struct QcqpResult {
    CVector x;
    double objective = 0.0;
    double dual_bound = 0.0; ///< certified upper bound on the optimal value
    std::vector<double> multipliers;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

inline bool is_scaled_identity(const CMatrix& q, double* scale)
{
    const Eigen::Index n = q.rows();
    if (n == 0)
        return false;
    const double s = q(0, 0).real();
    const double tol = 1e-12 * std::max(1.0, std::abs(s));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const cplx expect = (i == j) ? cplx(s, 0.0) : cplx(0.0, 0.0);
            if (std::abs(q(i, j) - expect) > tol)
                return false;
        }
    *scale = s;
    return s > 0.0;
}

inline bool is_diagonal(const CMatrix& q)
{
    const double tol = 1e-14 * std::max(1e-300, q.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < q.rows(); ++i)
        for (Eigen::Index j = 0; j < q.cols(); ++j)
            if (i != j && std::abs(q(i, j)) > tol)
                return false;
    return true;
}

inline void validate_problem(const QcqpProblem& p)
{
    const Eigen::Index n = p.b.size();
    if (p.a.rows() != n || p.a.cols() != n)
        throw Error(ErrorCode::BadParams, "qcqp: A has wrong shape");
    if (!is_psd(p.a))
        throw Error(ErrorCode::BadParams, "qcqp: A is not PSD");
    for (const auto& c : p.constraints) {
        if (c.q.rows() != n || c.q.cols() != n)
            throw Error(ErrorCode::BadParams, "qcqp: constraint matrix has wrong shape");
        if (!is_psd(c.q))
            throw Error(ErrorCode::BadParams, "qcqp: constraint matrix is not PSD");
    }
    if (p.caps) {
        if (p.caps->size() != n)
            throw Error(ErrorCode::BadParams, "qcqp: caps length mismatch");
        if ((p.caps->array() < 0.0).any())
            throw Error(ErrorCode::BadParams, "qcqp: negative cap");
    }
}

/// Maximizer of Re{b^H x} - x^H H x for Hermitian PSD H, via its eigenbasis.
/// The ball multiplier lambda adds lambda * scale * I.
class EigenQuadratic {
public:
    EigenQuadratic(const CMatrix& h, const CVector& b)
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
        if (es.info() != Eigen::Success)
            throw Error(ErrorCode::NumericalFailure, "qcqp: eigendecomposition failed");
        u_ = es.eigenvectors();
        d_ = es.eigenvalues().cwiseMax(0.0);
        beta_ = u_.adjoint() * (0.5 * b);
        const double top = d_.size() ? d_.maxCoeff() : 0.0;
        floor_ = 1e-14 * std::max(top, 1e-300);
    }

    /// ||x(lambda)||^2 where x = (H + lambda I)^-1 b / 2; infinite when unbounded.
    double norm2(double lambda) const
    {
        double s = 0.0;
        for (Eigen::Index i = 0; i < d_.size(); ++i) {
            const double mag2 = std::norm(beta_(i));
            const double den = d_(i) + lambda;
            if (den <= floor_) {
                if (mag2 > 1e-30 * beta_.squaredNorm())
                    return std::numeric_limits<double>::infinity();
                continue;
            }
            s += mag2 / (den * den);
        }
        return s;
    }

    CVector solve(double lambda) const
    {
        CVector y(d_.size());
        for (Eigen::Index i = 0; i < d_.size(); ++i) {
            const double den = d_(i) + lambda;
            y(i) = den <= floor_ ? cplx(0.0, 0.0) : beta_(i) / den;
        }
        return u_ * y;
    }

private:
    CMatrix u_;
    RVector d_;
    CVector beta_;
    double floor_ = 0.0;
};

/// Smallest diagonal shift mu >= 0 with scale * ||x(mu)||^2 <= bound.
inline double ball_multiplier(const EigenQuadratic& eq, double scale, double bound, double bnorm)
{
    const double cap = bound / scale;
    if (eq.norm2(0.0) <= cap)
        return 0.0;
    if (cap <= 0.0)
        return std::numeric_limits<double>::infinity();
    // ||x(lambda)|| <= ||b|| / (2 lambda) gives a guaranteed upper bracket.
    double hi = bnorm / (2.0 * std::sqrt(cap));
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eq.norm2(mid) > cap)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi)
            break;
    }
    return hi;
}

inline QcqpResult finish(const QcqpProblem& p, const CMatrix& a, CVector x, std::vector<double> lambdas,
                         const QcqpOptions& opt, int iterations)
{
    QcqpResult r;
    r.x = std::move(x);
    r.objective = concave_quadratic_value(a, p.b, r.x);
    r.multipliers = std::move(lambdas);
    r.iterations = iterations;
    CMatrix h = a;
    double bound = r.objective;
    bool feasible = true;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const auto& c = p.constraints[i];
        const double lam = r.multipliers[i];
        const double val = quad_form(c.q, r.x);
        if (val - c.bound > opt.slack * std::max(c.bound, 1e-300) && val - c.bound > 1e-300)
            feasible = false;
        if (lam > 0.0) {
            h += lam * c.q;
            bound += lam * (c.bound - val);
        }
    }
    const CVector resid = hermitian_part(h) * r.x - 0.5 * p.b;
    r.kkt_residual = resid.norm() / std::max(0.5 * p.b.norm(), 1e-300);
    r.dual_bound = bound;
    r.converged = feasible && (bound - r.objective) <= opt.tol * (1.0 + std::abs(r.objective)) &&
                  r.kkt_residual <= std::max(opt.tol, 1e-6);
    return r;
}

/// Two-constraint (or fewer) problem without caps: nested multiplier bisection.
inline QcqpResult solve_dual_bisection(const QcqpProblem& p, const QcqpOptions& opt)
{
    const Eigen::Index n = p.b.size();
    const CMatrix a = hermitian_part(p.a);
    const double bnorm = p.b.norm();
    if (bnorm == 0.0)
        return finish(p, a, CVector::Zero(n), std::vector<double>(p.constraints.size(), 0.0), opt, 0);

    // A norm-ball constraint (if any) goes innermost so it can use the eigenbasis.
    double ball_scale = 0.0;
    int ball = -1;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        double s = 0.0;
        if (is_scaled_identity(p.constraints[i].q, &s)) {
            ball = static_cast<int>(i);
            ball_scale = s;
            break;
        }
    }

    int evaluations = 0;
    std::vector<double> lambdas(p.constraints.size(), 0.0);

    if (p.constraints.empty()) {
        EigenQuadratic eq(a, p.b);
        if (!std::isfinite(eq.norm2(0.0)))
            throw Error(ErrorCode::Infeasible, "qcqp: unconstrained problem is unbounded");
        return finish(p, a, eq.solve(0.0), lambdas, opt, 1);
    }

    if (p.constraints.size() > 2)
        throw Error(ErrorCode::BadParams, "qcqp: dual bisection supports at most two constraints");

    // Inner solve: given the outer multiplier, returns x with the inner constraint satisfied.
    struct Inner {
        CVector x;
        double lambda_inner = 0.0;
    };
    const bool have_outer = p.constraints.size() == 2;
    const std::size_t inner_idx = ball >= 0 ? static_cast<std::size_t>(ball) : 0;
    const std::size_t outer_idx = have_outer ? 1 - inner_idx : inner_idx;
    const auto& ci = p.constraints[inner_idx];

    auto inner_solve = [&](double lambda_outer) -> Inner {
        CMatrix h = a;
        if (have_outer && lambda_outer > 0.0)
            h += lambda_outer * hermitian_part(p.constraints[outer_idx].q);
        ++evaluations;
        if (ball >= 0) {
            EigenQuadratic eq(h, p.b);
            const double shift = ball_multiplier(eq, ball_scale, ci.bound, bnorm);
            if (!std::isfinite(shift))
                return {CVector::Zero(n), shift};
            return {eq.solve(shift), shift / ball_scale};
        }
        // General inner constraint: bisection with dense solves.
        const CMatrix qi = hermitian_part(ci.q);
        auto x_at = [&](double lam) -> CVector {
            CMatrix hh = h + lam * qi;
            const double ridge = 1e-13 * std::max(hh.diagonal().real().maxCoeff(), 1e-300);
            return herm_solve(hh, 0.5 * p.b, ridge);
        };
        auto viol = [&](const CVector& x) { return quad_form(qi, x) - ci.bound; };
        CVector x0;
        bool ok = true;
        try {
            x0 = x_at(0.0);
        } catch (const Error&) {
            ok = false;
        }
        if (ok && viol(x0) <= 0.0)
            return {x0, 0.0};
        double scale = std::max(h.diagonal().real().maxCoeff(), qi.diagonal().real().maxCoeff());
        double hi = std::max(scale, 1e-300) * 1e-12;
        CVector xhi = x_at(hi);
        int guard = 0;
        while (viol(xhi) > 0.0 && guard++ < 400) {
            hi *= 2.0;
            xhi = x_at(hi);
        }
        double lo = hi * 0.5;
        if (guard == 0)
            lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            CVector xm = x_at(mid);
            if (viol(xm) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
                xhi = std::move(xm);
            }
        }
        return {xhi, hi};
    };

    Inner at0 = inner_solve(0.0);
    if (!have_outer) {
        lambdas[inner_idx] = at0.lambda_inner;
        return finish(p, a, at0.x, lambdas, opt, evaluations);
    }

    const auto& co = p.constraints[outer_idx];
    const CMatrix qo = hermitian_part(co.q);
    auto outer_excess = [&](const Inner& in) { return quad_form(qo, in.x) - co.bound; };

    if (outer_excess(at0) <= 0.0) {
        lambdas[inner_idx] = at0.lambda_inner;
        lambdas[outer_idx] = 0.0;
        return finish(p, a, at0.x, lambdas, opt, evaluations);
    }

    // Bracket the outer multiplier by doubling from a scale-aware start.
    const double qscale = std::max(qo.diagonal().real().maxCoeff(), 1e-300);
    const double ascale = std::max(a.diagonal().real().maxCoeff(), 1e-300);
    double hi = 1e-6 * ascale / qscale;
    Inner in_hi = inner_solve(hi);
    double lo = 0.0;
    int guard = 0;
    while (outer_excess(in_hi) > 0.0 && guard++ < 600) {
        lo = hi;
        hi *= 2.0;
        in_hi = inner_solve(hi);
    }
    if (outer_excess(in_hi) > 0.0)
        throw Error(ErrorCode::Infeasible, "qcqp: could not satisfy the outer constraint");

    const double target_gap = 0.25 * opt.tol;
    for (int it = 0; it < 300; ++it) {
        // Gap of the feasible end: lambda_outer * slack_outer (+ inner slack, normally zero).
        const double slack = co.bound - quad_form(qo, in_hi.x);
        const double f = concave_quadratic_value(a, p.b, in_hi.x);
        if (hi * slack <= target_gap * (1.0 + std::abs(f)) || hi - lo <= 1e-15 * hi)
            break;
        const double mid = 0.5 * (lo + hi);
        Inner in_mid = inner_solve(mid);
        if (outer_excess(in_mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
            in_hi = std::move(in_mid);
        }
    }
    lambdas[inner_idx] = in_hi.lambda_inner;
    lambdas[outer_idx] = hi;
    return finish(p, a, in_hi.x, lambdas, opt, evaluations);
}

/// Problem with per-element caps and at most one diagonal ellipsoid: accelerated projected
/// gradient on a Jacobi-scaled copy. The ellipsoid enters the projection through its own
/// multiplier, found by bisection.
class CappedProjector {
public:
    CappedProjector(RVector caps, RVector q, double bound, bool has_ellipsoid)
        : caps_(std::move(caps)), q_(std::move(q)), bound_(bound), has_ellipsoid_(has_ellipsoid)
    {
    }

    CVector project(const CVector& y) const
    {
        const RVector r = y.cwiseAbs();
        RVector rc = r.cwiseMin(caps_);
        if (has_ellipsoid_ && q_.dot(rc.cwiseAbs2()) > bound_) {
            const double kappa = multiplier([&](double k) {
                double s = 0.0;
                for (Eigen::Index m = 0; m < r.size(); ++m) {
                    const double v = std::min(r(m) / (1.0 + k * q_(m)), caps_(m));
                    s += q_(m) * v * v;
                }
                return s;
            });
            for (Eigen::Index m = 0; m < r.size(); ++m)
                rc(m) = std::min(r(m) / (1.0 + kappa * q_(m)), caps_(m));
        }
        CVector out(y.size());
        for (Eigen::Index m = 0; m < y.size(); ++m)
            out(m) = r(m) > 0.0 ? y(m) * (rc(m) / r(m)) : cplx(0.0, 0.0);
        return out;
    }

    /// max over the feasible set of Re{g^H y}
    double support(const CVector& g) const
    {
        const RVector gm = g.cwiseAbs();
        RVector rc = caps_;
        if (has_ellipsoid_ && q_.dot(rc.cwiseAbs2()) > bound_) {
            auto r_of = [&](double k, Eigen::Index m) {
                if (q_(m) <= 0.0)
                    return caps_(m);
                return std::min(caps_(m), gm(m) / (2.0 * k * q_(m)));
            };
            // larger kappa shrinks the point; find the smallest kappa satisfying the ellipsoid
            double lo = 0.0;
            double hi = 1.0;
            auto load = [&](double k) {
                double s = 0.0;
                for (Eigen::Index m = 0; m < gm.size(); ++m) {
                    const double v = r_of(k, m);
                    s += q_(m) * v * v;
                }
                return s;
            };
            int guard = 0;
            while (load(hi) > bound_ && guard++ < 2000)
                hi *= 2.0;
            guard = 0;
            while (load(hi * 0.5) <= bound_ && hi > 1e-300 && guard++ < 2000)
                hi *= 0.5;
            lo = hi * 0.5;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (load(mid) > bound_)
                    lo = mid;
                else
                    hi = mid;
            }
            for (Eigen::Index m = 0; m < gm.size(); ++m)
                rc(m) = r_of(hi, m);
        }
        return gm.dot(rc);
    }

private:
    template <class Load>
    double multiplier(Load load) const
    {
        double hi = 1.0;
        int guard = 0;
        while (load(hi) > bound_ && guard++ < 2000)
            hi *= 2.0;
        double lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (load(mid) > bound_)
                lo = mid;
            else
                hi = mid;
        }
        return hi;
    }

    RVector caps_;
    RVector q_;
    double bound_;
    bool has_ellipsoid_;
};

inline QcqpResult solve_capped(const QcqpProblem& p, const QcqpOptions& opt, const CVector* warm)
{
    const Eigen::Index n = p.b.size();
    const CMatrix a = hermitian_part(p.a);
    if (p.constraints.size() > 1)
        throw Error(ErrorCode::BadParams, "qcqp: caps support at most one additional constraint");
    const bool has_ell = !p.constraints.empty();
    RVector qdiag = RVector::Zero(n);
    double bound = 0.0;
    if (has_ell) {
        if (!is_diagonal(p.constraints[0].q))
            throw Error(ErrorCode::BadParams, "qcqp: capped problems need a diagonal ellipsoid");
        qdiag = p.constraints[0].q.diagonal().real();
        bound = p.constraints[0].bound;
    }

    // Jacobi scaling x = D y.
    const double amax = std::max(a.diagonal().real().maxCoeff(), 1e-300);
    RVector d(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const double am = a(m, m).real();
        d(m) = 1.0 / std::sqrt(std::max(am, 1e-12 * amax));
    }
    const CMatrix as = d.asDiagonal() * a * d.asDiagonal();
    const CVector bs = d.asDiagonal() * p.b;
    const RVector caps_s = p.caps->cwiseQuotient(d);
    const RVector q_s = qdiag.cwiseProduct(d.cwiseAbs2());
    const CappedProjector proj(caps_s, q_s, bound, has_ell);

    auto value = [&](const CVector& y) { return concave_quadratic_value(as, bs, y); };
    auto grad = [&](const CVector& y) -> CVector { return bs - 2.0 * (as * y); };

    double lip = 2.0 * max_eigenvalue_psd(as);
    if (lip <= 0.0)
        lip = 1e-12 * std::max(bs.norm(), 1e-300) / std::max(caps_s.norm(), 1e-300);
    CVector y = warm ? proj.project(d.cwiseInverse().asDiagonal() * (*warm)) : CVector(CVector::Zero(n));

    // Frank-Wolfe gap: an upper bound on f* - f(y) for concave f.
    auto gap_at = [&](const CVector& yy) {
        const CVector g = grad(yy);
        return proj.support(g) - g.dot(yy).real();
    };

    int iterations = 0;
    double fy = value(y);
    double gap = gap_at(y);
    {
        const double step = 1.0 / lip;
        CVector z = y;
        double t = 1.0;
        while (gap > 0.5 * opt.tol * (1.0 + std::abs(fy)) && iterations < opt.max_iter) {
            for (int inner = 0; inner < 10; ++inner, ++iterations) {
                const CVector y_next = proj.project(z + step * grad(z));
                const double f_next = value(y_next);
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                if (f_next < fy) {
                    // monotone restart
                    z = y;
                    t = 1.0;
                    continue;
                }
                z = y_next + ((t - 1.0) / t_next) * (y_next - y);
                y = y_next;
                fy = f_next;
                t = t_next;
            }
            gap = gap_at(y);
        }
    }

    QcqpResult r;
    r.x = d.asDiagonal() * y;
    r.objective = concave_quadratic_value(a, p.b, r.x);
    r.dual_bound = r.objective + std::max(gap, 0.0);
    r.kkt_residual = gap / (1.0 + std::abs(r.objective));
    r.iterations = iterations;
    r.multipliers.assign(p.constraints.size(), 0.0);
    bool feasible = (r.x.cwiseAbs().array() <= p.caps->array() * (1.0 + opt.slack) + 1e-300).all();
    if (has_ell) {
        const double val = qdiag.dot(r.x.cwiseAbs2());
        feasible = feasible && val <= bound + opt.slack * std::max(bound, 1e-300);
    }
    r.converged = feasible && gap <= opt.tol * (1.0 + std::abs(r.objective));
    return r;
}

} // namespace detail

/// Unchecked variant: returns the best iterate with `converged` set instead of throwing.
inline QcqpResult solve_concave_qcqp_result(const QcqpProblem& p, const QcqpOptions& opt = {},
                                            const CVector* warm_start = nullptr)
{
    for (const auto& c : p.constraints)
        if (c.bound < 0.0)
            throw Error(ErrorCode::Infeasible, "qcqp: negative constraint bound");
    if (opt.validate)
        detail::validate_problem(p);
    if (p.caps)
        return detail::solve_capped(p, opt, warm_start);
    return detail::solve_dual_bisection(p, opt);
}

/// Maximizes Re{b^H x} - x^H A x over the constraint set. Throws MaxIterExceeded when the
/// certificate is not met.
inline CVector solve_concave_qcqp(const QcqpProblem& p, double tol = 1e-7, int max_iter = 60000)
{
    QcqpOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    QcqpResult r = solve_concave_qcqp_result(p, opt);
    if (!r.converged)
        throw Error(ErrorCode::MaxIterExceeded,
                    "qcqp: certificate not met (gap " + std::to_string(r.dual_bound - r.objective) + ")");
    return r.x;
}

} // namespace ajris

#endif // AJRIS_QCQP_HPP
