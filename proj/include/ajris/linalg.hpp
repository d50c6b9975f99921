#ifndef AJRIS_LINALG_HPP
#define AJRIS_LINALG_HPP

#include "ajris/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>

namespace ajris {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// (A + A^H) / 2
inline CMatrix hermitian_part(const CMatrix& a)
{
    return (a + a.adjoint()) * 0.5;
}

inline bool is_hermitian(const CMatrix& a, double tol = 1e-12)
{
    if (a.rows() != a.cols())
        return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Smallest eigenvalue of the Hermitian part of `a`. Used for PSD checks only.
inline double min_eigenvalue(const CMatrix& a)
{
    if (a.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline bool is_psd(const CMatrix& a, double tol = 1e-10)
{
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return min_eigenvalue(a) >= -tol * scale;
}

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration (upper-biased by 1%).
inline double max_eigenvalue_psd(const CMatrix& a, int iterations = 60)
{
    const Eigen::Index n = a.rows();
    if (n == 0)
        return 0.0;
    CVector v = CVector::Constant(n, cplx(1.0, 0.0));
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) += cplx(0.0, 1e-3 * static_cast<double>(i + 1));
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        CVector w = a * v;
        const double nw = w.norm();
        if (nw == 0.0)
            return 0.0;
        lambda = nw;
        v = w / nw;
    }
    // Power iteration converges from below; the Frobenius norm bounds from above.
    return std::min(1.01 * lambda, a.norm());
}

/// Solves (A + ridge I) x = b for Hermitian A. The matrix is symmetrized first.
inline CVector herm_solve(const CMatrix& a, const CVector& b, double ridge = 0.0)
{
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw Error(ErrorCode::SingularSystem, "herm_solve: dimension mismatch");
    if (ridge < 0.0)
        throw Error(ErrorCode::SingularSystem, "herm_solve: negative ridge");
    const Eigen::Index n = a.rows();
    if (n == 0)
        return CVector(0);
    CMatrix reg = hermitian_part(a);
    reg.diagonal().array() += ridge;

    Eigen::LDLT<CMatrix> ldlt(reg);
    const RVector piv = ldlt.vectorD().real().cwiseAbs();
    const double piv_ratio = piv.maxCoeff() > 0.0 ? piv.minCoeff() / piv.maxCoeff() : 0.0;
    if (ldlt.info() != Eigen::Success || !(piv_ratio > 1e-15) || !(ldlt.rcond() > 1e-14))
        throw Error(ErrorCode::SingularSystem,
                    "herm_solve: regularized matrix is ill-conditioned (rcond " +
                        std::to_string(ldlt.rcond()) + ")");
    CVector x = ldlt.solve(b);
    // one step of iterative refinement
    const CVector r = b - reg * x;
    x += ldlt.solve(r);
    if (!x.allFinite())
        throw Error(ErrorCode::SingularSystem, "herm_solve: non-finite solution");
    return x;
}

struct BisectResult {
    double root = 0.0;
    double lo = 0.0; ///< final bracket end on the lo side
    double hi = 0.0; ///< final bracket end on the hi side
    int iterations = 0;
};

/// Bisection for f(x) = target on [lo, hi] where f is monotone and f(lo) - target,
/// f(hi) - target differ in sign. Stops when |f(mid) - target| <= tol or the bracket
/// width is <= tol * max(1, |hi|).
inline BisectResult bisect(const std::function<double(double)>& f, double lo, double hi, double tol,
                           double target = 0.0)
{
    if (!(hi > lo) || !(tol > 0.0))
        throw Error(ErrorCode::NoBracket, "bisect: need lo < hi and tol > 0");
    const double flo = f(lo) - target;
    const double fhi = f(hi) - target;
    BisectResult res{lo, lo, hi, 0};
    if (flo == 0.0) {
        res.root = lo;
        res.hi = lo;
        return res;
    }
    if (fhi == 0.0) {
        res.root = hi;
        res.lo = hi;
        return res;
    }
    if ((flo > 0.0) == (fhi > 0.0))
        throw Error(ErrorCode::NoBracket, "bisect: f(lo) and f(hi) do not bracket the target");
    const bool increasing = fhi > 0.0;
    const double width_tol = tol * std::max(1.0, std::abs(hi));
    double a = lo;
    double b = hi;
    double mid = 0.5 * (a + b);
    while (true) {
        mid = 0.5 * (a + b);
        ++res.iterations;
        const double fm = f(mid) - target;
        if (std::abs(fm) <= tol)
            break;
        if ((fm > 0.0) == increasing)
            b = mid;
        else
            a = mid;
        if (b - a <= width_tol) {
            mid = 0.5 * (a + b);
            break;
        }
    }
    res.root = mid;
    res.lo = a;
    res.hi = b;
    return res;
}

/// Euclidean projection onto {x : |x_m| <= caps_m}. Phases are kept.
inline CVector project_magnitude_caps(const CVector& x, const RVector& caps)
{
    if (caps.size() != x.size())
        throw Error(ErrorCode::BadParams, "project_magnitude_caps: caps length mismatch");
    CVector out = x;
    for (Eigen::Index m = 0; m < x.size(); ++m) {
        const double cap = caps(m);
        if (cap < 0.0)
            throw Error(ErrorCode::BadParams, "project_magnitude_caps: negative cap");
        const double mag = std::abs(x(m));
        if (mag > cap)
            out(m) = (cap == 0.0) ? cplx(0.0, 0.0) : x(m) * (cap / mag);
    }
    return out;
}

/// Re{b^H x} - x^H A x
inline double concave_quadratic_value(const CMatrix& a, const CVector& b, const CVector& x)
{
    return b.dot(x).real() - x.dot(a * x).real();
}

inline double quad_form(const CMatrix& q, const CVector& x)
{
    return x.dot(q * x).real();
}

} // namespace ajris

#endif // AJRIS_LINALG_HPP
