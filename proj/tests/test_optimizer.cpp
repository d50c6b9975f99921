#include "ajris/optimizer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ajris;
using fixture::Dims;
using fixture::random_beams;
using fixture::random_channels;
using fixture::random_realization;

namespace {

PowerModel test_power()
{
    PowerModel pm;
    pm.p_max = 4.0;
    pm.sigma1_sq = 0.3;
    pm.sigma2_sq = 0.2;
    pm.sigmar_sq = 0.05;
    pm.p_dc = pm.p_sc = 1e-3;
    pm.a_max = 3.0;
    return pm;
}

SaaStats stats_from(std::mt19937_64& rng, const ChannelSet& cs, int count)
{
    SaaStats s = make_saa_stats(cs);
    for (int i = 1; i <= count; ++i)
        update_saa_stats(s, random_realization(rng, cs, static_cast<std::uint64_t>(i)), cs);
    return s;
}

double sum_log1p_stage1(const Beams& w, const SaaStats& s, const ChannelSet& cs, double sigma)
{
    double v = 0.0;
    for (int k = 0; k < cs.k(); ++k)
        v += std::log1p(saa_stage1_sinr(k, w, s, cs, sigma));
    return v;
}

double sum_log1p_stage2(const Beams& w, const CVector& th, const SaaStats& s, const ChannelSet& cs,
                        const PowerModel& pm)
{
    double v = 0.0;
    for (int k = 0; k < cs.k(); ++k)
        v += std::log1p(saa_stage2_sinr(k, w, th, s, cs, pm));
    return v;
}

/// A state whose auxiliaries are set for its own beams and reflection vector; the harvest
/// comfortably covers the RIS load so the energy sets are nonempty.
SolverState random_state(std::mt19937_64& rng, const ChannelSet& cs, const SaaStats& s, const PowerModel& pm)
{
    SolverState st;
    st.w1 = scale_beams(random_beams(rng, cs.k(), cs.n()), 0.5);
    st.w2 = scale_beams(random_beams(rng, cs.k(), cs.n()), 0.5);
    st.theta = oracle::random_cvector(rng, cs.m(), 0.5);
    st.tau = 0.5;
    const AuxVars a1 = update_aux_stage1(st.w1, cs, s, pm.sigma1_sq);
    const AuxVars a2 = update_aux_stage2(st.w2, st.theta, cs, s, pm);
    st.omega1 = a1.omega;
    st.nu1 = a1.nu;
    st.omega2 = a2.omega;
    st.nu2 = a2.nu;
    return st;
}

CVector ball_halfspace_dykstra(const CVector& y, double p_max, const CVector& c, double bound)
{
    // {||x||^2 <= p_max} intersected with {Re{c^H x} >= bound}
    auto ball = [&](const CVector& v) -> CVector {
        const double n2 = v.squaredNorm();
        return n2 > p_max ? CVector(v * std::sqrt(p_max / n2)) : v;
    };
    auto half = [&](const CVector& v) -> CVector {
        const double g = c.dot(v).real();
        return g >= bound ? v : CVector(v + (bound - g) / c.squaredNorm() * c);
    };
    CVector x = y, p = CVector::Zero(y.size()), q = CVector::Zero(y.size());
    for (int it = 0; it < 5000; ++it) {
        const CVector z = ball(x + p);
        p = x + p - z;
        const CVector xn = half(z + q);
        q = z + q - xn;
        const double change = (xn - x).norm();
        x = xn;
        if (change < 1e-15 * (1.0 + x.norm()))
            break;
    }
    return x;
}

} // namespace

// ---------------------------------------------------------------------------------------------
// tau

TEST(Tau, Examples)
{
    CMatrix g = CMatrix::Identity(2, 2);
    Beams w{CVector::Unit(2, 0)};
    EXPECT_NEAR(update_tau(1.0, w, g, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(update_tau(3.0, w, g, 1.0), 0.75, 1e-15);
    EXPECT_LT(update_tau(1e-12, w, g, 1.0), 1e-11);
    EXPECT_NEAR(update_tau(0.0, w, g, 1.0), 0.0, 0.0);
    try {
        update_tau(0.0, Beams{CVector::Zero(2)}, g, 1.0);
        FAIL() << "expected DegenerateTau";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateTau);
    }
}

TEST(Tau, EnergyConstraintTightAtOptimum)
{
    std::mt19937_64 rng(1);
    const PowerModel pm = test_power();
    for (int t = 0; t < 100; ++t) {
        const ChannelSet cs = random_channels(rng, Dims{});
        const Beams w1 = random_beams(rng, cs.k(), cs.n());
        const Beams w2 = random_beams(rng, cs.k(), cs.n());
        const CVector th = oracle::random_cvector(rng, cs.m());
        const double pr = ris_power(w2, th, cs.g_br, pm);
        const double tau = update_tau(pr, w1, cs.g_br, pm.eta1);
        const double er = harvested_energy(w1, tau, cs.g_br, pm.eta1);
        EXPECT_LE(std::abs(er - (1.0 - tau) * pr), 1e-12 * std::max(er, (1.0 - tau) * pr));
    }
}

// ---------------------------------------------------------------------------------------------
// quadratic transform

TEST(QuadraticTransform, StageOneIdentity)
{
    std::mt19937_64 rng(2);
    const PowerModel pm = test_power();
    for (int t = 0; t < 100; ++t) {
        const ChannelSet cs = random_channels(rng, Dims{});
        const SaaStats s = stats_from(rng, cs, 3);
        const Beams w = random_beams(rng, cs.k(), cs.n());
        const AuxVars a = update_aux_stage1(w, cs, s, pm.sigma1_sq);
        const double exact = sum_log1p_stage1(w, s, cs, pm.sigma1_sq);
        EXPECT_NEAR(surrogate_stage1(w, a, cs, s, pm.sigma1_sq), exact, 1e-10 * std::max(1.0, exact));
        for (int k = 0; k < cs.k(); ++k)
            EXPECT_NEAR(a.omega(k), saa_stage1_sinr(k, w, s, cs, pm.sigma1_sq), 1e-12 * (1.0 + a.omega(k)));
    }
}

TEST(QuadraticTransform, StageTwoIdentity)
{
    std::mt19937_64 rng(3);
    const PowerModel pm = test_power();
    for (int t = 0; t < 100; ++t) {
        const ChannelSet cs = random_channels(rng, Dims{});
        const SaaStats s = stats_from(rng, cs, 3);
        const Beams w = random_beams(rng, cs.k(), cs.n());
        const CVector th = oracle::random_cvector(rng, cs.m());
        const AuxVars a = update_aux_stage2(w, th, cs, s, pm);
        const double exact = sum_log1p_stage2(w, th, s, cs, pm);
        EXPECT_NEAR(surrogate_stage2(w, th, a, cs, s, pm), exact, 1e-10 * std::max(1.0, exact));
    }
}

TEST(QuadraticTransform, SurrogateIsAMinorizer)
{
    std::mt19937_64 rng(4);
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, Dims{});
    const SaaStats s = stats_from(rng, cs, 3);
    const Beams w = random_beams(rng, cs.k(), cs.n());
    const AuxVars a = update_aux_stage1(w, cs, s, pm.sigma1_sq);
    for (int t = 0; t < 50; ++t) {
        const Beams v = random_beams(rng, cs.k(), cs.n());
        EXPECT_LE(surrogate_stage1(v, a, cs, s, pm.sigma1_sq), sum_log1p_stage1(v, s, cs, pm.sigma1_sq) + 1e-12);
    }
}

TEST(QuadraticTransform, ZeroBeams)
{
    std::mt19937_64 rng(5);
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, Dims{});
    const SaaStats s = stats_from(rng, cs, 2);
    const Beams w(cs.k(), CVector::Zero(cs.n()));
    const AuxVars a1 = update_aux_stage1(w, cs, s, pm.sigma1_sq);
    EXPECT_EQ(a1.omega.norm(), 0.0);
    EXPECT_EQ(a1.nu.norm(), 0.0);
    EXPECT_EQ(surrogate_stage1(w, a1, cs, s, pm.sigma1_sq), 0.0);
    const AuxVars a2 = update_aux_stage2(w, oracle::random_cvector(rng, cs.m()), cs, s, pm);
    EXPECT_EQ(a2.omega.norm(), 0.0);
    EXPECT_EQ(a2.nu.norm(), 0.0);
}

TEST(QuadraticTransform, SingleUserWithoutAdversaries)
{
    std::mt19937_64 rng(6);
    Dims d;
    d.k = 1;
    d.q = 0;
    d.b = 0;
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, d);
    const SaaStats s = stats_from(rng, cs, 1);
    const Beams w = random_beams(rng, 1, cs.n());
    const AuxVars a1 = update_aux_stage1(w, cs, s, pm.sigma1_sq);
    EXPECT_NEAR(a1.omega(0), std::norm(cs.h_bu[0].dot(w[0])) / pm.sigma1_sq, 1e-12 * a1.omega(0));
    const AuxVars a2 = update_aux_stage2(w, CVector::Zero(cs.m()), cs, s, pm);
    EXPECT_NEAR(a2.omega(0), std::norm(cs.h_bu[0].dot(w[0])) / pm.sigma2_sq, 1e-12 * a2.omega(0));
}

// ---------------------------------------------------------------------------------------------
// first-stage beams

TEST(SolveW1, LinearizationUnderEstimatesHarvest)
{
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        const CMatrix g = oracle::random_cmatrix(rng, 5, 4);
        const CMatrix k1 = g.adjoint() * g;
        const CVector w0 = oracle::random_cvector(rng, 4);
        const CVector w = oracle::random_cvector(rng, 4);
        const double lin = 2.0 * w0.dot(k1 * w).real() - w0.dot(k1 * w0).real();
        EXPECT_LE(lin, (g * w).squaredNorm() + 1e-12);
        EXPECT_NEAR(2.0 * w0.dot(k1 * w0).real() - w0.dot(k1 * w0).real(), (g * w0).squaredNorm(), 1e-12);
    }
}

TEST(SolveW1, SingleUserMatchedFilter)
{
    std::mt19937_64 rng(8);
    Dims d;
    d.k = 1;
    d.q = 0;
    d.b = 0;
    PowerModel pm = test_power();
    pm.p_dc = pm.p_sc = 0.0;
    const ChannelSet cs = random_channels(rng, d);
    const SaaStats s = stats_from(rng, cs, 1);
    SolverState st;
    st.tau = 0.5;
    st.w1 = random_beams(rng, 1, cs.n(), 0.3);
    st.w2 = Beams{CVector::Zero(cs.n())};
    st.theta = CVector::Zero(cs.m());
    // energy demand is zero, so only the power budget matters
    for (int outer = 0; outer < 30; ++outer) {
        const AuxVars a = update_aux_stage1(st.w1, cs, s, pm.sigma1_sq);
        st.omega1 = a.omega;
        st.nu1 = a.nu;
        st.w1 = solve_w1(st, cs, s, pm);
    }
    const CVector& h = cs.h_bu[0];
    EXPECT_NEAR(beam_power(st.w1) / pm.p_max, 1.0, 1e-6);
    EXPECT_NEAR(std::norm(h.dot(st.w1[0])) / (pm.p_max * h.squaredNorm()), 1.0, 1e-6);
}

TEST(SolveW1, ZeroMultiplierWhenBudgetSlack)
{
    std::mt19937_64 rng(9);
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, Dims{});
    const SaaStats s = stats_from(rng, cs, 3);
    const Beams w = scale_beams(random_beams(rng, cs.k(), cs.n()), 0.01);
    const AuxVars a = update_aux_stage1(w, cs, s, pm.sigma1_sq);
    const BeamSolveResult r = solve_beams_closed_form(cs.h_bu, a, w, 1e12, nullptr, 1, 1e-3);
    // a rank-deficient K2 leaves only a round-off sized multiplier
    EXPECT_LE(r.lambda1, 1e-12);
    EXPECT_LT(beam_power(r.w), 1e12);
}

TEST(SolveW1, PowerCurveHitsBudget)
{
    std::mt19937_64 rng(10);
    const PowerModel pm = test_power();
    for (int t = 0; t < 20; ++t) {
        const ChannelSet cs = random_channels(rng, Dims{});
        const SaaStats s = stats_from(rng, cs, 3);
        const Beams w = random_beams(rng, cs.k(), cs.n());
        const AuxVars a = update_aux_stage1(w, cs, s, pm.sigma1_sq);
        const Beams start = scale_beams(w, std::sqrt(0.5e-3 / beam_power(w)));
        const BeamSolveResult r = solve_beams_closed_form(cs.h_bu, a, start, 1e-3, nullptr, 1, 1e-3);
        ASSERT_GT(r.lambda1, 0.0);
        EXPECT_NEAR(beam_power(r.w) / 1e-3, 1.0, 1e-6);
    }
}

TEST(SolveW1, MultiplierDecreasesWithBudget)
{
    std::mt19937_64 rng(11);
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, Dims{});
    const SaaStats s = stats_from(rng, cs, 3);
    const Beams w = random_beams(rng, cs.k(), cs.n());
    const AuxVars a = update_aux_stage1(w, cs, s, pm.sigma1_sq);
    // P(lambda1) is decreasing iff the multiplier that meets a budget falls as the budget grows
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
        const double budget = 1e-4 * std::pow(10.0, i / 40.0);
        const Beams start = scale_beams(w, std::sqrt(0.5 * budget / beam_power(w)));
        const BeamSolveResult r = solve_beams_closed_form(cs.h_bu, a, start, budget, nullptr, 1, 1e-3);
        ASSERT_GT(r.lambda1, 0.0);
        EXPECT_LT(r.lambda1, prev);
        prev = r.lambda1;
    }
}

TEST(SolveW1, MatchesProjectedGradientWithoutEnergy)
{
    std::mt19937_64 rng(12);
    const PowerModel pm = test_power();
    Dims d;
    d.n = 4;
    d.k = 2;
    for (int t = 0; t < 10; ++t) {
        const ChannelSet cs = random_channels(rng, d);
        const SaaStats s = stats_from(rng, cs, 3);
        const Beams w0 = random_beams(rng, cs.k(), cs.n());
        const AuxVars a = update_aux_stage1(w0, cs, s, pm.sigma1_sq);
        const BeamSolveResult r = solve_beams_closed_form(cs.h_bu, a, w0, pm.p_max, nullptr, 15, 1e-12);

        // same objective written as Re{b^H x} - x^H A x over the stacked vector
        CMatrix blk = CMatrix::Zero(cs.n(), cs.n());
        for (int k = 0; k < cs.k(); ++k)
            blk += std::norm(a.nu(k)) * cs.h_bu[k] * cs.h_bu[k].adjoint();
        const CMatrix big = detail::block_diagonal(blk, cs.k());
        CVector b(cs.n() * cs.k());
        for (int k = 0; k < cs.k(); ++k)
            b.segment(k * cs.n(), cs.n()) = 2.0 * std::sqrt(1.0 + a.omega(k)) * a.nu(k) * cs.h_bu[k];
        const double lip = 2.0 * Eigen::SelfAdjointEigenSolver<CMatrix>(big).eigenvalues().maxCoeff();
        const oracle::BallEllipsoidProjector proj(CMatrix::Zero(b.size(), b.size()), pm.p_max, 1.0);
        const CVector x = oracle::projected_gradient(big, b, proj, 1.0 / lip, 20000, CVector::Zero(b.size()));
        const double ref = oracle::objective(big, b, x);
        const double got = beam_surrogate(cs.h_bu, a, r.w);
        EXPECT_NEAR(got, ref, 1e-4 * std::abs(ref));
        EXPECT_LE(r.kkt_residual, 1e-6);
    }
}

TEST(SolveW1, EnergyCoupledSolutionIsStationaryForItsLinearization)
{
    std::mt19937_64 rng(13);
    PowerModel pm = test_power();
    Dims d;
    d.n = 4;
    d.k = 2;
    int binding = 0;
    for (int t = 0; t < 10; ++t) {
        const ChannelSet cs = random_channels(rng, d);
        const SaaStats s = stats_from(rng, cs, 3);
        SolverState st = random_state(rng, cs, s, pm);
        st.w1 = scale_beams(st.w1, std::sqrt(pm.p_max / beam_power(st.w1)));
        st.tau = 0.3;
        // demand set to a large share of what the current beams deliver
        EnergyLink link;
        link.k1 = hermitian_part(cs.g_br.adjoint() * cs.g_br);
        link.tau_eta = st.tau * pm.eta1;
        link.demand = 0.9 * harvested_energy(st.w1, st.tau, cs.g_br, pm.eta1);
        const AuxVars a{st.omega1, st.nu1};
        const BeamSolveResult r = solve_beams_closed_form(cs.h_bu, a, st.w1, pm.p_max, &link, 200, 1e-14);

        double harvest = 0.0;
        for (const auto& w : r.w)
            harvest += (link.k1 * w).dot(w).real();
        EXPECT_GE(link.tau_eta * harvest, link.demand * (1.0 - 1e-10));
        EXPECT_LE(beam_power(r.w), pm.p_max * (1.0 + 1e-10));
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            EXPECT_GE(r.trace[i], r.trace[i - 1] - 1e-9 * std::abs(r.trace[i - 1]));

        // a long projected-gradient run on the linearized set around the returned point cannot
        // beat it
        CVector c(cs.n() * cs.k());
        double lin0 = 0.0;
        for (int k = 0; k < cs.k(); ++k) {
            c.segment(k * cs.n(), cs.n()) = 2.0 * link.tau_eta * (link.k1 * r.w[k]);
            lin0 += link.tau_eta * r.w[k].dot(link.k1 * r.w[k]).real();
        }
        const double bound = link.demand + lin0;
        CMatrix blk = CMatrix::Zero(cs.n(), cs.n());
        for (int k = 0; k < cs.k(); ++k)
            blk += std::norm(a.nu(k)) * cs.h_bu[k] * cs.h_bu[k].adjoint();
        const CMatrix big = detail::block_diagonal(blk, cs.k());
        CVector b(cs.n() * cs.k());
        for (int k = 0; k < cs.k(); ++k)
            b.segment(k * cs.n(), cs.n()) = 2.0 * std::sqrt(1.0 + a.omega(k)) * a.nu(k) * cs.h_bu[k];
        const double lip = 2.0 * Eigen::SelfAdjointEigenSolver<CMatrix>(big).eigenvalues().maxCoeff();
        auto proj = [&](const CVector& y) { return ball_halfspace_dykstra(y, pm.p_max, c, bound); };
        const CVector x = oracle::projected_gradient(big, b, proj, 1.0 / lip, 3000, detail::stack(r.w));
        const double ref = oracle::objective(big, b, x);
        const double got = beam_surrogate(cs.h_bu, a, r.w);
        EXPECT_GE(got, ref - 1e-4 * std::abs(ref));
        if (r.lambda2 > 0.0)
            ++binding;
    }
    EXPECT_GT(binding, 0);
}

// ---------------------------------------------------------------------------------------------
// second-stage beams

TEST(SolveW2, IdentityBlocksGiveHalfOfY)
{
    std::mt19937_64 rng(14);
    W2Problem p;
    p.y = oracle::random_cvector(rng, 6);
    p.big_y = CMatrix::Identity(6, 6);
    p.s = CMatrix::Identity(6, 6);
    p.p_e = 1e6;
    const double inside = 2.0 * (p.y / 2.0).squaredNorm();
    const CVector x = solve_w2_problem(p, inside);
    EXPECT_NEAR((x - p.y / 2.0).norm(), 0.0, 1e-6 * p.y.norm());
    const double small = 0.1 * (p.y / 2.0).squaredNorm();
    const CVector xc = solve_w2_problem(p, small);
    const CVector expect = p.y / 2.0 * std::sqrt(small / (p.y / 2.0).squaredNorm());
    EXPECT_NEAR((xc - expect).norm(), 0.0, 1e-6 * expect.norm());
}

TEST(SolveW2, RisOffMakesEnergyMatrixVanish)
{
    std::mt19937_64 rng(15);
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, Dims{});
    const SaaStats s = stats_from(rng, cs, 2);
    SolverState st = random_state(rng, cs, s, pm);
    st.theta = CVector::Zero(cs.m());
    const W2Problem p = assemble_w2(st, cs, pm);
    EXPECT_EQ(p.s.norm(), 0.0);
}

TEST(SolveW2, AssemblyDiffersFromSurrogateByConstant)
{
    std::mt19937_64 rng(16);
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, Dims{});
    const SaaStats s = stats_from(rng, cs, 4);
    const SolverState st = random_state(rng, cs, s, pm);
    const W2Problem p = assemble_w2(st, cs, pm);
    const AuxVars a{st.omega2, st.nu2};
    const double c0 = surrogate_stage2(st.w2, st.theta, a, cs, s, pm) - w2_objective(p, st.w2);
    for (int t = 0; t < 20; ++t) {
        const Beams w = random_beams(rng, cs.k(), cs.n());
        const double c = surrogate_stage2(w, st.theta, a, cs, s, pm) - w2_objective(p, w);
        EXPECT_NEAR(c, c0, 1e-10 * (1.0 + std::abs(c0)));
    }
}

TEST(SolveW2, MatchesProjectedGradientOracle)
{
    std::mt19937_64 rng(17);
    const PowerModel pm = test_power();
    Dims d;
    d.n = 4;
    d.k = 2;
    d.m = 4;
    for (int t = 0; t < 10; ++t) {
        const ChannelSet cs = random_channels(rng, d);
        const SaaStats s = stats_from(rng, cs, 3);
        const SolverState st = random_state(rng, cs, s, pm);
        W2Problem p = assemble_w2(st, cs, pm);
        // make the ellipsoid bind on half the instances
        p.p_e = (t % 2 ? 0.2 : 5.0) * quad_form(p.s, detail::stack(st.w2));
        const CVector x = solve_w2_problem(p, pm.p_max);
        const double lip = 2.0 * Eigen::SelfAdjointEigenSolver<CMatrix>(p.big_y).eigenvalues().maxCoeff();
        const oracle::BallEllipsoidProjector proj(p.s, pm.p_max, p.p_e);
        const CVector xo = oracle::projected_gradient(p.big_y, p.y, proj, 1.0 / lip, 20000, CVector::Zero(p.y.size()));
        const double ref = oracle::objective(p.big_y, p.y, xo);
        EXPECT_NEAR(oracle::objective(p.big_y, p.y, x), ref, 1e-5 * std::abs(ref));
        EXPECT_LE(x.squaredNorm(), pm.p_max * (1.0 + 1e-8));
        EXPECT_LE(quad_form(p.s, x), p.p_e * (1.0 + 1e-8));
    }
}

TEST(SolveW2, NegativeBudgetIsEnergyInfeasible)
{
    std::mt19937_64 rng(18);
    W2Problem p;
    p.y = oracle::random_cvector(rng, 4);
    p.big_y = CMatrix::Identity(4, 4);
    p.s = CMatrix::Identity(4, 4);
    p.p_e = -1.0;
    try {
        solve_w2_problem(p, 1.0);
        FAIL() << "expected EnergyInfeasible";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EnergyInfeasible);
    }
}

// ---------------------------------------------------------------------------------------------
// reflection vector

TEST(SolveTheta, UnconstrainedMaximum)
{
    std::mt19937_64 rng(19);
    ThetaProblem p;
    p.gamma = CMatrix::Identity(5, 5);
    p.lambda = oracle::random_cvector(rng, 5, 0.5);
    p.v = RVector::Constant(5, 1e-3);
    p.p_e = 1.0;
    const CVector x = solve_theta_problem(p, 10.0);
    EXPECT_NEAR((x - p.lambda / 2.0).norm(), 0.0, 1e-6 * p.lambda.norm());
}

TEST(SolveTheta, ScalarCapBinds)
{
    ThetaProblem p;
    p.gamma = CMatrix::Identity(1, 1);
    p.lambda = CVector::Constant(1, std::polar(10.0, 0.7));
    p.v = RVector::Constant(1, 1e-6);
    p.p_e = 1.0;
    const CVector x = solve_theta_problem(p, 2.0);
    EXPECT_NEAR(std::abs(x(0) - std::polar(2.0, 0.7)), 0.0, 1e-8);
}

TEST(SolveTheta, QuadraticMatchesSurrogateUpToConstant)
{
    std::mt19937_64 rng(20);
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, Dims{});
    const SaaStats s = stats_from(rng, cs, 5);
    const SolverState st = random_state(rng, cs, s, pm);
    const ThetaProblem p = assemble_theta(st, cs, s, pm);
    const AuxVars a{st.omega2, st.nu2};
    const double c0 = surrogate_stage2(st.w2, st.theta, a, cs, s, pm) - theta_objective(p, st.theta);
    for (int t = 0; t < 20; ++t) {
        const CVector th = oracle::random_cvector(rng, cs.m(), 2.0);
        const double c = surrogate_stage2(st.w2, th, a, cs, s, pm) - theta_objective(p, th);
        EXPECT_NEAR(c, c0, 1e-10 * (1.0 + std::abs(c0)));
    }
    EXPECT_TRUE(is_hermitian(p.gamma, 1e-14));
    EXPECT_TRUE(is_psd(p.gamma));
}

TEST(SolveTheta, MatchesProjectedGradientOracle)
{
    std::mt19937_64 rng(21);
    const PowerModel pm = test_power();
    Dims d;
    d.m = 4;
    for (int t = 0; t < 10; ++t) {
        const ChannelSet cs = random_channels(rng, d);
        const SaaStats s = stats_from(rng, cs, 3);
        const SolverState st = random_state(rng, cs, s, pm);
        ThetaProblem p = assemble_theta(st, cs, s, pm);
        p.p_e = (t % 2 ? 0.3 : 3.0) * p.v.dot(st.theta.cwiseAbs2());
        const CVector x = solve_theta_problem(p, pm.a_max);
        const double lip = 2.0 * Eigen::SelfAdjointEigenSolver<CMatrix>(p.gamma).eigenvalues().maxCoeff();
        const oracle::CapsDiagEllipsoidProjector proj(RVector::Constant(cs.m(), pm.a_max), p.v, p.p_e, true);
        const CVector xo =
            oracle::projected_gradient(p.gamma, p.lambda, proj, 1.0 / lip, 20000, CVector::Zero(cs.m()));
        const double ref = oracle::objective(p.gamma, p.lambda, xo);
        EXPECT_NEAR(theta_objective(p, x), ref, 1e-5 * std::abs(ref));
        EXPECT_LE(x.cwiseAbs().maxCoeff(), pm.a_max * (1.0 + 1e-8));
        EXPECT_LE(p.v.dot(x.cwiseAbs2()), p.p_e * (1.0 + 1e-8));
    }
}

TEST(SolveTheta, NegativeBudgetIsEnergyInfeasible)
{
    ThetaProblem p;
    p.gamma = CMatrix::Identity(2, 2);
    p.lambda = CVector::Ones(2);
    p.v = RVector::Ones(2);
    p.p_e = -1.0;
    EXPECT_THROW(solve_theta_problem(p, 1.0), Error);
}

TEST(SolveTheta, UnitModulusAscent)
{
    std::mt19937_64 rng(22);
    const PowerModel pm = test_power();
    const ChannelSet cs = random_channels(rng, Dims{});
    const SaaStats s = stats_from(rng, cs, 3);
    SolverState st = random_state(rng, cs, s, pm);
    st.theta = st.theta.cwiseQuotient(st.theta.cwiseAbs().cast<cplx>());
    const ThetaProblem p = assemble_theta(st, cs, s, pm);
    const CVector th = solve_theta_unit_modulus(st, cs, s, pm);
    for (Eigen::Index m = 0; m < th.size(); ++m)
        EXPECT_NEAR(std::abs(th(m)), 1.0, 1e-12);
    EXPECT_GE(theta_objective(p, th), theta_objective(p, st.theta) - 1e-12);
}

// ---------------------------------------------------------------------------------------------
// block ascent and the outer loop

TEST(BlockAscent, EverySolveKeepsItsSurrogate)
{
    std::mt19937_64 rng(23);
    const PowerModel pm = test_power();
    for (int t = 0; t < 20; ++t) {
        const ChannelSet cs = random_channels(rng, Dims{});
        const SaaStats s = stats_from(rng, cs, 3);
        SolverState st = random_state(rng, cs, s, pm);
        st.tau = update_tau(ris_power(st.w2, st.theta, cs.g_br, pm), st.w1, cs.g_br, pm.eta1);

        const AuxVars a1{st.omega1, st.nu1};
        const double f1 = surrogate_stage1(st.w1, a1, cs, s, pm.sigma1_sq);
        const Beams w1 = solve_w1(st, cs, s, pm);
        EXPECT_GE(surrogate_stage1(w1, a1, cs, s, pm.sigma1_sq), f1 - 1e-9 * std::abs(f1));
        st.w1 = w1;

        const AuxVars a2{st.omega2, st.nu2};
        const double f2 = surrogate_stage2(st.w2, st.theta, a2, cs, s, pm);
        st.w2 = solve_w2(st, cs, s, pm);
        const double f3 = surrogate_stage2(st.w2, st.theta, a2, cs, s, pm);
        EXPECT_GE(f3, f2 - 1e-9 * std::abs(f2));
        st.theta = solve_theta(st, cs, s, pm);
        EXPECT_GE(surrogate_stage2(st.w2, st.theta, a2, cs, s, pm), f3 - 1e-9 * std::abs(f3));
        EXPECT_TRUE(check_feasibility(st, cs, pm).ok());
    }
}

namespace {

ScenarioConfig quiet_desk()
{
    ScenarioConfig c = desk_profile();
    c.q = 0;
    c.b = 0;
    return c;
}

ChannelSet without_ris(ChannelSet cs)
{
    cs.g_br = CMatrix::Zero(0, cs.n());
    for (auto& h : cs.h_ru)
        h = CVector::Zero(0);
    cs.g_jr_hat.clear();
    return cs;
}

} // namespace

TEST(Ao, WithoutRisOrAdversariesMatchesWmmse)
{
    const ScenarioConfig cfg = quiet_desk();
    for (int t = 0; t < 10; ++t) {
        const std::uint64_t ts = trial_seed(cfg.seed, static_cast<std::uint64_t>(t));
        Rng rng = stream_rng(ts, Stream::Static, 0);
        const ChannelSet cs = without_ris(sample_static_channels(cfg, rng));
        const AoReport rep = ssca_ao(cs, cfg, ts, Scheme::Active);
        const RVector extra = RVector::Constant(cs.k(), cfg.power.sigma2_sq);
        const double got = oracle::sum_log_rate(cs.h_bu, extra, rep.state.w2);
        const auto w_ref = oracle::wmmse(cs.h_bu, extra, cfg.power.p_max, matched_filter_beams(cs, cfg.power.p_max));
        const double ref = oracle::sum_log_rate(cs.h_bu, extra, w_ref);
        EXPECT_GE(got, ref * 0.98) << "trial " << t;
        EXPECT_EQ(rep.state.tau, 0.0);
    }
}

TEST(Ao, Deterministic)
{
    const ScenarioConfig cfg = desk_profile();
    const std::uint64_t ts = trial_seed(cfg.seed, 3);
    Rng r1 = stream_rng(ts, Stream::Static, 0);
    Rng r2 = stream_rng(ts, Stream::Static, 0);
    const AoReport a = ssca_ao(sample_static_channels(cfg, r1), cfg, ts);
    const AoReport b = ssca_ao(sample_static_channels(cfg, r2), cfg, ts);
    ASSERT_EQ(a.objective_nats.size(), b.objective_nats.size());
    for (std::size_t i = 0; i < a.objective_nats.size(); ++i)
        EXPECT_EQ(a.objective_nats[i], b.objective_nats[i]);
}

TEST(Ao, FeasibleAndTightAcrossTrials)
{
    const ScenarioConfig cfg = desk_profile();
    for (int t = 0; t < 10; ++t) {
        const std::uint64_t ts = trial_seed(cfg.seed, static_cast<std::uint64_t>(t));
        Rng rng = stream_rng(ts, Stream::Static, 0);
        const ChannelSet cs = sample_static_channels(cfg, rng);
        for (Scheme s : {Scheme::Active, Scheme::Passive, Scheme::NoRis}) {
            const AoReport rep = ssca_ao(cs, cfg, ts, s);
            EXPECT_TRUE(rep.feasibility.ok()) << to_string(s) << " worst slack " << rep.feasibility.worst();
            for (double slack : rep.min_slack)
                EXPECT_GE(slack, -1e-8);
            for (double tight : rep.tau_tightness)
                EXPECT_LE(tight, 1e-12);
            EXPECT_LE(rep.objective_nats.size(), static_cast<std::size_t>(cfg.knobs.r_max));
            EXPECT_EQ(rep.stats.count, rep.iterations);
            if (s == Scheme::Passive)
                for (Eigen::Index m = 0; m < rep.state.theta.size(); ++m)
                    EXPECT_NEAR(std::abs(rep.state.theta(m)), 1.0, 1e-12);
        }
    }
}

TEST(Ao, MonotoneAfterWarmupWithoutAdversaries)
{
    // no jammers or interferers: the sample means are constant, so only the optimizer moves
    // the objective
    const ScenarioConfig cfg = quiet_desk();
    for (int t = 0; t < 10; ++t) {
        const std::uint64_t ts = trial_seed(cfg.seed, static_cast<std::uint64_t>(t));
        Rng rng = stream_rng(ts, Stream::Static, 0);
        const ChannelSet cs = sample_static_channels(cfg, rng);
        for (Scheme s : {Scheme::Active, Scheme::Passive, Scheme::NoRis}) {
            const AoReport rep = ssca_ao(cs, cfg, ts, s);
            for (std::size_t i = static_cast<std::size_t>(cfg.knobs.warmup); i < rep.objective_nats.size(); ++i)
                EXPECT_GE(rep.objective_nats[i], rep.objective_nats[i - 1] * (1.0 - 1e-3))
                    << to_string(s) << " trial " << t << " iteration " << i + 1;
        }
    }
}
