#ifndef AJRIS_HARNESS_HPP
#define AJRIS_HARNESS_HPP

#include "ajris/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace ajris {

/// One scheme's result on one trial.
struct SchemeOutcome {
    Scheme scheme = Scheme::Active;
    double rate_bits = 0.0;      ///< held-out sum rate
    double objective_bits = 0.0; ///< last SAA objective of the optimizer
    int iterations = 0;
    bool converged = false;
    bool energy_infeasible = false;
    FeasibilityReport feasibility;
    std::vector<double> tau_tightness;
    std::vector<double> min_slack;
    std::vector<double> objective_trace_bits;
    double tau = 0.0;
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    std::vector<SchemeOutcome> outcomes; ///< in the order the schemes were requested
};

inline std::vector<Realization> heldout_realizations(const ChannelSet& cs, const ScenarioConfig& cfg,
                                                     std::uint64_t trial_seed_value)
{
    std::vector<Realization> out;
    out.reserve(static_cast<std::size_t>(cfg.heldout));
    for (int i = 0; i < cfg.heldout; ++i)
        out.push_back(realization_for(cs, cfg, trial_seed_value, kHeldOutBase + static_cast<std::uint64_t>(i)));
    return out;
}

inline ChannelSet trial_channels(const ScenarioConfig& cfg, std::uint64_t trial_seed_value)
{
    Rng rng = stream_rng(trial_seed_value, Stream::Static, 0);
    return sample_static_channels(cfg, rng);
}

/// Runs every requested scheme on the same channel draw and held-out batch.
inline TrialResult run_trial(const ScenarioConfig& cfg, int trial_index, const std::vector<Scheme>& schemes)
{
    TrialResult tr;
    tr.trial = trial_index;
    tr.seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(trial_index));
    try {
        const ChannelSet cs = trial_channels(cfg, tr.seed);
        const std::vector<Realization> held = heldout_realizations(cs, cfg, tr.seed);
        for (Scheme s : schemes) {
            const AoReport rep = ssca_ao(cs, cfg, tr.seed, s);
            SchemeOutcome o;
            o.scheme = s;
            o.rate_bits = sum_rate(rep.state.tau, rep.state.w1, rep.state.w2, rep.state.theta, held, cs, cfg.power);
            o.objective_bits = rep.objective_bits.empty() ? 0.0 : rep.objective_bits.back();
            o.iterations = rep.iterations;
            o.converged = rep.converged;
            o.energy_infeasible = rep.energy_infeasible;
            o.feasibility = rep.feasibility;
            o.tau_tightness = rep.tau_tightness;
            o.min_slack = rep.min_slack;
            o.objective_trace_bits = rep.objective_bits;
            o.tau = rep.state.tau;
            tr.outcomes.push_back(std::move(o));
        }
    } catch (const Error& e) {
        throw Error(e.code(), "trial " + std::to_string(trial_index) + ": " + e.what());
    }
    return tr;
}

/// Rate of a single scheme on one trial, in bits.
inline double run_trial(const ScenarioConfig& cfg, Scheme scheme, int trial_index)
{
    return run_trial(cfg, trial_index, std::vector<Scheme>{scheme}).outcomes.front().rate_bits;
}

/// Trials 0..cfg.trials-1, spread over cfg.threads workers. Results are stored by trial index so
/// the output does not depend on scheduling.
inline std::vector<TrialResult> run_trials(const ScenarioConfig& cfg, const std::vector<Scheme>& schemes)
{
    const int n = cfg.trials;
    std::vector<TrialResult> out(static_cast<std::size_t>(n));
    const int workers = std::max(1, std::min(cfg.threads, n));
    if (workers == 1) {
        for (int t = 0; t < n; ++t)
            out[t] = run_trial(cfg, t, schemes);
        return out;
    }
    std::exception_ptr first_error;
    int first_error_trial = n;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int t = w; t < n; t += workers) {
                try {
                    out[t] = run_trial(cfg, t, schemes);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (t < first_error_trial) {
                        first_error_trial = t;
                        first_error = std::current_exception();
                    }
                    return;
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
    return out;
}

// ---------------------------------------------------------------------------------------------
// sweeps

enum class SweepAxis { M, EMse, PMaxDbm, AlphaR, B, Iterations };

inline const char* to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::M: return "M";
    case SweepAxis::EMse: return "e_mse";
    case SweepAxis::PMaxDbm: return "P_max_dbm";
    case SweepAxis::AlphaR: return "alpha_R";
    case SweepAxis::B: return "B";
    case SweepAxis::Iterations: return "iterations";
    }
    return "unknown";
}

inline SweepAxis axis_from_string(const std::string& name)
{
    for (SweepAxis a : {SweepAxis::M, SweepAxis::EMse, SweepAxis::PMaxDbm, SweepAxis::AlphaR, SweepAxis::B,
                        SweepAxis::Iterations})
        if (name == to_string(a))
            return a;
    throw Error(ErrorCode::UnknownAxis,
                "unknown sweep axis '" + name + "' (expected M, e_mse, P_max_dbm, alpha_R, B or iterations)");
}

/// Copy of cfg with the axis set to value; validated.
inline ScenarioConfig apply_axis(ScenarioConfig cfg, SweepAxis axis, double value)
{
    auto whole = [&](const char* what) {
        if (value != std::floor(value))
            throw Error(ErrorCode::ValidationError, std::string(what) + " must be an integer");
        return static_cast<int>(value);
    };
    switch (axis) {
    case SweepAxis::M: cfg.m = whole("M"); break;
    case SweepAxis::EMse: cfg.e_mse = value; break;
    case SweepAxis::PMaxDbm: cfg.power.p_max = dbm_to_watts(value); break;
    case SweepAxis::AlphaR:
        cfg.alpha.br = value;
        cfg.alpha.ru = value;
        break;
    case SweepAxis::B: cfg.b = whole("B"); break;
    case SweepAxis::Iterations: cfg.knobs.r_max = whole("iterations"); break;
    }
    validate(cfg);
    return cfg;
}

struct SweepRow {
    std::string axis;
    double value = 0.0;
    Scheme scheme = Scheme::Active;
    double mean_rate_bits = 0.0;
    double stderr_bits = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
    double objective_bits = 0.0;
    double seconds = 0.0; ///< wall clock of the point; not part of the CSV
};

struct SweepResult {
    std::string axis;
    std::vector<double> values;
    std::vector<SweepRow> rows;
    std::vector<std::vector<TrialResult>> trials; ///< [value index][trial]; empty for the iterations axis
};

namespace detail {

inline void mean_and_stderr(const std::vector<double>& x, double* mean, double* se)
{
    const double n = static_cast<double>(x.size());
    double m = 0.0;
    for (double v : x)
        m += v;
    m /= n;
    double ss = 0.0;
    for (double v : x)
        ss += (v - m) * (v - m);
    *mean = m;
    *se = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

} // namespace detail

/// Runs every (value, scheme) point with trials paired across schemes. The iterations axis runs
/// trial 0 once with r_max = max(values) and reports the objective after each listed iteration.
inline SweepResult run_sweep(const ScenarioConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                             const std::vector<Scheme>& schemes)
{
    using clock = std::chrono::steady_clock;
    SweepResult res;
    res.axis = to_string(axis);
    res.values = values;
    if (values.empty())
        throw Error(ErrorCode::ValidationError, "sweep needs at least one value");

    if (axis == SweepAxis::Iterations) {
        const double top = *std::max_element(values.begin(), values.end());
        ScenarioConfig c = apply_axis(cfg, axis, top);
        for (double v : values)
            if (!(v >= 1.0) || v != std::floor(v))
                throw Error(ErrorCode::ValidationError, "iteration values must be integers >= 1");
        const auto t0 = clock::now();
        const TrialResult tr = run_trial(c, 0, schemes);
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        for (double v : values)
            for (const SchemeOutcome& o : tr.outcomes) {
                const auto& trace = o.objective_trace_bits;
                const std::size_t idx = std::min(static_cast<std::size_t>(v), trace.size()) - 1;
                SweepRow row;
                row.axis = res.axis;
                row.value = v;
                row.scheme = o.scheme;
                row.mean_rate_bits = trace[idx];
                row.objective_bits = trace[idx];
                row.trials = 1;
                row.seed = cfg.seed;
                row.seconds = secs;
                res.rows.push_back(row);
            }
        return res;
    }

    for (double v : values) {
        const ScenarioConfig c = apply_axis(cfg, axis, v);
        const auto t0 = clock::now();
        std::vector<TrialResult> trs = run_trials(c, schemes);
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            std::vector<double> rates, objs;
            for (const auto& tr : trs) {
                rates.push_back(tr.outcomes[s].rate_bits);
                objs.push_back(tr.outcomes[s].objective_bits);
            }
            SweepRow row;
            row.axis = res.axis;
            row.value = v;
            row.scheme = schemes[s];
            detail::mean_and_stderr(rates, &row.mean_rate_bits, &row.stderr_bits);
            double obj_se = 0.0;
            detail::mean_and_stderr(objs, &row.objective_bits, &obj_se);
            row.trials = c.trials;
            row.seed = c.seed;
            row.seconds = secs;
            res.rows.push_back(row);
        }
        res.trials.push_back(std::move(trs));
    }
    return res;
}

inline std::string format_g6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << "axis,value,scheme,mean_rate_bits,stderr,trials,seed,objective_bits\n";
    for (const auto& r : rows)
        os << r.axis << ',' << format_g6(r.value) << ',' << to_string(r.scheme) << ',' << format_g6(r.mean_rate_bits)
           << ',' << format_g6(r.stderr_bits) << ',' << r.trials << ',' << r.seed << ',' << format_g6(r.objective_bits)
           << '\n';
}

inline std::vector<Scheme> all_schemes()
{
    return {Scheme::Active, Scheme::Passive, Scheme::NoRis};
}

/// "all" or a comma-separated list of scheme names.
inline std::vector<Scheme> parse_schemes(const std::string& text)
{
    if (text == "all")
        return all_schemes();
    std::vector<Scheme> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        out.push_back(scheme_from_string(item));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

} // namespace ajris

#endif // AJRIS_HARNESS_HPP
