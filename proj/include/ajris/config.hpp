#ifndef AJRIS_CONFIG_HPP
#define AJRIS_CONFIG_HPP

#include "ajris/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace ajris {

inline double dbm_to_watts(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

inline double watts_to_dbm(double w)
{
    return 10.0 * std::log10(w) + 30.0;
}

using Vec3 = std::array<double, 3>;

inline double distance(const Vec3& a, const Vec3& b)
{
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct Geometry {
    Vec3 bs{30.0, 0.0, 5.0};
    Vec3 ris{0.0, 40.0, 10.0};
    Vec3 ue_center{30.0, 150.0, 0.0};
    double ue_radius = 20.0;
    Vec3 jam_lo{40.0, 80.0, 0.0};
    Vec3 jam_hi{60.0, 100.0, 0.0};
    Vec3 int_lo{-50.0, 200.0, 0.0};
    Vec3 int_hi{50.0, 220.0, 0.0};
};

struct PathLossExponents {
    double bu = 2.75;
    double br = 2.2;
    double ru = 2.2;
    double ju = 2.5;
    double jr = 2.5;
    double iu = 2.7;
};

struct PowerModel {
    double p_max = 10.0;  ///< W
    double eta1 = 0.8;
    double xi = 1.1;
    double p_dc = 10e-6;  ///< W per element
    double p_sc = 10e-6;  ///< W per element
    double a_max = 100.0; ///< amplitude, A_max^2 = 40 dB
    double sigma1_sq = dbm_to_watts(-105.0);
    double sigma2_sq = dbm_to_watts(-105.0);
    double sigmar_sq = dbm_to_watts(-105.0);
};

struct AlgorithmKnobs {
    int r_max = 50;
    int i_max = 15;
    double tol_outer = 1e-3;
    double tol_inner = 1e-3;
    int warmup = 5;
};

struct ScenarioConfig {
    int n = 8;
    int m = 25;
    int k = 4;
    int q = 3;
    int b = 4;
    int n_jam = 8;
    double p_j = dbm_to_watts(10.0);
    double p_i = dbm_to_watts(10.0);
    PowerModel power;
    Geometry geometry;
    PathLossExponents alpha;
    double zeta0_db = 30.0;
    std::vector<double> rwp_b{735.0 / 72.0, -1190.0 / 72.0, 455.0 / 72.0};
    std::vector<double> rwp_upsilon{1.0, 3.0, 5.0};
    double m_nakagami = 1.0;
    double e_mse = 0.0;
    AlgorithmKnobs knobs;
    int trials = 500;
    std::uint64_t seed = 1;
    int heldout = 100;
    int threads = 1;
};

inline ScenarioConfig paper_profile()
{
    return ScenarioConfig{};
}

inline ScenarioConfig desk_profile()
{
    ScenarioConfig c;
    c.n = 4;
    c.k = 2;
    c.q = 1;
    c.b = 2;
    c.m = 8;
    c.trials = 50;
    return c;
}

inline ScenarioConfig profile_by_name(const std::string& name)
{
    if (name == "paper")
        return paper_profile();
    if (name == "desk")
        return desk_profile();
    throw Error(ErrorCode::ValidationError, "unknown profile '" + name + "' (expected paper or desk)");
}

inline void validate(const ScenarioConfig& c)
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ValidationError, what); };
    if (c.n < 1 || c.m < 1 || c.k < 1 || c.n_jam < 1)
        fail("counts positive: N, M, K and N_jam must be >= 1");
    if (c.q < 0 || c.b < 0)
        fail("counts positive: Q and B must be >= 0");
    const PathLossExponents& a = c.alpha;
    for (double e : {a.bu, a.br, a.ru, a.ju, a.jr, a.iu})
        if (!(e >= 1.5 && e <= 6.0))
            fail("path-loss exponents must lie in [1.5, 6]");
    if (!(c.e_mse >= 0.0))
        fail("e_mse must be >= 0");
    const PowerModel& p = c.power;
    for (double v : {p.p_max, p.eta1, p.xi, p.p_dc, p.p_sc, p.a_max, p.sigma1_sq, p.sigma2_sq, p.sigmar_sq, c.p_j,
                     c.p_i})
        if (!(v > 0.0) || !std::isfinite(v))
            fail("powers, efficiencies and noise levels must be positive and finite");
    if (p.eta1 > 1.0)
        fail("eta1 must lie in (0, 1]");
    if (p.xi < 1.0)
        fail("xi must be >= 1");
    if (p.a_max < 1.0)
        fail("A_max must be >= 1");
    if (!(c.geometry.ue_radius > 0.0))
        fail("UE radius must be positive");
    for (int i = 0; i < 2; ++i) {
        if (!(c.geometry.jam_hi[i] > c.geometry.jam_lo[i]) || !(c.geometry.int_hi[i] > c.geometry.int_lo[i]))
            fail("jammer and interferer boxes need positive extents");
    }
    if (c.rwp_b.size() != c.rwp_upsilon.size() || c.rwp_b.empty())
        fail("rwp_B and rwp_upsilon must have equal, nonzero length");
    if (!(c.m_nakagami >= 0.5))
        fail("m_nakagami must be >= 0.5");
    if (c.knobs.r_max < 1 || c.knobs.i_max < 1)
        fail("r_max and i_max must be >= 1");
    if (!(c.knobs.tol_outer > 0.0) || !(c.knobs.tol_inner > 0.0))
        fail("tolerances must be positive");
    if (c.trials < 1 || c.heldout < 1 || c.threads < 1)
        fail("trials, heldout and threads must be >= 1");
}

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<double> parse_list(const std::string& v, int line)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": empty list element");
        std::size_t pos = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + item + "'");
        out.push_back(x);
    }
    return out;
}

} // namespace detail

/// Applies one `key = value` assignment. Keys ending in `_dbm` are converted to watts and
/// stored under the key without the suffix.
inline void apply_setting(ScenarioConfig& c, std::string key, const std::string& value, int line)
{
    const std::vector<double> v = detail::parse_list(value, line);
    auto bad = [&](const std::string& why) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + key + ": " + why);
    };
    auto scalar = [&]() {
        if (v.size() != 1)
            bad("expected a single number");
        return v[0];
    };
    auto integer = [&]() {
        const double x = scalar();
        if (x != std::floor(x) || std::abs(x) > 1e15)
            bad("expected an integer");
        return static_cast<long long>(x);
    };
    auto vec3 = [&]() {
        if (v.size() != 3)
            bad("expected three comma-separated numbers");
        return Vec3{v[0], v[1], v[2]};
    };
    auto box = [&](Vec3& lo, Vec3& hi) {
        if (v.size() != 6)
            bad("expected six comma-separated numbers (x0,y0,z0,x1,y1,z1)");
        lo = Vec3{v[0], v[1], v[2]};
        hi = Vec3{v[3], v[4], v[5]};
    };

    bool dbm = false;
    const std::string suffix = "_dbm";
    if (key.size() > suffix.size() && key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0) {
        dbm = true;
        key = key.substr(0, key.size() - suffix.size());
    }
    auto power = [&]() { return dbm ? dbm_to_watts(scalar()) : scalar(); };

    static const std::vector<std::string> power_keys{"P_max", "P_J", "P_I", "noise", "sigma1", "sigma2",
                                                     "sigmaR", "P_dc", "P_sc"};
    const bool is_power_key = std::find(power_keys.begin(), power_keys.end(), key) != power_keys.end();
    if (dbm && !is_power_key)
        bad("the _dbm suffix only applies to power keys");

    PowerModel& p = c.power;
    if (key == "N") c.n = static_cast<int>(integer());
    else if (key == "M") c.m = static_cast<int>(integer());
    else if (key == "K") c.k = static_cast<int>(integer());
    else if (key == "Q") c.q = static_cast<int>(integer());
    else if (key == "B") c.b = static_cast<int>(integer());
    else if (key == "N_jam") c.n_jam = static_cast<int>(integer());
    else if (key == "P_max") p.p_max = power();
    else if (key == "P_J") c.p_j = power();
    else if (key == "P_I") c.p_i = power();
    else if (key == "noise") p.sigma1_sq = p.sigma2_sq = p.sigmar_sq = power();
    else if (key == "sigma1") p.sigma1_sq = power();
    else if (key == "sigma2") p.sigma2_sq = power();
    else if (key == "sigmaR") p.sigmar_sq = power();
    else if (key == "P_dc") p.p_dc = power();
    else if (key == "P_sc") p.p_sc = power();
    else if (key == "eta1") p.eta1 = scalar();
    else if (key == "xi") p.xi = scalar();
    else if (key == "A_max") p.a_max = scalar();
    else if (key == "A_max_sq_db") p.a_max = std::pow(10.0, scalar() / 20.0);
    else if (key == "alpha_BU") c.alpha.bu = scalar();
    else if (key == "alpha_BR") c.alpha.br = scalar();
    else if (key == "alpha_RU") c.alpha.ru = scalar();
    else if (key == "alpha_JU") c.alpha.ju = scalar();
    else if (key == "alpha_JR") c.alpha.jr = scalar();
    else if (key == "alpha_IU") c.alpha.iu = scalar();
    else if (key == "alpha_R") c.alpha.br = c.alpha.ru = scalar();
    else if (key == "zeta0_db") c.zeta0_db = scalar();
    else if (key == "bs") c.geometry.bs = vec3();
    else if (key == "ris") c.geometry.ris = vec3();
    else if (key == "ue_center") c.geometry.ue_center = vec3();
    else if (key == "ue_radius") c.geometry.ue_radius = scalar();
    else if (key == "jam_box") box(c.geometry.jam_lo, c.geometry.jam_hi);
    else if (key == "int_box") box(c.geometry.int_lo, c.geometry.int_hi);
    else if (key == "rwp_B") c.rwp_b = v;
    else if (key == "rwp_upsilon") c.rwp_upsilon = v;
    else if (key == "m_nakagami") c.m_nakagami = scalar();
    else if (key == "e_mse") c.e_mse = scalar();
    else if (key == "r_max") c.knobs.r_max = static_cast<int>(integer());
    else if (key == "i_max") c.knobs.i_max = static_cast<int>(integer());
    else if (key == "tol_outer") c.knobs.tol_outer = scalar();
    else if (key == "tol_inner") c.knobs.tol_inner = scalar();
    else if (key == "warmup") c.knobs.warmup = static_cast<int>(integer());
    else if (key == "trials") c.trials = static_cast<int>(integer());
    else if (key == "seed") {
        const long long s = integer();
        if (s < 0)
            bad("seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    else if (key == "heldout") c.heldout = static_cast<int>(integer());
    else if (key == "threads") c.threads = static_cast<int>(integer());
    else bad("unknown key");
}

/// Parses flat `key = value` text on top of `base`. `#` starts a comment.
inline ScenarioConfig parse_scenario(std::istream& in, ScenarioConfig base = paper_profile())
{
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (key.empty() || value.empty())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": empty key or value");
        apply_setting(base, key, value, line);
    }
    validate(base);
    return base;
}

inline ScenarioConfig load_scenario(const std::string& path, ScenarioConfig base = paper_profile())
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open scenario file '" + path + "'");
    return parse_scenario(in, std::move(base));
}

} // namespace ajris

#endif // AJRIS_CONFIG_HPP
