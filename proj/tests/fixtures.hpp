// Random channel sets and realizations for tests that do not need the geometry model.
#ifndef AJRIS_TESTS_FIXTURES_HPP
#define AJRIS_TESTS_FIXTURES_HPP

#include "ajris/channel.hpp"
#include "ajris/system.hpp"
#include "oracles.hpp"

#include <random>

namespace fixture {

using namespace ajris;

struct Dims {
    int n = 4, m = 5, k = 3, q = 2, b = 2, n_jam = 3;
};

inline ChannelSet random_channels(std::mt19937_64& rng, const Dims& d)
{
    ChannelSet cs;
    cs.g_br = oracle::random_cmatrix(rng, d.m, d.n);
    for (int k = 0; k < d.k; ++k) {
        cs.h_bu.push_back(oracle::random_cvector(rng, d.n));
        cs.h_ru.push_back(oracle::random_cvector(rng, d.m));
    }
    cs.h_ju_hat.assign(d.q, {});
    for (int q = 0; q < d.q; ++q) {
        for (int k = 0; k < d.k; ++k)
            cs.h_ju_hat[q].push_back(oracle::random_cvector(rng, d.n_jam, 0.3));
        cs.g_jr_hat.push_back(oracle::random_cmatrix(rng, d.m, d.n_jam, 0.3));
    }
    cs.h_iu_hat.assign(d.b, {});
    for (int b = 0; b < d.b; ++b)
        for (int k = 0; k < d.k; ++k)
            cs.h_iu_hat[b].push_back(oracle::random_cvector(rng, d.n, 0.3));
    return cs;
}

inline Realization random_realization(std::mt19937_64& rng, const ChannelSet& cs, std::uint64_t index)
{
    Realization r;
    r.index = index;
    r.h_ju = cs.h_ju_hat;
    r.g_jr = cs.g_jr_hat;
    r.h_iu = cs.h_iu_hat;
    r.z_j.assign(cs.q(), {});
    for (int q = 0; q < cs.q(); ++q)
        for (int k = 0; k < cs.k(); ++k)
            r.z_j[q].push_back(oracle::random_cvector(rng, cs.h_ju_hat[q][k].size(), 0.5));
    r.z_i.assign(cs.b(), {});
    for (int b = 0; b < cs.b(); ++b)
        for (int k = 0; k < cs.k(); ++k)
            r.z_i[b].push_back(oracle::random_cvector(rng, cs.n(), 0.5));
    return r;
}

inline Beams random_beams(std::mt19937_64& rng, int k, int n, double scale = 1.0)
{
    Beams w;
    for (int i = 0; i < k; ++i)
        w.push_back(oracle::random_cvector(rng, n, scale));
    return w;
}

} // namespace fixture

#endif // AJRIS_TESTS_FIXTURES_HPP
