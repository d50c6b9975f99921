#ifndef AJRIS_RNG_HPP
#define AJRIS_RNG_HPP

#include <cstdint>
#include <random>

namespace ajris {

using Rng = std::mt19937_64;

/// One SplitMix64 step; used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t child)
{
    return splitmix64(splitmix64(parent) ^ splitmix64(child + 0x632be59bd9b4e019ULL));
}

/// Stream tags for the per-trial sub-seeds.
enum class Stream : std::uint64_t {
    Static = 1,
    Realization = 2,
    Solver = 3,
};

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial)
{
    return derive_seed(master, trial);
}

inline Rng stream_rng(std::uint64_t trial_seed_value, Stream s, std::uint64_t index = 0)
{
    return Rng(derive_seed(derive_seed(trial_seed_value, static_cast<std::uint64_t>(s)), index));
}

/// Held-out evaluation realizations live far away from the optimization indices.
inline constexpr std::uint64_t kHeldOutBase = 1000000;

} // namespace ajris

#endif // AJRIS_RNG_HPP
