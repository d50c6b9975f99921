// Runs the three schemes on one desk-scale trial and prints the held-out rates.

#include "ajris/ajris.hpp"

#include <cstdio>

int main()
{
    ajris::ScenarioConfig cfg = ajris::desk_profile();
    const ajris::TrialResult tr = ajris::run_trial(cfg, 0, ajris::all_schemes());
    for (const auto& o : tr.outcomes)
        std::printf("%-18s rate %.4f bit/s/Hz  tau %.3f  iterations %d%s\n", ajris::to_string(o.scheme), o.rate_bits,
                    o.tau, o.iterations, o.converged ? "" : " (hit r_max)");
    return 0;
}
