// Compares the serial and OpenMP truncation/residual paths on a given shape.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "bcl/oracle.hpp"

using namespace bcl;
using clock_type = std::chrono::steady_clock;

static double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int main(int argc, char** argv)
{
    int d1 = 2, d2 = 2, m = 3, p = 1, depth = 5, reps = 3;
    std::uint64_t seed = 1;
    if (argc >= 5) {
        d1 = std::atoi(argv[1]);
        d2 = std::atoi(argv[2]);
        m = std::atoi(argv[3]);
        p = std::atoi(argv[4]);
    }
    if (argc >= 6)
        depth = std::atoi(argv[5]);
    if (argc >= 7)
        seed = std::strtoull(argv[6], nullptr, 10);
    if (argc >= 8)
        reps = std::atoi(argv[7]);

    std::printf("shape (%d,%d,%d,%d), depth %d, seed %llu, %d reps\n", d1, d2, m, p, depth,
                static_cast<unsigned long long>(seed), reps);

    StructuredPair pair = build_pair(random_triple(d1, d2, m, p, seed));
    pair.degree_budget = depth + 2;

    double best_serial = 1e300, best_parallel = 1e300;
    double check = 0;
    for (int r = 0; r < reps; ++r) {
        StructuredPair fresh = build_pair(pair.triple); // cold block caches
        fresh.degree_budget = depth + 2;
        auto t0 = clock_type::now();
        TruncatedRep tr = truncate_serial(fresh, depth);
        ResidualReport rr = residuals(tr, 1e-9);
        best_serial = std::min(best_serial, seconds_since(t0));
        check = rr.max();
    }
    for (int r = 0; r < reps; ++r) {
        StructuredPair fresh = build_pair(pair.triple);
        fresh.degree_budget = depth + 2;
        auto t0 = clock_type::now();
        TruncatedRep tr = truncate(fresh, depth);
        ResidualReport rr = residuals(tr, 1e-9);
        best_parallel = std::min(best_parallel, seconds_since(t0));
        if (rr.max() != check)
            std::printf("WARNING: parallel residuals differ from serial: %g vs %g\n",
                        rr.max(), check);
    }

    std::printf("serial   : %8.4f s (best of %d)\n", best_serial, reps);
    std::printf("parallel : %8.4f s (best of %d)\n", best_parallel, reps);
    std::printf("speedup  : %8.2fx\n", best_serial / best_parallel);
    std::printf("residual : %g\n", check);
    return 0;
}
