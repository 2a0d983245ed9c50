// Timings: reference sieve vs segmented stream, serial vs OpenMP squaring.
// usage: cbias_bench [limit] [tau_order]

#include "cbias/primes.hpp"
#include "cbias/tau.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace {

template <typename F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace cbias;
    const primes::u64 limit = argc > 1 ? std::stoull(argv[1]) : 100000000ULL;
    const primes::u64 order = argc > 2 ? std::stoull(argv[2]) : 65536ULL;
    const unsigned threads = static_cast<unsigned>(omp_get_max_threads());
    std::printf("threads available: %u\n", threads);

    std::size_t ref_count = 0;
    const double t_ref = seconds([&] { ref_count = primes::reference_sieve(limit).size(); });
    std::printf("reference sieve   %-12llu primes=%zu  %.3fs\n", static_cast<unsigned long long>(limit), ref_count, t_ref);

    for (unsigned t : {1u, threads}) {
        primes::SieveConfig cfg;
        cfg.limit = limit;
        cfg.thread_count = t;
        primes::u64 n = 0;
        const double s = seconds([&] { n = primes::count_primes(cfg); });
        std::printf("segmented stream  threads=%-3u primes=%llu  %.3fs\n", t, static_cast<unsigned long long>(n), s);
        if (t == threads) break;
    }

    const auto a = tau::square_i64(tau::jacobi_series(order - 1), order - 1, false);
    std::vector<tau::i128> serial, parallel;
    const double t_serial = seconds([&] { serial = tau::square_wide(a, order - 1, false); });
    const double t_parallel = seconds([&] { parallel = tau::square_wide(a, order - 1, true); });
    std::printf("wide squaring     order=%llu serial %.3fs  parallel %.3fs  %s\n",
                static_cast<unsigned long long>(order), t_serial, t_parallel, serial == parallel ? "equal" : "DIFFER");
    return serial == parallel ? 0 : 1;
}
