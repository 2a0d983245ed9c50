// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "checks.hpp"

#include <cstdio>

int main() {
    int failed = 0, index = 0;
    for (const auto& info : cbias::checks::registry()) {
        const auto r = cbias::checks::run_check(info.name);
        ++index;
        std::printf("[%s] %2d %-15s %s (%.1fs)\n", r.pass ? "PASS" : "FAIL", index, r.name.c_str(), r.detail.c_str(),
                    r.seconds);
        std::fflush(stdout);
        failed += !r.pass;
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed ? 1 : 0;
}
