#include <cmath>
#include <cstdint>
#include <set>

#include "doctest.h"
#include "perc/rng.hpp"

namespace {

TEST_CASE("philox known-answer vectors") {
    // Reference vectors for Philox-4x32-10 from the published test suite.
    auto out = perc::Philox4x32::block({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    auto ones = perc::Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("streams are deterministic and independent") {
    perc::RngStream a(12345, 7);
    perc::RngStream b(12345, 7);
    perc::RngStream c(12345, 8);
    bool all_equal = true;
    bool any_diff_c = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_diff_c = any_diff_c || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff_c);
}

TEST_CASE("uniform01 moments") {
    perc::RngStream rng(999, 0);
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    // stderr of mean ~ 1/sqrt(12 n) ~ 6.5e-4; allow 5 sigma.
    CHECK(std::abs(mean - 0.5) < 5 * 0.2887 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("below is unbiased over small ranges") {
    perc::RngStream rng(42, 3);
    int counts[7] = {};
    const int n = 70000;
    for (int i = 0; i < n; ++i) counts[rng.below(7)]++;
    for (int k = 0; k < 7; ++k) {
        CHECK(std::abs(counts[k] - n / 7) < 5 * std::sqrt(n / 7.0));
    }
}

}  // namespace
