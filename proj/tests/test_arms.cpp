#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "perc/arms.hpp"
#include "perc/lattice.hpp"
#include "perc/observables.hpp"
#include "perc/percolation.hpp"
#include "perc/rng.hpp"

namespace {

using namespace perc;

Configuration uniform_fill(const DobrushinDomain& domain, bool open) {
    Configuration config(domain);
    for (int e = 0; e < domain.edge_count(); ++e) config.set_open(e, open);
    return config;
}

// All closed except two open rays east and west of the center, each spanning
// the annulus between radius 2 and radius 6 (in mesh units). The rays are
// two distinct open clusters and they split the closed sea into a north and
// a south dual cluster, giving exactly four alternating arms.
Configuration four_arm_fixture(const DobrushinDomain& domain, HalfPoint center) {
    Configuration config = uniform_fill(domain, false);
    for (int x = 2; x < 6; ++x) {
        config.set_open(domain.edge_at({center.x + 2 * x + 1, center.y}), true);
        config.set_open(domain.edge_at({center.x - 2 * x - 1, center.y}), true);
    }
    return config;
}

// All closed except one open path rising straight up from the boundary
// center, spanning the half-annulus between radius 2 and radius 6.
Configuration half_plane_ray_fixture(const DobrushinDomain& domain, HalfPoint center) {
    Configuration config = uniform_fill(domain, false);
    for (int y = 2; y < 6; ++y) config.set_open(domain.edge_at({center.x, 2 * y + 1}), true);
    return config;
}

bool detect(const Configuration& config, HalfPoint center, double r, double R, const char* seq,
            ArmGeometry geometry, bool euclidean = false) {
    return detect_arms(config, center, r, R, ArmSignature{seq, geometry}, euclidean);
}

}  // namespace

TEST_CASE("arm signatures are validated") {
    CHECK_THROWS_AS(validate_signature({"", ArmGeometry::full_plane}), std::invalid_argument);
    CHECK_THROWS_AS(validate_signature({"0101010", ArmGeometry::full_plane}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate_signature({"012", ArmGeometry::full_plane}),
                    std::invalid_argument);
    CHECK_NOTHROW(validate_signature({"010101", ArmGeometry::half_plane}));
}

TEST_CASE("annulus placement and radii are validated") {
    const DobrushinDomain domain = build_free_rectangle(16, 16, 1.0);
    const Configuration open = uniform_fill(domain, true);
    const HalfPoint center{16, 16};
    // Radii must be whole positive mesh multiples with r < R.
    CHECK_THROWS_AS(detect(open, center, 0.5, 4, "1", ArmGeometry::full_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, center, 2.5, 4, "1", ArmGeometry::full_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, center, 4, 4, "1", ArmGeometry::full_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, center, 6, 4, "1", ArmGeometry::full_plane),
                    std::invalid_argument);
    // The center must be a primal vertex positioned to fit the sector.
    CHECK_THROWS_AS(detect(open, {15, 16}, 2, 4, "1", ArmGeometry::full_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, {2, 2}, 2, 4, "1", ArmGeometry::full_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, {16, 0}, 2, 4, "1", ArmGeometry::full_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, center, 2, 4, "1", ArmGeometry::half_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, {0, 0}, 2, 4, "1", ArmGeometry::half_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, {16, 0}, 2, 4, "1", ArmGeometry::quarter_plane),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect(open, center, 2, 4, "1", ArmGeometry::quarter_plane),
                    std::invalid_argument);
    // A half-plane annulus taller than the domain escapes the lattice.
    const DobrushinDomain strip = build_free_rectangle(16, 8, 1.0);
    const Configuration strip_open = uniform_fill(strip, true);
    CHECK_THROWS_AS(detect(strip_open, {16, 0}, 2, 10, "1", ArmGeometry::half_plane),
                    std::invalid_argument);
}

TEST_CASE("uniform configurations give the obvious verdicts") {
    const DobrushinDomain domain = build_free_rectangle(16, 16, 1.0);
    const HalfPoint center{16, 16};
    const Configuration open = uniform_fill(domain, true);
    CHECK(detect(open, center, 2, 6, "1", ArmGeometry::full_plane));
    CHECK_FALSE(detect(open, center, 2, 6, "0", ArmGeometry::full_plane));
    CHECK_FALSE(detect(open, center, 2, 6, "0101", ArmGeometry::full_plane));
    CHECK(detect(open, center, 2, 6, "1", ArmGeometry::full_plane, true));
    const Configuration closed = uniform_fill(domain, false);
    CHECK(detect(closed, center, 2, 6, "0", ArmGeometry::full_plane));
    CHECK_FALSE(detect(closed, center, 2, 6, "1", ArmGeometry::full_plane));
}

TEST_CASE("hand-built four-arm fixture") {
    const DobrushinDomain domain = build_free_rectangle(16, 16, 1.0);
    const HalfPoint center{16, 16};
    const Configuration config = four_arm_fixture(domain, center);
    CHECK(detect(config, center, 2, 6, "1010", ArmGeometry::full_plane));
    CHECK(detect(config, center, 2, 6, "0101", ArmGeometry::full_plane));
    CHECK(detect(config, center, 2, 6, "11", ArmGeometry::full_plane));
    CHECK(detect(config, center, 2, 6, "10", ArmGeometry::full_plane));
    CHECK(detect(config, center, 2, 6, "01", ArmGeometry::full_plane));
    CHECK(detect(config, center, 2, 6, "1", ArmGeometry::full_plane));
    CHECK(detect(config, center, 2, 6, "0", ArmGeometry::full_plane));
    // Only two open rays and two dual sectors exist.
    CHECK_FALSE(detect(config, center, 2, 6, "111", ArmGeometry::full_plane));
    CHECK_FALSE(detect(config, center, 2, 6, "010101", ArmGeometry::full_plane));
    // Two adjacent open arms would need two dual arms on the other side,
    // but the remaining sector is a single dual cluster.
    CHECK_FALSE(detect(config, center, 2, 6, "1100", ArmGeometry::full_plane));
    // The same verdicts hold for round annuli.
    CHECK(detect(config, center, 2, 6, "1010", ArmGeometry::full_plane, true));
    CHECK(detect(config, center, 2, 6, "11", ArmGeometry::full_plane, true));
    CHECK_FALSE(detect(config, center, 2, 6, "111", ArmGeometry::full_plane, true));
}

TEST_CASE("fixture verdicts are mesh independent") {
    const double mesh = 0.25;
    const DobrushinDomain domain = build_free_rectangle(16, 16, mesh);
    const HalfPoint center{16, 16};
    const Configuration config = four_arm_fixture(domain, center);
    CHECK(detect(config, center, 2 * mesh, 6 * mesh, "1010", ArmGeometry::full_plane));
    CHECK(detect(config, center, 2 * mesh, 6 * mesh, "11", ArmGeometry::full_plane));
    CHECK_FALSE(detect(config, center, 2 * mesh, 6 * mesh, "111", ArmGeometry::full_plane));
    CHECK_FALSE(detect(config, center, 2 * mesh, 6 * mesh, "1100", ArmGeometry::full_plane));
}

TEST_CASE("half-plane crafted ray fixture") {
    const DobrushinDomain domain = build_free_rectangle(16, 8, 1.0);
    const HalfPoint center{16, 0};
    const Configuration config = half_plane_ray_fixture(domain, center);
    CHECK(detect(config, center, 2, 6, "010", ArmGeometry::half_plane));
    CHECK(detect(config, center, 2, 6, "01", ArmGeometry::half_plane));
    CHECK(detect(config, center, 2, 6, "10", ArmGeometry::half_plane));
    CHECK(detect(config, center, 2, 6, "1", ArmGeometry::half_plane));
    CHECK(detect(config, center, 2, 6, "0", ArmGeometry::half_plane));
    // One open path and two dual sectors: nothing longer fits.
    CHECK_FALSE(detect(config, center, 2, 6, "0101", ArmGeometry::half_plane));
    CHECK_FALSE(detect(config, center, 2, 6, "101", ArmGeometry::half_plane));
    CHECK_FALSE(detect(config, center, 2, 6, "11", ArmGeometry::half_plane));
}

TEST_CASE("half-plane arm order runs counterclockwise from the right") {
    const DobrushinDomain domain = build_free_rectangle(16, 8, 1.0);
    const HalfPoint center{16, 0};
    // Add an axis-hugging open ray on one side of the rising ray: on the
    // right it is the first arm, on the left the last.
    Configuration right = half_plane_ray_fixture(domain, center);
    for (int x = 2; x < 6; ++x) right.set_open(domain.edge_at({center.x + 2 * x + 1, 0}), true);
    CHECK(detect(right, center, 2, 6, "1010", ArmGeometry::half_plane));
    CHECK(detect(right, center, 2, 6, "101", ArmGeometry::half_plane));
    CHECK_FALSE(detect(right, center, 2, 6, "0101", ArmGeometry::half_plane));
    CHECK_FALSE(detect(right, center, 2, 6, "1100", ArmGeometry::half_plane));
    Configuration left = half_plane_ray_fixture(domain, center);
    for (int x = 2; x < 6; ++x) left.set_open(domain.edge_at({center.x - 2 * x - 1, 0}), true);
    CHECK(detect(left, center, 2, 6, "0101", ArmGeometry::half_plane));
    CHECK(detect(left, center, 2, 6, "101", ArmGeometry::half_plane));
    CHECK_FALSE(detect(left, center, 2, 6, "1010", ArmGeometry::half_plane));
    CHECK_FALSE(detect(left, center, 2, 6, "1100", ArmGeometry::half_plane));
}

TEST_CASE("half-plane centers work on every boundary side") {
    // Top boundary: the rotated image of the bottom fixture.
    const DobrushinDomain wide = build_free_rectangle(16, 8, 1.0);
    const HalfPoint top{16, 16};
    Configuration config = uniform_fill(wide, false);
    for (int y = 2; y < 6; ++y) config.set_open(wide.edge_at({top.x, top.y - 2 * y - 1}), true);
    CHECK(detect(config, top, 2, 6, "010", ArmGeometry::half_plane));
    CHECK_FALSE(detect(config, top, 2, 6, "0101", ArmGeometry::half_plane));
    CHECK_FALSE(detect(config, top, 2, 6, "11", ArmGeometry::half_plane));
    // Left and right boundaries take the two remaining rotations.
    const DobrushinDomain tall = build_free_rectangle(8, 16, 1.0);
    const Configuration open = uniform_fill(tall, true);
    CHECK(detect(open, {0, 16}, 2, 6, "1", ArmGeometry::half_plane));
    CHECK(detect(open, {16, 16}, 2, 6, "1", ArmGeometry::half_plane));
}

TEST_CASE("quarter-plane events anchor at convex corners") {
    const DobrushinDomain domain = build_free_rectangle(16, 16, 1.0);
    const Configuration open = uniform_fill(domain, true);
    const Configuration closed = uniform_fill(domain, false);
    const HalfPoint corner{0, 0};
    CHECK(detect(open, corner, 2, 6, "1", ArmGeometry::quarter_plane));
    CHECK_FALSE(detect(open, corner, 2, 6, "0", ArmGeometry::quarter_plane));
    CHECK_FALSE(detect(open, corner, 2, 6, "11", ArmGeometry::quarter_plane));
    CHECK(detect(closed, corner, 2, 6, "0", ArmGeometry::quarter_plane));
    CHECK(detect(open, corner, 2, 6, "1", ArmGeometry::quarter_plane, true));
    CHECK(detect(open, {32, 32}, 2, 6, "1", ArmGeometry::quarter_plane));
    // An open ray along the first axis is the first arm in the order.
    Configuration ray = uniform_fill(domain, false);
    for (int x = 2; x < 6; ++x) ray.set_open(domain.edge_at({2 * x + 1, 0}), true);
    CHECK(detect(ray, corner, 2, 6, "10", ArmGeometry::quarter_plane));
    CHECK(detect(ray, corner, 2, 6, "1", ArmGeometry::quarter_plane));
    CHECK_FALSE(detect(ray, corner, 2, 6, "01", ArmGeometry::quarter_plane));
}

TEST_CASE("full-plane signatures are cyclic: rotations agree pointwise") {
    const DobrushinDomain domain = build_free_rectangle(20, 20, 1.0);
    const HalfPoint center{20, 20};
    RngStream rng(5, 0);
    Configuration config(domain);
    for (int i = 0; i < 1000; ++i) {
        sample_configuration(config, rng);
        CHECK_EQ(detect(config, center, 2, 8, "01", ArmGeometry::full_plane),
                 detect(config, center, 2, 8, "10", ArmGeometry::full_plane));
        const bool a = detect(config, center, 2, 8, "0110", ArmGeometry::full_plane);
        CHECK_EQ(a, detect(config, center, 2, 8, "1001", ArmGeometry::full_plane));
        CHECK_EQ(a, detect(config, center, 2, 8, "0011", ArmGeometry::full_plane));
    }
}

TEST_CASE("detection is monotone in the outer radius") {
    const DobrushinDomain domain = build_free_rectangle(20, 20, 1.0);
    const HalfPoint center{20, 20};
    RngStream rng(7, 0);
    Configuration config(domain);
    const char* signatures[] = {"1", "0", "01", "0101"};
    for (int i = 0; i < 1500; ++i) {
        sample_configuration(config, rng);
        for (const char* seq : signatures) {
            if (!detect(config, center, 2, 8, seq, ArmGeometry::full_plane)) continue;
            CHECK(detect(config, center, 2, 6, seq, ArmGeometry::full_plane));
            CHECK(detect(config, center, 2, 4, seq, ArmGeometry::full_plane));
        }
    }
}

TEST_CASE("swapping colors leaves arm frequencies nearly unchanged") {
    // Open arms live on vertices and dual arms on faces, so swapping both
    // the configuration and the signature maps between slightly different
    // annuli; the match is distributional and exact only in the scaling
    // limit. At these sizes the measured gap is well under the bounds.
    {
        const DobrushinDomain domain = build_free_rectangle(20, 20, 1.0);
        const HalfPoint center{20, 20};
        RngStream rng(99, 0);
        Configuration config(domain);
        int one = 0, zero = 0;
        for (int i = 0; i < 10000; ++i) {
            sample_configuration(config, rng);
            one += detect(config, center, 2, 8, "1", ArmGeometry::full_plane);
            zero += detect(config, center, 2, 8, "0", ArmGeometry::full_plane);
        }
        CHECK(std::abs(one - zero) / 10000.0 <= 0.02);
    }
    {
        const DobrushinDomain domain = build_free_rectangle(16, 8, 1.0);
        const HalfPoint center{16, 0};
        RngStream rng(99, 1);
        Configuration config(domain);
        int ccw = 0, cw = 0;
        for (int i = 0; i < 10000; ++i) {
            sample_configuration(config, rng);
            ccw += detect(config, center, 2, 6, "01", ArmGeometry::half_plane);
            cw += detect(config, center, 2, 6, "10", ArmGeometry::half_plane);
        }
        CHECK(std::abs(ccw - cw) / 10000.0 <= 0.04);
    }
}

TEST_CASE("half-plane one-arm exponent is one third" * doctest::timeout(120)) {
    RngStream rng(2025, 15);
    const std::vector<double> radii{8, 16, 32, 64, 128};
    const ArmEstimate est =
        estimate_exponent({"1", ArmGeometry::half_plane}, radii, 3000, rng);
    CHECK(std::abs(est.exponent - 1.0 / 3.0) <= 0.05);
    CHECK(est.reference_exponent.has_value());
    CHECK_EQ(*est.reference_exponent, 1.0 / 3.0);
    CHECK_EQ(est.radii, radii);
    for (std::size_t i = 0; i < est.counts.size(); ++i) {
        CHECK(est.counts[i] > 0);
        CHECK(est.counts[i] <= est.totals[i]);
        CHECK_EQ(est.totals[i], 3000);
    }
}

TEST_CASE("half-plane two-arm exponent is one" * doctest::timeout(120)) {
    RngStream rng(2025, 11);
    const std::vector<double> radii{16, 32, 64};
    const ArmEstimate est =
        estimate_exponent({"01", ArmGeometry::half_plane}, radii, 10000, rng);
    CHECK(std::abs(est.exponent - 1.0) <= 0.1);
    CHECK_EQ(*est.reference_exponent, 1.0);
}

TEST_CASE("half-plane three-arm exponent is two" * doctest::timeout(180)) {
    RngStream rng(2025, 10);
    const std::vector<double> radii{8, 16, 32, 64};
    const ArmEstimate est =
        estimate_exponent({"010", ArmGeometry::half_plane}, radii, 20000, rng);
    CHECK(std::abs(est.exponent - 2.0) <= 0.2);
    CHECK_EQ(*est.reference_exponent, 2.0);
}

TEST_CASE("five-arm fits carry their reference without assertion") {
    RngStream rng(2025, 18);
    const std::vector<double> radii{2, 3, 4};
    const ArmEstimate est =
        estimate_exponent({"01011", ArmGeometry::full_plane}, radii, 2000, rng);
    CHECK_EQ(*est.reference_exponent, 2.0);
    for (const std::int64_t c : est.counts) CHECK(c > 0);
}

TEST_CASE("quarter-plane estimates run without a reference exponent") {
    RngStream rng(2025, 19);
    const std::vector<double> radii{4, 8, 16};
    const ArmEstimate est =
        estimate_exponent({"1", ArmGeometry::quarter_plane}, radii, 2000, rng);
    CHECK_FALSE(est.reference_exponent.has_value());
    CHECK_EQ(est.signature.sequence, "1");
    for (const std::int64_t c : est.counts) CHECK(c > 0);
}

TEST_CASE("fitted exponents survive doubling the lattice size") {
    RngStream rng(2025, 16);
    const std::vector<double> radii{8, 16, 32};
    const ArmEstimate est =
        estimate_exponent({"1", ArmGeometry::half_plane}, radii, 4000, rng);
    // Re-estimate on domains twice as large in both directions; the annulus
    // graph is identical, so only sampling noise separates the fits.
    RngStream rng2(2025, 17);
    std::vector<double> probabilities;
    for (const double R : radii) {
        const int k = static_cast<int>(R);
        const DobrushinDomain domain = build_free_rectangle(4 * k, 2 * k, 1.0);
        Configuration config(domain);
        const HalfPoint center{4 * k, 0};
        int hits = 0;
        for (int i = 0; i < 4000; ++i) {
            sample_configuration(config, rng2);
            hits += detect(config, center, 1, R, "1", ArmGeometry::half_plane);
        }
        probabilities.push_back(hits / 4000.0);
    }
    const PowerLawFit doubled = fit_power_law(radii, probabilities);
    const double tolerance =
        4.0 * std::hypot(est.std_error, doubled.std_error);
    CHECK(std::abs(est.exponent - doubled.exponent) <= tolerance);
}

TEST_CASE("estimate preconditions are enforced") {
    RngStream rng(1, 0);
    const std::vector<double> two{8, 16};
    CHECK_THROWS_AS(estimate_exponent({"1", ArmGeometry::half_plane}, two, 2000, rng),
                    std::invalid_argument);
    const std::vector<double> radii{8, 16, 32};
    CHECK_THROWS_AS(estimate_exponent({"1", ArmGeometry::half_plane}, radii, 999, rng),
                    std::invalid_argument);
    const std::vector<double> unordered{8, 8, 16};
    CHECK_THROWS_AS(estimate_exponent({"1", ArmGeometry::half_plane}, unordered, 2000, rng),
                    std::invalid_argument);
    const std::vector<double> tight{4, 8, 16};
    CHECK_THROWS_AS(estimate_exponent({"1", ArmGeometry::half_plane}, tight, 2000, rng, 4.0),
                    std::invalid_argument);
}

TEST_CASE("a radius with no events reports a sampling failure") {
    RngStream rng(7, 7);
    const std::vector<double> radii{2, 3, 4};
    CHECK_THROWS_AS(
        estimate_exponent({"010101", ArmGeometry::quarter_plane}, radii, 1000, rng),
        std::runtime_error);
}

TEST_CASE("boundary one-arm at one mesh step is exactly one half") {
    const DobrushinDomain domain = build_free_rectangle(8, 4, 1.0);
    const ProbabilityEstimate est = boundary_one_arm(domain, {8, 0}, 1.0, ExactMode{});
    CHECK_EQ(est.value, 0.5);
    CHECK_EQ(est.hits, 1);
    CHECK_EQ(est.trials, 2);
    CHECK_EQ(est.std_error, 0.0);
    const DobrushinDomain fine = build_free_rectangle(8, 4, 0.25);
    CHECK_EQ(boundary_one_arm(fine, {8, 0}, 0.25, ExactMode{}).value, 0.5);
}

TEST_CASE("boundary one-arm enumeration matches Monte Carlo") {
    const DobrushinDomain domain = build_free_rectangle(8, 4, 1.0);
    const ProbabilityEstimate exact = boundary_one_arm(domain, {8, 0}, 2.0, ExactMode{});
    CHECK_EQ(exact.value, 0.46875);  // 480 of the 1024 local assignments
    CHECK_EQ(exact.hits, 480);
    CHECK_EQ(exact.trials, 1024);
    const ProbabilityEstimate mc =
        boundary_one_arm(domain, {8, 0}, 2.0, MonteCarloMode{20000, 21, 0});
    CHECK(mc.std_error > 0.0);
    CHECK(std::abs(mc.value - exact.value) <= 4.0 * mc.std_error);
    // The estimate is a local quantity: anchoring on a vertical boundary
    // segment gives the identical enumeration.
    const DobrushinDomain tall = build_free_rectangle(4, 8, 1.0);
    CHECK_EQ(boundary_one_arm(tall, {0, 8}, 2.0, ExactMode{}).value, 0.46875);
}

TEST_CASE("boundary one-arm enumeration is capped near the anchor") {
    const DobrushinDomain domain = build_free_rectangle(8, 4, 1.0);
    CHECK_THROWS_AS(boundary_one_arm(domain, {8, 0}, 3.0, ExactMode{}),
                    std::invalid_argument);
}

TEST_CASE("boundary one-arm probability decays with exponent one third" *
          doctest::timeout(120)) {
    const DobrushinDomain domain = build_free_rectangle(160, 4, 1.0);
    const HalfPoint anchor{160, 0};
    const std::vector<double> radii{8, 16, 32, 64};
    std::vector<double> probabilities;
    for (const double radius : radii) {
        const ProbabilityEstimate est = boundary_one_arm(
            domain, anchor, radius,
            MonteCarloMode{20000, 5, static_cast<std::uint64_t>(radius)});
        probabilities.push_back(est.value);
    }
    const PowerLawFit fit = fit_power_law(radii, probabilities);
    CHECK(std::abs(fit.exponent - 1.0 / 3.0) <= 0.07);
}

TEST_CASE("boundary one-arm anchors are validated") {
    const DobrushinDomain domain = build_free_rectangle(8, 4, 1.0);
    CHECK_THROWS_AS(boundary_one_arm(domain, {8, 4}, 1.0, ExactMode{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(boundary_one_arm(domain, {7, 0}, 1.0, ExactMode{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(boundary_one_arm(domain, {8, 0}, 8.0, ExactMode{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(boundary_one_arm(domain, {8, 0}, 1.5, ExactMode{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(boundary_one_arm(domain, {8, 0}, 1.0, MonteCarloMode{0, 1, 0}),
                    std::invalid_argument);
}

TEST_CASE("power-law fits recover exact laws and reject bad input") {
    const std::vector<double> radii{2, 4, 8};
    const std::vector<double> probabilities{0.8, 0.4, 0.2};
    const PowerLawFit fit = fit_power_law(radii, probabilities);
    CHECK(std::abs(fit.exponent - 1.0) <= 1e-12);
    CHECK(fit.std_error <= 1e-9);
    const std::vector<double> two_r{2, 4};
    const std::vector<double> two_p{0.8, 0.4};
    CHECK_THROWS_AS(fit_power_law(two_r, two_p), std::invalid_argument);
    const std::vector<double> mismatched{0.8, 0.4};
    CHECK_THROWS_AS(fit_power_law(radii, mismatched), std::invalid_argument);
    const std::vector<double> with_zero{0.8, 0.0, 0.2};
    CHECK_THROWS_AS(fit_power_law(radii, with_zero), std::invalid_argument);
    const std::vector<double> above_one{0.8, 1.4, 0.2};
    CHECK_THROWS_AS(fit_power_law(radii, above_one), std::invalid_argument);
    const std::vector<double> bad_radius{0, 4, 8};
    CHECK_THROWS_AS(fit_power_law(bad_radius, probabilities), std::invalid_argument);
    const std::vector<double> constant_radius{4, 4, 4};
    CHECK_THROWS_AS(fit_power_law(constant_radius, probabilities), std::invalid_argument);
    // Probability exactly one is a legal observation.
    const std::vector<double> with_one{1.0, 0.5, 0.25};
    CHECK_NOTHROW(fit_power_law(radii, with_one));
}

TEST_CASE("arm results serialize to csv and json") {
    ArmEstimate est;
    est.signature = {"01", ArmGeometry::half_plane};
    est.inner_radius = 1.0;
    est.radii = {2, 4};
    est.counts = {30, 15};
    est.totals = {100, 100};
    est.exponent = 1.0;
    est.std_error = 0.125;
    est.reference_exponent = 1.0;
    std::ostringstream csv;
    write_arm_csv(est, csv);
    CHECK_EQ(csv.str(),
             "signature,r,R,hits,trials\n"
             "01,1,2,30,100\n"
             "01,1,4,15,100\n");
    const nlohmann::json j = nlohmann::json::parse(arm_fit_json(est));
    CHECK_EQ(j.at("signature").get<std::string>(), "01");
    CHECK_EQ(j.at("geometry").get<std::string>(), "half_plane");
    CHECK_EQ(j.at("inner_radius").get<double>(), 1.0);
    CHECK_EQ(j.at("radii").get<std::vector<double>>(), est.radii);
    CHECK_EQ(j.at("counts").get<std::vector<std::int64_t>>(), est.counts);
    CHECK_EQ(j.at("totals").get<std::vector<std::int64_t>>(), est.totals);
    CHECK_EQ(j.at("exponent").get<double>(), 1.0);
    CHECK_EQ(j.at("std_error").get<double>(), 0.125);
    CHECK_EQ(j.at("reference_exponent").get<double>(), 1.0);
    est.reference_exponent.reset();
    const nlohmann::json bare = nlohmann::json::parse(arm_fit_json(est));
    CHECK(bare.at("reference_exponent").is_null());
}
