#include <cmath>
#include <set>

#include "doctest.h"
#include "perc/percolation.hpp"

namespace {

using namespace perc;

TEST_CASE("forced statuses are baked into every sample") {
    const DobrushinDomain d = build_rectangle_domain(2, 3, 1.0);
    RngStream rng(7, 0);
    for (int s = 0; s < 200; ++s) {
        const Configuration c = sample_configuration(d, rng);
        for (const int e : d.arc_ba) CHECK(c.is_open(e));
        for (const int e : d.arc_ab_dual) CHECK(!c.is_open(e));
    }
}

TEST_CASE("sampling is deterministic in (seed, stream)") {
    const DobrushinDomain d = build_rectangle_domain(4, 4, 1.0);
    RngStream r1(99, 5), r2(99, 5), r3(99, 6);
    bool identical = true, different = false;
    for (int s = 0; s < 50; ++s) {
        const Configuration a = sample_configuration(d, r1);
        const Configuration b = sample_configuration(d, r2);
        const Configuration c = sample_configuration(d, r3);
        identical = identical && (a.bits == b.bits);
        different = different || (a.bits != c.bits);
    }
    CHECK(identical);
    CHECK(different);
}

TEST_CASE("free edges are critical coins") {
    const DobrushinDomain d = build_rectangle_domain(3, 3, 1.0);
    RngStream rng(123, 1);
    const int n = 20000;
    std::vector<int> open_count(d.edge_count(), 0);
    for (int s = 0; s < n; ++s) {
        const Configuration c = sample_configuration(d, rng);
        for (const int e : d.free_edges) open_count[e] += c.is_open(e);
    }
    for (const int e : d.free_edges) {
        CHECK(std::abs(open_count[e] - n / 2) < 5 * std::sqrt(0.25 * n));
    }
}

TEST_CASE("enumeration visits every assignment exactly once") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);  // 4 free edges
    std::set<std::vector<std::uint64_t>> seen;
    int visits = 0;
    std::vector<int> open_tally(d.edge_count(), 0);
    enumerate_configurations(d, [&](const Configuration& c) {
        ++visits;
        seen.insert(c.bits);
        for (const int e : d.free_edges) open_tally[e] += c.is_open(e);
    });
    CHECK(visits == 16);
    CHECK(seen.size() == 16);
    for (const int e : d.free_edges) CHECK(open_tally[e] == 8);
}

TEST_CASE("enumeration cap") {
    const DobrushinDomain d = build_rectangle_domain(6, 6, 1.0);  // 60 free edges
    CHECK_THROWS_AS(enumerate_configurations(d, [](const Configuration&) {}),
                    std::invalid_argument);
}

TEST_CASE("cluster labels on the fully forced unit square") {
    const DobrushinDomain d = build_rectangle_domain(1, 1, 1.0);
    Configuration c(d);  // no free edges: forced statuses only
    const std::vector<int> open = open_clusters(c);
    // wired arc (west + north) joins sw, nw, ne corners; se stays alone
    const int sw = d.vertex_at({0, 0}), se = d.vertex_at({2, 0});
    const int nw = d.vertex_at({0, 2}), ne = d.vertex_at({2, 2});
    CHECK(open[sw] == open[nw]);
    CHECK(open[nw] == open[ne]);
    CHECK(open[sw] != open[se]);
    // the single face joins the dual-forced boundary arc's outer cells,
    // while the wired side's outer cells stay isolated
    const std::vector<int> dual = dual_clusters(c);
    REQUIRE(dual.size() == 5);  // one face + one outer cell per boundary edge
    const std::vector<int> outer = outer_cells_by_edge(d);
    CHECK(dual[0] == dual[outer[d.arc_ab_dual[0]]]);
    CHECK(dual[0] == dual[outer[d.arc_ab_dual[1]]]);
    CHECK(dual[outer[d.arc_ba[0]]] != dual[0]);
    CHECK(dual[outer[d.arc_ba[1]]] != dual[0]);
}

TEST_CASE("left-right crossing spans the dual complement") {
    // On a (n+1) x n rectangle with free boundary, an open left-right
    // crossing exists iff no dual top-bottom crossing does, and the
    // crossing probability under full enumeration is exactly 1/2.
    const DobrushinDomain d = build_free_rectangle(3, 2, 1.0);
    REQUIRE(d.free_count() == 17);
    const std::vector<int> left = side_vertices(d, Side::west);
    const std::vector<int> right = side_vertices(d, Side::east);
    const std::vector<int> top = side_outer_cells(d, Side::north);
    const std::vector<int> bottom = side_outer_cells(d, Side::south);
    std::uint64_t crossings = 0, total = 0;
    enumerate_configurations(d, [&](const Configuration& c) {
        const bool open_lr = has_open_crossing(c, left, right);
        const bool dual_tb = has_dual_crossing(c, top, bottom);
        CHECK(open_lr != dual_tb);
        crossings += open_lr;
        ++total;
    });
    CHECK(total == (1ull << 17));
    CHECK(crossings * 2 == total);
}

TEST_CASE("hex dump round trip") {
    const DobrushinDomain d = build_rectangle_domain(3, 2, 0.5);
    RngStream rng(2024, 0);
    const Configuration c = sample_configuration(d, rng);
    const std::string text = dump_hex(c);
    const Configuration back = load_hex(d, text);
    CHECK(back.bits == c.bits);

    // a dump is tied to its domain
    const DobrushinDomain other = build_rectangle_domain(2, 3, 0.5);
    CHECK_THROWS_AS(load_hex(other, text), std::invalid_argument);
    CHECK_THROWS_AS(load_hex(d, "nonsense"), std::invalid_argument);
}

TEST_CASE("open count bookkeeping") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);
    Configuration c(d);
    CHECK(c.open_count() == static_cast<int>(d.arc_ba.size()));
    for (const int e : d.free_edges) c.set_open(e, true);
    CHECK(c.open_count() == static_cast<int>(d.arc_ba.size()) + d.free_count());
    c.set_open(d.free_edges[0], false);
    CHECK(c.open_count() == static_cast<int>(d.arc_ba.size()) + d.free_count() - 1);
}

}  // namespace
