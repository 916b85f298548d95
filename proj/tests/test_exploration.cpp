#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "perc/exploration.hpp"

namespace {

using namespace perc;

Configuration make_config(const DobrushinDomain& d, bool all_open) {
    Configuration c(d);
    for (const int e : d.free_edges) c.set_open(e, all_open);
    return c;
}

std::vector<HalfPoint> step_points(const DobrushinDomain& d, const ExplorationPath& p) {
    std::vector<HalfPoint> out;
    for (const int v : p.steps) out.push_back(d.medial_vertices[v]);
    return out;
}

// Walk the interface backwards from the exit edge with the mirrored turn
// rule; a correct trace is reversible, so this must reproduce the forward
// vertex sequence in reverse.
std::vector<int> reverse_trace(const DobrushinDomain& d, const Configuration& c) {
    std::vector<int> steps;
    Diag heading = reverse(d.medial_edges[d.e_b_edge].dir);
    int v = d.medial_edges[d.e_b_edge].from;
    while (v != kAbsent) {
        const bool open = !d.is_exterior_medial(v) && c.is_open(v);
        heading = open ? turn_left(heading) : turn_right(heading);
        steps.push_back(v);
        const int edge = incoming_medial_edge(d, v, reverse(heading));
        REQUIRE(edge != kAbsent);
        v = d.medial_edges[edge].from;
    }
    return steps;
}

// Independent geometric audit of every step: the walk may not cross an
// open primal edge (it must stay on one side of the edge's line), and may
// not cross the dual of a closed one (one side of the perpendicular).
void audit_path(const DobrushinDomain& d, const Configuration& c, const ExplorationPath& p) {
    for (std::size_t k = 0; k < p.steps.size(); ++k) {
        const int v = p.steps[k];
        const HalfPoint m = d.medial_vertices[v];
        const Diag in_dir = d.medial_edges[p.edge_sequence[k]].dir;
        const Diag out_dir = d.medial_edges[p.edge_sequence[k + 1]].dir;
        const HalfPoint prev = m - diag_step(in_dir);
        const HalfPoint next = m + diag_step(out_dir);
        const bool open = !d.is_exterior_medial(v) && c.is_open(v);
        const bool horizontal = (m.x & 1) != 0;
        if (open) {
            if (horizontal)
                CHECK((prev.y - m.y) * (next.y - m.y) > 0);
            else
                CHECK((prev.x - m.x) * (next.x - m.x) > 0);
        } else {
            if (horizontal)
                CHECK((prev.x - m.x) * (next.x - m.x) > 0);
            else
                CHECK((prev.y - m.y) * (next.y - m.y) > 0);
        }
    }
}

TEST_CASE("all-open square interface, frozen by hand") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);
    const Configuration c = make_config(d, true);
    const ExplorationPath p = trace_exploration(c);
    const std::vector<HalfPoint> expected = {
        {1, 0}, {0, 1}, {1, 2}, {2, 1}, {1, 0}, {2, -1}, {3, 0}, {2, 1},
        {3, 2}, {4, 1}, {5, 2}, {4, 3}, {3, 2}, {2, 3},  {3, 4}, {4, 3}};
    CHECK(step_points(d, p) == expected);
    const std::vector<int> expected_turns = {1, -1, -1, -1, 1, 1,  1,  -1,
                                             -1, 1, 1,  1,  -1, -1, -1, 1};
    REQUIRE(p.turns.size() == expected_turns.size());
    for (std::size_t k = 0; k < expected_turns.size(); ++k)
        CHECK(static_cast<int>(p.turns[k]) == expected_turns[k]);
    CHECK(p.total_winding() == 0.0);
    CHECK(p.edge_sequence.size() == p.steps.size() + 1);
    CHECK(p.edge_sequence.front() == d.e_a_edge);
    CHECK(p.edge_sequence.back() == d.e_b_edge);
}

TEST_CASE("all-closed square interface hugs the wired arc") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);
    const Configuration c = make_config(d, false);
    const ExplorationPath p = trace_exploration(c);
    const std::vector<HalfPoint> expected = {{1, 0}, {0, 1}, {1, 2}, {0, 3},
                                             {1, 4}, {2, 3}, {3, 4}, {4, 3}};
    CHECK(step_points(d, p) == expected);
    CHECK(p.total_winding() == 0.0);
}

TEST_CASE("trace is deterministic") {
    const DobrushinDomain d = build_rectangle_domain(3, 2, 0.5);
    RngStream rng(11, 0);
    const Configuration c = sample_configuration(d, rng);
    const ExplorationPath p1 = trace_exploration(c);
    const ExplorationPath p2 = trace_exploration(c);
    CHECK(p1.steps == p2.steps);
    CHECK(p1.turns == p2.turns);
    CHECK(p1.edge_sequence == p2.edge_sequence);
}

TEST_CASE("total winding is configuration independent") {
    for (const auto& d :
         {build_rectangle_domain(2, 3, 1.0), build_rectangle_domain(2, 2, 1.0)}) {
        enumerate_configurations(d, [&](const Configuration& c) {
            const ExplorationPath p = trace_exploration(c);
            CHECK(p.total_winding() == 0.0);
            CHECK(p.edge_sequence.back() == d.e_b_edge);
        });
    }
}

TEST_CASE("local turn rule audit over full enumeration") {
    const DobrushinDomain d = build_rectangle_domain(2, 3, 1.0);
    enumerate_configurations(d, [&](const Configuration& c) {
        audit_path(d, c, trace_exploration(c));
    });
}

TEST_CASE("trace is reversible") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);
    enumerate_configurations(d, [&](const Configuration& c) {
        const ExplorationPath forward = trace_exploration(c);
        std::vector<int> backward = reverse_trace(d, c);
        std::reverse(backward.begin(), backward.end());
        CHECK(backward == forward.steps);
    });
}

TEST_CASE("interface in a domain with a reflex dual-side corner") {
    BoundarySpec spec;
    spec.segments = {{4, 0}, {0, 2}, {-2, 0}, {0, 2}, {-2, 0}, {0, -4}};
    spec.a_index = 0;
    spec.b_index = 4;  // marked corner past the reflex turn of the a->b arc
    spec.mesh = 1.0;
    spec.min_segment_length = 1.0;
    const DobrushinDomain d = build_condition_c_domain(spec);
    REQUIRE(d.free_count() == 16);
    double first_total = 0;
    bool first = true;
    enumerate_configurations(d, [&](const Configuration& c) {
        const ExplorationPath p = trace_exploration(c);
        audit_path(d, c, p);
        if (first) {
            first_total = p.total_winding();
            first = false;
        }
        CHECK(p.total_winding() == first_total);
    });
}

TEST_CASE("winding between edges is additive") {
    const DobrushinDomain d = build_rectangle_domain(3, 3, 1.0);
    RngStream rng(5, 2);
    const Configuration c = sample_configuration(d, rng);
    const ExplorationPath p = trace_exploration(c);
    const int n = static_cast<int>(p.edge_sequence.size());
    const int e1 = p.edge_sequence[0];
    const int e2 = p.edge_sequence[n / 3];
    const int e3 = p.edge_sequence[(2 * n) / 3];
    const int e4 = p.edge_sequence[n - 1];
    CHECK(winding(p, e1, e3) == winding(p, e1, e2) + winding(p, e2, e3));
    CHECK(winding(p, e1, e4) == doctest::Approx(p.total_winding()).epsilon(1e-15));
    CHECK(winding(p, e3, e2) == -winding(p, e2, e3));
    const int untraversed = [&] {
        for (int e = 0; e < static_cast<int>(d.medial_edges.size()); ++e)
            if (!p.traversed(e)) return e;
        return kAbsent;
    }();
    REQUIRE(untraversed != kAbsent);
    CHECK_THROWS_AS(winding(p, e1, untraversed), std::invalid_argument);
}

TEST_CASE("polyline embeds the path at medial coordinates") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 0.25);
    const Configuration c = make_config(d, true);
    const ExplorationPath p = trace_exploration(c);
    const std::vector<Complex> line = path_to_polyline(p);
    REQUIRE(line.size() == p.steps.size() + 2);
    const double step = 0.25 * std::numbers::sqrt2 / 2;
    for (std::size_t k = 0; k + 1 < line.size(); ++k)
        CHECK(std::abs(line[k + 1] - line[k]) == doctest::Approx(step).epsilon(1e-12));
    CHECK(line[1] == d.position_of_medial(d.a_medial));
    CHECK(std::abs(line.back() - (d.position_of_medial(d.b_medial) +
                                  step * d.e_b_direction)) < 1e-15);
}

TEST_CASE("slit with zero steps is the identity") {
    const DobrushinDomain d = build_rectangle_domain(2, 3, 1.0);
    RngStream rng(17, 0);
    const Configuration c = sample_configuration(d, rng);
    const ExplorationPath p = trace_exploration(c);
    const SlitDomain s = slit_after(d, p, 0);
    CHECK(s.revealed.empty());
    CHECK(s.tip_medial == d.a_medial);
    CHECK(s.tip_winding == 0.0);
    const ExplorationPath q = trace_from_slit(s, c);
    CHECK(q.steps == p.steps);
    CHECK(q.turns == p.turns);
}

TEST_CASE("slit traces continue the parent path") {
    const DobrushinDomain d = build_rectangle_domain(2, 3, 1.0);
    enumerate_configurations(d, [&](const Configuration& c) {
        const ExplorationPath p = trace_exploration(c);
        for (int n = 0; n < static_cast<int>(p.steps.size()); n += 3) {
            const SlitDomain s = slit_after(d, p, n);
            CHECK(s.steps_consumed == n);
            const ExplorationPath q = trace_from_slit(s, c);
            REQUIRE(q.steps.size() == p.steps.size() - n);
            for (std::size_t k = 0; k < q.steps.size(); ++k) {
                CHECK(q.steps[k] == p.steps[n + k]);
                CHECK(q.turns[k] == p.turns[n + k]);
                CHECK(s.tip_winding + q.cumulative_winding[k] ==
                      doctest::Approx(p.cumulative_winding[n + k]).epsilon(1e-14));
            }
        }
    });
}

TEST_CASE("exploration rejects unsuitable inputs") {
    const DobrushinDomain free = build_free_rectangle(2, 2, 1.0);
    Configuration c(free);
    CHECK_THROWS_AS(trace_exploration(c), std::invalid_argument);

    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);
    const Configuration c2 = make_config(d, true);
    const ExplorationPath p = trace_exploration(c2);
    CHECK_THROWS_AS(slit_after(d, p, -1), std::invalid_argument);
    CHECK_THROWS_AS(slit_after(d, p, static_cast<int>(p.steps.size())),
                    std::invalid_argument);
}

}  // namespace
