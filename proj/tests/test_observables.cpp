#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "perc/exploration.hpp"
#include "perc/observables.hpp"

namespace {

using namespace perc;

double dist(Complex a, Complex b) { return std::abs(a - b); }

// Per-edge expectation of exp(i W/3) 1(traversed), with the winding W
// measured in floating point from the polyline geometry (angles between
// consecutive segments), independent of the integer turn bookkeeping.
std::vector<Complex> polyline_winding_oracle(const DobrushinDomain& d) {
    std::vector<Complex> sum(d.medial_edges.size(), Complex{0, 0});
    long long configs = 0;
    enumerate_configurations(d, [&](const Configuration& config) {
        const ExplorationPath p = trace_exploration(config);
        const std::vector<Complex> line = path_to_polyline(p);
        std::vector<Complex> dirs(line.size() - 1);
        for (std::size_t j = 0; j + 1 < line.size(); ++j) dirs[j] = line[j + 1] - line[j];
        const int K = static_cast<int>(p.steps.size());
        for (std::size_t m = 0; m < d.medial_edges.size(); ++m) {
            const int t = p.traversal_index[m];
            if (t < 0) continue;
            double w = 0;
            for (int j = t; j < K; ++j) w += std::arg(dirs[j + 1] / dirs[j]);
            sum[m] += std::polar(1.0, w / 3.0);
        }
        ++configs;
    });
    for (Complex& s : sum) s /= static_cast<double>(configs);
    return sum;
}

// Quarter turns accumulated from the traversal at position t to the exit.
int turns_to_exit(const ExplorationPath& p, int t) {
    int q = 0;
    for (int j = t; j < static_cast<int>(p.steps.size()); ++j) q += p.turns[j];
    return q;
}

DobrushinDomain l_shape(double mesh = 1.0) {
    BoundarySpec spec;
    spec.segments = {{4, 0}, {0, 2}, {-2, 0}, {0, 2}, {-2, 0}, {0, -4}};
    spec.a_index = 0;
    spec.b_index = 2;
    spec.mesh = mesh;
    spec.min_segment_length = 1.0;
    return build_condition_c_domain(spec);
}

}  // namespace

TEST_CASE("winding phases match a floating-point polyline audit") {
    for (const auto& [cols, rows] : {std::pair{1, 1}, {2, 2}, {2, 3}}) {
        const DobrushinDomain d = build_rectangle_domain(cols, rows, 1.0);
        const ObservableField f = edge_observable(d, ExactMode{});
        REQUIRE(f.values.size() == d.medial_edges.size());
        CHECK(f.exact);
        CHECK(f.samples == (1ll << d.free_count()));
        const std::vector<Complex> oracle = polyline_winding_oracle(d);
        for (std::size_t m = 0; m < oracle.size(); ++m)
            CHECK(dist(f.values[m], oracle[m]) < 1e-9);
        for (const Complex se : f.stderrs) CHECK(se == Complex{0, 0});
    }
}

TEST_CASE("entry and exit edges carry unit value on rectangles") {
    for (const auto& [cols, rows] : {std::pair{2, 2}, {2, 3}, {3, 3}}) {
        const DobrushinDomain d = build_rectangle_domain(cols, rows, 1.0);
        const ObservableField f = edge_observable(d, ExactMode{});
        CHECK(f.values[static_cast<std::size_t>(d.e_a_edge)] == Complex{1, 0});
        CHECK(f.values[static_cast<std::size_t>(d.e_b_edge)] == Complex{1, 0});
    }
    // In a domain with a reflex corner the full interface still has a
    // deterministic net winding, so the entry value stays on the unit circle.
    const DobrushinDomain ell = l_shape();
    const ObservableField f = edge_observable(ell, ExactMode{});
    CHECK(std::abs(std::abs(f.values[static_cast<std::size_t>(ell.e_a_edge)]) - 1.0) < 1e-14);
    CHECK(f.values[static_cast<std::size_t>(ell.e_b_edge)] == Complex{1, 0});
}

TEST_CASE("frozen exact values on small rectangles") {
    const DobrushinDomain d22 = build_rectangle_domain(2, 2, 1.0);
    const ObservableField f22 = edge_observable(d22, ExactMode{});
    CHECK(dist(f22.values[0], {0.86602540378443837, -0.50000000000000044}) < 1e-15);

    const DobrushinDomain d23 = build_rectangle_domain(2, 3, 1.0);
    const ObservableField f23 = edge_observable(d23, ExactMode{});
    CHECK(dist(f23.values[4], {0.70364564057485612, -0.40625000000000033}) < 1e-15);
    CHECK(dist(f23.values[8], {0.59539246510180166, 0.34374999999999994}) < 1e-15);
    CHECK(dist(f23.values[12], {0.59539246510180144, -0.34375000000000033}) < 1e-15);
    CHECK(dist(f23.values[16], {0.48713928962874675, 0.21874999999999994}) < 1e-15);

    // |F| <= 1 everywhere (it is an average of unit phases and indicators),
    // with the maximum attained at the exit edge.
    for (const ObservableField* f : {&f22, &f23}) {
        double peak = 0;
        for (const Complex v : f->values) {
            CHECK(std::abs(v) <= 1.0 + 1e-15);
            peak = std::max(peak, std::abs(v));
        }
        CHECK(peak == 1.0);
    }
}

TEST_CASE("discrete relation holds at interior medial vertices") {
    const DobrushinDomain d23 = build_rectangle_domain(2, 3, 1.0);
    const std::vector<int> interior = interior_medial_vertices(d23);
    CHECK(interior == std::vector<int>{3, 5, 6, 8, 10, 11, 13});

    for (const auto& [cols, rows] : {std::pair{2, 2}, {2, 3}}) {
        const DobrushinDomain d = build_rectangle_domain(cols, rows, 1.0);
        const ObservableField f = edge_observable(d, ExactMode{});
        for (const int v : interior_medial_vertices(d))
            CHECK(std::abs(cr_residual(f, v)) < 1e-12);
    }

    const DobrushinDomain ell = l_shape();
    const ObservableField f = edge_observable(ell, ExactMode{});
    CHECK(!interior_medial_vertices(ell).empty());
    for (const int v : interior_medial_vertices(ell)) CHECK(std::abs(cr_residual(f, v)) < 1e-12);

    // The relation is only defined where both neighbouring faces exist.
    const int boundary_vertex = ell.edge_at({1, 0});
    REQUIRE(boundary_vertex != kAbsent);
    CHECK_THROWS_AS((void)cr_residual(f, boundary_vertex), std::invalid_argument);
    CHECK_THROWS_AS((void)cr_residual(f, -1), std::invalid_argument);
}

TEST_CASE("monte carlo estimates agree with enumeration") {
    const DobrushinDomain d = build_rectangle_domain(2, 3, 1.0);
    const ObservableField exact = edge_observable(d, ExactMode{});
    const MonteCarloMode mc{20000, 2024, 0};
    const ObservableField est = edge_observable(d, mc);
    CHECK(!est.exact);
    CHECK(est.samples == mc.samples);
    for (std::size_t e = 0; e < est.values.size(); ++e) {
        CHECK(std::abs(est.values[e].real() - exact.values[e].real()) <=
              5 * est.stderrs[e].real() + 1e-12);
        CHECK(std::abs(est.values[e].imag() - exact.values[e].imag()) <=
              5 * est.stderrs[e].imag() + 1e-12);
    }

    // Identical seed and stream reproduce the estimate bit for bit; a
    // different stream gives a genuinely different sample sequence.
    const ObservableField again = edge_observable(d, mc);
    CHECK(again.values == est.values);
    CHECK(again.stderrs == est.stderrs);
    const ObservableField other = edge_observable(d, MonteCarloMode{20000, 2024, 1});
    CHECK(other.values != est.values);
}

TEST_CASE("sampled residual is statistically consistent with zero") {
    const DobrushinDomain d = build_rectangle_domain(2, 3, 1.0);
    const ObservableField f = edge_observable(d, MonteCarloMode{100000, 11, 3});
    const int v = d.edge_at({2, 3});  // central medial vertex
    REQUIRE(v != kAbsent);
    double combined = 0;
    for (const int e : d.medial_slots[static_cast<std::size_t>(v)].edge) {
        REQUIRE(e != kAbsent);
        combined += f.stderrs[static_cast<std::size_t>(e)].real() +
                    f.stderrs[static_cast<std::size_t>(e)].imag();
    }
    CHECK(combined > 0);
    CHECK(std::abs(cr_residual(f, v)) <= 5 * combined);
}

TEST_CASE("half-turn rotation swaps the marked corners covariantly") {
    const int cols = 2, rows = 3;
    const DobrushinDomain d1 = build_rectangle_domain(cols, rows, 1.0, Corner::sw, Corner::ne);
    const DobrushinDomain d2 = build_rectangle_domain(cols, rows, 1.0, Corner::ne, Corner::sw);
    const ObservableField f1 = edge_observable(d1, ExactMode{});
    const ObservableField f2 = edge_observable(d2, ExactMode{});
    const auto rot = [&](HalfPoint p) { return HalfPoint{2 * cols - p.x, 2 * rows - p.y}; };

    int mapped = 0;
    for (std::size_t e = 0; e < d1.medial_edges.size(); ++e) {
        const MedialEdge& me = d1.medial_edges[e];
        if (me.from == kAbsent || me.to == kAbsent) continue;
        const int u2 = d2.medial_at(rot(d1.medial_vertices[static_cast<std::size_t>(me.from)]));
        const int v2 = d2.medial_at(rot(d1.medial_vertices[static_cast<std::size_t>(me.to)]));
        REQUIRE(u2 != kAbsent);
        REQUIRE(v2 != kAbsent);
        int e2 = kAbsent;
        for (std::size_t k = 0; k < d2.medial_edges.size(); ++k)
            if (d2.medial_edges[k].from == u2 && d2.medial_edges[k].to == v2)
                e2 = static_cast<int>(k);
        REQUIRE(e2 != kAbsent);
        CHECK(f1.values[e] == f2.values[static_cast<std::size_t>(e2)]);
        ++mapped;
    }
    CHECK(mapped > 20);

    // The midpoint combinations pick up one fixed unit factor from the
    // rotated exit direction; the factor is the same at every vertex.
    const Complex ratio = std::polar(1.0, std::numbers::pi / 3.0);
    for (int v = 0; v < d1.edge_count(); ++v) {
        const int v2 = d2.edge_at(rot(d1.medial_vertices[static_cast<std::size_t>(v)]));
        REQUIRE(v2 != kAbsent);
        CHECK(dist(vertex_observable(f2, v2), ratio * vertex_observable(f1, v)) < 1e-14);
        CHECK(dist(dual_vertex_observable(f2, v2), ratio * dual_vertex_observable(f1, v)) <
              1e-14);
    }
}

TEST_CASE("vertex combinations and their single-vertex accessors agree") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);
    const ObservableField f = edge_observable(d, ExactMode{});
    const VertexField vf = vertex_observable(f);
    REQUIRE(static_cast<int>(vf.values.size()) == d.edge_count());
    REQUIRE(static_cast<int>(vf.dual_values.size()) == d.edge_count());
    for (int v = 0; v < d.edge_count(); ++v) {
        CHECK(vf.values[static_cast<std::size_t>(v)] == vertex_observable(f, v));
        CHECK(vf.dual_values[static_cast<std::size_t>(v)] == dual_vertex_observable(f, v));
    }

    const int v0 = d.edge_at({1, 0});
    REQUIRE(v0 != kAbsent);
    CHECK(dist(vertex_observable(f, v0), {1.0312500000000002, -0.27063293868263733}) < 1e-15);
    CHECK(dist(dual_vertex_observable(f, v0), {0.59539246510180122, -0.15625000000000006}) <
          1e-15);

    CHECK_THROWS_AS((void)vertex_observable(f, -1), std::invalid_argument);
    CHECK_THROWS_AS((void)vertex_observable(f, d.edge_count()), std::invalid_argument);
    CHECK_THROWS_AS((void)dual_vertex_observable(f, d.edge_count()), std::invalid_argument);
}

TEST_CASE("visit-multiplicity split partitions the observable") {
    // Independent classification: a traversal lands in the single-visit part
    // exactly when its arrival vertex appears once on the walk.
    const DobrushinDomain d22 = build_rectangle_domain(2, 2, 1.0);
    const DecomposedField dec22 = decompose(d22, ExactMode{});
    std::vector<Complex> one(d22.medial_edges.size()), two(d22.medial_edges.size());
    long long configs = 0;
    enumerate_configurations(d22, [&](const Configuration& config) {
        const ExplorationPath p = trace_exploration(config);
        const int K = static_cast<int>(p.steps.size());
        for (std::size_t m = 0; m < d22.medial_edges.size(); ++m) {
            const int t = p.traversal_index[m];
            if (t < 0) continue;
            const int head = t < K ? p.steps[static_cast<std::size_t>(t)]
                                   : p.steps[static_cast<std::size_t>(K - 1)];
            const long visits = std::count(p.steps.begin(), p.steps.end(), head);
            const Complex phase =
                std::polar(1.0, turns_to_exit(p, t) * std::numbers::pi / 6.0);
            (visits == 1 ? one[m] : two[m]) += phase;
        }
        ++configs;
    });
    for (std::size_t m = 0; m < one.size(); ++m) {
        CHECK(dist(dec22.f_one[m], one[m] / static_cast<double>(configs)) < 1e-12);
        CHECK(dist(dec22.f_two[m], two[m] / static_cast<double>(configs)) < 1e-12);
    }

    // The two parts recover the observable exactly.
    for (const auto& [cols, rows] : {std::pair{2, 3}, {3, 3}}) {
        const DobrushinDomain d = build_rectangle_domain(cols, rows, 1.0);
        const ObservableField f = edge_observable(d, ExactMode{});
        const DecomposedField dec = decompose(d, ExactMode{});
        double max_two = 0;
        for (std::size_t m = 0; m < f.values.size(); ++m) {
            CHECK(dist(dec.f_one[m] + dec.f_two[m], f.values[m]) < 1e-14);
            max_two = std::max(max_two, std::abs(dec.f_two[m]));
        }
        CHECK(max_two > 0.1);  // double visits genuinely occur
    }

    // A single-cell domain has one deterministic walk with no revisits.
    const DobrushinDomain d11 = build_rectangle_domain(1, 1, 1.0);
    const ObservableField f11 = edge_observable(d11, ExactMode{});
    const DecomposedField dec11 = decompose(d11, ExactMode{});
    for (std::size_t m = 0; m < f11.values.size(); ++m) {
        CHECK(dec11.f_two[m] == Complex{0, 0});
        CHECK(dec11.f_one[m] == f11.values[m]);
    }

    // With matching seed and stream the sampled split partitions the sampled
    // field with the same sample sequence.
    const DobrushinDomain d23 = build_rectangle_domain(2, 3, 1.0);
    const MonteCarloMode mc{5000, 99, 2};
    const ObservableField fmc = edge_observable(d23, mc);
    const DecomposedField dmc = decompose(d23, mc);
    // The two buckets accumulate their running sums separately, so allow for
    // the reordering of a few thousand floating-point additions.
    for (std::size_t m = 0; m < fmc.values.size(); ++m)
        CHECK(dist(dmc.f_one[m] + dmc.f_two[m], fmc.values[m]) < 1e-12);
}

TEST_CASE("conditional field from a slit matches direct conditioning") {
    const DobrushinDomain d = build_rectangle_domain(2, 3, 1.0);
    Configuration base(d);
    for (std::size_t i = 0; i < d.free_edges.size(); ++i)
        base.set_open(d.free_edges[i], i % 2 == 0);
    const ExplorationPath path = trace_exploration(base);
    const int K = static_cast<int>(path.steps.size());
    REQUIRE(K >= 4);

    for (const int n : {0, 1, K / 2, K - 1}) {
        CAPTURE(n);
        const SlitDomain slit = slit_after(d, path, n);
        const ObservableField cond = slit_observable(slit, ExactMode{});

        std::vector<Complex> direct(d.medial_edges.size(), Complex{0, 0});
        long long kept = 0;
        enumerate_configurations(d, [&](const Configuration& config) {
            for (const auto& [edge, status] : slit.revealed)
                if (config.is_open(edge) != status) return;
            const ExplorationPath p = trace_exploration(config);
            for (std::size_t m = 0; m < d.medial_edges.size(); ++m) {
                const int t = p.traversal_index[m];
                if (t < 0) continue;
                direct[m] += std::polar(1.0, turns_to_exit(p, t) * std::numbers::pi / 6.0);
            }
            ++kept;
        });
        REQUIRE(kept > 0);
        CHECK(cond.samples == kept);
        for (std::size_t m = 0; m < direct.size(); ++m)
            CHECK(dist(cond.values[m], direct[m] / static_cast<double>(kept)) < 1e-12);
    }

    // No reveals conditions on nothing.
    const ObservableField whole = edge_observable(d, ExactMode{});
    const ObservableField empty_slit = slit_observable(slit_after(d, path, 0), ExactMode{});
    CHECK(empty_slit.values == whole.values);

    // Tampered reveals cannot reproduce the recorded tip.
    SlitDomain broken = slit_after(d, path, K / 2);
    REQUIRE(!broken.revealed.empty());
    broken.revealed.front().second = !broken.revealed.front().second;
    CHECK_THROWS((void)slit_observable(broken, ExactMode{}));

    // Sampled conditioning agrees with the enumerated one and reruns
    // identically.
    const SlitDomain half = slit_after(d, path, K / 2);
    const ObservableField exact_half = slit_observable(half, ExactMode{});
    const MonteCarloMode mc{20000, 5, 0};
    const ObservableField est = slit_observable(half, mc);
    for (std::size_t m = 0; m < est.values.size(); ++m) {
        CHECK(std::abs(est.values[m].real() - exact_half.values[m].real()) <=
              5 * est.stderrs[m].real() + 1e-12);
        CHECK(std::abs(est.values[m].imag() - exact_half.values[m].imag()) <=
              5 * est.stderrs[m].imag() + 1e-12);
    }
    const ObservableField est2 = slit_observable(half, mc);
    CHECK(est2.values == est.values);
}

TEST_CASE("closed contours with interior midpoints integrate to zero") {
    const DobrushinDomain d = build_rectangle_domain(3, 4, 1.0);
    const ObservableField f = edge_observable(d, ExactMode{});
    const VertexField vf = vertex_observable(f);

    const std::vector<HalfPoint> square1{{2, 2}, {4, 2}, {4, 4}, {2, 4}, {2, 2}};
    const std::vector<HalfPoint> square2{{2, 4}, {4, 4}, {4, 6}, {2, 6}, {2, 4}};
    const std::vector<HalfPoint> tall{{2, 2}, {4, 2}, {4, 4}, {4, 6}, {2, 6}, {2, 4}, {2, 2}};
    for (const auto* loop : {&square1, &square2, &tall})
        CHECK(std::abs(line_integral(vf, *loop)) < 1e-12);

    // Path independence between the shared endpoints of two interior routes.
    const std::vector<HalfPoint> via_east{{2, 2}, {4, 2}, {4, 4}};
    const std::vector<HalfPoint> via_north{{2, 2}, {2, 4}, {4, 4}};
    CHECK(dist(line_integral(vf, via_east), line_integral(vf, via_north)) < 1e-13);

    // The overloads taking the edge field apply the combinations first.
    CHECK(line_integral(f, via_east) == line_integral(vf, via_east));
    CHECK(line_integral_cubed(f, via_east) == line_integral_cubed(vf, via_east));
}

TEST_CASE("constant fields integrate exactly") {
    const DobrushinDomain d = build_rectangle_domain(3, 3, 1.0);
    VertexField ones;
    ones.domain = &d;
    ones.values.assign(static_cast<std::size_t>(d.edge_count()), Complex{1, 0});
    ones.dual_values = ones.values;

    const std::vector<HalfPoint> loop{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {0, 0}};
    CHECK(line_integral(ones, loop) == Complex{0, 0});
    CHECK(line_integral_cubed(ones, loop) == Complex{0, 0});

    const std::vector<HalfPoint> open_path{{0, 0}, {2, 0}, {2, 2}, {4, 2}};
    const Complex expect = to_complex({4, 2}, d.mesh) - to_complex({0, 0}, d.mesh);
    CHECK(line_integral(ones, open_path) == expect);
    CHECK(line_integral_cubed(ones, open_path) == expect);

    const std::vector<HalfPoint> not_primal{{1, 2}, {3, 2}};
    CHECK_THROWS_AS((void)line_integral(ones, not_primal), std::invalid_argument);
    const std::vector<HalfPoint> long_step{{0, 0}, {4, 0}};
    CHECK_THROWS_AS((void)line_integral(ones, long_step), std::invalid_argument);
    const std::vector<HalfPoint> outside{{0, 0}, {-2, 0}};
    CHECK_THROWS_AS((void)line_integral(ones, outside), std::invalid_argument);
    const std::vector<HalfPoint> too_short{{0, 0}};
    CHECK_THROWS_AS((void)line_integral(ones, too_short), std::invalid_argument);
}

TEST_CASE("translational gaps between neighbouring midpoints") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);
    const ObservableField f = edge_observable(d, ExactMode{});

    const int h0 = d.edge_at({1, 0});
    const int h1 = d.edge_at({3, 0});
    const int h2 = d.edge_at({1, 2});
    const int w0 = d.edge_at({0, 1});
    const int w1 = d.edge_at({0, 3});
    REQUIRE(h0 != kAbsent);
    REQUIRE(h1 != kAbsent);
    REQUIRE(h2 != kAbsent);
    REQUIRE(w0 != kAbsent);
    REQUIRE(w1 != kAbsent);
    CHECK(translational_gap(f, h0, h1) == doctest::Approx(0.625).epsilon(1e-14));
    CHECK(translational_gap(f, h0, h2) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(translational_gap(f, w0, w1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(translational_gap(f, h1, h0) == translational_gap(f, h0, h1));

    // Largest neighbour gap across the 2x3 rectangle.
    const DobrushinDomain d23 = build_rectangle_domain(2, 3, 1.0);
    const ObservableField f23 = edge_observable(d23, ExactMode{});
    double max_gap = 0;
    for (int v0 = 0; v0 < d23.edge_count(); ++v0)
        for (int v1 = v0 + 1; v1 < d23.edge_count(); ++v1) {
            if (d23.primal_edges[static_cast<std::size_t>(v0)].horizontal !=
                d23.primal_edges[static_cast<std::size_t>(v1)].horizontal)
                continue;
            const HalfPoint delta = d23.medial_vertices[static_cast<std::size_t>(v1)] -
                                    d23.medial_vertices[static_cast<std::size_t>(v0)];
            if (!((std::abs(delta.x) == 2 && delta.y == 0) ||
                  (delta.x == 0 && std::abs(delta.y) == 2)))
                continue;
            max_gap = std::max(max_gap, translational_gap(f23, v0, v1));
        }
    CHECK(max_gap == doctest::Approx(0.65625).epsilon(1e-14));

    // Rotating the domain half a turn permutes the slot labels in pairs, so
    // neighbour gaps are preserved exactly.
    const DobrushinDomain r = build_rectangle_domain(2, 2, 1.0, Corner::ne, Corner::sw);
    const ObservableField fr = edge_observable(r, ExactMode{});
    const auto rot = [](HalfPoint p) { return HalfPoint{4 - p.x, 4 - p.y}; };
    const auto pairs = {std::pair{h0, h1}, {h0, h2}, {w0, w1}};
    for (const auto& [a, b] : pairs) {
        const int ra = r.edge_at(rot(d.medial_vertices[static_cast<std::size_t>(a)]));
        const int rb = r.edge_at(rot(d.medial_vertices[static_cast<std::size_t>(b)]));
        REQUIRE(ra != kAbsent);
        REQUIRE(rb != kAbsent);
        CHECK(translational_gap(fr, ra, rb) ==
              doctest::Approx(translational_gap(f, a, b)).epsilon(1e-14));
    }

    CHECK_THROWS_AS((void)translational_gap(f, h0, w0), std::invalid_argument);   // orientation
    CHECK_THROWS_AS((void)translational_gap(f, h0, d.edge_at({3, 2})),            // diagonal
                    std::invalid_argument);
    CHECK_THROWS_AS((void)translational_gap(f, h0, 99), std::invalid_argument);   // range
}

TEST_CASE("corner contour integral is positive and stable") {
    const DobrushinDomain d33 = build_rectangle_domain(3, 3, 1.0 / 3.0);
    const CDeltaEstimate exact = estimate_c_delta(d33, ExactMode{});
    CHECK(exact.value > 0);
    CHECK(exact.value == doctest::Approx(0.81992085572706197).epsilon(1e-12));
    CHECK(exact.std_error == 0);
    const std::vector<HalfPoint> expect_contour{{6, 2}, {4, 2}, {4, 4}, {2, 4}, {2, 6}};
    CHECK(exact.contour == expect_contour);

    const DobrushinDomain d43 = build_rectangle_domain(4, 3, 1.0 / 3.0);
    const CDeltaEstimate wide = estimate_c_delta(d43, ExactMode{});
    CHECK(wide.value == doctest::Approx(0.82846577144998768).epsilon(1e-12));
    const std::vector<HalfPoint> wide_contour{{8, 2}, {6, 2}, {6, 4}, {4, 4}, {4, 6}};
    CHECK(wide.contour == wide_contour);

    // Too coarse a mesh leaves no room for the contour.
    const DobrushinDomain tiny = build_rectangle_domain(2, 2, 0.5);
    CHECK_THROWS_AS((void)estimate_c_delta(tiny, ExactMode{}), std::invalid_argument);

    // Sampled estimate brackets the enumerated value and reruns identically.
    const MonteCarloMode mc{40000, 7, 0};
    const CDeltaEstimate est = estimate_c_delta(d33, mc);
    CHECK(est.std_error > 0);
    CHECK(est.std_error < 0.05);
    CHECK(std::abs(est.value - exact.value) <= 5 * est.std_error);
    const CDeltaEstimate est2 = estimate_c_delta(d33, mc);
    CHECK(est2.value == est.value);
    CHECK(est2.std_error == est.std_error);
}

TEST_CASE("independent seeds agree on a finer-mesh contour integral") {
    const DobrushinDomain d = build_rectangle_domain(16, 16, 1.0 / 16.0);
    const CDeltaEstimate a = estimate_c_delta(d, MonteCarloMode{20000, 1, 0});
    const CDeltaEstimate b = estimate_c_delta(d, MonteCarloMode{20000, 2, 0});
    CHECK(a.value > 0);
    CHECK(b.value > 0);
    const double combined = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(combined > 0);
    CHECK(std::abs(a.value - b.value) <= 4 * combined);
}

TEST_CASE("csv writers emit one labelled row per entry") {
    const DobrushinDomain d = build_rectangle_domain(2, 2, 1.0);
    const ObservableField f = edge_observable(d, ExactMode{});

    std::ostringstream edge_out;
    write_field_csv(f, edge_out);
    std::istringstream edge_in(edge_out.str());
    std::string line;
    REQUIRE(std::getline(edge_in, line));
    CHECK(line == "medial_edge,x,y,re,im,stderr_re,stderr_im");
    std::size_t rows = 0;
    std::string first_row;
    while (std::getline(edge_in, line)) {
        if (rows == 0) first_row = line;
        ++rows;
    }
    CHECK(rows == f.values.size());
    int id = -1;
    double x = 0, y = 0, re = 0, im = 0, se_re = -1, se_im = -1;
    REQUIRE(std::sscanf(first_row.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf", &id, &x, &y, &re, &im,
                        &se_re, &se_im) == 7);
    CHECK(id == 0);
    CHECK(std::abs(re - 0.86602540378443837) < 1e-15);
    CHECK(std::abs(im - -0.50000000000000044) < 1e-15);
    CHECK(se_re == 0);
    CHECK(se_im == 0);

    std::ostringstream vertex_out;
    write_vertex_field_csv(vertex_observable(f), vertex_out);
    std::istringstream vertex_in(vertex_out.str());
    REQUIRE(std::getline(vertex_in, line));
    CHECK(line == "medial_vertex,x,y,re,im,dual_re,dual_im");
    rows = 0;
    while (std::getline(vertex_in, line)) ++rows;
    CHECK(rows == static_cast<std::size_t>(d.edge_count()));
}
