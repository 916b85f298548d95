#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "perc/exploration.hpp"
#include "perc/percolation.hpp"

namespace perc {

// Evaluation mode: full enumeration of the free edges (exact up to one
// final rounding) or Monte Carlo with a named sample budget and stream.
struct ExactMode {};
struct MonteCarloMode {
    long long samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};
using ObservableMode = std::variant<ExactMode, MonteCarloMode>;

// The edge observable F(e) = E[ exp(i W(e, exit)/3) 1(e on interface) ],
// where W is the winding of the interface from its traversal of e to its
// exit through e_b, indexed by medial edge id. The exit edge always has
// value exactly 1; edges the interface never reaches have value 0.
struct ObservableField {
    const DobrushinDomain* domain = nullptr;
    std::vector<Complex> values;
    std::vector<Complex> stderrs;  // (re, im) standard errors; zero when exact
    bool exact = false;
    long long samples = 0;
};

ObservableField edge_observable(const DobrushinDomain& domain, const ObservableMode& mode);

// Edge observable of a partially revealed exploration: the conditional
// expectation given the consumed prefix. Prefix edges carry their frozen
// winding offset times the expected continuation phase.
ObservableField slit_observable(const SlitDomain& slit, const ObservableMode& mode);

// Split of F by visit multiplicity of the head vertex of each traversal:
// a medial vertex is passed once (two of its slots used) or twice (all
// four). f_one + f_two recovers the edge observable exactly.
struct DecomposedField {
    const DobrushinDomain* domain = nullptr;
    std::vector<Complex> f_one;
    std::vector<Complex> f_two;
};

DecomposedField decompose(const DobrushinDomain& domain, const ObservableMode& mode);

// Midpoint vertex combinations. With u = exp(i pi/4) and slot values
// A,C inbound / B,D outbound (averaged over the present slots):
//   values:      e_b^{-1/3} ( conj(u) avg_in + u avg_out )
//   dual_values: e_b^{-1/3} ( u avg_in + conj(u) avg_out )
// indexed by in-domain medial vertex (= primal edge) id.
struct VertexField {
    const DobrushinDomain* domain = nullptr;
    std::vector<Complex> values;
    std::vector<Complex> dual_values;
};

VertexField vertex_observable(const ObservableField& field);
// Single-vertex variants of the same combinations.
Complex vertex_observable(const ObservableField& field, int medial_vertex);
Complex dual_vertex_observable(const ObservableField& field, int medial_vertex);

// Discrete relation residual F(A) - F(C) - i (F(B) - F(D)) at an interior
// medial vertex (one whose primal edge borders two interior faces).
Complex cr_residual(const ObservableField& field, int medial_vertex);
std::vector<int> interior_medial_vertices(const DobrushinDomain& domain);

// Largest slot-wise difference |F(slot at v0) - F(slot at v1)| between two
// medial vertices of the same orientation one lattice step apart.
double translational_gap(const ObservableField& field, int v0, int v1);

// Sum of (z_{j+1} - z_j) * F(midpoint_j)^3 along a lattice path of primal
// vertices (half-unit coordinates, consecutive vertices one mesh step
// apart); F is the vertex combination `values`. The first-power variant
// sums (z_{j+1} - z_j) * F(midpoint_j); around closed contours whose
// midpoints are all interior it vanishes exactly, which makes the
// primitive of the field path-independent there. Overloads taking the
// edge field apply the vertex combinations first.
Complex line_integral_cubed(const VertexField& field, std::span<const HalfPoint> path);
Complex line_integral_cubed(const ObservableField& field, std::span<const HalfPoint> path);
Complex line_integral(const VertexField& field, std::span<const HalfPoint> path);
Complex line_integral(const ObservableField& field, std::span<const HalfPoint> path);

struct CDeltaEstimate {
    double value = 0;
    double std_error = 0;
    std::vector<HalfPoint> contour;  // the primal-vertex path used
};

// Imaginary part of the mesh-normalized contour integral of F(v)^3 along
// a lattice quarter-circle of radius mesh^{1/3} around the corner where
// the two boundary arcs meet, from the dual-forced side to the wired side.
CDeltaEstimate estimate_c_delta(const DobrushinDomain& domain, const ObservableMode& mode);

void write_field_csv(const ObservableField& field, std::ostream& out);
void write_vertex_field_csv(const VertexField& field, std::ostream& out);

}  // namespace perc
