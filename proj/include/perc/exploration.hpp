#pragma once

#include <cstdint>
#include <vector>

#include "perc/percolation.hpp"

namespace perc {

// The interface from a<> to b<>: the unique medial walk separating the
// open cluster of the wired arc from the dual cluster of the dual-forced
// arc. steps[k] is the k-th visited medial vertex (steps[0] = a<>,
// steps.back() = b<>); turns[k] is the quarter turn taken there (+1 left,
// -1 right); cumulative_winding[k] is the winding (radians) accumulated
// through turn k. edge_sequence lists the traversed medial edges: the
// entry edge, one edge per step transition, and the exit edge.
struct ExplorationPath {
    const DobrushinDomain* domain = nullptr;
    std::vector<int> steps;
    std::vector<std::int8_t> turns;
    std::vector<double> cumulative_winding;
    std::vector<std::uint8_t> visited_edges;   // flag per medial edge id
    std::vector<int> edge_sequence;
    std::vector<int> traversal_index;          // per medial edge: position in edge_sequence, -1 if unused

    double total_winding() const { return cumulative_winding.back(); }
    bool traversed(int medial_edge) const { return visited_edges[medial_edge] != 0; }
};

ExplorationPath trace_exploration(const Configuration& config);

// Winding accumulated between the traversals of two medial edges on the
// path (signed; additive along the path). Both edges must be traversed.
double winding(const ExplorationPath& path, int medial_edge_from, int medial_edge_to);

// The traced curve as plane points: outer endpoint of the entry edge,
// every visited medial vertex, outer endpoint of the exit edge.
std::vector<Complex> path_to_polyline(const ExplorationPath& path);

// The exploration consumed up to (not including) vertex visit n: the
// revealed edge statuses, and the tip where the walk continues. n = 0 is
// the untouched domain with the tip at a<>.
struct SlitDomain {
    const DobrushinDomain* base = nullptr;
    std::vector<std::pair<int, bool>> revealed;  // (primal edge, status), reveal order
    int steps_consumed = 0;
    int tip_medial = kAbsent;     // gamma(n)
    Diag tip_direction = Diag::NE;  // heading of the edge entering gamma(n)
    double tip_winding = 0;       // winding accumulated strictly before gamma(n)
};

SlitDomain slit_after(const DobrushinDomain& domain, const ExplorationPath& path, int n);

// Continue the interface from a slit's tip under the given configuration;
// revealed statuses override the configuration bits.
ExplorationPath trace_from_slit(const SlitDomain& slit, const Configuration& config);

}  // namespace perc
