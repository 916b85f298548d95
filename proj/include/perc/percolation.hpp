#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "perc/lattice.hpp"
#include "perc/rng.hpp"

namespace perc {

// An edge-status assignment: bit = 1 means open. Forced boundary statuses
// (wired arc open, dual-forced arc closed) are always baked in.
struct Configuration {
    const DobrushinDomain* domain = nullptr;
    std::vector<std::uint64_t> bits;

    explicit Configuration(const DobrushinDomain& d)
        : domain(&d), bits(d.forced_open_mask) {}

    bool is_open(int edge) const {
        return (bits[static_cast<std::size_t>(edge) >> 6] >> (edge & 63)) & 1u;
    }
    void set_open(int edge, bool open) {
        const std::size_t w = static_cast<std::size_t>(edge) >> 6;
        const std::uint64_t bit = 1ull << (edge & 63);
        if (open)
            bits[w] |= bit;
        else
            bits[w] &= ~bit;
    }
    int open_count() const;
};

// Critical sampling: every free edge open with probability 1/2.
Configuration sample_configuration(const DobrushinDomain& domain, RngStream& rng);
// Same, refilling an existing configuration without reallocating.
void sample_configuration(Configuration& config, RngStream& rng);

// Visit all 2^f assignments of the free edges (f capped at 24).
void enumerate_configurations(const DobrushinDomain& domain,
                              const std::function<void(const Configuration&)>& visit);

// Union-find labels (root ids) per primal vertex; open edges merge.
std::vector<int> open_clusters(const Configuration& config);

// Union-find labels over the dual cells: interior faces first, then one
// outer cell per boundary edge (a boundary edge's dual edge leads out of
// the domain). Closed edges merge the cells on their two sides. For
// Dobrushin domains the outer cells along the dual-forced arc are merged
// with each other (the interface's outer boundary passes between them
// through dual-open territory), forming the boundary arc's cluster.
std::vector<int> dual_clusters(const Configuration& config);

int dual_label_count(const DobrushinDomain& domain);
// Per edge: the label index of its outer cell, kAbsent for interior edges.
std::vector<int> outer_cells_by_edge(const DobrushinDomain& domain);

enum class Side { south, east, north, west };

// First interior face layer along a rectangle side (the mesh/2-neighborhood).
std::vector<int> side_faces(const DobrushinDomain& domain, Side side);
// Outer dual cells along a rectangle side (also within mesh/2 of it).
std::vector<int> side_outer_cells(const DobrushinDomain& domain, Side side);
// Primal vertices along a rectangle side.
std::vector<int> side_vertices(const DobrushinDomain& domain, Side side);

bool has_dual_crossing(const Configuration& config, std::span<const int> faces1,
                       std::span<const int> faces2);
bool has_dual_crossing(const Configuration& config, Side side1, Side side2);
bool has_open_crossing(const Configuration& config, std::span<const int> vertices1,
                       std::span<const int> vertices2);
bool has_open_crossing(const Configuration& config, Side side1, Side side2);

// Serialization: "<topology hash, 16 hex digits>:<edge bits, hex>".
std::string dump_hex(const Configuration& config);
Configuration load_hex(const DobrushinDomain& domain, const std::string& text);

}  // namespace perc
