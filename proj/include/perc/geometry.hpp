#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>

namespace perc {

using Complex = std::complex<double>;

// Plane points are stored in half-units of the mesh so that primal
// vertices, dual faces and edge midpoints all live on one integer grid:
//   primal vertex: x, y both even
//   dual face:     x, y both odd
//   edge midpoint: x + y odd
struct HalfPoint {
    int x = 0;
    int y = 0;

    friend bool operator==(const HalfPoint&, const HalfPoint&) = default;
    HalfPoint operator+(HalfPoint o) const { return {x + o.x, y + o.y}; }
    HalfPoint operator-(HalfPoint o) const { return {x - o.x, y - o.y}; }
};

inline bool is_primal(HalfPoint p) { return (p.x & 1) == 0 && (p.y & 1) == 0; }
inline bool is_dual(HalfPoint p) { return (p.x & 1) == 1 && (p.y & 1) == 1; }
inline bool is_midpoint(HalfPoint p) { return ((p.x ^ p.y) & 1) == 1; }

inline Complex to_complex(HalfPoint p, double mesh) {
    return {0.5 * mesh * p.x, 0.5 * mesh * p.y};
}

struct HalfPointHash {
    std::size_t operator()(HalfPoint p) const {
        std::uint64_t v = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
                          static_cast<std::uint32_t>(p.y);
        v *= 0x9e3779b97f4a7c15ull;
        v ^= v >> 29;
        return static_cast<std::size_t>(v);
    }
};

// Diagonal directions of medial edges, in counterclockwise order.
enum class Diag : std::uint8_t { NE = 0, NW = 1, SW = 2, SE = 3 };

inline HalfPoint diag_step(Diag d) {
    switch (d) {
        case Diag::NE: return {1, 1};
        case Diag::NW: return {-1, 1};
        case Diag::SW: return {-1, -1};
        case Diag::SE: return {1, -1};
    }
    return {};
}

inline Diag turn_left(Diag d) { return static_cast<Diag>((static_cast<int>(d) + 1) & 3); }
inline Diag turn_right(Diag d) { return static_cast<Diag>((static_cast<int>(d) + 3) & 3); }
inline Diag reverse(Diag d) { return static_cast<Diag>((static_cast<int>(d) + 2) & 3); }

// Unit complex direction of a diagonal: e^{i(pi/4 + k pi/2)}.
inline Complex diag_unit(Diag d) {
    constexpr double r = 0.70710678118654752440;  // 1/sqrt(2)
    switch (d) {
        case Diag::NE: return {r, r};
        case Diag::NW: return {-r, r};
        case Diag::SW: return {-r, -r};
        case Diag::SE: return {r, -r};
    }
    return {};
}

// Axis directions for primal lattice steps (unit = one mesh step = two half-units).
enum class Axis : std::uint8_t { E = 0, N = 1, W = 2, S = 3 };

inline HalfPoint axis_step(Axis a) {
    switch (a) {
        case Axis::E: return {2, 0};
        case Axis::N: return {0, 2};
        case Axis::W: return {-2, 0};
        case Axis::S: return {0, -2};
    }
    return {};
}

inline Axis axis_left(Axis a) { return static_cast<Axis>((static_cast<int>(a) + 1) & 3); }
inline Axis axis_right(Axis a) { return static_cast<Axis>((static_cast<int>(a) + 3) & 3); }

inline Complex axis_unit(Axis a) {
    switch (a) {
        case Axis::E: return {1, 0};
        case Axis::N: return {0, 1};
        case Axis::W: return {-1, 0};
        case Axis::S: return {0, -1};
    }
    return {};
}

}  // namespace perc
