#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "perc/observables.hpp"
#include "perc/rng.hpp"

namespace perc {

// Vertex of the unit square lattice. The harmonic machinery is scale
// free; where a physical length matters (derivative fields, exports) the
// mesh enters as an explicit parameter.
struct GridPoint {
    int x = 0;
    int y = 0;
    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct GridPointHash {
    std::size_t operator()(const GridPoint& p) const noexcept {
        const std::uint64_t packed =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
            static_cast<std::uint32_t>(p.y);
        return std::hash<std::uint64_t>{}(packed);
    }
};

using GridPointSet = std::unordered_set<GridPoint, GridPointHash>;

enum class WalkStop {
    hit_stop_set,
    cap_reached,
};

struct WalkPath {
    std::vector<GridPoint> vertices;  // vertices.front() is the start
    WalkStop stop_reason = WalkStop::hit_stop_set;

    std::size_t step_count() const { return vertices.empty() ? 0 : vertices.size() - 1; }
};

// Uniform nearest-neighbour walk from `start`, stopped on the first visit
// to `stop_set`; a start already in the stop set gives a zero-step walk.
// After `cap` steps the walk is cut off and flagged, not failed.
WalkPath run_walk(GridPoint start, const GridPointSet& stop_set, RngStream& rng,
                  std::int64_t cap);

// Chronological loop erasure: walking the input once, a revisit truncates
// the kept path back to the first visit. The result is self-avoiding with
// the same endpoints, and the operation is idempotent.
WalkPath loop_erase(const WalkPath& walk);

// Cumulative winding of the walk around `center`: entry k is the total
// signed angle after k steps (entry 0 is 0). Each increment is the signed
// turn of the vertex seen from the center, taken in (-pi, pi], and is 0
// when consecutive vertices are collinear with the center on the same
// side. The center must not coincide with a walk vertex.
std::vector<double> walk_winding(const WalkPath& walk, std::complex<double> center);

// A finite set of interior lattice vertices together with its boundary
// ring: the vertices outside the set adjacent to it. Dirichlet problems
// put data on the ring and solve on the interior.
class LatticeRegion {
  public:
    static LatticeRegion from_interior(std::vector<GridPoint> interior_vertices);
    // Interior = vertices strictly inside the rectangle [0,w] x [0,h].
    static LatticeRegion rectangle(int width, int height);

    const std::vector<GridPoint>& interior() const { return interior_; }
    const std::vector<GridPoint>& boundary() const { return boundary_; }
    bool is_interior(GridPoint p) const { return interior_index_.count(p) > 0; }
    bool is_boundary(GridPoint p) const { return boundary_index_.count(p) > 0; }
    // Index into interior()/boundary(), or -1 when the vertex is absent.
    int interior_index(GridPoint p) const;
    int boundary_index(GridPoint p) const;
    bool connected() const { return connected_; }

  private:
    std::vector<GridPoint> interior_;
    std::vector<GridPoint> boundary_;
    std::unordered_map<GridPoint, int, GridPointHash> interior_index_;
    std::unordered_map<GridPoint, int, GridPointHash> boundary_index_;
    bool connected_ = true;
};

// Probability that a walk from `start` first meets the boundary at each
// ring vertex, in region.boundary() order; the masses sum to 1. Exact
// mode solves one symmetric linear system; Monte Carlo mode samples
// walks.
std::vector<double> hitting_distribution(const LatticeRegion& region, GridPoint start,
                                         const ObservableMode& mode);

struct HarmonicSolution {
    LatticeRegion region;
    std::vector<double> interior_values;  // region.interior() order
    std::vector<double> boundary_values;  // region.boundary() order
    // Largest interior four-point stencil residual |mean(neighbours) - value|.
    double residual_norm = 0.0;

    double value_at(GridPoint p) const;
};

// Solves the discrete Dirichlet problem: interior values whose four-point
// stencil residual vanishes, matching the given data on the boundary
// ring. Direct sparse factorization up to 1e5 unknowns, Jacobi
// preconditioned conjugate gradients above.
HarmonicSolution solve_dirichlet(const LatticeRegion& region,
                                 std::span<const double> boundary_values,
                                 double tolerance = 1e-12);

// Discrete derivative of the strip map on interior vertices. The input
// solution must carry 0/1 boundary data (the imaginary part of the map to
// the unit-height strip); the derivative at p is reconstructed from the
// central-difference gradient via the Cauchy-Riemann equations:
//   F'(p) = d_y Im F + i d_x Im F.
// Vertices within `collar_radius` lattice steps (Euclidean) of the marked
// boundary points a and b are excluded.
struct StripDerivativeField {
    std::vector<GridPoint> vertices;
    std::vector<std::complex<double>> derivative;

    std::optional<std::complex<double>> at(GridPoint p) const;
};

StripDerivativeField strip_map_derivative(const HarmonicSolution& solution, double mesh,
                                          GridPoint a, GridPoint b,
                                          double collar_radius = 4.0);

// Rectangular CSV grid over the bounding box of region + ring, one row
// per y (increasing), cells outside the region written as nan.
void write_solution_csv(const HarmonicSolution& solution, std::ostream& out);

}  // namespace perc
