#include "perc/harmonic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace perc {

namespace {

void check(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

constexpr std::array<GridPoint, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

GridPoint step_from(GridPoint p, std::uint32_t direction) {
    const GridPoint d = kSteps[direction];
    return {p.x + d.x, p.y + d.y};
}

bool point_less(GridPoint lhs, GridPoint rhs) {
    return lhs.y != rhs.y ? lhs.y < rhs.y : lhs.x < rhs.x;
}

// Generous per-walk step budget for sampling modes: exit times from a
// region scale with the squared bounding-box diameter, so exceeding this
// many steps indicates a malformed region rather than bad luck.
std::int64_t sampling_cap(const LatticeRegion& region) {
    int min_x = std::numeric_limits<int>::max();
    int max_x = std::numeric_limits<int>::min();
    int min_y = min_x;
    int max_y = max_x;
    for (const GridPoint p : region.interior()) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const std::int64_t width = max_x - min_x + 3;
    const std::int64_t height = max_y - min_y + 3;
    return 200 * (width * width + height * height) + 10000;
}

// Solves the interior five-point Laplacian system A u = rhs, where A has
// 4 on the diagonal and -1 between adjacent interior vertices. A is
// symmetric positive definite; direct factorization is exact enough for
// the 1e-10 residual contract, and Jacobi-preconditioned conjugate
// gradients take over when factorization would not fit comfortably.
Eigen::VectorXd solve_interior_system(const LatticeRegion& region,
                                      const Eigen::VectorXd& rhs, double tolerance) {
    const std::vector<GridPoint>& interior = region.interior();
    const auto n = static_cast<Eigen::Index>(interior.size());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 5);
    for (Eigen::Index i = 0; i < n; ++i) {
        triplets.emplace_back(i, i, 4.0);
        for (std::uint32_t d = 0; d < 4; ++d) {
            const int j = region.interior_index(step_from(interior[i], d));
            if (j >= 0) triplets.emplace_back(i, j, -1.0);
        }
    }
    Eigen::SparseMatrix<double> matrix(n, n);
    matrix.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::VectorXd solution;
    if (n <= 100000) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
        solver.compute(matrix);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("the Dirichlet system could not be factorized");
        solution = solver.solve(rhs);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("the Dirichlet solve failed");
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                 Eigen::Lower | Eigen::Upper>
            solver;
        solver.setTolerance(tolerance / 16.0);
        solver.setMaxIterations(20 * n);
        solver.compute(matrix);
        solution = solver.solve(rhs);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("the Dirichlet solve did not converge");
    }
    return solution;
}

}  // namespace

WalkPath run_walk(GridPoint start, const GridPointSet& stop_set, RngStream& rng,
                  std::int64_t cap) {
    check(!stop_set.empty(), "the stop set must not be empty");
    check(cap >= 0, "the step cap must be nonnegative");
    WalkPath walk;
    walk.vertices.push_back(start);
    if (stop_set.count(start) > 0) {
        walk.stop_reason = WalkStop::hit_stop_set;
        return walk;
    }
    GridPoint position = start;
    for (std::int64_t step = 0; step < cap; ++step) {
        position = step_from(position, rng.below(4));
        walk.vertices.push_back(position);
        if (stop_set.count(position) > 0) {
            walk.stop_reason = WalkStop::hit_stop_set;
            return walk;
        }
    }
    walk.stop_reason = WalkStop::cap_reached;
    return walk;
}

WalkPath loop_erase(const WalkPath& walk) {
    WalkPath erased;
    erased.stop_reason = walk.stop_reason;
    if (walk.vertices.empty()) return erased;
    std::vector<GridPoint> path;
    std::unordered_map<GridPoint, std::size_t, GridPointHash> position;
    path.reserve(walk.vertices.size());
    for (const GridPoint v : walk.vertices) {
        const auto seen = position.find(v);
        if (seen == position.end()) {
            position.emplace(v, path.size());
            path.push_back(v);
            continue;
        }
        // Revisit: drop the loop walked since the first visit.
        for (std::size_t k = seen->second + 1; k < path.size(); ++k)
            position.erase(path[k]);
        path.resize(seen->second + 1);
    }
    erased.vertices = std::move(path);
    return erased;
}

std::vector<double> walk_winding(const WalkPath& walk, std::complex<double> center) {
    for (const GridPoint v : walk.vertices)
        check(static_cast<double>(v.x) != center.real() ||
                  static_cast<double>(v.y) != center.imag(),
              "the winding center coincides with a walk vertex");
    std::vector<double> winding;
    winding.reserve(walk.vertices.size());
    winding.push_back(0.0);
    double total = 0.0;
    for (std::size_t k = 1; k < walk.vertices.size(); ++k) {
        const std::complex<double> u(walk.vertices[k - 1].x - center.real(),
                                     walk.vertices[k - 1].y - center.imag());
        const std::complex<double> w(walk.vertices[k].x - center.real(),
                                     walk.vertices[k].y - center.imag());
        const double cross = u.real() * w.imag() - u.imag() * w.real();
        const double dot = u.real() * w.real() + u.imag() * w.imag();
        // Signed turn in (-pi, pi]: exactly 0 for collinear vertices on
        // the same side of the center, and +pi (never -pi, which a signed
        // zero in atan2 would produce) for a step across it.
        double turn = 0.0;
        if (cross != 0.0) {
            turn = std::atan2(cross, dot);
        } else if (dot < 0.0) {
            turn = std::numbers::pi;
        }
        total += turn;
        winding.push_back(total);
    }
    return winding;
}

LatticeRegion LatticeRegion::from_interior(std::vector<GridPoint> interior_vertices) {
    check(!interior_vertices.empty(), "a lattice region needs at least one interior vertex");
    LatticeRegion region;
    std::sort(interior_vertices.begin(), interior_vertices.end(), point_less);
    interior_vertices.erase(std::unique(interior_vertices.begin(), interior_vertices.end()),
                            interior_vertices.end());
    region.interior_ = std::move(interior_vertices);
    for (std::size_t i = 0; i < region.interior_.size(); ++i)
        region.interior_index_.emplace(region.interior_[i], static_cast<int>(i));

    for (const GridPoint p : region.interior_)
        for (std::uint32_t d = 0; d < 4; ++d) {
            const GridPoint q = step_from(p, d);
            if (region.interior_index_.count(q) == 0 &&
                region.boundary_index_.count(q) == 0) {
                region.boundary_index_.emplace(q, 0);
                region.boundary_.push_back(q);
            }
        }
    std::sort(region.boundary_.begin(), region.boundary_.end(), point_less);
    for (std::size_t i = 0; i < region.boundary_.size(); ++i)
        region.boundary_index_[region.boundary_[i]] = static_cast<int>(i);

    // Breadth-first sweep over interior adjacency.
    std::vector<char> visited(region.interior_.size(), 0);
    std::vector<int> queue{0};
    visited[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        const int i = queue.back();
        queue.pop_back();
        for (std::uint32_t d = 0; d < 4; ++d) {
            const int j = region.interior_index(step_from(region.interior_[i], d));
            if (j >= 0 && !visited[j]) {
                visited[j] = 1;
                ++reached;
                queue.push_back(j);
            }
        }
    }
    region.connected_ = reached == region.interior_.size();
    return region;
}

LatticeRegion LatticeRegion::rectangle(int width, int height) {
    check(width >= 2 && height >= 2, "a rectangle region needs width and height of at least 2");
    std::vector<GridPoint> interior;
    interior.reserve(static_cast<std::size_t>(width - 1) * (height - 1));
    for (int y = 1; y < height; ++y)
        for (int x = 1; x < width; ++x) interior.push_back({x, y});
    return from_interior(std::move(interior));
}

int LatticeRegion::interior_index(GridPoint p) const {
    const auto it = interior_index_.find(p);
    return it == interior_index_.end() ? -1 : it->second;
}

int LatticeRegion::boundary_index(GridPoint p) const {
    const auto it = boundary_index_.find(p);
    return it == boundary_index_.end() ? -1 : it->second;
}

std::vector<double> hitting_distribution(const LatticeRegion& region, GridPoint start,
                                         const ObservableMode& mode) {
    check(region.connected(), "the region is disconnected");
    const int start_index = region.interior_index(start);
    check(start_index >= 0, "the walk must start at an interior vertex");

    std::vector<double> masses(region.boundary().size(), 0.0);
    if (std::holds_alternative<ExactMode>(mode)) {
        // With A the interior system matrix, the harmonic measure of
        // boundary vertex b from the start solves h_b = A^{-1} r_b with
        // r_b the 0/1 adjacency of b to the interior. By symmetry of A,
        // h_b(start) = <A^{-1} e_start, r_b>, so a single solve against
        // e_start yields every boundary mass at once.
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(
            static_cast<Eigen::Index>(region.interior().size()));
        rhs[start_index] = 1.0;
        const Eigen::VectorXd weights = solve_interior_system(region, rhs, 1e-12);
        for (std::size_t b = 0; b < region.boundary().size(); ++b) {
            double mass = 0.0;
            for (std::uint32_t d = 0; d < 4; ++d) {
                const int i = region.interior_index(step_from(region.boundary()[b], d));
                if (i >= 0) mass += weights[i];
            }
            masses[b] = mass;
        }
        return masses;
    }

    const auto& mc = std::get<MonteCarloMode>(mode);
    check(mc.samples > 0, "Monte Carlo sample count must be positive");
    RngStream rng(mc.seed, mc.stream);
    const std::int64_t cap = sampling_cap(region);
    for (long long sample = 0; sample < mc.samples; ++sample) {
        GridPoint position = start;
        std::int64_t steps = 0;
        for (;;) {
            position = step_from(position, rng.below(4));
            const int b = region.boundary_index(position);
            if (b >= 0) {
                masses[static_cast<std::size_t>(b)] += 1.0;
                break;
            }
            if (++steps > cap)
                throw std::runtime_error(
                    "a sampling walk failed to reach the boundary within the step cap");
        }
    }
    for (double& m : masses) m /= static_cast<double>(mc.samples);
    return masses;
}

double HarmonicSolution::value_at(GridPoint p) const {
    const int i = region.interior_index(p);
    if (i >= 0) return interior_values[static_cast<std::size_t>(i)];
    const int b = region.boundary_index(p);
    if (b >= 0) return boundary_values[static_cast<std::size_t>(b)];
    throw std::invalid_argument("the vertex is outside the region and its boundary ring");
}

HarmonicSolution solve_dirichlet(const LatticeRegion& region,
                                 std::span<const double> boundary_values,
                                 double tolerance) {
    check(region.connected(), "the region is disconnected");
    check(boundary_values.size() == region.boundary().size(),
          "boundary data must assign one value to every boundary vertex");
    check(tolerance > 0.0, "the solver tolerance must be positive");

    const std::vector<GridPoint>& interior = region.interior();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t i = 0; i < interior.size(); ++i)
        for (std::uint32_t d = 0; d < 4; ++d) {
            const int b = region.boundary_index(step_from(interior[i], d));
            if (b >= 0) rhs[static_cast<Eigen::Index>(i)] += boundary_values[b];
        }
    const Eigen::VectorXd values = solve_interior_system(region, rhs, tolerance);

    HarmonicSolution solution;
    solution.region = region;
    solution.interior_values.assign(values.data(), values.data() + values.size());
    solution.boundary_values.assign(boundary_values.begin(), boundary_values.end());

    double residual = 0.0;
    for (std::size_t i = 0; i < interior.size(); ++i) {
        double sum = 0.0;
        for (std::uint32_t d = 0; d < 4; ++d)
            sum += solution.value_at(step_from(interior[i], d));
        residual = std::max(residual, std::abs(sum / 4.0 - solution.interior_values[i]));
    }
    solution.residual_norm = residual;
    if (residual > std::max(tolerance, 1e-10))
        throw std::runtime_error("the Dirichlet solve missed the residual contract");
    return solution;
}

std::optional<std::complex<double>> StripDerivativeField::at(GridPoint p) const {
    for (std::size_t i = 0; i < vertices.size(); ++i)
        if (vertices[i] == p) return derivative[i];
    return std::nullopt;
}

StripDerivativeField strip_map_derivative(const HarmonicSolution& solution, double mesh,
                                          GridPoint a, GridPoint b,
                                          double collar_radius) {
    check(mesh > 0.0, "the mesh must be positive");
    check(collar_radius >= 0.0, "the collar radius must be nonnegative");
    const LatticeRegion& region = solution.region;
    check(region.is_boundary(a) && region.is_boundary(b),
          "the marked points a and b must be boundary vertices");
    bool saw_zero = false;
    bool saw_one = false;
    for (const double g : solution.boundary_values) {
        if (std::abs(g) <= 1e-12) {
            saw_zero = true;
        } else if (std::abs(g - 1.0) <= 1e-12) {
            saw_one = true;
        } else {
            check(false, "the strip data must be 0 on one arc and 1 on the other");
        }
    }
    check(saw_zero && saw_one, "the strip data must be 0 on one arc and 1 on the other");

    const auto inside_collar = [&](GridPoint p, GridPoint mark) {
        return std::hypot(p.x - mark.x, p.y - mark.y) < collar_radius;
    };
    StripDerivativeField field;
    for (const GridPoint p : region.interior()) {
        if (inside_collar(p, a) || inside_collar(p, b)) continue;
        const double dx = (solution.value_at({p.x + 1, p.y}) -
                           solution.value_at({p.x - 1, p.y})) /
                          (2.0 * mesh);
        const double dy = (solution.value_at({p.x, p.y + 1}) -
                           solution.value_at({p.x, p.y - 1})) /
                          (2.0 * mesh);
        field.vertices.push_back(p);
        field.derivative.emplace_back(dy, dx);
    }
    check(!field.vertices.empty(),
          "the collar around the marked points excludes every interior vertex");
    return field;
}

void write_solution_csv(const HarmonicSolution& solution, std::ostream& out) {
    int min_x = std::numeric_limits<int>::max();
    int max_x = std::numeric_limits<int>::min();
    int min_y = min_x;
    int max_y = max_x;
    const auto stretch = [&](const std::vector<GridPoint>& points) {
        for (const GridPoint p : points) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
    };
    stretch(solution.region.interior());
    stretch(solution.region.boundary());

    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    for (int y = min_y; y <= max_y; ++y) {
        for (int x = min_x; x <= max_x; ++x) {
            if (x > min_x) out << ',';
            const GridPoint p{x, y};
            if (solution.region.is_interior(p) || solution.region.is_boundary(p))
                out << solution.value_at(p);
            else
                out << "nan";
        }
        out << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace perc
