#include "perc/arms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace perc {

namespace {

void check(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

void logic_check(bool ok, const char* message) {
    if (!ok) throw std::logic_error(message);
}

// A radius given in continuum units must be a whole number of mesh steps.
int radius_steps(double radius, double mesh, const char* message) {
    const double steps = radius / mesh;
    const int k = static_cast<int>(std::lround(steps));
    check(k >= 1 && std::abs(steps - k) <= 1e-9 * std::max(1.0, std::abs(steps)), message);
    return k;
}

HalfPoint rotate_ccw(HalfPoint p, int quarter_turns) {
    switch (quarter_turns & 3) {
        case 0: return p;
        case 1: return {-p.y, p.x};
        case 2: return {-p.x, -p.y};
        default: return {p.y, -p.x};
    }
}

int find_root(std::vector<int>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

void unite(std::vector<int>& parent, int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[b] = a;
}

// One inner-rim cell of a crossing cluster, in counterclockwise order.
struct Port {
    int cluster = 0;
    char type = '1';
};

constexpr int kMaxArms = 6;
struct MatchState;

// Restriction of the lattice to an annulus around a center vertex, with the
// cells and adjacencies needed to classify arm crossings. Built once per
// (center, radii, geometry) and reused across samples.
class AnnulusGraph {
  public:
    AnnulusGraph(const DobrushinDomain& domain, HalfPoint center, int inner_steps,
                 int outer_steps, ArmGeometry geometry, bool euclidean);

    bool detect(const Configuration& config, std::string_view sequence);

  private:
    struct Link {
        int edge = kAbsent;
        int a = 0;
        int b = 0;
    };
    struct PortCand {
        double angle = 0.0;
        int dense = 0;
        char type = '1';
    };

    bool in_sector(int cx, int cy, bool vertex_cell) const {
        switch (geometry_) {
            case ArmGeometry::full_plane: return true;
            case ArmGeometry::half_plane: return cy >= (vertex_cell ? 0 : 1);
            default: return cx >= (vertex_cell ? 0 : 1) && cy >= (vertex_cell ? 0 : 1);
        }
    }
    // Distance classification in half-units relative to the center.
    bool within(int cx, int cy, int bound) const {
        if (!euclidean_) return std::max(std::abs(cx), std::abs(cy)) <= bound;
        return static_cast<long long>(cx) * cx + static_cast<long long>(cy) * cy <=
               static_cast<long long>(bound) * bound;
    }
    bool in_annulus(int cx, int cy) const {
        return within(cx, cy, outer_) && !strictly_inside(cx, cy);
    }
    bool strictly_inside(int cx, int cy) const {
        if (!euclidean_) return std::max(std::abs(cx), std::abs(cy)) < inner_;
        return static_cast<long long>(cx) * cx + static_cast<long long>(cy) * cy <
               static_cast<long long>(inner_) * inner_;
    }
    // Rim tests. On square annuli the rims are exact distance rings (faces
    // sit half a step inside them); on round ones a rim cell is any annulus
    // cell with a lattice neighbor beyond the circle.
    bool touches_inner(int cx, int cy) const {
        const bool face_cell = (cx & 1) != 0;
        if (!euclidean_)
            return std::max(std::abs(cx), std::abs(cy)) == inner_ + (face_cell ? 1 : 0);
        for (const auto& d : kAxisSteps)
            if (strictly_inside(cx + d[0], cy + d[1])) return true;
        return false;
    }
    bool touches_outer(int cx, int cy) const {
        const bool face_cell = (cx & 1) != 0;
        if (!euclidean_)
            return std::max(std::abs(cx), std::abs(cy)) == outer_ - (face_cell ? 1 : 0);
        for (const auto& d : kAxisSteps)
            if (!within(cx + d[0], cy + d[1], outer_)) return true;
        return false;
    }

    bool match_linear(std::string_view sequence) const;
    bool match_cyclic(std::string_view sequence) const;
    template <typename PortAt>
    static bool match_ports(std::size_t begin_index, std::size_t port_total,
                            std::string_view sequence, const MatchState& seed,
                            const PortAt& port_at);

    static constexpr int kAxisSteps[4][2] = {{2, 0}, {-2, 0}, {0, 2}, {0, -2}};

    const DobrushinDomain* domain_;
    HalfPoint center_;
    int inner_ = 0;   // half-units
    int outer_ = 0;   // half-units
    ArmGeometry geometry_ = ArmGeometry::full_plane;
    bool euclidean_ = false;
    int rotation_ = 0;  // quarter turns mapping lattice offsets to canonical ones

    int vertex_count_ = 0;
    int face_count_ = 0;
    std::vector<Link> vertex_links_;
    std::vector<Link> face_links_;
    std::vector<std::uint8_t> vertex_inner_, vertex_outer_;
    std::vector<std::uint8_t> face_inner_, face_outer_;
    std::vector<PortCand> candidates_;  // sorted counterclockwise

    // Per-sample scratch.
    std::vector<int> vertex_parent_, face_parent_;
    std::vector<std::uint8_t> root_in_, root_out_;
    std::vector<Port> ports_;
};

AnnulusGraph::AnnulusGraph(const DobrushinDomain& domain, HalfPoint center, int inner_steps,
                           int outer_steps, ArmGeometry geometry, bool euclidean)
    : domain_(&domain),
      center_(center),
      inner_(2 * inner_steps),
      outer_(2 * outer_steps),
      geometry_(geometry),
      euclidean_(euclidean) {
    check(is_primal(center), "arm events are centered on a primal vertex");
    check(domain.vertex_at(center) != kAbsent, "the center vertex is not in the lattice");

    // Orient the sector from the center's missing neighbors: a half-plane
    // center sits on a straight boundary (one missing direction), a
    // quarter-plane center on a convex corner (two missing, perpendicular).
    bool present[4];
    int missing = 0;
    for (int i = 0; i < 4; ++i) {
        const HalfPoint n{center.x + kAxisSteps[i][0], center.y + kAxisSteps[i][1]};
        present[i] = domain.vertex_at(n) != kAbsent;
        if (!present[i]) ++missing;
    }
    if (geometry == ArmGeometry::full_plane) {
        check(missing == 0, "the annulus escapes the lattice");
        rotation_ = 0;
    } else if (geometry == ArmGeometry::half_plane) {
        check(missing == 1, "half-plane arm events need the center on a straight boundary");
        int missing_dir = 0;
        for (int i = 0; i < 4; ++i)
            if (!present[i]) missing_dir = i;
        // Rotate so the missing direction points down (canonical sector up).
        for (int k = 0; k < 4; ++k) {
            const HalfPoint image =
                rotate_ccw({kAxisSteps[missing_dir][0], kAxisSteps[missing_dir][1]}, k);
            if (image.x == 0 && image.y == -2) rotation_ = k;
        }
    } else {
        check(missing == 2, "quarter-plane arm events need the center on a convex corner");
        int d1 = -1, d2 = -1;
        for (int i = 0; i < 4; ++i)
            if (present[i]) (d1 < 0 ? d1 : d2) = i;
        const HalfPoint p1{kAxisSteps[d1][0], kAxisSteps[d1][1]};
        const HalfPoint p2{kAxisSteps[d2][0], kAxisSteps[d2][1]};
        check(p1.x * p2.x + p1.y * p2.y == 0,
              "quarter-plane arm events need the center on a convex corner");
        rotation_ = -1;
        for (int k = 0; k < 4; ++k) {
            const HalfPoint i1 = rotate_ccw(p1, k);
            const HalfPoint i2 = rotate_ccw(p2, k);
            const bool east = (i1.x == 2 && i1.y == 0) || (i2.x == 2 && i2.y == 0);
            const bool north = (i1.x == 0 && i1.y == 2) || (i2.x == 0 && i2.y == 2);
            if (east && north) rotation_ = k;
        }
        logic_check(rotation_ >= 0, "corner orientation search failed");
    }

    const int unrot = 4 - rotation_;

    // Presence sweep: every vertex and face the annulus can use must exist,
    // and for half/quarter sectors the first row/column beyond the boundary
    // must not (the boundary has to run straight past the whole annulus).
    const int lo_x = geometry == ArmGeometry::quarter_plane ? 0 : -outer_;
    const int lo_y = geometry == ArmGeometry::full_plane ? -outer_ : 0;
    for (int cy = lo_y; cy <= outer_; cy += 2)
        for (int cx = lo_x; cx <= outer_; cx += 2) {
            if (!within(cx, cy, outer_)) continue;
            const HalfPoint p = center + rotate_ccw({cx, cy}, unrot);
            check(domain.vertex_at(p) != kAbsent, "the annulus escapes the lattice");
        }
    if (geometry != ArmGeometry::full_plane) {
        for (int cx = lo_x; cx <= outer_; cx += 2) {
            if (!within(cx, -2, outer_)) continue;
            const HalfPoint p = center + rotate_ccw({cx, -2}, unrot);
            check(domain.vertex_at(p) == kAbsent,
                  "the boundary does not run straight past the annulus");
        }
    }
    if (geometry == ArmGeometry::quarter_plane) {
        for (int cy = 0; cy <= outer_; cy += 2) {
            if (!within(-2, cy, outer_)) continue;
            const HalfPoint p = center + rotate_ccw({-2, cy}, unrot);
            check(domain.vertex_at(p) == kAbsent,
                  "the boundary does not run straight past the annulus");
        }
    }

    // Dense ids over the annulus cells, row-major in canonical coordinates.
    const int span = 2 * outer_ + 1;  // canonical offsets in [-outer_, outer_]
    std::vector<int> vertex_dense(static_cast<std::size_t>(span) * span, kAbsent);
    std::vector<int> face_dense(static_cast<std::size_t>(span) * span, kAbsent);
    const auto cell_index = [&](int cx, int cy) {
        return static_cast<std::size_t>(cy + outer_) * span + (cx + outer_);
    };

    std::vector<HalfPoint> vertex_offsets, face_offsets;
    for (int cy = -outer_; cy <= outer_; ++cy)
        for (int cx = -outer_; cx <= outer_; ++cx) {
            const bool vertex_cell = ((cx | cy) & 1) == 0;
            if (((cx ^ cy) & 1) != 0) continue;  // edge midpoints
            if (!in_sector(cx, cy, vertex_cell) || !in_annulus(cx, cy)) continue;
            const HalfPoint p = center + rotate_ccw({cx, cy}, unrot);
            if (vertex_cell) {
                logic_check(domain.vertex_at(p) != kAbsent, "annulus vertex vanished");
                vertex_dense[cell_index(cx, cy)] = vertex_count_++;
                vertex_offsets.push_back({cx, cy});
                vertex_inner_.push_back(touches_inner(cx, cy) ? 1 : 0);
                vertex_outer_.push_back(touches_outer(cx, cy) ? 1 : 0);
            } else {
                check(domain.face_at(p) != kAbsent, "the annulus escapes the lattice");
                face_dense[cell_index(cx, cy)] = face_count_++;
                face_offsets.push_back({cx, cy});
                face_inner_.push_back(touches_inner(cx, cy) ? 1 : 0);
                face_outer_.push_back(touches_outer(cx, cy) ? 1 : 0);
            }
        }

    // Adjacencies entirely inside the annulus: open edges join vertices,
    // closed edges join the faces on their two sides.
    for (int dense = 0; dense < vertex_count_; ++dense) {
        const HalfPoint o = vertex_offsets[static_cast<std::size_t>(dense)];
        for (const auto& step : {HalfPoint{2, 0}, HalfPoint{0, 2}}) {
            const int nx = o.x + step.x, ny = o.y + step.y;
            if (nx > outer_ || ny > outer_) continue;
            const int other = vertex_dense[cell_index(nx, ny)];
            if (other == kAbsent) continue;
            const HalfPoint mid =
                center + rotate_ccw({o.x + step.x / 2, o.y + step.y / 2}, unrot);
            const int edge = domain.edge_at(mid);
            logic_check(edge != kAbsent, "annulus edge vanished");
            vertex_links_.push_back({edge, dense, other});
        }
    }
    for (int dense = 0; dense < face_count_; ++dense) {
        const HalfPoint o = face_offsets[static_cast<std::size_t>(dense)];
        for (const auto& step : {HalfPoint{2, 0}, HalfPoint{0, 2}}) {
            const int nx = o.x + step.x, ny = o.y + step.y;
            if (nx > outer_ || ny > outer_) continue;
            const int other = face_dense[cell_index(nx, ny)];
            if (other == kAbsent) continue;
            const HalfPoint mid =
                center + rotate_ccw({o.x + step.x / 2, o.y + step.y / 2}, unrot);
            const int edge = domain.edge_at(mid);
            logic_check(edge != kAbsent, "annulus dual edge vanished");
            face_links_.push_back({edge, dense, other});
        }
    }

    // Inner-rim cells in counterclockwise order; at equal angles (the ring
    // diagonals) the vertex precedes the face sitting radially outside it.
    for (int dense = 0; dense < vertex_count_; ++dense)
        if (vertex_inner_[static_cast<std::size_t>(dense)]) {
            const HalfPoint o = vertex_offsets[static_cast<std::size_t>(dense)];
            candidates_.push_back({std::atan2(double(o.y), double(o.x)), dense, '1'});
        }
    for (int dense = 0; dense < face_count_; ++dense)
        if (face_inner_[static_cast<std::size_t>(dense)]) {
            const HalfPoint o = face_offsets[static_cast<std::size_t>(dense)];
            candidates_.push_back({std::atan2(double(o.y), double(o.x)), dense, '0'});
        }
    std::sort(candidates_.begin(), candidates_.end(),
              [](const PortCand& a, const PortCand& b) {
                  if (a.angle != b.angle) return a.angle < b.angle;
                  if (a.type != b.type) return a.type > b.type;
                  return a.dense < b.dense;
              });

    vertex_parent_.resize(static_cast<std::size_t>(vertex_count_));
    face_parent_.resize(static_cast<std::size_t>(face_count_));
}

bool AnnulusGraph::detect(const Configuration& config, std::string_view sequence) {
    logic_check(config.domain == domain_, "configuration belongs to a different domain");

    for (int i = 0; i < vertex_count_; ++i) vertex_parent_[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < face_count_; ++i) face_parent_[static_cast<std::size_t>(i)] = i;
    for (const Link& link : vertex_links_)
        if (config.is_open(link.edge)) unite(vertex_parent_, link.a, link.b);
    for (const Link& link : face_links_)
        if (!config.is_open(link.edge)) unite(face_parent_, link.a, link.b);

    // A cluster crosses the annulus when it holds both an inner-rim and an
    // outer-rim cell; only crossing clusters can supply arms.
    root_in_.assign(static_cast<std::size_t>(vertex_count_ + face_count_), 0);
    root_out_.assign(static_cast<std::size_t>(vertex_count_ + face_count_), 0);
    for (int i = 0; i < vertex_count_; ++i) {
        if (!vertex_inner_[static_cast<std::size_t>(i)] &&
            !vertex_outer_[static_cast<std::size_t>(i)])
            continue;
        const int root = find_root(vertex_parent_, i);
        if (vertex_inner_[static_cast<std::size_t>(i)]) root_in_[static_cast<std::size_t>(root)] = 1;
        if (vertex_outer_[static_cast<std::size_t>(i)])
            root_out_[static_cast<std::size_t>(root)] = 1;
    }
    for (int i = 0; i < face_count_; ++i) {
        if (!face_inner_[static_cast<std::size_t>(i)] && !face_outer_[static_cast<std::size_t>(i)])
            continue;
        const int root = vertex_count_ + find_root(face_parent_, i);
        if (face_inner_[static_cast<std::size_t>(i)]) root_in_[static_cast<std::size_t>(root)] = 1;
        if (face_outer_[static_cast<std::size_t>(i)]) root_out_[static_cast<std::size_t>(root)] = 1;
    }

    ports_.clear();
    for (const PortCand& cand : candidates_) {
        const int root = cand.type == '1'
                             ? find_root(vertex_parent_, cand.dense)
                             : vertex_count_ + find_root(face_parent_, cand.dense);
        if (root_in_[static_cast<std::size_t>(root)] && root_out_[static_cast<std::size_t>(root)])
            ports_.push_back({root, cand.type});
    }

    return geometry_ == ArmGeometry::full_plane ? match_cyclic(sequence)
                                                : match_linear(sequence);
}

// A partial match of a prefix of the arm sequence: the index of the last
// port used plus the cluster labels already consumed by each arm type.
// Arms of the same type must take pairwise distinct clusters, not merely
// distinct from their sequence neighbors: along the straight boundary of a
// clipped sector a dual path can run one face above a boundary-hugging open
// path (the two never share an edge), so a single dual cluster can reach
// around an open crossing and feed arms on both of its sides. Adjacent-only
// distinctness would let such a configuration collapse a three-arm event
// into a two-arm one; pairwise distinctness keeps every arm separately paid
// for. In an unclipped annulus the extra constraint never binds, because a
// crossing cluster cannot reach around an opposite-type crossing at all.
struct MatchState {
    int position = -1;
    std::array<std::array<int, kMaxArms>, 2> used{};  // sorted cluster ids per type
    std::array<int, 2> used_count{};

    bool has(int type, int cluster) const {
        for (int i = 0; i < used_count[static_cast<std::size_t>(type)]; ++i)
            if (used[static_cast<std::size_t>(type)][static_cast<std::size_t>(i)] == cluster)
                return true;
        return false;
    }
    void add(int type, int cluster) {
        auto& list = used[static_cast<std::size_t>(type)];
        int& count = used_count[static_cast<std::size_t>(type)];
        int at = count++;
        while (at > 0 && list[static_cast<std::size_t>(at - 1)] > cluster) {
            list[static_cast<std::size_t>(at)] = list[static_cast<std::size_t>(at - 1)];
            --at;
        }
        list[static_cast<std::size_t>(at)] = cluster;
    }
    bool same_clusters(const MatchState& other) const {
        return used == other.used && used_count == other.used_count;
    }
};

// Level sweep over the counterclockwise port list. Each level places the
// next arm strictly after the previous one; states with equal cluster
// consumption dedupe to the earliest last-port position. At any level the
// live states all consume the same number of clusters per type, so the
// state count stays tiny (it is bounded by the ways crossing clusters can
// interleave, and an annulus rarely hosts more than a handful).
template <typename PortAt>
bool AnnulusGraph::match_ports(std::size_t begin_index, std::size_t port_total,
                               std::string_view sequence, const MatchState& seed,
                               const PortAt& port_at) {
    std::vector<MatchState> states{seed};
    std::vector<MatchState> next;
    for (std::size_t j = 0; j < sequence.size(); ++j) {
        const char type_char = sequence[j];
        const int type = type_char - '0';
        next.clear();
        for (const MatchState& state : states) {
            for (std::size_t i = begin_index; i < port_total; ++i) {
                if (static_cast<int>(i) <= state.position) continue;
                const Port& port = port_at(i);
                if (port.type != type_char) continue;
                if (state.has(type, port.cluster)) continue;
                MatchState grown = state;
                grown.position = static_cast<int>(i);
                grown.add(type, port.cluster);
                bool duplicate = false;
                for (MatchState& seen : next) {
                    if (!seen.same_clusters(grown)) continue;
                    seen.position = std::min(seen.position, grown.position);
                    duplicate = true;
                    break;
                }
                if (!duplicate) next.push_back(grown);
            }
        }
        if (next.empty()) return false;
        states.swap(next);
    }
    return true;
}

bool AnnulusGraph::match_linear(std::string_view sequence) const {
    const auto port_at = [this](std::size_t i) -> const Port& { return ports_[i]; };
    return match_ports(0, ports_.size(), sequence, MatchState{}, port_at);
}

bool AnnulusGraph::match_cyclic(std::string_view sequence) const {
    const std::size_t m = ports_.size();
    const std::size_t k = sequence.size();
    if (k == 1) {
        for (const Port& port : ports_)
            if (port.type == sequence[0]) return true;
        return false;
    }
    if (m < k) return false;
    // Fix each candidate starting port in turn and match the rest linearly
    // around the rotated ring; pairwise distinctness already covers the
    // wrap-around pair, so no extra cyclic constraint is needed.
    for (std::size_t s = 0; s < m; ++s) {
        if (ports_[s].type != sequence[0]) continue;
        MatchState seed;
        seed.position = 0;
        seed.add(sequence[0] - '0', ports_[s].cluster);
        const auto port_at = [this, s, m](std::size_t i) -> const Port& {
            return ports_[(s + i) % m];
        };
        if (match_ports(1, m, sequence.substr(1), seed, port_at)) return true;
    }
    return false;
}

}  // namespace

const char* geometry_name(ArmGeometry geometry) {
    switch (geometry) {
        case ArmGeometry::full_plane: return "full_plane";
        case ArmGeometry::half_plane: return "half_plane";
        default: return "quarter_plane";
    }
}

void validate_signature(const ArmSignature& signature) {
    check(!signature.sequence.empty(), "an arm signature needs at least one arm");
    check(signature.sequence.size() <= static_cast<std::size_t>(kMaxArms),
          "arm signatures are limited to six arms");
    for (const char c : signature.sequence)
        check(c == '0' || c == '1', "arm types are '0' (dual-open) or '1' (open)");
}

PowerLawFit fit_power_law(std::span<const double> radii,
                          std::span<const double> probabilities) {
    check(radii.size() == probabilities.size(), "radius and probability counts differ");
    check(radii.size() >= 3, "a power-law fit needs at least three radii");
    const std::size_t n = radii.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        check(radii[i] > 0.0, "radii must be positive");
        check(probabilities[i] > 0.0 && probabilities[i] <= 1.0,
              "probabilities must lie in (0, 1]");
        x[i] = std::log(radii[i]);
        y[i] = std::log(probabilities[i]);
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mean_x) * (x[i] - mean_x);
        sxy += (x[i] - mean_x) * (y[i] - mean_y);
    }
    check(sxx > 0.0, "radii must not all coincide");
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double resid = y[i] - mean_y - slope * (x[i] - mean_x);
        rss += resid * resid;
    }
    PowerLawFit fit;
    fit.exponent = -slope;
    fit.std_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    return fit;
}

bool detect_arms(const Configuration& config, HalfPoint center, double inner_radius,
                 double outer_radius, const ArmSignature& signature, bool euclidean_metric) {
    validate_signature(signature);
    check(config.domain != nullptr, "arm detection needs a configuration with a domain");
    const DobrushinDomain& domain = *config.domain;
    const int inner =
        radius_steps(inner_radius, domain.mesh, "the inner radius must be a whole number of mesh steps, at least one");
    const int outer =
        radius_steps(outer_radius, domain.mesh, "the outer radius must be a whole number of mesh steps");
    check(inner < outer, "the inner radius must be smaller than the outer radius");
    AnnulusGraph graph(domain, center, inner, outer, signature.geometry, euclidean_metric);
    return graph.detect(config, signature.sequence);
}

namespace {

std::optional<double> reference_exponent_for(const ArmSignature& signature) {
    if (signature.geometry == ArmGeometry::half_plane) {
        if (signature.sequence == "1" || signature.sequence == "0") return 1.0 / 3.0;
        if (signature.sequence == "01" || signature.sequence == "10") return 1.0;
        if (signature.sequence == "010" || signature.sequence == "101") return 2.0;
    }
    if (signature.geometry == ArmGeometry::full_plane) {
        if (signature.sequence == "01011") return 2.0;
    }
    return std::nullopt;
}

}  // namespace

ArmEstimate estimate_exponent(const ArmSignature& signature, std::span<const double> radii,
                              int samples_per_radius, RngStream& rng, double inner_radius) {
    validate_signature(signature);
    check(radii.size() >= 3, "an exponent fit needs at least three outer radii");
    check(samples_per_radius >= 1000, "use at least 1000 samples per radius");
    const int inner = radius_steps(inner_radius, 1.0, "the inner radius must be a whole number of lattice steps");
    std::vector<int> outer_steps;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const int k = radius_steps(radii[i], 1.0, "outer radii must be whole numbers of lattice steps");
        check(k > inner, "every outer radius must exceed the inner radius");
        check(i == 0 || radii[i] > radii[i - 1], "outer radii must increase strictly");
        outer_steps.push_back(k);
    }

    ArmEstimate estimate;
    estimate.signature = signature;
    estimate.inner_radius = inner;
    estimate.radii.assign(radii.begin(), radii.end());
    estimate.reference_exponent = reference_exponent_for(signature);

    std::vector<double> probabilities;
    for (const int outer : outer_steps) {
        DobrushinDomain domain;
        HalfPoint center{0, 0};
        switch (signature.geometry) {
            case ArmGeometry::full_plane:
                domain = build_free_rectangle(2 * outer, 2 * outer, 1.0);
                center = {2 * outer, 2 * outer};
                break;
            case ArmGeometry::half_plane:
                domain = build_free_rectangle(2 * outer, outer, 1.0);
                center = {2 * outer, 0};
                break;
            default:
                domain = build_free_rectangle(outer, outer, 1.0);
                center = {0, 0};
                break;
        }
        AnnulusGraph graph(domain, center, inner, outer, signature.geometry, false);
        Configuration config(domain);
        std::int64_t hits = 0;
        for (int s = 0; s < samples_per_radius; ++s) {
            sample_configuration(config, rng);
            if (graph.detect(config, signature.sequence)) ++hits;
        }
        if (hits == 0)
            throw std::runtime_error("no arm events observed at outer radius " +
                                     std::to_string(outer) + "; increase the sample budget");
        estimate.counts.push_back(hits);
        estimate.totals.push_back(samples_per_radius);
        probabilities.push_back(static_cast<double>(hits) /
                                static_cast<double>(samples_per_radius));
    }

    const PowerLawFit fit = fit_power_law(estimate.radii, probabilities);
    estimate.exponent = fit.exponent;
    estimate.std_error = fit.std_error;
    return estimate;
}

namespace {

// The half-plane strip below a straight boundary stretch, with the anchor
// vertex at the middle of its top edge. The dual cluster through the edge
// below the anchor is grown through closed edges, and the event fires when
// it reaches a face at sup-distance at least radius - mesh/2 from the
// anchor: at the smallest radius that is exactly "the anchor edge is
// closed".
class HalfPlaneDualBall {
  public:
    explicit HalfPlaneDualBall(int steps, double mesh)
        : steps_(steps),
          domain_(build_free_rectangle(2 * steps + 2, steps + 1, mesh)),
          anchor_{2 * steps + 2, 2 * (steps + 1)} {
        seed_edge_ = domain_.edge_at({anchor_.x, anchor_.y - 1});
        logic_check(seed_edge_ != kAbsent, "anchor edge missing from the strip");
        const auto seeds = domain_.edge_faces[static_cast<std::size_t>(seed_edge_)];
        logic_check(seeds[0] != kAbsent && seeds[1] != kAbsent,
                    "anchor edge must sit between two faces");
        seed_faces_ = {seeds[0], seeds[1]};

        const int faces = static_cast<int>(domain_.dual_faces.size());
        adjacency_start_.assign(static_cast<std::size_t>(faces) + 1, 0);
        std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(faces));
        for (int e = 0; e < domain_.edge_count(); ++e) {
            const auto sides = domain_.edge_faces[static_cast<std::size_t>(e)];
            if (sides[0] == kAbsent || sides[1] == kAbsent) continue;
            adj[static_cast<std::size_t>(sides[0])].push_back({e, sides[1]});
            adj[static_cast<std::size_t>(sides[1])].push_back({e, sides[0]});
        }
        for (int f = 0; f < faces; ++f)
            adjacency_start_[static_cast<std::size_t>(f) + 1] =
                adjacency_start_[static_cast<std::size_t>(f)] +
                static_cast<int>(adj[static_cast<std::size_t>(f)].size());
        adjacency_.resize(static_cast<std::size_t>(adjacency_start_.back()));
        for (int f = 0; f < faces; ++f)
            std::copy(adj[static_cast<std::size_t>(f)].begin(),
                      adj[static_cast<std::size_t>(f)].end(),
                      adjacency_.begin() + adjacency_start_[static_cast<std::size_t>(f)]);

        far_face_.assign(static_cast<std::size_t>(faces), 0);
        for (int f = 0; f < faces; ++f) {
            const HalfPoint p = domain_.dual_faces[static_cast<std::size_t>(f)];
            const int d = std::max(std::abs(p.x - anchor_.x), std::abs(p.y - anchor_.y));
            far_face_[static_cast<std::size_t>(f)] = d >= 2 * steps_ - 1 ? 1 : 0;
        }
        visited_.assign(static_cast<std::size_t>(faces), 0);
    }

    const DobrushinDomain& domain() const { return domain_; }
    int seed_edge() const { return seed_edge_; }

    // Edges the event can depend on: duals between two faces strictly closer
    // than radius + mesh/2 to the anchor (a crossing truncated at its first
    // far face never leaves them).
    std::vector<int> dependency_edges() const {
        std::vector<int> edges;
        for (int e = 0; e < domain_.edge_count(); ++e) {
            const auto sides = domain_.edge_faces[static_cast<std::size_t>(e)];
            if (sides[0] == kAbsent || sides[1] == kAbsent) continue;
            bool near = true;
            for (const int f : sides) {
                const HalfPoint p = domain_.dual_faces[static_cast<std::size_t>(f)];
                if (std::max(std::abs(p.x - anchor_.x), std::abs(p.y - anchor_.y)) >=
                    2 * steps_ + 1)
                    near = false;
            }
            if (near) edges.push_back(e);
        }
        return edges;
    }

    bool reaches(const Configuration& config) {
        if (config.is_open(seed_edge_)) return false;
        ++stamp_;
        queue_.clear();
        for (const int f : seed_faces_) {
            if (far_face_[static_cast<std::size_t>(f)]) return true;
            visited_[static_cast<std::size_t>(f)] = stamp_;
            queue_.push_back(f);
        }
        for (std::size_t head = 0; head < queue_.size(); ++head) {
            const int f = queue_[head];
            for (int i = adjacency_start_[static_cast<std::size_t>(f)];
                 i < adjacency_start_[static_cast<std::size_t>(f) + 1]; ++i) {
                const auto [edge, to] = adjacency_[static_cast<std::size_t>(i)];
                if (config.is_open(edge)) continue;
                if (visited_[static_cast<std::size_t>(to)] == stamp_) continue;
                if (far_face_[static_cast<std::size_t>(to)]) return true;
                visited_[static_cast<std::size_t>(to)] = stamp_;
                queue_.push_back(to);
            }
        }
        return false;
    }

  private:
    int steps_;
    DobrushinDomain domain_;
    HalfPoint anchor_;
    int seed_edge_ = kAbsent;
    std::array<int, 2> seed_faces_{kAbsent, kAbsent};
    std::vector<int> adjacency_start_;
    std::vector<std::pair<int, int>> adjacency_;
    std::vector<std::uint8_t> far_face_;
    std::vector<std::uint32_t> visited_;
    std::uint32_t stamp_ = 0;
    std::vector<int> queue_;
};

}  // namespace

ProbabilityEstimate boundary_one_arm(const DobrushinDomain& domain, HalfPoint v,
                                     double radius, const ObservableMode& mode) {
    check(is_primal(v), "the anchor must be a primal vertex");
    check(domain.vertex_at(v) != kAbsent, "the anchor vertex is not in the lattice");
    const int steps = radius_steps(radius, domain.mesh,
                                   "the radius must be a whole number of mesh steps, at least one");

    // The anchor must sit on a boundary segment with `radius` of straight
    // boundary on both sides.
    const std::size_t corners = domain.polygon.size();
    check(corners >= 4, "the domain boundary has no straight stretches");
    bool on_boundary = false;
    int clearance = -1;  // half-units to the nearest corner along the segment
    for (std::size_t i = 0; i < corners; ++i) {
        const HalfPoint a = domain.polygon[i];
        const HalfPoint b = domain.polygon[(i + 1) % corners];
        if (a.x == b.x && v.x == a.x) {
            const int lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
            if (v.y < lo || v.y > hi) continue;
            on_boundary = true;
            clearance = std::max(clearance, std::min(v.y - lo, hi - v.y));
        } else if (a.y == b.y && v.y == a.y) {
            const int lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
            if (v.x < lo || v.x > hi) continue;
            on_boundary = true;
            clearance = std::max(clearance, std::min(v.x - lo, hi - v.x));
        }
    }
    check(on_boundary, "the anchor must lie on the domain boundary");
    check(clearance >= 2 * steps, "the anchor sits too close to a boundary corner for this radius");

    HalfPlaneDualBall ball(steps, domain.mesh);

    ProbabilityEstimate estimate;
    if (std::holds_alternative<ExactMode>(mode)) {
        const std::vector<int> dependent = ball.dependency_edges();
        check(dependent.size() <= 24,
              "exact enumeration supports at most 24 undetermined edges near the anchor; "
              "use the Monte Carlo mode");
        Configuration config(ball.domain());
        for (int e = 0; e < ball.domain().edge_count(); ++e) config.set_open(e, true);
        const std::uint64_t total = 1ull << dependent.size();
        std::int64_t hits = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            for (std::size_t i = 0; i < dependent.size(); ++i)
                config.set_open(dependent[i], ((mask >> i) & 1u) != 0);
            if (ball.reaches(config)) ++hits;
        }
        estimate.hits = hits;
        estimate.trials = static_cast<std::int64_t>(total);
        estimate.value = static_cast<double>(hits) / static_cast<double>(total);
        estimate.std_error = 0.0;
        return estimate;
    }

    const MonteCarloMode& mc = std::get<MonteCarloMode>(mode);
    check(mc.samples > 0, "sampling needs a positive sample count");
    RngStream rng(mc.seed, mc.stream);
    Configuration config(ball.domain());
    std::int64_t hits = 0;
    for (std::int64_t s = 0; s < mc.samples; ++s) {
        sample_configuration(config, rng);
        if (ball.reaches(config)) ++hits;
    }
    estimate.hits = hits;
    estimate.trials = mc.samples;
    estimate.value = static_cast<double>(hits) / static_cast<double>(mc.samples);
    estimate.std_error = std::sqrt(estimate.value * (1.0 - estimate.value) /
                                   static_cast<double>(mc.samples));
    return estimate;
}

void write_arm_csv(const ArmEstimate& estimate, std::ostream& out) {
    out << "signature,r,R,hits,trials\n";
    for (std::size_t i = 0; i < estimate.radii.size(); ++i)
        out << estimate.signature.sequence << ',' << estimate.inner_radius << ','
            << estimate.radii[i] << ',' << estimate.counts[i] << ',' << estimate.totals[i]
            << '\n';
}

std::string arm_fit_json(const ArmEstimate& estimate) {
    nlohmann::json j;
    j["signature"] = estimate.signature.sequence;
    j["geometry"] = geometry_name(estimate.signature.geometry);
    j["inner_radius"] = estimate.inner_radius;
    j["radii"] = estimate.radii;
    j["counts"] = estimate.counts;
    j["totals"] = estimate.totals;
    j["exponent"] = estimate.exponent;
    j["std_error"] = estimate.std_error;
    if (estimate.reference_exponent)
        j["reference_exponent"] = *estimate.reference_exponent;
    else
        j["reference_exponent"] = nullptr;
    return j.dump(2);
}

}  // namespace perc
