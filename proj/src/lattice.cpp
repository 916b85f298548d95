#include "perc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace perc {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void check(bool ok, const char* msg) {
    if (!ok) throw std::logic_error(std::string("domain construction invariant: ") + msg);
}

Axis axis_of_step(HalfPoint d) {
    if (d.x > 0 && d.y == 0) return Axis::E;
    if (d.x < 0 && d.y == 0) return Axis::W;
    if (d.y > 0 && d.x == 0) return Axis::N;
    if (d.y < 0 && d.x == 0) return Axis::S;
    fail("boundary segment must be axis-aligned and nonzero");
}

HalfPoint half_step(Axis a) {
    const HalfPoint s = axis_step(a);
    return {s.x / 2, s.y / 2};
}

Diag diag_ccw45(Axis a) { return static_cast<Diag>(static_cast<int>(a)); }
Diag diag_cw45(Axis a) { return static_cast<Diag>((static_cast<int>(a) + 3) & 3); }

Diag diag_of_delta(HalfPoint d) {
    if (d.x == 1 && d.y == 1) return Diag::NE;
    if (d.x == -1 && d.y == 1) return Diag::NW;
    if (d.x == -1 && d.y == -1) return Diag::SW;
    if (d.x == 1 && d.y == -1) return Diag::SE;
    throw std::logic_error("medial path step is not diagonal");
}

bool is_horizontal_mid(HalfPoint p) { return (p.x & 1) != 0; }

// Slot position (0..3 = A..D) of a medial edge incident to the medial
// vertex at `p`, given the edge direction and whether it points into p.
// Labels run counterclockwise from the lowest-angle inbound direction:
//   horizontal midpoints: A=NE-in, B=NW-out, C=SW-in, D=SE-out
//   vertical midpoints:   A=NW-in, B=SW-out, C=SE-in, D=NE-out
int slot_of(HalfPoint p, Diag dir, bool inbound) {
    const bool horizontal = is_horizontal_mid(p);
    if (horizontal) {
        if (inbound) {
            if (dir == Diag::NE) return 0;
            if (dir == Diag::SW) return 2;
        } else {
            if (dir == Diag::NW) return 1;
            if (dir == Diag::SE) return 3;
        }
    } else {
        if (inbound) {
            if (dir == Diag::NW) return 0;
            if (dir == Diag::SE) return 2;
        } else {
            if (dir == Diag::SW) return 1;
            if (dir == Diag::NE) return 3;
        }
    }
    throw std::logic_error("medial edge direction inconsistent with vertex orientation");
}

struct Polygon {
    std::vector<HalfPoint> corners;  // even half-coords, CCW

    long long signed_area2() const {
        long long s = 0;
        for (std::size_t i = 0; i < corners.size(); ++i) {
            const HalfPoint p = corners[i];
            const HalfPoint q = corners[(i + 1) % corners.size()];
            s += static_cast<long long>(p.x) * q.y - static_cast<long long>(q.x) * p.y;
        }
        return s;
    }

    bool on_boundary(HalfPoint p) const {
        for (std::size_t i = 0; i < corners.size(); ++i) {
            const HalfPoint u = corners[i];
            const HalfPoint v = corners[(i + 1) % corners.size()];
            if (u.x == v.x) {
                if (p.x == u.x && p.y >= std::min(u.y, v.y) && p.y <= std::max(u.y, v.y))
                    return true;
            } else {
                if (p.y == u.y && p.x >= std::min(u.x, v.x) && p.x <= std::max(u.x, v.x))
                    return true;
            }
        }
        return false;
    }

    // Even-odd ray cast along +x with the half-open rule [ymin, ymax).
    bool strictly_inside(HalfPoint p) const {
        if (on_boundary(p)) return false;
        bool in = false;
        for (std::size_t i = 0; i < corners.size(); ++i) {
            const HalfPoint u = corners[i];
            const HalfPoint v = corners[(i + 1) % corners.size()];
            if (u.x != v.x) continue;  // vertical segments only
            const int ymin = std::min(u.y, v.y), ymax = std::max(u.y, v.y);
            if (p.y >= ymin && p.y < ymax && u.x > p.x) in = !in;
        }
        return in;
    }

    bool inside_or_on(HalfPoint p) const { return on_boundary(p) || strictly_inside(p); }
};

struct CornerLess {
    bool operator()(HalfPoint a, HalfPoint b) const {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

// Shared skeleton: primal/dual/medial-midpoint structure of the region
// bounded by `poly`.
void build_region(DobrushinDomain& d, const Polygon& poly) {
    d.polygon = poly.corners;
    int xmin = poly.corners[0].x, xmax = xmin, ymin = poly.corners[0].y, ymax = ymin;
    for (const HalfPoint c : poly.corners) {
        xmin = std::min(xmin, c.x);
        xmax = std::max(xmax, c.x);
        ymin = std::min(ymin, c.y);
        ymax = std::max(ymax, c.y);
    }
    d.cols = (xmax - xmin) / 2;
    d.rows = (ymax - ymin) / 2;

    // Edges: unit primal edges whose midpoint lies in the closed region.
    for (int y = ymin; y <= ymax; ++y) {
        for (int x = xmin; x <= xmax; ++x) {
            if (((x ^ y) & 1) == 0) continue;  // midpoints have x + y odd
            const HalfPoint mid{x, y};
            if (!poly.inside_or_on(mid)) continue;
            const int id = static_cast<int>(d.primal_edges.size());
            PrimalEdge e;
            e.mid = mid;
            e.horizontal = is_horizontal_mid(mid);
            d.primal_edges.push_back(e);
            d.edge_index.emplace(mid, id);
        }
    }
    // deterministic order: sorted by (y, x) of midpoint
    std::sort(d.primal_edges.begin(), d.primal_edges.end(),
              [](const PrimalEdge& a, const PrimalEdge& b) {
                  return CornerLess{}(a.mid, b.mid);
              });
    d.edge_index.clear();
    for (std::size_t i = 0; i < d.primal_edges.size(); ++i)
        d.edge_index.emplace(d.primal_edges[i].mid, static_cast<int>(i));

    // Vertices: endpoints of the edge set.
    for (const PrimalEdge& e : d.primal_edges) {
        const HalfPoint off = e.horizontal ? HalfPoint{1, 0} : HalfPoint{0, 1};
        for (const HalfPoint p : {e.mid - off, e.mid + off}) {
            if (!d.vertex_index.contains(p)) {
                d.vertex_index.emplace(p, 0);
                d.primal_vertices.push_back(p);
            }
        }
    }
    std::sort(d.primal_vertices.begin(), d.primal_vertices.end(), CornerLess{});
    for (std::size_t i = 0; i < d.primal_vertices.size(); ++i)
        d.vertex_index[d.primal_vertices[i]] = static_cast<int>(i);
    for (PrimalEdge& e : d.primal_edges) {
        const HalfPoint off = e.horizontal ? HalfPoint{1, 0} : HalfPoint{0, 1};
        e.u = d.vertex_index.at(e.mid - off);
        e.v = d.vertex_index.at(e.mid + off);
    }

    // Interior faces.
    for (int y = ymin + 1; y < ymax; y += 2) {
        for (int x = xmin + 1; x < xmax; x += 2) {
            const HalfPoint c{x, y};
            if (poly.strictly_inside(c)) {
                d.face_index.emplace(c, static_cast<int>(d.dual_faces.size()));
                d.dual_faces.push_back(c);
            }
        }
    }
    d.edge_faces.resize(d.primal_edges.size(), {kAbsent, kAbsent});
    for (std::size_t i = 0; i < d.primal_edges.size(); ++i) {
        const auto [lo, hi] = d.dual_endpoints(static_cast<int>(i));
        d.edge_faces[i][0] = d.face_at(lo);
        d.edge_faces[i][1] = d.face_at(hi);
    }

    // Medial vertices at edge midpoints (same ids as the edges).
    d.medial_vertices.reserve(d.primal_edges.size());
    for (std::size_t i = 0; i < d.primal_edges.size(); ++i) {
        d.medial_vertices.push_back(d.primal_edges[i].mid);
        d.medial_index.emplace(d.primal_edges[i].mid, static_cast<int>(i));
    }
}

// Diamond medial edges counterclockwise around each in-domain primal
// vertex; a quadrant contributes iff its face is a domain face.
void add_interior_medial_edges(DobrushinDomain& d) {
    static constexpr HalfPoint kMidOff[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};  // E N W S
    static constexpr HalfPoint kQuad[4] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};  // NE NW SW SE
    for (const HalfPoint p : d.primal_vertices) {
        for (int k = 0; k < 4; ++k) {
            const HalfPoint m1 = p + kMidOff[k];
            const HalfPoint m2 = p + kMidOff[(k + 1) & 3];
            if (d.face_at(p + kQuad[k]) == kAbsent) continue;
            const int from = d.medial_at(m1);
            const int to = d.medial_at(m2);
            if (from == kAbsent || to == kAbsent) continue;
            d.medial_edges.push_back({from, to, diag_of_delta(m2 - m1)});
        }
    }
}

void build_slots(DobrushinDomain& d) {
    d.medial_slots.assign(d.medial_vertices.size(), MedialSlots{});
    for (std::size_t i = 0; i < d.medial_edges.size(); ++i) {
        const MedialEdge& me = d.medial_edges[i];
        if (me.from != kAbsent) {
            const int s = slot_of(d.medial_vertices[me.from], me.dir, false);
            check(d.medial_slots[me.from].edge[s] == kAbsent, "slot collision (outbound)");
            d.medial_slots[me.from].edge[s] = static_cast<int>(i);
        }
        if (me.to != kAbsent) {
            const int s = slot_of(d.medial_vertices[me.to], me.dir, true);
            check(d.medial_slots[me.to].edge[s] == kAbsent, "slot collision (inbound)");
            d.medial_slots[me.to].edge[s] = static_cast<int>(i);
        }
    }
}

void set_bit(std::vector<std::uint64_t>& mask, int i) {
    mask[static_cast<std::size_t>(i) >> 6] |= 1ull << (i & 63);
}

void build_masks(DobrushinDomain& d) {
    const std::size_t words = (d.primal_edges.size() + 63) / 64;
    d.forced_open_mask.assign(words, 0);
    d.forced_closed_mask.assign(words, 0);
    d.free_mask.assign(words, 0);
    for (const int e : d.arc_ba) set_bit(d.forced_open_mask, e);
    for (const int e : d.arc_ab_dual) set_bit(d.forced_closed_mask, e);
    for (int e = 0; e < d.edge_count(); ++e) {
        const std::uint64_t bit = 1ull << (e & 63);
        const std::size_t w = static_cast<std::size_t>(e) >> 6;
        if ((d.forced_open_mask[w] & bit) == 0 && (d.forced_closed_mask[w] & bit) == 0) {
            d.free_mask[w] |= bit;
            d.free_edges.push_back(e);
        }
    }
}

// Walk the boundary cycle as unit vertex steps, starting from corner 0.
std::vector<HalfPoint> boundary_cycle(const Polygon& poly) {
    std::vector<HalfPoint> cycle;
    const std::size_t n = poly.corners.size();
    for (std::size_t i = 0; i < n; ++i) {
        HalfPoint p = poly.corners[i];
        const HalfPoint q = poly.corners[(i + 1) % n];
        const Axis a = axis_of_step(q - p);
        const HalfPoint s = axis_step(a);
        while (!(p == q)) {
            cycle.push_back(p);
            p = p + s;
        }
    }
    std::unordered_set<std::uint64_t> seen;
    for (const HalfPoint p : cycle) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
            static_cast<std::uint32_t>(p.y);
        if (!seen.insert(key).second)
            fail("boundary polygon must be simple (self-intersection detected)");
    }
    return cycle;
}

// Dobrushin structure: forced arcs, exterior teeth, the outer medial path
// from a<> to b<>, and the marked entry/exit edges.
void add_dobrushin_structure(DobrushinDomain& d, const Polygon& poly,
                             HalfPoint a_corner, HalfPoint b_corner) {
    std::vector<HalfPoint> cycle = boundary_cycle(poly);
    const auto find_pos = [&](HalfPoint p) -> std::size_t {
        for (std::size_t i = 0; i < cycle.size(); ++i)
            if (cycle[i] == p) return i;
        fail("marked corner is not on the boundary");
    };
    const std::size_t ia = find_pos(a_corner);
    const std::size_t ib = find_pos(b_corner);
    if (ia == ib) fail("marked corners must be distinct");

    const auto at = [&](std::size_t k) { return cycle[k % cycle.size()]; };
    // Vertex walks: a -> b counterclockwise (dual-forced side), then
    // b -> a counterclockwise (wired side).
    std::vector<HalfPoint> walk_ab, walk_ba;
    for (std::size_t k = ia;; ++k) {
        walk_ab.push_back(at(k));
        if (at(k) == b_corner) break;
    }
    for (std::size_t k = ib;; ++k) {
        walk_ba.push_back(at(k));
        if (at(k) == a_corner) break;
    }

    const auto edge_between = [&](HalfPoint u, HalfPoint v) {
        const HalfPoint mid{(u.x + v.x) / 2, (u.y + v.y) / 2};
        const int id = d.edge_at(mid);
        check(id != kAbsent, "boundary edge missing from edge set");
        return id;
    };
    for (std::size_t k = 0; k + 1 < walk_ab.size(); ++k)
        d.arc_ab_dual.push_back(edge_between(walk_ab[k], walk_ab[k + 1]));
    for (std::size_t k = 0; k + 1 < walk_ba.size(); ++k)
        d.arc_ba.push_back(edge_between(walk_ba[k], walk_ba[k + 1]));

    // Outer medial path a<> .. b<> with exterior teeth. The walk keeps the
    // domain on its left; teeth hang to the right (outward).
    d.a_medial = d.arc_ab_dual.front();
    d.b_medial = d.arc_ab_dual.back();

    std::vector<HalfPoint> path;
    path.push_back(d.primal_edges[d.a_medial].mid);
    for (std::size_t j = 1; j + 1 < walk_ab.size(); ++j) {
        const HalfPoint w = walk_ab[j];
        const Axis h_in = axis_of_step(w - walk_ab[j - 1]);
        const Axis h_out = axis_of_step(walk_ab[j + 1] - w);
        if (h_out == h_in) {
            path.push_back(w + half_step(axis_right(h_in)));
        } else if (h_out == axis_left(h_in)) {
            path.push_back(w + half_step(axis_right(h_in)));
            path.push_back(w + half_step(h_in));
        } else if (h_out != axis_right(h_in)) {
            fail("boundary walk reverses direction");
        }
        path.push_back(HalfPoint{(w.x + walk_ab[j + 1].x) / 2, (w.y + walk_ab[j + 1].y) / 2});
    }

    // Register exterior medial vertices (teeth) and the path's edges.
    std::vector<int> path_ids;
    for (const HalfPoint p : path) {
        int id = d.medial_at(p);
        if (id == kAbsent) {
            check(!d.edge_index.contains(p), "tooth coincides with a domain edge");
            id = static_cast<int>(d.medial_vertices.size());
            d.medial_vertices.push_back(p);
            d.medial_index.emplace(p, id);
        }
        path_ids.push_back(id);
    }
    d.outer_path = path_ids;
    for (std::size_t k = 0; k + 1 < path_ids.size(); ++k) {
        const HalfPoint delta = path[k + 1] - path[k];
        d.medial_edges.push_back({path_ids[k], path_ids[k + 1], diag_of_delta(delta)});
    }

    // Entry and exit edges.
    const Axis h_first = axis_of_step(walk_ab[1] - walk_ab[0]);
    const Axis h_last = axis_of_step(walk_ab.back() - walk_ab[walk_ab.size() - 2]);
    d.e_a_edge = static_cast<int>(d.medial_edges.size());
    d.medial_edges.push_back({kAbsent, d.a_medial, diag_ccw45(h_first)});
    d.e_b_edge = static_cast<int>(d.medial_edges.size());
    d.medial_edges.push_back({d.b_medial, kAbsent, diag_cw45(h_last)});
    d.e_a_direction = diag_unit(diag_ccw45(h_first));
    d.e_b_direction = diag_unit(diag_cw45(h_last));
}

void check_invariants(const DobrushinDomain& d) {
    check(static_cast<int>(d.medial_vertices.size()) >= d.edge_count(),
          "medial vertex count below edge count");
    if (d.kind == BoundaryKind::dobrushin) {
        check(d.arc_ba.size() + d.arc_ab_dual.size() + d.free_edges.size() ==
                  d.primal_edges.size(),
              "arcs and free edges must partition the edge set");
        // Marked vertices carry all four slots (one of them the entry/exit edge).
        for (const int m : {d.a_medial, d.b_medial})
            for (int s = 0; s < 4; ++s) check(d.medial_slots[m].edge[s] != kAbsent, "marked vertex slot missing");
        // Exterior teeth have exactly one inbound and one outbound slot.
        for (int m = d.edge_count(); m < static_cast<int>(d.medial_vertices.size()); ++m) {
            const MedialSlots& s = d.medial_slots[m];
            const int present = (s.a() != kAbsent) + (s.b() != kAbsent) + (s.c() != kAbsent) +
                                (s.d() != kAbsent);
            check(present == 2, "exterior medial vertex must have exactly two slots");
            check((s.a() != kAbsent) + (s.c() != kAbsent) == 1, "tooth needs one inbound slot");
        }
    }
    // Every in-domain medial vertex adjacent to an interior face has the
    // two slots of that face's side.
    for (int e = 0; e < d.edge_count(); ++e) {
        const MedialSlots& s = d.medial_slots[e];
        const int present = (s.a() != kAbsent) + (s.b() != kAbsent) + (s.c() != kAbsent) +
                            (s.d() != kAbsent);
        check(present >= 2, "interior medial vertex with fewer than two medial edges");
    }
}

Polygon rectangle_polygon(int cols, int rows) {
    if (cols < 1 || rows < 1) fail("rectangle needs at least one column and one row");
    return Polygon{{{0, 0}, {2 * cols, 0}, {2 * cols, 2 * rows}, {0, 2 * rows}}};
}

}  // namespace

int DobrushinDomain::vertex_at(HalfPoint p) const {
    const auto it = vertex_index.find(p);
    return it == vertex_index.end() ? kAbsent : it->second;
}
int DobrushinDomain::edge_at(HalfPoint mid) const {
    const auto it = edge_index.find(mid);
    return it == edge_index.end() ? kAbsent : it->second;
}
int DobrushinDomain::face_at(HalfPoint c) const {
    const auto it = face_index.find(c);
    return it == face_index.end() ? kAbsent : it->second;
}
int DobrushinDomain::medial_at(HalfPoint p) const {
    const auto it = medial_index.find(p);
    return it == medial_index.end() ? kAbsent : it->second;
}

std::array<HalfPoint, 2> DobrushinDomain::dual_endpoints(int edge) const {
    const PrimalEdge& e = primal_edges[edge];
    const HalfPoint off = e.horizontal ? HalfPoint{0, 1} : HalfPoint{1, 0};
    return {e.mid - off, e.mid + off};
}

std::uint64_t DobrushinDomain::topology_hash() const {
    std::uint64_t h = 14695981039346656037ull;
    const auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(kind));
    mix(static_cast<std::uint64_t>(cols));
    mix(static_cast<std::uint64_t>(rows));
    std::uint64_t mesh_bits;
    static_assert(sizeof(mesh_bits) == sizeof(mesh));
    std::memcpy(&mesh_bits, &mesh, sizeof(mesh_bits));
    mix(mesh_bits);
    for (const HalfPoint c : polygon) {
        mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)));
        mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.y)));
    }
    mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(a_medial)));
    mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(b_medial)));
    mix(primal_edges.size());
    return h;
}

double default_min_segment_length(double mesh) {
    if (!(mesh > 0) || mesh >= 1.0) return 4 * mesh;
    const double r = 1.0 / std::ceil(std::log(1.0 / mesh));
    return std::max(4 * mesh, r);
}

DobrushinDomain build_rectangle_domain(int cols, int rows, double mesh, Corner a_corner,
                                       Corner b_corner) {
    if (a_corner == b_corner) fail("marked corners must be distinct");
    if (!(mesh > 0)) fail("mesh must be positive");
    const Polygon poly = rectangle_polygon(cols, rows);
    const auto corner_point = [&](Corner c) {
        return poly.corners[static_cast<int>(c)];
    };
    DobrushinDomain d;
    d.kind = BoundaryKind::dobrushin;
    d.mesh = mesh;
    build_region(d, poly);
    add_interior_medial_edges(d);
    add_dobrushin_structure(d, poly, corner_point(a_corner), corner_point(b_corner));
    build_slots(d);
    build_masks(d);
    check_invariants(d);
    return d;
}

DobrushinDomain build_condition_c_domain(const BoundarySpec& spec) {
    if (!(spec.mesh > 0)) fail("mesh must be positive");
    if (spec.segments.size() < 4) fail("boundary needs at least four segments");
    const int n = static_cast<int>(spec.segments.size());
    if (spec.a_index < 0 || spec.a_index >= n || spec.b_index < 0 || spec.b_index >= n)
        fail("marked indices out of range");
    if (spec.a_index == spec.b_index) fail("marked corners must be distinct");

    Polygon poly;
    HalfPoint p{0, 0};
    for (const BoundarySegment& s : spec.segments) {
        if ((s.dx != 0) == (s.dy != 0)) fail("segments must be axis-aligned and nonzero");
        poly.corners.push_back(p);
        p = p + HalfPoint{2 * s.dx, 2 * s.dy};
    }
    if (!(p == HalfPoint{0, 0})) fail("boundary polygon must close");
    if (poly.signed_area2() <= 0) fail("boundary polygon must be counterclockwise");

    // Straight continuation is only allowed at the marked corners; real
    // corners must turn by a quarter either way.
    const double msl = spec.min_segment_length > 0 ? spec.min_segment_length
                                                   : default_min_segment_length(spec.mesh);
    for (int i = 0; i < n; ++i) {
        const BoundarySegment& s = spec.segments[i];
        const BoundarySegment& t = spec.segments[(i + 1) % n];
        const double len = spec.mesh * (std::abs(s.dx) + std::abs(s.dy));
        if (len + 1e-12 < msl) fail("boundary segment shorter than the minimum length");
        const bool same_axis = (s.dx != 0) == (t.dx != 0);
        if (same_axis && s.dx * t.dx + s.dy * t.dy < 0)
            fail("boundary walk reverses direction");
        const int corner = (i + 1) % n;
        if (same_axis && corner != spec.a_index && corner != spec.b_index)
            fail("collinear segments may only meet at a marked corner");
    }

    DobrushinDomain d;
    d.kind = BoundaryKind::dobrushin;
    d.mesh = spec.mesh;
    build_region(d, poly);
    add_interior_medial_edges(d);
    add_dobrushin_structure(d, poly, poly.corners[spec.a_index], poly.corners[spec.b_index]);
    build_slots(d);
    build_masks(d);
    check_invariants(d);
    return d;
}

DobrushinDomain build_free_rectangle(int cols, int rows, double mesh) {
    if (!(mesh > 0)) fail("mesh must be positive");
    DobrushinDomain d;
    d.kind = BoundaryKind::free_boundary;
    d.mesh = mesh;
    build_region(d, rectangle_polygon(cols, rows));
    add_interior_medial_edges(d);
    build_slots(d);
    build_masks(d);
    check_invariants(d);
    return d;
}

MedialSlots medial_edges_at(const DobrushinDomain& domain, int medial_vertex) {
    if (medial_vertex < 0 || medial_vertex >= static_cast<int>(domain.medial_vertices.size()))
        fail("medial vertex id out of range");
    MedialSlots s = domain.medial_slots[medial_vertex];
    for (int& e : s.edge) {
        if (e == domain.e_a_edge || e == domain.e_b_edge) e = kAbsent;
    }
    return s;
}

int slot_index_at(const DobrushinDomain& domain, int medial_edge, int medial_vertex) {
    const MedialEdge& me = domain.medial_edges[medial_edge];
    const bool inbound = me.to == medial_vertex;
    if (!inbound && me.from != medial_vertex)
        fail("medial edge is not incident to the vertex");
    return slot_of(domain.medial_vertices[medial_vertex], me.dir, inbound);
}

int outgoing_medial_edge(const DobrushinDomain& domain, int medial_vertex, Diag dir) {
    const int s = slot_of(domain.medial_vertices[medial_vertex], dir, false);
    return domain.medial_slots[medial_vertex].edge[s];
}

int incoming_medial_edge(const DobrushinDomain& domain, int medial_vertex, Diag dir) {
    const int s = slot_of(domain.medial_vertices[medial_vertex], dir, true);
    return domain.medial_slots[medial_vertex].edge[s];
}

void write_geometry_csv(const DobrushinDomain& domain, std::ostream& out) {
    out << "id,x,y,kind\n";
    const auto emit = [&](int id, HalfPoint p, const char* kind) {
        out << id << ',' << 0.5 * domain.mesh * p.x << ',' << 0.5 * domain.mesh * p.y << ','
            << kind << '\n';
    };
    for (std::size_t i = 0; i < domain.primal_vertices.size(); ++i)
        emit(static_cast<int>(i), domain.primal_vertices[i], "primal_vertex");
    for (std::size_t i = 0; i < domain.dual_faces.size(); ++i)
        emit(static_cast<int>(i), domain.dual_faces[i], "dual_vertex");
    for (std::size_t i = 0; i < domain.medial_vertices.size(); ++i)
        emit(static_cast<int>(i), domain.medial_vertices[i],
             domain.is_exterior_medial(static_cast<int>(i)) ? "medial_exterior"
                                                            : "medial_vertex");
}

BoundarySpec BoundarySpec::from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.is_object()) fail("boundary spec must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "segments" && key != "a" && key != "b" && key != "mesh" &&
            key != "min_segment_length")
            fail("unknown key in boundary spec: " + key);
    }
    BoundarySpec s;
    if (!j.contains("segments") || !j["segments"].is_array())
        fail("boundary spec needs a segments array");
    for (const auto& seg : j["segments"]) {
        for (const auto& [key, _] : seg.items()) {
            if (key != "dx" && key != "dy") fail("unknown key in segment: " + key);
        }
        s.segments.push_back({seg.value("dx", 0), seg.value("dy", 0)});
    }
    if (!j.contains("a") || !j.contains("b") || !j.contains("mesh"))
        fail("boundary spec needs a, b and mesh");
    s.a_index = j["a"].get<int>();
    s.b_index = j["b"].get<int>();
    s.mesh = j["mesh"].get<double>();
    s.min_segment_length = j.value("min_segment_length", 0.0);
    return s;
}

std::string BoundarySpec::to_json() const {
    json j;
    j["segments"] = json::array();
    for (const BoundarySegment& s : segments) j["segments"].push_back({{"dx", s.dx}, {"dy", s.dy}});
    j["a"] = a_index;
    j["b"] = b_index;
    j["mesh"] = mesh;
    if (min_segment_length > 0) j["min_segment_length"] = min_segment_length;
    return j.dump(2);
}

}  // namespace perc
