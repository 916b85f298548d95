#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "perc/geometry.hpp"

namespace perc {

constexpr int kAbsent = -1;

enum class Corner { sw, se, ne, nw };
enum class BoundaryKind { dobrushin, free_boundary };

// Axis-aligned boundary polygon given by displacement segments, traversed
// counterclockwise; a_index/b_index mark two corners (indices into the
// segment list: corner k is the start of segment k).
struct BoundarySegment {
    int dx = 0;
    int dy = 0;
};

struct BoundarySpec {
    std::vector<BoundarySegment> segments;
    int a_index = 0;
    int b_index = 0;
    double mesh = 1.0;
    // 0 means "use default_min_segment_length(mesh)".
    double min_segment_length = 0.0;

    static BoundarySpec from_json(const std::string& text);
    std::string to_json() const;
};

double default_min_segment_length(double mesh);

struct PrimalEdge {
    int u = kAbsent;  // endpoint vertex ids, u is the smaller (y, x)
    int v = kAbsent;
    HalfPoint mid;    // midpoint in half-units; doubles as the medial vertex position
    bool horizontal = false;
};

// A medial edge, directed counterclockwise around the primal vertex it
// borders. `from`/`to` are medial vertex ids; the virtual outer endpoint
// of the entry/exit edges is kAbsent.
struct MedialEdge {
    int from = kAbsent;
    int to = kAbsent;
    Diag dir = Diag::NE;
};

// The four medial edge slots at a medial vertex, labeled counterclockwise
// A,B,C,D starting from the lowest-angle inbound direction. A and C point
// towards the vertex, B and D away from it.
struct MedialSlots {
    std::array<int, 4> edge{kAbsent, kAbsent, kAbsent, kAbsent};

    int a() const { return edge[0]; }
    int b() const { return edge[1]; }
    int c() const { return edge[2]; }
    int d() const { return edge[3]; }
};

struct DobrushinDomain {
    BoundaryKind kind = BoundaryKind::dobrushin;
    double mesh = 1.0;
    int cols = 0;  // bounding box in mesh units
    int rows = 0;
    std::vector<HalfPoint> polygon;  // boundary corners, CCW, half-units

    // Primal graph.
    std::vector<HalfPoint> primal_vertices;
    std::vector<PrimalEdge> primal_edges;

    // Dual graph: interior faces; every primal edge carries one dual edge
    // connecting the (≤2 interior) faces on its sides.
    std::vector<HalfPoint> dual_faces;
    std::vector<std::array<int, 2>> edge_faces;  // per edge: [W/S side, E/N side]

    // Medial graph. Ids [0, primal_edges.size()) are edge midpoints; the
    // following ids are exterior medial vertices (midpoints of off-domain
    // edges hanging outward along the dual-forced arc) that the interface
    // traverses between boundary midpoints.
    std::vector<HalfPoint> medial_vertices;
    std::vector<MedialEdge> medial_edges;
    std::vector<MedialSlots> medial_slots;

    int a_medial = kAbsent;
    int b_medial = kAbsent;
    int e_a_edge = kAbsent;
    int e_b_edge = kAbsent;
    Complex e_a_direction{0, 0};
    Complex e_b_direction{0, 0};

    // Boundary arcs: wired edges listed from b to a (counterclockwise along
    // the boundary), and dual-forced edges listed from a to b. Ids index
    // primal_edges (a dual edge shares the id of the primal edge it crosses).
    std::vector<int> arc_ba;
    std::vector<int> arc_ab_dual;

    // Medial vertex sequence a<> .. b<> along the exterior boundary path
    // (through the exterior teeth).
    std::vector<int> outer_path;

    // Edge-status masks (bit per primal edge id).
    std::vector<std::uint64_t> forced_open_mask;
    std::vector<std::uint64_t> forced_closed_mask;
    std::vector<std::uint64_t> free_mask;
    std::vector<int> free_edges;

    // Lookups.
    std::unordered_map<HalfPoint, int, HalfPointHash> vertex_index;
    std::unordered_map<HalfPoint, int, HalfPointHash> edge_index;
    std::unordered_map<HalfPoint, int, HalfPointHash> face_index;
    std::unordered_map<HalfPoint, int, HalfPointHash> medial_index;

    int edge_count() const { return static_cast<int>(primal_edges.size()); }
    int free_count() const { return static_cast<int>(free_edges.size()); }
    int interior_medial_count() const { return edge_count(); }
    bool is_exterior_medial(int m) const { return m >= edge_count(); }

    int vertex_at(HalfPoint p) const;
    int edge_at(HalfPoint mid) const;
    int face_at(HalfPoint c) const;
    int medial_at(HalfPoint p) const;

    Complex position_of_medial(int m) const { return to_complex(medial_vertices[m], mesh); }

    // Dual edge endpoints (face centers on either side; positions may lie
    // outside the domain for boundary edges).
    std::array<HalfPoint, 2> dual_endpoints(int edge) const;

    // Hash of the combinatorial structure; used to tie serialized
    // configurations to the domain they belong to.
    std::uint64_t topology_hash() const;
};

DobrushinDomain build_rectangle_domain(int cols, int rows, double mesh,
                                       Corner a_corner = Corner::sw,
                                       Corner b_corner = Corner::ne);
DobrushinDomain build_condition_c_domain(const BoundarySpec& spec);

// Free boundary conditions: no forced arcs, no marked vertices, no exterior
// teeth; used by crossing-probability and arm experiments.
DobrushinDomain build_free_rectangle(int cols, int rows, double mesh);

// The ≤4 incident medial edges at a medial vertex, labeled A,B,C,D.
// The marked entry/exit edges e_a/e_b are reported as absent.
MedialSlots medial_edges_at(const DobrushinDomain& domain, int medial_vertex);

// Slot index (0..3 = A..D) a medial edge occupies at one of its endpoints.
int slot_index_at(const DobrushinDomain& domain, int medial_edge, int medial_vertex);

// The medial edge leaving (resp. entering) a medial vertex in the given
// diagonal direction, kAbsent if that slot is empty.
int outgoing_medial_edge(const DobrushinDomain& domain, int medial_vertex, Diag dir);
int incoming_medial_edge(const DobrushinDomain& domain, int medial_vertex, Diag dir);

void write_geometry_csv(const DobrushinDomain& domain, std::ostream& out);

}  // namespace perc
