#include "perc/exploration.hpp"

#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace perc {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw std::logic_error(std::string("exploration invariant: ") + msg);
}

// The trace itself: starting on `entry_edge`, repeatedly turn right on an
// open underlying edge and left on a closed one (exterior teeth act as
// closed), until the walk leaves the domain through the exit edge. Open
// statuses come from `open`, indexed by primal edge id.
template <typename StatusFn>
ExplorationPath walk(const DobrushinDomain& d, int entry_edge, const StatusFn& open) {
    constexpr double quarter = std::numbers::pi / 2;
    ExplorationPath p;
    p.domain = &d;
    p.visited_edges.assign(d.medial_edges.size(), 0);
    p.traversal_index.assign(d.medial_edges.size(), -1);

    int edge = entry_edge;
    p.visited_edges[edge] = 1;
    p.traversal_index[edge] = 0;
    p.edge_sequence.push_back(edge);
    Diag dir = d.medial_edges[edge].dir;
    int v = d.medial_edges[edge].to;
    check(v != kAbsent, "entry edge must point into the domain");

    long long turn_sum = 0;
    for (;;) {
        const bool is_open = !d.is_exterior_medial(v) && open(v);
        const std::int8_t t = is_open ? -1 : 1;
        dir = is_open ? turn_right(dir) : turn_left(dir);
        p.steps.push_back(v);
        p.turns.push_back(t);
        turn_sum += t;
        p.cumulative_winding.push_back(static_cast<double>(turn_sum) * quarter);

        edge = outgoing_medial_edge(d, v, dir);
        check(edge != kAbsent, "interface ran into a missing medial edge");
        check(!p.visited_edges[edge], "interface revisited a medial edge");
        p.visited_edges[edge] = 1;
        p.traversal_index[edge] = static_cast<int>(p.edge_sequence.size());
        p.edge_sequence.push_back(edge);
        v = d.medial_edges[edge].to;
        if (v == kAbsent) break;  // left the domain through the exit edge
    }
    return p;
}

}  // namespace

ExplorationPath trace_exploration(const Configuration& config) {
    const DobrushinDomain& d = *config.domain;
    if (d.kind != BoundaryKind::dobrushin)
        throw std::invalid_argument("exploration needs a domain with two marked boundary arcs");
    return walk(d, d.e_a_edge, [&](int e) { return config.is_open(e); });
}

double winding(const ExplorationPath& path, int medial_edge_from, int medial_edge_to) {
    const int i = path.traversal_index[medial_edge_from];
    const int j = path.traversal_index[medial_edge_to];
    if (i < 0 || j < 0)
        throw std::invalid_argument("winding is only defined between traversed medial edges");
    const auto before = [&](int k) {
        return k > 0 ? path.cumulative_winding[k - 1] : 0.0;
    };
    return before(j) - before(i);
}

std::vector<Complex> path_to_polyline(const ExplorationPath& path) {
    const DobrushinDomain& d = *path.domain;
    const double half_diag = d.mesh * std::numbers::sqrt2 / 2;
    std::vector<Complex> pts;
    pts.reserve(path.steps.size() + 2);
    const MedialEdge& entry = d.medial_edges[path.edge_sequence.front()];
    pts.push_back(d.position_of_medial(path.steps.front()) -
                  half_diag * diag_unit(entry.dir));
    for (const int v : path.steps) pts.push_back(d.position_of_medial(v));
    const MedialEdge& exit = d.medial_edges[path.edge_sequence.back()];
    pts.push_back(d.position_of_medial(path.steps.back()) + half_diag * diag_unit(exit.dir));
    return pts;
}

SlitDomain slit_after(const DobrushinDomain& domain, const ExplorationPath& path, int n) {
    if (n < 0 || n >= static_cast<int>(path.steps.size()))
        throw std::invalid_argument("slit length must index a visited medial vertex");
    SlitDomain s;
    s.base = &domain;
    s.steps_consumed = n;
    s.tip_medial = path.steps[n];
    s.tip_direction = domain.medial_edges[path.edge_sequence[n]].dir;
    s.tip_winding = n > 0 ? path.cumulative_winding[n - 1] : 0.0;
    std::vector<std::uint8_t> seen(domain.edge_count(), 0);
    for (int j = 0; j < n; ++j) {
        const int v = path.steps[j];
        if (domain.is_exterior_medial(v) || seen[v]) continue;
        seen[v] = 1;
        s.revealed.emplace_back(v, path.turns[j] < 0);  // right turn <=> open
    }
    return s;
}

ExplorationPath trace_from_slit(const SlitDomain& slit, const Configuration& config) {
    const DobrushinDomain& d = *slit.base;
    check(config.domain == &d, "configuration belongs to a different domain");
    std::unordered_map<int, bool> fixed;
    for (const auto& [e, open] : slit.revealed) fixed.emplace(e, open);
    const int entry = incoming_medial_edge(d, slit.tip_medial, slit.tip_direction);
    check(entry != kAbsent, "slit tip has no incoming medial edge");
    return walk(d, entry, [&](int e) {
        const auto it = fixed.find(e);
        return it != fixed.end() ? it->second : config.is_open(e);
    });
}

}  // namespace perc
