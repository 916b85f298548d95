#include "perc/percolation.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace perc {

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void merge(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

bool share_label(const std::vector<int>& labels, std::span<const int> set1,
                 std::span<const int> set2) {
    for (const int a : set1)
        for (const int b : set2)
            if (labels[a] == labels[b]) return true;
    return false;
}

}  // namespace

int Configuration::open_count() const {
    int n = 0;
    for (const std::uint64_t w : bits) n += std::popcount(w);
    return n;
}

Configuration sample_configuration(const DobrushinDomain& domain, RngStream& rng) {
    Configuration c(domain);
    sample_configuration(c, rng);
    return c;
}

void sample_configuration(Configuration& config, RngStream& rng) {
    const DobrushinDomain& domain = *config.domain;
    for (std::size_t w = 0; w < config.bits.size(); ++w)
        config.bits[w] = (rng.next_u64() & domain.free_mask[w]) | domain.forced_open_mask[w];
}

void enumerate_configurations(const DobrushinDomain& domain,
                              const std::function<void(const Configuration&)>& visit) {
    const int f = domain.free_count();
    if (f > 24)
        throw std::invalid_argument("enumeration is capped at 24 free edges, domain has " +
                                    std::to_string(f));
    Configuration c(domain);
    const std::uint64_t total = 1ull << f;
    for (std::uint64_t assignment = 0; assignment < total; ++assignment) {
        for (int k = 0; k < f; ++k)
            c.set_open(domain.free_edges[k], (assignment >> k) & 1u);
        visit(c);
    }
}

std::vector<int> open_clusters(const Configuration& config) {
    const DobrushinDomain& d = *config.domain;
    UnionFind uf(static_cast<int>(d.primal_vertices.size()));
    for (int e = 0; e < d.edge_count(); ++e)
        if (config.is_open(e)) uf.merge(d.primal_edges[e].u, d.primal_edges[e].v);
    std::vector<int> labels(d.primal_vertices.size());
    for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = uf.find(static_cast<int>(v));
    return labels;
}

int dual_label_count(const DobrushinDomain& domain) {
    int boundary = 0;
    for (const auto [f0, f1] : domain.edge_faces) boundary += (f0 == kAbsent || f1 == kAbsent);
    return static_cast<int>(domain.dual_faces.size()) + boundary;
}

std::vector<int> outer_cells_by_edge(const DobrushinDomain& domain) {
    std::vector<int> out(domain.primal_edges.size(), kAbsent);
    int next = static_cast<int>(domain.dual_faces.size());
    for (int e = 0; e < domain.edge_count(); ++e) {
        const auto [f0, f1] = domain.edge_faces[e];
        if (f0 == kAbsent || f1 == kAbsent) out[e] = next++;
    }
    return out;
}

std::vector<int> dual_clusters(const Configuration& config) {
    const DobrushinDomain& d = *config.domain;
    const std::vector<int> outer = outer_cells_by_edge(d);
    UnionFind uf(dual_label_count(d));
    for (int e = 0; e < d.edge_count(); ++e) {
        if (config.is_open(e)) continue;
        const auto [f0, f1] = d.edge_faces[e];
        const int c0 = f0 != kAbsent ? f0 : outer[e];
        const int c1 = f1 != kAbsent ? f1 : outer[e];
        uf.merge(c0, c1);
    }
    if (d.kind == BoundaryKind::dobrushin) {
        // the dual-open exterior spine links consecutive outer cells of the
        // dual-forced arc (through the teeth)
        for (std::size_t k = 0; k + 1 < d.arc_ab_dual.size(); ++k)
            uf.merge(outer[d.arc_ab_dual[k]], outer[d.arc_ab_dual[k + 1]]);
    }
    std::vector<int> labels(uf.parent.size());
    for (std::size_t f = 0; f < labels.size(); ++f) labels[f] = uf.find(static_cast<int>(f));
    return labels;
}

std::vector<int> side_faces(const DobrushinDomain& domain, Side side) {
    std::vector<int> out;
    const int w = 2 * domain.cols, h = 2 * domain.rows;
    const auto add = [&](HalfPoint p) {
        const int f = domain.face_at(p);
        if (f != kAbsent) out.push_back(f);
    };
    switch (side) {
        case Side::south:
            for (int x = 1; x < w; x += 2) add({x, 1});
            break;
        case Side::north:
            for (int x = 1; x < w; x += 2) add({x, h - 1});
            break;
        case Side::west:
            for (int y = 1; y < h; y += 2) add({1, y});
            break;
        case Side::east:
            for (int y = 1; y < h; y += 2) add({w - 1, y});
            break;
    }
    return out;
}

std::vector<int> side_outer_cells(const DobrushinDomain& domain, Side side) {
    const std::vector<int> outer = outer_cells_by_edge(domain);
    std::vector<int> out;
    const int w = 2 * domain.cols, h = 2 * domain.rows;
    const auto add = [&](HalfPoint mid) {
        const int e = domain.edge_at(mid);
        if (e != kAbsent && outer[e] != kAbsent) out.push_back(outer[e]);
    };
    switch (side) {
        case Side::south:
            for (int x = 1; x < w; x += 2) add({x, 0});
            break;
        case Side::north:
            for (int x = 1; x < w; x += 2) add({x, h});
            break;
        case Side::west:
            for (int y = 1; y < h; y += 2) add({0, y});
            break;
        case Side::east:
            for (int y = 1; y < h; y += 2) add({w, y});
            break;
    }
    return out;
}

std::vector<int> side_vertices(const DobrushinDomain& domain, Side side) {
    std::vector<int> out;
    const int w = 2 * domain.cols, h = 2 * domain.rows;
    const auto add = [&](HalfPoint p) {
        const int v = domain.vertex_at(p);
        if (v != kAbsent) out.push_back(v);
    };
    switch (side) {
        case Side::south:
            for (int x = 0; x <= w; x += 2) add({x, 0});
            break;
        case Side::north:
            for (int x = 0; x <= w; x += 2) add({x, h});
            break;
        case Side::west:
            for (int y = 0; y <= h; y += 2) add({0, y});
            break;
        case Side::east:
            for (int y = 0; y <= h; y += 2) add({w, y});
            break;
    }
    return out;
}

bool has_dual_crossing(const Configuration& config, std::span<const int> faces1,
                       std::span<const int> faces2) {
    return share_label(dual_clusters(config), faces1, faces2);
}

bool has_dual_crossing(const Configuration& config, Side side1, Side side2) {
    return has_dual_crossing(config, side_outer_cells(*config.domain, side1),
                             side_outer_cells(*config.domain, side2));
}

bool has_open_crossing(const Configuration& config, std::span<const int> vertices1,
                       std::span<const int> vertices2) {
    return share_label(open_clusters(config), vertices1, vertices2);
}

bool has_open_crossing(const Configuration& config, Side side1, Side side2) {
    return has_open_crossing(config, side_vertices(*config.domain, side1),
                             side_vertices(*config.domain, side2));
}

std::string dump_hex(const Configuration& config) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    std::uint64_t hash = config.domain->topology_hash();
    for (int k = 15; k >= 0; --k) out.push_back(kHex[(hash >> (4 * k)) & 0xf]);
    out.push_back(':');
    for (const std::uint64_t w : config.bits)
        for (int k = 0; k < 16; ++k) out.push_back(kHex[(w >> (4 * k)) & 0xf]);
    return out;
}

Configuration load_hex(const DobrushinDomain& domain, const std::string& text) {
    const auto sep = text.find(':');
    if (sep == std::string::npos) throw std::invalid_argument("missing ':' in configuration dump");
    const auto nibble = [](char c) -> std::uint64_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
        throw std::invalid_argument("invalid hex digit in configuration dump");
    };
    std::uint64_t hash = 0;
    if (sep != 16) throw std::invalid_argument("malformed domain hash in configuration dump");
    for (std::size_t i = 0; i < 16; ++i) hash = (hash << 4) | nibble(text[i]);
    if (hash != domain.topology_hash())
        throw std::invalid_argument("configuration dump does not match this domain");

    Configuration c(domain);
    const std::string body = text.substr(sep + 1);
    if (body.size() != 16 * c.bits.size())
        throw std::invalid_argument("configuration dump has the wrong length");
    for (std::size_t w = 0; w < c.bits.size(); ++w) {
        std::uint64_t v = 0;
        for (int k = 0; k < 16; ++k) v |= nibble(body[16 * w + k]) << (4 * k);
        c.bits[w] = v;
    }
    // sanity: forced statuses must be intact
    for (std::size_t w = 0; w < c.bits.size(); ++w) {
        if ((c.bits[w] & domain.forced_open_mask[w]) != domain.forced_open_mask[w] ||
            (c.bits[w] & domain.forced_closed_mask[w]) != 0)
            throw std::invalid_argument("configuration dump violates forced boundary statuses");
    }
    return c;
}

}  // namespace perc
