#include "perc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "perc/rng.hpp"

namespace perc {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void check(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

// e^{i k pi/6} for k = 0..11: one third of k quarter turns.
const std::array<Complex, 12>& phase_table() {
    static const std::array<Complex, 12> table = [] {
        std::array<Complex, 12> t;
        for (int k = 0; k < 12; ++k) t[k] = std::polar(1.0, k * std::numbers::pi / 6.0);
        return t;
    }();
    return table;
}

int mod12(int k) { return ((k % 12) + 12) % 12; }

// Re-runnable interface walk over precomputed adjacency tables, recording
// per traversed edge the quarter-turn count at its traversal. Keeps all
// winding bookkeeping in integers; phases are applied once at the end.
struct Tracer {
    const DobrushinDomain* d = nullptr;
    int in_domain = 0;                          // medial ids below this carry an edge status
    std::vector<std::array<int, 4>> outgoing;   // per medial vertex, by heading
    std::vector<int> head;                      // per medial edge: vertex it enters
    std::vector<int> seq;                       // traversed edges, entry .. exit
    std::vector<int> prefix_turns;              // per medial edge: turns before traversal
    std::vector<long long> stamp;               // per medial edge: last run that used it
    long long run_id = 0;
    int total_turns = 0;

    explicit Tracer(const DobrushinDomain& domain)
        : d(&domain), in_domain(domain.edge_count()) {
        check(domain.kind == BoundaryKind::dobrushin && domain.e_a_edge != kAbsent,
              "the interface walk needs a two-arc boundary");
        const std::size_t m = domain.medial_edges.size();
        outgoing.assign(domain.medial_vertices.size(), {kAbsent, kAbsent, kAbsent, kAbsent});
        head.resize(m);
        prefix_turns.assign(m, 0);
        stamp.assign(m, 0);
        seq.reserve(m + 1);
        for (std::size_t e = 0; e < m; ++e) {
            const MedialEdge& me = domain.medial_edges[e];
            head[e] = me.to;
            if (me.from != kAbsent)
                outgoing[static_cast<std::size_t>(me.from)][static_cast<int>(me.dir)] =
                    static_cast<int>(e);
        }
    }

    void run_from(int entry_edge, const Configuration& config) {
        ++run_id;
        seq.clear();
        int edge = entry_edge;
        int turns = 0;
        Diag dir = d->medial_edges[static_cast<std::size_t>(edge)].dir;
        seq.push_back(edge);
        prefix_turns[static_cast<std::size_t>(edge)] = 0;
        stamp[static_cast<std::size_t>(edge)] = run_id;
        int v = head[static_cast<std::size_t>(edge)];
        while (v != kAbsent) {
            const bool open = v < in_domain && config.is_open(v);
            if (open) {
                dir = turn_right(dir);
                --turns;
            } else {
                dir = turn_left(dir);
                ++turns;
            }
            edge = outgoing[static_cast<std::size_t>(v)][static_cast<int>(dir)];
            seq.push_back(edge);
            prefix_turns[static_cast<std::size_t>(edge)] = turns;
            stamp[static_cast<std::size_t>(edge)] = run_id;
            v = head[static_cast<std::size_t>(edge)];
        }
        total_turns = turns;
    }

    void run(const Configuration& config) { run_from(d->e_a_edge, config); }

    bool used_this_run(int medial_edge) const {
        return stamp[static_cast<std::size_t>(medial_edge)] == run_id;
    }

    // 1 if the head vertex of this traversal is passed once, 2 if twice.
    int head_multiplicity(int medial_edge) const {
        int hv = head[static_cast<std::size_t>(medial_edge)];
        if (hv == kAbsent) hv = d->medial_edges[static_cast<std::size_t>(medial_edge)].from;
        const MedialSlots& slots = d->medial_slots[static_cast<std::size_t>(hv)];
        int used = 0;
        for (const int s : slots.edge)
            if (s != kAbsent && used_this_run(s)) ++used;
        if (used != 2 && used != 4)
            throw std::logic_error("interface uses an odd number of slots at a vertex");
        return used / 2;
    }
};

// Exact accumulation: per edge, integer counts of the winding-to-exit
// residue (quarter turns mod 12). Ratios of count sums to the number of
// configurations round once, at the very end.
struct ExactSums {
    std::vector<std::array<long long, 12>> counts;
    long long configs = 0;

    explicit ExactSums(std::size_t edges) : counts(edges, std::array<long long, 12>{}) {}

    void add(const Tracer& tr) {
        for (const int e : tr.seq)
            ++counts[static_cast<std::size_t>(e)]
                    [mod12(tr.total_turns - tr.prefix_turns[static_cast<std::size_t>(e)])];
        ++configs;
    }

    Complex value(std::size_t e) const {
        const auto& t = phase_table();
        Complex sum = 0;
        for (int k = 0; k < 12; ++k)
            if (counts[e][k] != 0) sum += static_cast<double>(counts[e][k]) * t[k];
        return sum / static_cast<double>(configs);
    }
};

// Monte Carlo accumulation with per-component second moments for errors.
struct SampleSums {
    std::vector<double> re, im, re2, im2;
    long long n = 0;

    explicit SampleSums(std::size_t edges)
        : re(edges, 0.0), im(edges, 0.0), re2(edges, 0.0), im2(edges, 0.0) {}

    void add(const Tracer& tr) {
        const auto& t = phase_table();
        for (const int e : tr.seq) {
            const std::size_t i = static_cast<std::size_t>(e);
            const Complex p =
                t[static_cast<std::size_t>(mod12(tr.total_turns - tr.prefix_turns[i]))];
            re[i] += p.real();
            im[i] += p.imag();
            re2[i] += p.real() * p.real();
            im2[i] += p.imag() * p.imag();
        }
        ++n;
    }

    Complex value(std::size_t e) const {
        return {re[e] / static_cast<double>(n), im[e] / static_cast<double>(n)};
    }
    Complex stderr_value(std::size_t e) const {
        const double nn = static_cast<double>(n);
        const Complex mean = value(e);
        const double vr = std::max(0.0, re2[e] / nn - mean.real() * mean.real());
        const double vi = std::max(0.0, im2[e] / nn - mean.imag() * mean.imag());
        return {std::sqrt(vr / nn), std::sqrt(vi / nn)};
    }
};

const MonteCarloMode& monte_carlo_of(const ObservableMode& mode) {
    const auto* mc = std::get_if<MonteCarloMode>(&mode);
    check(mc != nullptr, "expected a Monte Carlo mode");
    check(mc->samples > 0, "Monte Carlo sample count must be positive");
    return *mc;
}

Complex exit_normalization(const DobrushinDomain& domain) {
    return std::pow(domain.e_b_direction, -1.0 / 3.0);
}

constexpr Complex kOctant{0.70710678118654752440, 0.70710678118654752440};  // e^{i pi/4}

struct SlotSplit {
    Complex in_avg{0, 0};
    Complex out_avg{0, 0};
};

// Average the field over the present inbound (A, C) and outbound (B, D)
// slots of a medial vertex; single present slots carry full weight.
SlotSplit split_slots(const ObservableField& field, int medial_vertex) {
    const DobrushinDomain& domain = *field.domain;
    check(medial_vertex >= 0 && medial_vertex < domain.edge_count(),
          "medial vertex id out of range");
    const MedialSlots& slots = domain.medial_slots[static_cast<std::size_t>(medial_vertex)];
    SlotSplit s;
    int n_in = 0, n_out = 0;
    for (int k = 0; k < 4; ++k) {
        const int e = slots.edge[static_cast<std::size_t>(k)];
        if (e == kAbsent) continue;
        if (k % 2 == 0) {
            s.in_avg += field.values[static_cast<std::size_t>(e)];
            ++n_in;
        } else {
            s.out_avg += field.values[static_cast<std::size_t>(e)];
            ++n_out;
        }
    }
    check(n_in >= 1 && n_out >= 1, "medial vertex has fewer than two incident medial edges");
    s.in_avg /= static_cast<double>(n_in);
    s.out_avg /= static_cast<double>(n_out);
    return s;
}

}  // namespace

ObservableField edge_observable(const DobrushinDomain& domain, const ObservableMode& mode) {
    Tracer tracer(domain);
    const std::size_t medial_count = domain.medial_edges.size();
    ObservableField field;
    field.domain = &domain;
    field.values.assign(medial_count, Complex{0, 0});
    field.stderrs.assign(medial_count, Complex{0, 0});

    if (std::holds_alternative<ExactMode>(mode)) {
        ExactSums sums(medial_count);
        enumerate_configurations(domain,
                                 [&](const Configuration& config) {
                                     tracer.run(config);
                                     sums.add(tracer);
                                 });
        for (std::size_t e = 0; e < medial_count; ++e) field.values[e] = sums.value(e);
        field.exact = true;
        field.samples = sums.configs;
        return field;
    }

    const MonteCarloMode& mc = monte_carlo_of(mode);
    RngStream rng(mc.seed, mc.stream);
    Configuration config(domain);
    SampleSums sums(medial_count);
    for (long long s = 0; s < mc.samples; ++s) {
        sample_configuration(config, rng);
        tracer.run(config);
        sums.add(tracer);
    }
    for (std::size_t e = 0; e < medial_count; ++e) {
        field.values[e] = sums.value(e);
        field.stderrs[e] = sums.stderr_value(e);
    }
    field.exact = false;
    field.samples = mc.samples;
    return field;
}

DecomposedField decompose(const DobrushinDomain& domain, const ObservableMode& mode) {
    Tracer tracer(domain);
    const std::size_t medial_count = domain.medial_edges.size();
    DecomposedField out;
    out.domain = &domain;
    out.f_one.assign(medial_count, Complex{0, 0});
    out.f_two.assign(medial_count, Complex{0, 0});

    if (std::holds_alternative<ExactMode>(mode)) {
        ExactSums one(medial_count), two(medial_count);
        enumerate_configurations(domain, [&](const Configuration& config) {
            tracer.run(config);
            for (const int e : tracer.seq) {
                const std::size_t i = static_cast<std::size_t>(e);
                const int k = mod12(tracer.total_turns - tracer.prefix_turns[i]);
                ++(tracer.head_multiplicity(e) == 1 ? one : two).counts[i][k];
            }
            ++one.configs;
            ++two.configs;
        });
        for (std::size_t e = 0; e < medial_count; ++e) {
            out.f_one[e] = one.value(e);
            out.f_two[e] = two.value(e);
        }
        return out;
    }

    const MonteCarloMode& mc = monte_carlo_of(mode);
    RngStream rng(mc.seed, mc.stream);
    Configuration config(domain);
    SampleSums one(medial_count), two(medial_count);
    const auto& table = phase_table();
    for (long long s = 0; s < mc.samples; ++s) {
        sample_configuration(config, rng);
        tracer.run(config);
        for (const int e : tracer.seq) {
            const std::size_t i = static_cast<std::size_t>(e);
            const Complex p = table[static_cast<std::size_t>(
                mod12(tracer.total_turns - tracer.prefix_turns[i]))];
            SampleSums& bucket = tracer.head_multiplicity(e) == 1 ? one : two;
            bucket.re[i] += p.real();
            bucket.im[i] += p.imag();
        }
        ++one.n;
        ++two.n;
    }
    for (std::size_t e = 0; e < medial_count; ++e) {
        out.f_one[e] = one.value(e);
        out.f_two[e] = two.value(e);
    }
    return out;
}

ObservableField slit_observable(const SlitDomain& slit, const ObservableMode& mode) {
    const DobrushinDomain& domain = *slit.base;
    Tracer tracer(domain);
    const std::size_t medial_count = domain.medial_edges.size();

    // Edge statuses pinned by the revealed prefix.
    std::vector<std::int8_t> pinned(static_cast<std::size_t>(domain.edge_count()), -1);
    for (const auto& [edge, open] : slit.revealed)
        pinned[static_cast<std::size_t>(edge)] = open ? 1 : 0;

    // Re-walk the consumed prefix to recover each consumed edge's turn count.
    std::vector<std::pair<int, int>> prefix;  // (medial edge, turns before traversal)
    int edge = domain.e_a_edge;
    int turns = 0;
    Diag dir = domain.medial_edges[static_cast<std::size_t>(edge)].dir;
    prefix.emplace_back(edge, 0);
    for (int j = 0; j < slit.steps_consumed; ++j) {
        const int v = domain.medial_edges[static_cast<std::size_t>(edge)].to;
        check(v != kAbsent, "slit prefix runs past the exit");
        bool open = false;
        if (!domain.is_exterior_medial(v)) {
            const std::int8_t p = pinned[static_cast<std::size_t>(v)];
            if (p < 0) throw std::logic_error("slit prefix crosses an unrevealed edge");
            open = p == 1;
        }
        if (open) {
            dir = turn_right(dir);
            --turns;
        } else {
            dir = turn_left(dir);
            ++turns;
        }
        edge = outgoing_medial_edge(domain, v, dir);
        check(edge != kAbsent, "slit prefix hits a missing medial edge");
        prefix.emplace_back(edge, turns);
    }
    const int entry_edge = edge;
    const int tip_turns = turns;
    if (domain.medial_edges[static_cast<std::size_t>(entry_edge)].to != slit.tip_medial ||
        domain.medial_edges[static_cast<std::size_t>(entry_edge)].dir != slit.tip_direction)
        throw std::logic_error("revealed statuses do not reproduce the slit tip");

    ObservableField field;
    field.domain = &domain;
    field.values.assign(medial_count, Complex{0, 0});
    field.stderrs.assign(medial_count, Complex{0, 0});
    const auto& table = phase_table();

    if (std::holds_alternative<ExactMode>(mode)) {
        // Enumerate the continuations: free edges not pinned by the prefix.
        std::vector<int> open_free;
        for (const int f : domain.free_edges)
            if (pinned[static_cast<std::size_t>(f)] < 0) open_free.push_back(f);
        check(open_free.size() <= 24, "enumeration is capped at 24 undetermined edges");

        Configuration config(domain);
        for (const auto& [e, status] : slit.revealed) config.set_open(e, status);
        std::array<long long, 12> exit_counts{};
        ExactSums sums(medial_count);
        const std::uint64_t total = 1ull << open_free.size();
        for (std::uint64_t assignment = 0; assignment < total; ++assignment) {
            for (std::size_t k = 0; k < open_free.size(); ++k)
                config.set_open(open_free[k], (assignment >> k) & 1u);
            tracer.run_from(entry_edge, config);
            sums.add(tracer);
            ++exit_counts[static_cast<std::size_t>(mod12(tracer.total_turns))];
        }
        for (std::size_t e = 0; e < medial_count; ++e) field.values[e] = sums.value(e);
        // Consumed edges: frozen winding offset times the expected
        // continuation phase (the offset reaches the tip, the continuation
        // carries on to the exit).
        for (const auto& [consumed, turns_before] : prefix) {
            const int offset = tip_turns - turns_before;
            Complex sum = 0;
            for (int k = 0; k < 12; ++k)
                if (exit_counts[static_cast<std::size_t>(k)] != 0)
                    sum += static_cast<double>(exit_counts[static_cast<std::size_t>(k)]) *
                           table[static_cast<std::size_t>(mod12(k + offset))];
            field.values[static_cast<std::size_t>(consumed)] = sum / static_cast<double>(total);
        }
        field.exact = true;
        field.samples = static_cast<long long>(total);
        return field;
    }

    const MonteCarloMode& mc = monte_carlo_of(mode);
    RngStream rng(mc.seed, mc.stream);
    Configuration config(domain);
    SampleSums sums(medial_count);
    std::array<long long, 12> exit_counts{};
    for (long long s = 0; s < mc.samples; ++s) {
        sample_configuration(config, rng);
        for (const auto& [e, status] : slit.revealed) config.set_open(e, status);
        tracer.run_from(entry_edge, config);
        sums.add(tracer);
        ++exit_counts[static_cast<std::size_t>(mod12(tracer.total_turns))];
    }
    for (std::size_t e = 0; e < medial_count; ++e) {
        field.values[e] = sums.value(e);
        field.stderrs[e] = sums.stderr_value(e);
    }
    for (const auto& [consumed, turns_before] : prefix) {
        const int offset = tip_turns - turns_before;
        Complex sum = 0;
        double r2 = 0, i2 = 0;
        for (int k = 0; k < 12; ++k) {
            if (exit_counts[static_cast<std::size_t>(k)] == 0) continue;
            const Complex p = table[static_cast<std::size_t>(mod12(k + offset))];
            const double c = static_cast<double>(exit_counts[static_cast<std::size_t>(k)]);
            sum += c * p;
            r2 += c * p.real() * p.real();
            i2 += c * p.imag() * p.imag();
        }
        const double nn = static_cast<double>(mc.samples);
        const Complex mean = sum / nn;
        const std::size_t i = static_cast<std::size_t>(consumed);
        field.values[i] = mean;
        field.stderrs[i] = {std::sqrt(std::max(0.0, r2 / nn - mean.real() * mean.real()) / nn),
                            std::sqrt(std::max(0.0, i2 / nn - mean.imag() * mean.imag()) / nn)};
    }
    field.exact = false;
    field.samples = mc.samples;
    return field;
}

VertexField vertex_observable(const ObservableField& field) {
    check(field.domain != nullptr, "vertex field needs an edge field");
    const DobrushinDomain& domain = *field.domain;
    const Complex norm = exit_normalization(domain);
    VertexField out;
    out.domain = &domain;
    const int n = domain.edge_count();
    out.values.resize(static_cast<std::size_t>(n));
    out.dual_values.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        const SlotSplit s = split_slots(field, v);
        out.values[static_cast<std::size_t>(v)] =
            norm * (std::conj(kOctant) * s.in_avg + kOctant * s.out_avg);
        out.dual_values[static_cast<std::size_t>(v)] =
            norm * (kOctant * s.in_avg + std::conj(kOctant) * s.out_avg);
    }
    return out;
}

Complex vertex_observable(const ObservableField& field, int medial_vertex) {
    check(field.domain != nullptr, "vertex value needs an edge field");
    const SlotSplit s = split_slots(field, medial_vertex);
    return exit_normalization(*field.domain) *
           (std::conj(kOctant) * s.in_avg + kOctant * s.out_avg);
}

Complex dual_vertex_observable(const ObservableField& field, int medial_vertex) {
    check(field.domain != nullptr, "vertex value needs an edge field");
    const SlotSplit s = split_slots(field, medial_vertex);
    return exit_normalization(*field.domain) *
           (kOctant * s.in_avg + std::conj(kOctant) * s.out_avg);
}

std::vector<int> interior_medial_vertices(const DobrushinDomain& domain) {
    std::vector<int> out;
    for (int e = 0; e < domain.edge_count(); ++e) {
        const auto [f0, f1] = domain.edge_faces[static_cast<std::size_t>(e)];
        if (f0 != kAbsent && f1 != kAbsent) out.push_back(e);
    }
    return out;
}

Complex cr_residual(const ObservableField& field, int medial_vertex) {
    check(field.domain != nullptr, "residual needs an edge field");
    const DobrushinDomain& domain = *field.domain;
    check(medial_vertex >= 0 && medial_vertex < domain.edge_count(),
          "medial vertex id out of range");
    const auto [f0, f1] = domain.edge_faces[static_cast<std::size_t>(medial_vertex)];
    check(f0 != kAbsent && f1 != kAbsent,
          "the discrete relation is defined at interior medial vertices");
    const MedialSlots& slots = domain.medial_slots[static_cast<std::size_t>(medial_vertex)];
    const auto value = [&](int slot) {
        const int e = slots.edge[static_cast<std::size_t>(slot)];
        if (e == kAbsent) throw std::logic_error("interior medial vertex with a missing slot");
        return field.values[static_cast<std::size_t>(e)];
    };
    return value(0) - value(2) - Complex{0, 1} * (value(1) - value(3));
}

double translational_gap(const ObservableField& field, int v0, int v1) {
    check(field.domain != nullptr, "gap needs an edge field");
    const DobrushinDomain& domain = *field.domain;
    const int n = domain.edge_count();
    check(v0 >= 0 && v0 < n && v1 >= 0 && v1 < n, "medial vertex id out of range");
    check(domain.primal_edges[static_cast<std::size_t>(v0)].horizontal ==
              domain.primal_edges[static_cast<std::size_t>(v1)].horizontal,
          "gap compares medial vertices of equal orientation");
    const HalfPoint delta = domain.medial_vertices[static_cast<std::size_t>(v1)] -
                            domain.medial_vertices[static_cast<std::size_t>(v0)];
    const bool adjacent = (std::abs(delta.x) == 2 && delta.y == 0) ||
                          (delta.x == 0 && std::abs(delta.y) == 2);
    check(adjacent, "gap compares medial vertices one lattice step apart");
    const MedialSlots& s0 = domain.medial_slots[static_cast<std::size_t>(v0)];
    const MedialSlots& s1 = domain.medial_slots[static_cast<std::size_t>(v1)];
    double gap = -1;
    for (int k = 0; k < 4; ++k) {
        const int e0 = s0.edge[static_cast<std::size_t>(k)];
        const int e1 = s1.edge[static_cast<std::size_t>(k)];
        if (e0 == kAbsent || e1 == kAbsent) continue;
        gap = std::max(gap, std::abs(field.values[static_cast<std::size_t>(e0)] -
                                     field.values[static_cast<std::size_t>(e1)]));
    }
    if (gap < 0) throw std::logic_error("no slot label is present at both vertices");
    return gap;
}

namespace {

// Walks a primal-vertex path one lattice step at a time and sums
// (z_{j+1} - z_j) * g(value at the crossed edge's midpoint).
template <typename Integrand>
Complex integrate_segments(const VertexField& field, std::span<const HalfPoint> path,
                           Integrand&& g) {
    check(field.domain != nullptr, "line integral needs a vertex field");
    check(path.size() >= 2, "line integral needs at least two vertices");
    const DobrushinDomain& domain = *field.domain;
    Complex total = 0;
    for (std::size_t j = 0; j + 1 < path.size(); ++j) {
        const HalfPoint p = path[j], q = path[j + 1];
        check(is_primal(p) && is_primal(q), "line integral path must follow primal vertices");
        const HalfPoint d = q - p;
        check((std::abs(d.x) == 2 && d.y == 0) || (d.x == 0 && std::abs(d.y) == 2),
              "line integral path must advance one lattice step at a time");
        const int e = domain.edge_at({(p.x + q.x) / 2, (p.y + q.y) / 2});
        check(e != kAbsent, "line integral path leaves the domain");
        const Complex f = field.values[static_cast<std::size_t>(e)];
        total += (to_complex(q, domain.mesh) - to_complex(p, domain.mesh)) * g(f);
    }
    return total;
}

}  // namespace

Complex line_integral(const VertexField& field, std::span<const HalfPoint> path) {
    return integrate_segments(field, path, [](Complex f) { return f; });
}

Complex line_integral_cubed(const VertexField& field, std::span<const HalfPoint> path) {
    return integrate_segments(field, path, [](Complex f) { return f * f * f; });
}

Complex line_integral(const ObservableField& field, std::span<const HalfPoint> path) {
    return line_integral(vertex_observable(field), path);
}

Complex line_integral_cubed(const ObservableField& field, std::span<const HalfPoint> path) {
    return line_integral_cubed(vertex_observable(field), path);
}

namespace {

// The primal corner where the wired and dual-forced arcs meet (the exit
// corner), plus the straight boundary runs leaving it along each arc.
struct ExitCorner {
    HalfPoint position;
    HalfPoint dual_step;   // one lattice step from the corner along the dual-forced side
    HalfPoint wired_step;  // one lattice step from the corner along the wired side
    int dual_run = 0;      // straight edges along the dual-forced side
    int wired_run = 0;     // straight edges along the wired side
};

ExitCorner exit_corner(const DobrushinDomain& domain) {
    check(domain.kind == BoundaryKind::dobrushin, "the contour needs a two-arc boundary");
    const PrimalEdge& wired = domain.primal_edges[static_cast<std::size_t>(domain.arc_ba.front())];
    const PrimalEdge& dual =
        domain.primal_edges[static_cast<std::size_t>(domain.arc_ab_dual.back())];
    int corner = kAbsent;
    for (const int vw : {wired.u, wired.v})
        for (const int vd : {dual.u, dual.v})
            if (vw == vd) corner = vw;
    if (corner == kAbsent) throw std::logic_error("boundary arcs do not share a corner");

    ExitCorner out;
    out.position = domain.primal_vertices[static_cast<std::size_t>(corner)];
    const auto step_from = [&](const PrimalEdge& e) {
        const int other = e.u == corner ? e.v : e.u;
        return domain.primal_vertices[static_cast<std::size_t>(other)] - out.position;
    };
    out.dual_step = step_from(dual);
    out.wired_step = step_from(wired);

    // Count how far each boundary run continues straight from the corner.
    const auto run_length = [&](const std::vector<int>& arc, bool from_back, HalfPoint step) {
        int run = 0;
        HalfPoint at = out.position;
        const int n = static_cast<int>(arc.size());
        for (int k = 0; k < n; ++k) {
            const int e = arc[static_cast<std::size_t>(from_back ? n - 1 - k : k)];
            const HalfPoint next = at + step;
            const int id = domain.edge_at({(at.x + next.x) / 2, (at.y + next.y) / 2});
            if (id != e) break;
            ++run;
            at = next;
        }
        return run;
    };
    out.dual_run = run_length(domain.arc_ab_dual, true, out.dual_step);
    out.wired_run = run_length(domain.arc_ba, false, out.wired_step);
    return out;
}

// Quarter-circle staircase of primal vertices around the exit corner, from
// the dual-forced side to the wired side, hugging radius rho (lattice units).
std::vector<HalfPoint> corner_contour(const DobrushinDomain& domain, double rho, int k0, int k1) {
    const ExitCorner corner = exit_corner(domain);
    check(k0 >= 1 && k1 >= 1 && k0 < corner.dual_run && k1 < corner.wired_run,
          "contour radius does not fit inside the domain (mesh too coarse)");
    std::vector<HalfPoint> path;
    path.push_back(corner.position + HalfPoint{k0 * corner.dual_step.x, k0 * corner.dual_step.y});
    const HalfPoint toward_wired = corner.wired_step;
    const HalfPoint away_from_dual{-corner.dual_step.x, -corner.dual_step.y};
    int remaining_w = k1, remaining_d = k0;
    const auto radial_error = [&](HalfPoint p) {
        const double dx = 0.5 * (p.x - corner.position.x);
        const double dy = 0.5 * (p.y - corner.position.y);
        return std::abs(std::sqrt(dx * dx + dy * dy) - rho);
    };
    while (remaining_w > 0 || remaining_d > 0) {
        const HalfPoint at = path.back();
        HalfPoint step{};
        if (remaining_d == 0) {
            step = toward_wired;
        } else if (remaining_w == 0) {
            step = away_from_dual;
        } else {
            step = radial_error(at + toward_wired) <= radial_error(at + away_from_dual)
                       ? toward_wired
                       : away_from_dual;
        }
        if (step == toward_wired)
            --remaining_w;
        else
            --remaining_d;
        path.push_back(at + step);
    }
    for (const HalfPoint p : path)
        if (radial_error(p) > 5.0)
            throw std::logic_error("contour strays more than five mesh units from the circle");
    return path;
}

double contour_imaginary_part(const VertexField& field, std::span<const HalfPoint> path) {
    // Mesh-normalized: each step contributes its unit direction.
    return (line_integral_cubed(field, path) / field.domain->mesh).imag();
}

}  // namespace

CDeltaEstimate estimate_c_delta(const DobrushinDomain& domain, const ObservableMode& mode) {
    const double rho = std::pow(domain.mesh, -2.0 / 3.0);  // mesh^{1/3} in lattice units
    const int k = static_cast<int>(std::lround(rho));
    CDeltaEstimate out;
    out.contour = corner_contour(domain, rho, k, k);

    if (std::holds_alternative<ExactMode>(mode)) {
        const VertexField field = vertex_observable(edge_observable(domain, mode));
        out.value = contour_imaginary_part(field, out.contour);
        out.std_error = 0;
        return out;
    }

    const MonteCarloMode& mc = monte_carlo_of(mode);
    const int batches = static_cast<int>(std::min<long long>(16, mc.samples));
    std::vector<double> batch_values;
    batch_values.reserve(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) {
        MonteCarloMode part = mc;
        part.samples = mc.samples / batches + (b < mc.samples % batches ? 1 : 0);
        part.stream = mc.stream * static_cast<std::uint64_t>(batches) + static_cast<std::uint64_t>(b);
        const VertexField field = vertex_observable(edge_observable(domain, part));
        batch_values.push_back(contour_imaginary_part(field, out.contour));
    }
    double mean = 0;
    for (const double v : batch_values) mean += v;
    mean /= static_cast<double>(batch_values.size());
    double var = 0;
    for (const double v : batch_values) var += (v - mean) * (v - mean);
    const std::size_t nb = batch_values.size();
    out.value = mean;
    out.std_error =
        nb > 1 ? std::sqrt(var / static_cast<double>(nb - 1) / static_cast<double>(nb)) : 0.0;
    return out;
}

namespace {

Complex medial_edge_center(const DobrushinDomain& domain, int e) {
    const MedialEdge& me = domain.medial_edges[static_cast<std::size_t>(e)];
    const double half_len = 0.25 * domain.mesh * std::numbers::sqrt2;
    if (me.from == kAbsent)
        return domain.position_of_medial(me.to) - half_len * diag_unit(me.dir);
    if (me.to == kAbsent) return domain.position_of_medial(me.from) + half_len * diag_unit(me.dir);
    return 0.5 * (domain.position_of_medial(me.from) + domain.position_of_medial(me.to));
}

}  // namespace

void write_field_csv(const ObservableField& field, std::ostream& out) {
    check(field.domain != nullptr, "field is empty");
    out << "medial_edge,x,y,re,im,stderr_re,stderr_im\n";
    out << std::setprecision(17);
    for (std::size_t e = 0; e < field.values.size(); ++e) {
        const Complex c = medial_edge_center(*field.domain, static_cast<int>(e));
        out << e << ',' << c.real() << ',' << c.imag() << ',' << field.values[e].real() << ','
            << field.values[e].imag() << ',' << field.stderrs[e].real() << ','
            << field.stderrs[e].imag() << '\n';
    }
}

void write_vertex_field_csv(const VertexField& field, std::ostream& out) {
    check(field.domain != nullptr, "field is empty");
    out << "medial_vertex,x,y,re,im,dual_re,dual_im\n";
    out << std::setprecision(17);
    for (std::size_t v = 0; v < field.values.size(); ++v) {
        const Complex c = field.domain->position_of_medial(static_cast<int>(v));
        out << v << ',' << c.real() << ',' << c.imag() << ',' << field.values[v].real() << ','
            << field.values[v].imag() << ',' << field.dual_values[v].real() << ','
            << field.dual_values[v].imag() << '\n';
    }
}

}  // namespace perc
