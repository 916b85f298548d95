#include "perc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "perc/arms.hpp"
#include "perc/exploration.hpp"
#include "perc/harmonic.hpp"
#include "perc/loewner.hpp"
#include "perc/observables.hpp"
#include "perc/percolation.hpp"
#include "perc/rng.hpp"

namespace perc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

// ---------------------------------------------------------------------------
// Strict schema handling: every consumer removes the keys it understands and
// rejects whatever remains.

class Keys {
  public:
    Keys(json object, std::string context) : obj_(std::move(object)), ctx_(std::move(context)) {
        if (!obj_.is_object()) fail(ctx_ + " must be a JSON object");
    }
    bool has(const char* key) const { return obj_.contains(key); }
    json take(const char* key) {
        const auto it = obj_.find(key);
        if (it == obj_.end()) fail(ctx_ + " is missing required field '" + std::string(key) + "'");
        json value = *it;
        obj_.erase(it);
        return value;
    }
    json take_or(const char* key, json fallback) {
        const auto it = obj_.find(key);
        if (it == obj_.end()) return fallback;
        json value = *it;
        obj_.erase(it);
        return value;
    }
    void done() const {
        if (!obj_.empty()) fail("unknown key '" + obj_.begin().key() + "' in " + ctx_);
    }
    const std::string& context() const { return ctx_; }

  private:
    json obj_;
    std::string ctx_;
};

long long as_count(const json& v, const char* name, const std::string& ctx) {
    if (!v.is_number_integer() || v.get<long long>() <= 0)
        fail("field '" + std::string(name) + "' in " + ctx + " must be a positive integer");
    return v.get<long long>();
}

int as_int_count(const json& v, const char* name, const std::string& ctx) {
    const long long n = as_count(v, name, ctx);
    if (n > 1'000'000'000) fail("field '" + std::string(name) + "' in " + ctx + " is too large");
    return static_cast<int>(n);
}

double as_positive(const json& v, const char* name, const std::string& ctx) {
    if (!v.is_number() || !(v.get<double>() > 0.0))
        fail("field '" + std::string(name) + "' in " + ctx + " must be a positive number");
    return v.get<double>();
}

std::uint64_t as_seed(const json& v, const std::string& ctx) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0)
        return static_cast<std::uint64_t>(v.get<long long>());
    fail("field 'seed' in " + ctx + " must be a nonnegative integer");
}

std::string as_string(const json& v, const char* name, const std::string& ctx) {
    if (!v.is_string()) fail("field '" + std::string(name) + "' in " + ctx + " must be a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const char* name, const std::string& ctx) {
    if (!v.is_boolean()) fail("field '" + std::string(name) + "' in " + ctx + " must be a boolean");
    return v.get<bool>();
}

std::vector<double> as_radii(const json& v, const char* name, const std::string& ctx) {
    if (!v.is_array() || v.size() < 2)
        fail("field '" + std::string(name) + "' in " + ctx +
             " must be an array of at least two radii");
    std::vector<double> radii;
    for (const json& r : v) {
        if (!r.is_number() || !(r.get<double>() > 0.0))
            fail("field '" + std::string(name) + "' in " + ctx + " must hold positive numbers");
        radii.push_back(r.get<double>());
    }
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1])
            fail("field '" + std::string(name) + "' in " + ctx + " must be strictly increasing");
    return radii;
}

// ---------------------------------------------------------------------------
// Domain specifications.

struct DomainSpec {
    enum class Shape { rectangle, free_rectangle, polygon };
    Shape shape = Shape::rectangle;
    int cols = 0;
    int rows = 0;
    double mesh = 1.0;
    BoundarySpec boundary;
    json echo;

    DobrushinDomain build() const {
        switch (shape) {
            case Shape::rectangle: return build_rectangle_domain(cols, rows, mesh);
            case Shape::free_rectangle: return build_free_rectangle(cols, rows, mesh);
            case Shape::polygon: return build_condition_c_domain(boundary);
        }
        fail("unreachable domain shape");
    }
};

DomainSpec parse_domain_spec(const json& value, double default_mesh, const std::string& ctx,
                             bool allow_free) {
    Keys keys(value, ctx);
    DomainSpec spec;
    spec.mesh = keys.has("mesh") ? as_positive(keys.take("mesh"), "mesh", ctx) : default_mesh;
    if (keys.has("segments")) {
        const json segs = keys.take("segments");
        if (!segs.is_array() || segs.size() < 4)
            fail("field 'segments' in " + ctx + " must be an array of at least four [dx,dy] pairs");
        spec.shape = DomainSpec::Shape::polygon;
        spec.boundary.mesh = spec.mesh;
        json echo_segments = json::array();
        for (const json& s : segs) {
            if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() ||
                !s[1].is_number_integer())
                fail("each entry of 'segments' in " + ctx + " must be a [dx,dy] integer pair");
            spec.boundary.segments.push_back({s[0].get<int>(), s[1].get<int>()});
            echo_segments.push_back(json::array({s[0].get<int>(), s[1].get<int>()}));
        }
        const json a_index = keys.take("a_index");
        const json b_index = keys.take("b_index");
        if (!a_index.is_number_integer() || a_index.get<long long>() < 0 ||
            a_index.get<long long>() >= static_cast<long long>(spec.boundary.segments.size()))
            fail("field 'a_index' in " + ctx + " must index a boundary segment");
        if (!b_index.is_number_integer() || b_index.get<long long>() < 0 ||
            b_index.get<long long>() >= static_cast<long long>(spec.boundary.segments.size()))
            fail("field 'b_index' in " + ctx + " must index a boundary segment");
        spec.boundary.a_index = a_index.get<int>();
        spec.boundary.b_index = b_index.get<int>();
        spec.boundary.min_segment_length =
            keys.has("min_segment_length")
                ? as_positive(keys.take("min_segment_length"), "min_segment_length", ctx)
                : 0.0;
        spec.echo = json{{"segments", echo_segments},
                         {"a_index", spec.boundary.a_index},
                         {"b_index", spec.boundary.b_index},
                         {"mesh", spec.mesh},
                         {"min_segment_length", spec.boundary.min_segment_length}};
        keys.done();
        return spec;
    }
    spec.cols = as_int_count(keys.take("cols"), "cols", ctx);
    spec.rows = as_int_count(keys.take("rows"), "rows", ctx);
    const bool free_boundary = keys.has("free") && as_bool(keys.take("free"), "free", ctx);
    if (free_boundary && !allow_free)
        fail(ctx + " needs the two marked boundary points; 'free' is not allowed here");
    spec.shape = free_boundary ? DomainSpec::Shape::free_rectangle : DomainSpec::Shape::rectangle;
    spec.echo = json{{"cols", spec.cols}, {"rows", spec.rows}, {"mesh", spec.mesh}};
    if (free_boundary) spec.echo["free"] = true;
    keys.done();
    return spec;
}

DomainSpec domain_from_echo(const json& echo, bool allow_free) {
    return parse_domain_spec(echo, echo.value("mesh", 1.0), "the stored domain echo", allow_free);
}

// ---------------------------------------------------------------------------
// Observable evaluation modes.

ObservableMode make_mode(const std::string& mode, long long samples, std::uint64_t seed,
                         std::uint64_t stream) {
    if (mode == "exact") return ExactMode{};
    return MonteCarloMode{samples, seed, stream};
}

std::string take_mode(Keys& keys, const char* fallback) {
    const std::string mode =
        as_string(keys.take_or("mode", json(fallback)), "mode", keys.context());
    if (mode != "exact" && mode != "monte-carlo")
        fail("field 'mode' in " + keys.context() + " must be \"exact\" or \"monte-carlo\"");
    return mode;
}

// ---------------------------------------------------------------------------
// Output plumbing.

class OutputWriter {
  public:
    explicit OutputWriter(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw std::runtime_error("cannot create output directory '" + dir + "'");
    }
    std::ofstream open(const std::string& name) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open output file '" + name + "'");
        out << std::setprecision(17);
        files_.push_back(name);
        return out;
    }
    void write_json(const std::string& name, const json& payload) {
        std::ofstream out = open(name);
        out << payload.dump(2) << '\n';
    }
    const std::vector<std::string>& files() const { return files_; }

  private:
    fs::path dir_;
    std::vector<std::string> files_;
};

json verdict(const char* id, bool pass, const std::string& detail) {
    return json{{"id", id}, {"pass", pass}, {"detail", detail}};
}

std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

struct KindResult {
    json summary;
    json acceptance = json::array();
};

// ---------------------------------------------------------------------------
// kind = observable / decompose

json validate_observable(Keys& keys, double mesh) {
    json params;
    params["domain"] =
        parse_domain_spec(keys.take("domain"), mesh, "the 'domain' object", false).echo;
    const std::string mode = take_mode(keys, "monte-carlo");
    params["mode"] = mode;
    if (mode == "monte-carlo")
        params["samples"] = as_count(keys.take("samples"), "samples", keys.context());
    return params;
}

KindResult run_observable(const json& p, OutputWriter& out) {
    const DobrushinDomain domain = domain_from_echo(p.at("domain"), false).build();
    const std::string mode = p.at("mode").get<std::string>();
    const long long samples = mode == "exact" ? 0 : p.at("samples").get<long long>();
    const ObservableField field =
        edge_observable(domain, make_mode(mode, samples, p.at("seed").get<std::uint64_t>(), 0));
    const VertexField vertices = vertex_observable(field);
    {
        std::ofstream f = out.open("edges.csv");
        write_field_csv(field, f);
    }
    {
        std::ofstream f = out.open("vertices.csv");
        write_vertex_field_csv(vertices, f);
    }
    double max_modulus = 0.0;
    for (const Complex& v : field.values) max_modulus = std::max(max_modulus, std::abs(v));
    KindResult result;
    result.summary = json{{"edge_count", domain.edge_count()},
                          {"exact", field.exact},
                          {"samples", field.samples},
                          {"max_modulus", max_modulus}};
    out.write_json("summary.json", result.summary);
    return result;
}

KindResult run_decompose(const json& p, OutputWriter& out) {
    const DobrushinDomain domain = domain_from_echo(p.at("domain"), false).build();
    const std::string mode = p.at("mode").get<std::string>();
    const long long samples = mode == "exact" ? 0 : p.at("samples").get<long long>();
    const std::uint64_t seed = p.at("seed").get<std::uint64_t>();
    const ObservableField field = edge_observable(domain, make_mode(mode, samples, seed, 0));
    const DecomposedField parts = decompose(domain, make_mode(mode, samples, seed, 0));
    double max_deviation = 0.0;
    {
        std::ofstream f = out.open("decompose.csv");
        f << "edge,mid_x,mid_y,f_one_re,f_one_im,f_two_re,f_two_im,f_re,f_im,deviation\n";
        for (int e = 0; e < domain.edge_count(); ++e) {
            const std::size_t i = static_cast<std::size_t>(e);
            const Complex sum = parts.f_one[i] + parts.f_two[i];
            const double deviation = std::abs(sum - field.values[i]);
            max_deviation = std::max(max_deviation, deviation);
            const Complex mid = to_complex(domain.primal_edges[i].mid, domain.mesh);
            f << e << ',' << mid.real() << ',' << mid.imag() << ',' << parts.f_one[i].real()
              << ',' << parts.f_one[i].imag() << ',' << parts.f_two[i].real() << ','
              << parts.f_two[i].imag() << ',' << field.values[i].real() << ','
              << field.values[i].imag() << ',' << deviation << '\n';
        }
    }
    KindResult result;
    result.summary = json{{"edge_count", domain.edge_count()},
                          {"exact", field.exact},
                          {"max_deviation", max_deviation}};
    out.write_json("summary.json", result.summary);
    return result;
}

// ---------------------------------------------------------------------------
// kind = arms

json validate_arms(Keys& keys, double mesh) {
    json params;
    const std::string protocol =
        as_string(keys.take_or("protocol", json("annulus")), "protocol", keys.context());
    params["protocol"] = protocol;
    if (protocol == "annulus") {
        const std::string sequence =
            as_string(keys.take("signature"), "signature", keys.context());
        const std::string geometry = as_string(keys.take_or("geometry", json("half_plane")),
                                               "geometry", keys.context());
        if (geometry != "full_plane" && geometry != "half_plane" && geometry != "quarter_plane")
            fail("field 'geometry' in " + keys.context() +
                 " must be one of full_plane, half_plane, quarter_plane");
        ArmSignature signature{sequence, geometry == "full_plane"
                                             ? ArmGeometry::full_plane
                                             : (geometry == "half_plane"
                                                    ? ArmGeometry::half_plane
                                                    : ArmGeometry::quarter_plane)};
        validate_signature(signature);
        params["signature"] = sequence;
        params["geometry"] = geometry;
        params["radii"] = as_radii(keys.take("radii"), "radii", keys.context());
        params["inner_radius"] = keys.has("inner_radius")
                                     ? as_positive(keys.take("inner_radius"), "inner_radius",
                                                   keys.context())
                                     : 1.0;
        params["samples"] = as_count(keys.take("samples"), "samples", keys.context());
        return params;
    }
    if (protocol != "boundary")
        fail("field 'protocol' in " + keys.context() + " must be \"annulus\" or \"boundary\"");
    const std::vector<double> radii = as_radii(keys.take("radii"), "radii", keys.context());
    params["radii"] = radii;
    params["samples"] = as_count(keys.take("samples"), "samples", keys.context());
    if (keys.has("domain")) {
        const DomainSpec spec =
            parse_domain_spec(keys.take("domain"), mesh, "the 'domain' object", true);
        if (spec.shape != DomainSpec::Shape::free_rectangle)
            fail("the boundary one-arm protocol needs a free rectangle domain");
        if (spec.cols % 2 != 0) fail("the boundary one-arm domain needs an even column count");
        params["domain"] = spec.echo;
    } else {
        const int cols = 2 * (static_cast<int>(std::ceil(radii.back())) + 32);
        params["domain"] = json{{"cols", cols}, {"rows", 4}, {"mesh", mesh}, {"free", true}};
    }
    return params;
}

KindResult run_arms(const json& p, OutputWriter& out) {
    KindResult result;
    const std::uint64_t seed = p.at("seed").get<std::uint64_t>();
    if (p.at("protocol") == "annulus") {
        const std::string sequence = p.at("signature").get<std::string>();
        const std::string geometry = p.at("geometry").get<std::string>();
        const ArmSignature signature{
            sequence, geometry == "full_plane"
                          ? ArmGeometry::full_plane
                          : (geometry == "half_plane" ? ArmGeometry::half_plane
                                                      : ArmGeometry::quarter_plane)};
        const std::vector<double> radii = p.at("radii").get<std::vector<double>>();
        const int samples = static_cast<int>(p.at("samples").get<long long>());
        const double inner = p.at("inner_radius").get<double>();
        RngStream rng(seed, 0);
        const ArmEstimate estimate = estimate_exponent(signature, radii, samples, rng, inner);
        {
            std::ofstream f = out.open("arms.csv");
            write_arm_csv(estimate, f);
        }
        const json fit = json::parse(arm_fit_json(estimate));
        out.write_json("arm_fit.json", fit);
        result.summary = fit;
        result.summary["protocol"] = "annulus";
        const bool three_arm_protocol =
            sequence == "010" && signature.geometry == ArmGeometry::half_plane &&
            inner == 4.0 && samples >= 10000 &&
            std::includes(radii.begin(), radii.end(), std::vector<double>{16, 32, 64}.begin(),
                          std::vector<double>{16, 32, 64}.end());
        if (three_arm_protocol) {
            const bool pass = std::fabs(estimate.exponent - 2.0) <= 0.2;
            result.acceptance.push_back(
                verdict("AC-5", pass,
                        "half-plane three-arm exponent " + format_double(estimate.exponent) +
                            " vs 2 within 0.2 (se " + format_double(estimate.std_error) + ")"));
        }
        return result;
    }
    const DomainSpec spec = domain_from_echo(p.at("domain"), true);
    const DobrushinDomain domain = spec.build();
    const std::vector<double> radii = p.at("radii").get<std::vector<double>>();
    const long long samples = p.at("samples").get<long long>();
    const HalfPoint anchor{spec.cols, 0};
    std::vector<double> values;
    std::vector<ProbabilityEstimate> estimates;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        estimates.push_back(boundary_one_arm(domain, anchor, radii[i] * spec.mesh,
                                             MonteCarloMode{samples, seed, i}));
        values.push_back(estimates.back().value);
    }
    const PowerLawFit fit = fit_power_law(radii, values);
    {
        std::ofstream f = out.open("arms.csv");
        f << "radius,hits,trials,value,std_error\n";
        for (std::size_t i = 0; i < radii.size(); ++i)
            f << radii[i] << ',' << estimates[i].hits << ',' << estimates[i].trials << ','
              << estimates[i].value << ',' << estimates[i].std_error << '\n';
    }
    result.summary = json{{"protocol", "boundary"},
                          {"exponent", fit.exponent},
                          {"std_error", fit.std_error},
                          {"radii", radii},
                          {"values", values},
                          {"samples", samples}};
    out.write_json("arm_fit.json", result.summary);
    const std::vector<double> wanted{8, 16, 32, 64, 128};
    if (samples >= 10000 &&
        std::includes(radii.begin(), radii.end(), wanted.begin(), wanted.end())) {
        const bool pass = std::fabs(fit.exponent - 1.0 / 3.0) <= 0.05;
        result.acceptance.push_back(
            verdict("AC-4", pass,
                    "boundary one-arm exponent " + format_double(fit.exponent) +
                        " vs 1/3 within 0.05 (se " + format_double(fit.std_error) + ")"));
    }
    return result;
}

// ---------------------------------------------------------------------------
// kind = cardy

long long free_rectangle_edges(int cols, int rows) {
    return 2LL * cols * rows + cols + rows;
}

json validate_cardy(Keys& keys) {
    json params;
    int cols = 0;
    int rows = 0;
    if (keys.has("n")) {
        const int n = as_int_count(keys.take("n"), "n", keys.context());
        cols = n + 1;
        rows = n;
    } else {
        cols = as_int_count(keys.take("cols"), "cols", keys.context());
        rows = as_int_count(keys.take("rows"), "rows", keys.context());
    }
    params["cols"] = cols;
    params["rows"] = rows;
    const std::string mode =
        as_string(keys.take_or("mode", json("monte-carlo")), "mode", keys.context());
    if (mode != "exact" && mode != "monte-carlo" && mode != "both")
        fail("field 'mode' in " + keys.context() +
             " must be \"exact\", \"monte-carlo\", or \"both\"");
    params["mode"] = mode;
    if (mode != "exact")
        params["samples"] = as_count(keys.take("samples"), "samples", keys.context());
    if (mode != "monte-carlo") {
        const int exact_n =
            mode == "both" ? as_int_count(keys.take_or("exact_n", 2), "exact_n", keys.context())
                           : 0;
        const int exact_cols = mode == "both" ? exact_n + 1 : cols;
        const int exact_rows = mode == "both" ? exact_n : rows;
        if (free_rectangle_edges(exact_cols, exact_rows) > 24)
            fail("the exact crossing enumeration is capped at 24 edges; " +
                 std::to_string(exact_cols) + "x" + std::to_string(exact_rows) + " has " +
                 std::to_string(free_rectangle_edges(exact_cols, exact_rows)));
        params["exact_cols"] = exact_cols;
        params["exact_rows"] = exact_rows;
    }
    return params;
}

std::pair<std::uint64_t, std::uint64_t> exact_crossing_count(int cols, int rows, double mesh) {
    const DobrushinDomain domain = build_free_rectangle(cols, rows, mesh);
    const std::vector<int> left = side_vertices(domain, Side::west);
    const std::vector<int> right = side_vertices(domain, Side::east);
    std::uint64_t crossings = 0;
    std::uint64_t total = 0;
    enumerate_configurations(domain, [&](const Configuration& config) {
        crossings += has_open_crossing(config, left, right) ? 1 : 0;
        ++total;
    });
    return {crossings, total};
}

KindResult run_cardy(const json& p, OutputWriter& out) {
    KindResult result;
    const std::string mode = p.at("mode").get<std::string>();
    const double mesh = p.at("mesh").get<double>();
    const std::uint64_t seed = p.at("seed").get<std::uint64_t>();
    json payload;
    std::ofstream csv = out.open("cardy.csv");
    csv << "part,cols,rows,samples,hits,estimate,std_error\n";

    bool exact_pass = false;
    bool exact_ran = false;
    if (mode != "monte-carlo") {
        const int cols = p.at("exact_cols").get<int>();
        const int rows = p.at("exact_rows").get<int>();
        const auto [crossings, total] = exact_crossing_count(cols, rows, mesh);
        const double probability = static_cast<double>(crossings) / static_cast<double>(total);
        payload["exact"] = json{{"cols", cols},
                                {"rows", rows},
                                {"crossings", crossings},
                                {"total", total},
                                {"probability", probability}};
        csv << "exact," << cols << ',' << rows << ',' << total << ',' << crossings << ','
            << probability << ",0\n";
        exact_ran = true;
        exact_pass = crossings * 2 == total;
    }

    bool mc_pass = false;
    bool mc_ran = false;
    double estimate = 0.0;
    double std_error = 0.0;
    if (mode != "exact") {
        const int cols = p.at("cols").get<int>();
        const int rows = p.at("rows").get<int>();
        const long long samples = p.at("samples").get<long long>();
        const int workers = p.at("workers").get<int>();
        const DobrushinDomain domain = build_free_rectangle(cols, rows, mesh);
        const std::vector<int> left = side_vertices(domain, Side::west);
        const std::vector<int> right = side_vertices(domain, Side::east);
        long long hits = 0;
        // Fixed-order merge over worker chunks: chunk w draws from stream w,
        // so the tally is independent of how chunks are scheduled.
        for (int w = 0; w < workers; ++w) {
            const long long chunk =
                samples / workers + (w < static_cast<int>(samples % workers) ? 1 : 0);
            RngStream rng(seed, static_cast<std::uint64_t>(w));
            Configuration config(domain);
            for (long long s = 0; s < chunk; ++s) {
                sample_configuration(config, rng);
                hits += has_open_crossing(config, left, right) ? 1 : 0;
            }
        }
        estimate = static_cast<double>(hits) / static_cast<double>(samples);
        std_error = std::sqrt(estimate * (1.0 - estimate) / static_cast<double>(samples));
        payload["monte_carlo"] = json{{"cols", cols},
                                      {"rows", rows},
                                      {"samples", samples},
                                      {"hits", hits},
                                      {"estimate", estimate},
                                      {"std_error", std_error}};
        csv << "monte-carlo," << cols << ',' << rows << ',' << samples << ',' << hits << ','
            << estimate << ',' << std_error << '\n';
        mc_ran = true;
        mc_pass = std::fabs(estimate - 0.5) <= 3.0 * std_error;
    }
    out.write_json("cardy.json", payload);
    result.summary = payload;

    const bool mc_matches_criterion =
        mc_ran && p.at("rows").get<int>() >= 32 && p.at("samples").get<long long>() >= 100000;
    if (mc_matches_criterion || (exact_ran && p.value("exact_rows", 0) == 2)) {
        std::string detail;
        bool pass = true;
        if (exact_ran) {
            detail += "exact " + std::to_string(p.at("exact_cols").get<int>()) + "x" +
                      std::to_string(p.at("exact_rows").get<int>()) +
                      (exact_pass ? " crossing = 1/2 exactly" : " crossing differs from 1/2");
            pass = pass && exact_pass;
        }
        if (mc_ran) {
            if (!detail.empty()) detail += "; ";
            detail += "sampled crossing " + format_double(estimate) + " within 3 sigma (se " +
                      format_double(std_error) + ") of 1/2";
            pass = pass && mc_pass;
        }
        if (!mc_matches_criterion) {
            detail += "; sampled half of the criterion not run at acceptance scale";
            pass = false;
        }
        result.acceptance.push_back(verdict("AC-3", pass, detail));
    }
    return result;
}

// ---------------------------------------------------------------------------
// kind = driving

json validate_driving(Keys& keys, double mesh) {
    json params;
    json domain_echo;
    if (keys.has("domain")) {
        const DomainSpec spec =
            parse_domain_spec(keys.take("domain"), mesh, "the 'domain' object", false);
        if (spec.shape != DomainSpec::Shape::rectangle)
            fail("the driving experiment needs a {cols, rows} rectangle domain");
        domain_echo = spec.echo;
    } else {
        domain_echo = json{{"cols", 512}, {"rows", 256}, {"mesh", mesh}};
    }
    const int cols = domain_echo.at("cols").get<int>();
    const int rows = domain_echo.at("rows").get<int>();
    const double domain_mesh = domain_echo.at("mesh").get<double>();
    if (cols % 2 != 0) fail("the driving rectangle needs an even column count");
    if (cols < 2 * rows) fail("the driving rectangle must be at least twice as wide as tall");
    if (rows < 2) fail("the driving rectangle must be at least two rows tall");
    params["domain"] = domain_echo;
    params["curves"] = as_int_count(keys.take_or("curves", 200), "curves", keys.context());
    if (params["curves"].get<int>() < 30)
        fail("the diffusivity fit needs at least 30 curves");
    const double default_radius =
        0.5 * domain_mesh * std::min(static_cast<double>(cols) / 2.0 - 0.5,
                                     static_cast<double>(rows));
    const double stop_radius =
        keys.has("stop_radius") ? as_positive(keys.take("stop_radius"), "stop_radius",
                                              keys.context())
                                : default_radius;
    params["stop_radius"] = stop_radius;
    params["capacity_step"] =
        keys.has("capacity_step")
            ? as_positive(keys.take("capacity_step"), "capacity_step", keys.context())
            : 1e-3 * stop_radius * stop_radius;
    params["thin_spacing"] = keys.has("thin_spacing")
                                 ? as_positive(keys.take("thin_spacing"), "thin_spacing",
                                               keys.context())
                                 : 2.2 * domain_mesh;
    params["write_drivings"] =
        keys.has("write_drivings") ? as_bool(keys.take("write_drivings"), "write_drivings",
                                             keys.context())
                                   : true;
    return params;
}

KindResult run_driving(const json& p, OutputWriter& out) {
    const json& domain_echo = p.at("domain");
    const int cols = domain_echo.at("cols").get<int>();
    const int rows = domain_echo.at("rows").get<int>();
    const double mesh = domain_echo.at("mesh").get<double>();
    BoundarySpec boundary;
    boundary.segments = {{cols / 2, 0}, {cols / 2, 0}, {0, rows}, {-cols, 0}, {0, -rows}};
    boundary.a_index = 1;  // the shared corner of the two bottom segments: bottom-center
    boundary.b_index = 0;  // bottom-left corner; the wired arc is the bottom-left segment
    boundary.mesh = mesh;
    const DobrushinDomain domain = build_condition_c_domain(boundary);

    const int curves = p.at("curves").get<int>();
    const double stop_radius = p.at("stop_radius").get<double>();
    const double capacity_step = p.at("capacity_step").get<double>();
    const double thin_spacing = p.at("thin_spacing").get<double>();
    const bool write_drivings = p.at("write_drivings").get<bool>();
    const std::uint64_t seed = p.at("seed").get<std::uint64_t>();

    std::vector<DrivingFunction> drivings;
    drivings.reserve(static_cast<std::size_t>(curves));
    json totals = json::array();
    for (int i = 0; i < curves; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        const Configuration config = sample_configuration(domain, rng);
        const ExplorationPath path = trace_exploration(config);
        const std::vector<Complex> embedded = half_plane_embed(path, stop_radius);
        const std::vector<Complex> thin = thin_polyline(embedded, thin_spacing);
        drivings.push_back(extract_driving(thin, capacity_step, DrivingSource::percolation));
        totals.push_back(drivings.back().total_capacity);
        if (write_drivings) {
            std::ostringstream name;
            name << "driving_" << std::setw(4) << std::setfill('0') << i << ".csv";
            std::ofstream f = out.open(name.str());
            write_driving_csv(drivings.back(), f);
        }
    }
    const KappaEstimate estimate = estimate_kappa(drivings);
    json payload = json::parse(kappa_report_json(estimate));
    payload["capacity_step"] = capacity_step;
    payload["stop_radius"] = stop_radius;
    payload["thin_spacing"] = thin_spacing;
    payload["total_capacities"] = totals;
    out.write_json("kappa.json", payload);

    KindResult result;
    result.summary = json{{"kappa", estimate.kappa},
                          {"std_error", estimate.std_error},
                          {"curves", estimate.curve_count},
                          {"fit_points", estimate.fit_points}};
    if (cols >= 512 && rows >= 256 && curves >= 200) {
        const bool pass = std::fabs(estimate.kappa - 6.0) <= 1.0;
        result.acceptance.push_back(
            verdict("AC-6", pass,
                    "zipper diffusivity " + format_double(estimate.kappa) +
                        " vs 6 within 1 (se " + format_double(estimate.std_error) + ", " +
                        std::to_string(curves) + " curves)"));
    }
    return result;
}

// ---------------------------------------------------------------------------
// kind = walks

json validate_walks(Keys& keys) {
    json params;
    json lengths = keys.take_or("lengths", json::array({100, 1000, 10000, 100000}));
    if (!lengths.is_array() || lengths.size() < 2)
        fail("field 'lengths' in " + keys.context() + " must be an array of at least two lengths");
    std::vector<long long> values;
    for (const json& v : lengths) values.push_back(as_count(v, "lengths", keys.context()));
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1])
            fail("field 'lengths' in " + keys.context() + " must be strictly increasing");
    if (values.front() < 10) fail("walk lengths below 10 have no stable winding scale");
    params["lengths"] = values;
    params["walks"] = as_count(keys.take_or("walks", 1000), "walks", keys.context());
    return params;
}

KindResult run_walks(const json& p, OutputWriter& out) {
    const std::vector<long long> lengths = p.at("lengths").get<std::vector<long long>>();
    const long long walks = p.at("walks").get<long long>();
    const std::uint64_t seed = p.at("seed").get<std::uint64_t>();
    const GridPointSet far{{1000000, 1000000}};
    const std::complex<double> center(0.5, 0.5);

    json rows = json::array();
    std::vector<double> ratios;
    std::vector<double> ratio_errors;
    std::ofstream csv = out.open("walks.csv");
    csv << "n,walks,mean_sup_sq,std_error_mean,ratio,ratio_std_error\n";
    for (std::size_t li = 0; li < lengths.size(); ++li) {
        const long long n = lengths[li];
        double sum = 0.0;
        double sum_sq = 0.0;
        for (long long w = 0; w < walks; ++w) {
            RngStream rng(seed, li * 1000000ull + static_cast<std::uint64_t>(w));
            const WalkPath walk = run_walk({0, 0}, far, rng, n);
            const std::vector<double> winding = walk_winding(walk, center);
            double sup = 0.0;
            for (const double angle : winding) sup = std::max(sup, angle * angle);
            sum += sup;
            sum_sq += sup * sup;
        }
        const double count = static_cast<double>(walks);
        const double mean = sum / count;
        const double variance = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
        const double se_mean = std::sqrt(variance / count);
        const double log_n = std::log(static_cast<double>(n));
        const double ratio = mean / (log_n * log_n);
        const double ratio_se = se_mean / (log_n * log_n);
        ratios.push_back(ratio);
        ratio_errors.push_back(ratio_se);
        csv << n << ',' << walks << ',' << mean << ',' << se_mean << ',' << ratio << ','
            << ratio_se << '\n';
        rows.push_back(json{{"n", n},
                            {"walks", walks},
                            {"mean_sup_sq", mean},
                            {"std_error_mean", se_mean},
                            {"ratio", ratio},
                            {"ratio_std_error", ratio_se}});
    }
    KindResult result;
    result.summary = json{{"rows", rows}};
    out.write_json("walks.json", result.summary);

    const std::vector<long long> wanted{100, 1000, 10000, 100000};
    const bool covers = std::includes(lengths.begin(), lengths.end(), wanted.begin(),
                                      wanted.end());
    if (covers && walks >= 1000) {
        bool bounded = true;
        for (const double r : ratios) bounded = bounded && r < 2.0;
        bool monotone = true;
        const std::size_t start = static_cast<std::size_t>(
            std::find(lengths.begin(), lengths.end(), 1000ll) - lengths.begin());
        for (std::size_t i = start; i + 1 < ratios.size(); ++i) {
            const double slack = 2.0 * std::sqrt(ratio_errors[i] * ratio_errors[i] +
                                                 ratio_errors[i + 1] * ratio_errors[i + 1]);
            monotone = monotone && ratios[i + 1] <= ratios[i] + slack;
        }
        std::string listed;
        for (const double r : ratios) listed += (listed.empty() ? "" : ", ") + format_double(r);
        result.acceptance.push_back(
            verdict("AC-8", bounded && monotone,
                    "winding sup ratios {" + listed +
                        "} bounded by 2 and non-increasing from n=1000 within 2 sigma"));
    }
    return result;
}

// ---------------------------------------------------------------------------
// kind = enumerate-check

json default_fixtures() {
    return json::array(
        {json{{"name", "rect-2x2"}, {"domain", json{{"cols", 2}, {"rows", 2}, {"mesh", 1.0}}}},
         json{{"name", "rect-2x3"}, {"domain", json{{"cols", 2}, {"rows", 3}, {"mesh", 1.0}}}},
         json{{"name", "l-shape"},
              {"domain",
               json{{"segments",
                     json::array({json::array({4, 0}), json::array({0, 2}), json::array({-2, 0}),
                                  json::array({0, 2}), json::array({-2, 0}),
                                  json::array({0, -4})})},
                    {"a_index", 0},
                    {"b_index", 2},
                    {"mesh", 1.0},
                    {"min_segment_length", 1.0}}}}});
}

json validate_enumerate_check(Keys& keys, double mesh) {
    json params;
    const json fixtures_in = keys.take_or("fixtures", default_fixtures());
    if (!fixtures_in.is_array() || fixtures_in.empty())
        fail("field 'fixtures' in " + keys.context() + " must be a nonempty array");
    json fixtures = json::array();
    std::set<std::string> names;
    for (const json& fixture : fixtures_in) {
        Keys fk(fixture, "a fixture entry");
        const std::string name = as_string(fk.take("name"), "name", "a fixture entry");
        if (!names.insert(name).second) fail("duplicate fixture name '" + name + "'");
        const DomainSpec spec =
            parse_domain_spec(fk.take("domain"), mesh, "fixture '" + name + "'", false);
        fk.done();
        fixtures.push_back(json{{"name", name}, {"domain", spec.echo}});
    }
    params["fixtures"] = fixtures;
    const json checks_in =
        keys.take_or("checks", json::array({"cauchy-riemann", "partition"}));
    if (!checks_in.is_array() || checks_in.empty())
        fail("field 'checks' in " + keys.context() + " must be a nonempty array");
    std::set<std::string> checks;
    for (const json& c : checks_in) {
        const std::string name = as_string(c, "checks", keys.context());
        if (name != "cauchy-riemann" && name != "partition" && name != "martingale")
            fail("unknown check '" + name +
                 "'; valid checks: cauchy-riemann, partition, martingale");
        checks.insert(name);
    }
    params["checks"] = json(checks);
    return params;
}

KindResult run_enumerate_check(const json& p, OutputWriter& out) {
    const std::set<std::string> checks = p.at("checks").get<std::set<std::string>>();
    json fixtures = json::array();
    bool all_pass = true;
    std::set<std::string> names;
    bool martingale_on_2x3 = false;
    double worst_cr = 0.0;
    double worst_partition = 0.0;
    double worst_martingale = 0.0;
    for (const json& fixture : p.at("fixtures")) {
        const std::string name = fixture.at("name").get<std::string>();
        names.insert(name);
        const DobrushinDomain domain = domain_from_echo(fixture.at("domain"), false).build();
        if (domain.free_count() > 24)
            fail("fixture '" + name + "' has " + std::to_string(domain.free_count()) +
                 " free edges; the exact checks are capped at 24");
        json entry{{"name", name}, {"free_edges", domain.free_count()}};
        bool pass = true;
        if (checks.count("cauchy-riemann") != 0) {
            const ObservableField field = edge_observable(domain, ExactMode{});
            double worst = 0.0;
            for (const int v : interior_medial_vertices(domain))
                worst = std::max(worst, std::abs(cr_residual(field, v)));
            entry["cr_residual_max"] = worst;
            pass = pass && worst < 1e-12;
            worst_cr = std::max(worst_cr, worst);
        }
        if (checks.count("partition") != 0) {
            const ObservableField field = edge_observable(domain, ExactMode{});
            const DecomposedField parts = decompose(domain, ExactMode{});
            double worst = 0.0;
            for (int e = 0; e < domain.edge_count(); ++e) {
                const std::size_t i = static_cast<std::size_t>(e);
                worst = std::max(worst,
                                 std::abs(parts.f_one[i] + parts.f_two[i] - field.values[i]));
            }
            entry["partition_deviation_max"] = worst;
            pass = pass && worst < 1e-12;
            worst_partition = std::max(worst_partition, worst);
        }
        if (checks.count("martingale") != 0) {
            if (domain.free_count() > 12)
                fail("fixture '" + name +
                     "' is too large for the martingale audit (12 free edges at most)");
            const double worst = martingale_max_deviation(domain);
            entry["martingale_deviation_max"] = worst;
            pass = pass && worst < 1e-12;
            worst_martingale = std::max(worst_martingale, worst);
            const json& echo = fixture.at("domain");
            if (echo.contains("cols") && echo.at("cols").get<int>() == 2 &&
                echo.at("rows").get<int>() == 3)
                martingale_on_2x3 = true;
        }
        entry["pass"] = pass;
        all_pass = all_pass && pass;
        fixtures.push_back(entry);
    }
    KindResult result;
    result.summary = json{{"fixtures", fixtures}, {"pass", all_pass}};
    out.write_json("enumerate_check.json", result.summary);

    const bool canonical = names.count("rect-2x2") != 0 && names.count("rect-2x3") != 0 &&
                           names.count("l-shape") != 0;
    if (checks.count("cauchy-riemann") != 0 && canonical)
        result.acceptance.push_back(
            verdict("AC-1", worst_cr < 1e-12,
                    "max discrete relation residual " + format_double(worst_cr) +
                        " across fixtures, bound 1e-12"));
    if (checks.count("partition") != 0 && canonical)
        result.acceptance.push_back(
            verdict("AC-2", worst_partition < 1e-12,
                    "max single/double-visit partition deviation " +
                        format_double(worst_partition) + " across fixtures, bound 1e-12"));
    if (checks.count("martingale") != 0 && martingale_on_2x3)
        result.acceptance.push_back(
            verdict("AC-9", worst_martingale < 1e-12,
                    "max slit-observable vs conditional-average deviation " +
                        format_double(worst_martingale) + " on the 2x3 fixture, bound 1e-12"));
    return result;
}

// ---------------------------------------------------------------------------
// kind = c-delta

json validate_c_delta(Keys& keys, double mesh) {
    json params;
    json primary;
    if (keys.has("domain")) {
        const DomainSpec spec =
            parse_domain_spec(keys.take("domain"), mesh, "the 'domain' object", false);
        primary = spec.echo;
    } else {
        primary = json{{"cols", 16}, {"rows", 16}, {"mesh", 1.0 / 16.0}};
    }
    params["domain"] = primary;
    if (keys.has("compare")) {
        const json compare_in = keys.take("compare");
        if (compare_in.is_null()) {
            params["compare"] = nullptr;
        } else {
            const DomainSpec spec =
                parse_domain_spec(compare_in, mesh, "the 'compare' object", false);
            params["compare"] = spec.echo;
        }
    } else {
        params["compare"] = json{{"cols", 32}, {"rows", 32}, {"mesh", 1.0 / 32.0}};
    }
    params["mode"] = take_mode(keys, "monte-carlo");
    if (params["mode"] == "monte-carlo")
        params["samples"] = as_count(keys.take("samples"), "samples", keys.context());
    return params;
}

KindResult run_c_delta(const json& p, OutputWriter& out) {
    const std::string mode = p.at("mode").get<std::string>();
    const long long samples = mode == "exact" ? 0 : p.at("samples").get<long long>();
    const std::uint64_t seed = p.at("seed").get<std::uint64_t>();

    const auto evaluate = [&](const json& echo, std::uint64_t stream) {
        const DobrushinDomain domain = domain_from_echo(echo, false).build();
        return estimate_c_delta(domain, make_mode(mode, samples, seed, stream));
    };
    const CDeltaEstimate primary = evaluate(p.at("domain"), 0);
    json payload;
    payload["primary"] = json{{"cols", p.at("domain").at("cols")},
                              {"rows", p.at("domain").at("rows")},
                              {"mesh", p.at("domain").at("mesh")},
                              {"value", primary.value},
                              {"std_error", primary.std_error}};
    std::ofstream csv = out.open("c_delta.csv");
    csv << "label,cols,rows,mesh,value,std_error\n";
    csv << "primary," << p.at("domain").at("cols").get<int>() << ','
        << p.at("domain").at("rows").get<int>() << ',' << p.at("domain").at("mesh").get<double>()
        << ',' << primary.value << ',' << primary.std_error << '\n';

    KindResult result;
    if (!p.at("compare").is_null()) {
        const CDeltaEstimate other = evaluate(p.at("compare"), 1);
        payload["compare"] = json{{"cols", p.at("compare").at("cols")},
                                  {"rows", p.at("compare").at("rows")},
                                  {"mesh", p.at("compare").at("mesh")},
                                  {"value", other.value},
                                  {"std_error", other.std_error}};
        csv << "compare," << p.at("compare").at("cols").get<int>() << ','
            << p.at("compare").at("rows").get<int>() << ','
            << p.at("compare").at("mesh").get<double>() << ',' << other.value << ','
            << other.std_error << '\n';
        if (other.value != 0.0) {
            const double ratio = primary.value / other.value;
            const double rel =
                std::sqrt(std::pow(primary.std_error / primary.value, 2) +
                          std::pow(other.std_error / other.value, 2));
            const double ratio_se = std::fabs(ratio) * rel;
            payload["ratio"] = ratio;
            payload["ratio_std_error"] = ratio_se;
            const bool positive = primary.value > 0.0 && other.value > 0.0;
            const bool in_band = ratio + ratio_se >= 0.8 && ratio - ratio_se <= 1.2;
            if (mode == "monte-carlo" && samples >= 20000)
                result.acceptance.push_back(verdict(
                    "AC-10", positive && in_band,
                    "corner integrals " + format_double(primary.value) + " and " +
                        format_double(other.value) + " positive, ratio " + format_double(ratio) +
                        " inside [0.8, 1.2] within one combined sigma (" +
                        format_double(ratio_se) + ")"));
        }
    }
    out.write_json("c_delta.json", payload);
    result.summary = payload;
    return result;
}

// ---------------------------------------------------------------------------
// kind = compare (observable against the harmonic strip-map oracle)

json validate_compare(Keys& keys) {
    json params;
    const int cols = as_int_count(keys.take_or("cols", 64), "cols", keys.context());
    const int rows = as_int_count(keys.take_or("rows", 32), "rows", keys.context());
    if (cols < 16 || rows < 8) fail("the comparison rectangle must be at least 16x8");
    params["cols"] = cols;
    params["rows"] = rows;
    params["samples"] = as_count(keys.take_or("samples", 1000000), "samples", keys.context());
    const int probes = as_int_count(keys.take_or("probes", 5), "probes", keys.context());
    if (probes < 2 || probes > 9) fail("field 'probes' must lie between 2 and 9");
    params["probes"] = probes;
    return params;
}

double wrapped_angle_gap(double a, double b) {
    return std::fabs(std::remainder(a - b, 2.0 * std::numbers::pi));
}

KindResult run_compare(const json& p, OutputWriter& out) {
    const int cols = p.at("cols").get<int>();
    const int rows = p.at("rows").get<int>();
    const long long samples = p.at("samples").get<long long>();
    const int probes = p.at("probes").get<int>();
    const double mesh = p.at("mesh").get<double>();
    const std::uint64_t seed = p.at("seed").get<std::uint64_t>();

    // Sampled observable on the coarse grid and on the half-mesh grid.
    const DobrushinDomain coarse = build_rectangle_domain(cols, rows, mesh);
    const ObservableField coarse_field =
        edge_observable(coarse, MonteCarloMode{samples, seed, 0});
    const VertexField coarse_vertices = vertex_observable(coarse_field);
    const DobrushinDomain fine = build_rectangle_domain(2 * cols, 2 * rows, mesh / 2.0);
    const ObservableField fine_field = edge_observable(fine, MonteCarloMode{samples, seed, 1});
    const VertexField fine_vertices = vertex_observable(fine_field);

    // Continuum oracle: the derivative of the strip map, reconstructed from
    // the discrete Dirichlet solution with the wired arc held at 1.
    const LatticeRegion region = LatticeRegion::rectangle(cols, rows);
    std::vector<double> boundary_values;
    boundary_values.reserve(region.boundary().size());
    for (const GridPoint b : region.boundary())
        boundary_values.push_back((b.y == rows || b.x == 0) ? 1.0 : 0.0);
    const HarmonicSolution solution = solve_dirichlet(region, boundary_values);
    const StripDerivativeField oracle =
        strip_map_derivative(solution, mesh, GridPoint{0, 0}, GridPoint{cols, rows});

    const auto coarse_value = [&](GridPoint v) {
        const int e = coarse.edge_at({2 * v.x + 1, 2 * v.y});
        return coarse_vertices.values[static_cast<std::size_t>(e)];
    };

    // Phase audit over the compact core.
    std::vector<double> gaps;
    for (std::size_t i = 0; i < oracle.vertices.size(); ++i) {
        const GridPoint v = oracle.vertices[i];
        if (4 * v.x < cols || 4 * v.x > 3 * cols || 4 * v.y < rows || 4 * v.y > 3 * rows)
            continue;
        const Complex f = coarse_value(v);
        if (std::abs(f) == 0.0) continue;
        gaps.push_back(wrapped_angle_gap(3.0 * std::arg(f), std::arg(oracle.derivative[i])));
    }
    if (gaps.empty()) throw std::runtime_error("the comparison core contains no probe vertices");
    std::vector<double> sorted = gaps;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    {
        std::ofstream f = out.open("phase_gaps.csv");
        f << "x,y,gap\n";
        std::size_t k = 0;
        for (std::size_t i = 0; i < oracle.vertices.size(); ++i) {
            const GridPoint v = oracle.vertices[i];
            if (4 * v.x < cols || 4 * v.x > 3 * cols || 4 * v.y < rows || 4 * v.y > 3 * rows)
                continue;
            if (std::abs(coarse_value(v)) == 0.0) continue;
            f << v.x << ',' << v.y << ',' << gaps[k++] << '\n';
        }
    }

    // Modulus refinement at matched midline probes: each coarse edge
    // midpoint is compared against the mean of the two half-mesh edges that
    // flank the same physical point.
    const double target = std::pow(2.0, -1.0 / 3.0);
    json probe_rows = json::array();
    bool moduli_pass = true;
    {
        std::ofstream f = out.open("compare.csv");
        f << "x,y,coarse_modulus,fine_modulus,ratio,target\n";
        const int y = rows / 2;
        std::set<int> xs;
        for (int k = 0; k < probes; ++k)
            xs.insert(cols / 4 + static_cast<int>(std::lround(
                                      static_cast<double>(k) * (cols / 2.0) /
                                      static_cast<double>(probes - 1))));
        for (const int x : xs) {
            const double coarse_mod = std::abs(coarse_value({x, y}));
            const int e_west = fine.edge_at({4 * x + 1, 4 * y});
            const int e_east = fine.edge_at({4 * x + 3, 4 * y});
            const double fine_mod =
                0.5 * (std::abs(fine_vertices.values[static_cast<std::size_t>(e_west)]) +
                       std::abs(fine_vertices.values[static_cast<std::size_t>(e_east)]));
            const double ratio = fine_mod / coarse_mod;
            moduli_pass = moduli_pass && ratio >= 0.9 * target && ratio <= 1.1 * target;
            f << x << ',' << y << ',' << coarse_mod << ',' << fine_mod << ',' << ratio << ','
              << target << '\n';
            probe_rows.push_back(json{{"x", x},
                                      {"y", y},
                                      {"coarse_modulus", coarse_mod},
                                      {"fine_modulus", fine_mod},
                                      {"ratio", ratio}});
        }
    }

    KindResult result;
    result.summary = json{{"phase_median", median},
                          {"phase_samples", gaps.size()},
                          {"modulus_probes", probe_rows},
                          {"ratio_target", target}};
    out.write_json("compare.json", result.summary);
    if (cols >= 64 && samples >= 1000000) {
        const bool pass = median < 0.15 && moduli_pass;
        result.acceptance.push_back(
            verdict("AC-7", pass,
                    "phase gap median " + format_double(median) +
                        " rad (bound 0.15) over " + std::to_string(gaps.size()) +
                        " core vertices; half-mesh modulus ratios within 10% of 2^(-1/3)"));
    }
    return result;
}

// ---------------------------------------------------------------------------

const std::set<std::string>& known_kinds() {
    static const std::set<std::string> kinds{"observable",      "decompose", "arms",
                                             "cardy",           "driving",   "walks",
                                             "enumerate-check", "c-delta",   "compare"};
    return kinds;
}

std::string hex16(std::uint64_t value) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << value;
    return s.str();
}

void locate_parse_error(const std::string& text, std::size_t byte, int& line, int& column) {
    line = 1;
    column = 1;
    const std::size_t stop = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
}

}  // namespace

std::uint64_t fnv1a_hash(std::string_view text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (const char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ull;
    }
    return hash;
}

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& output_root) {
    json document;
    try {
        document = json::parse(json_text);
    } catch (const json::parse_error& e) {
        int line = 1;
        int column = 1;
        locate_parse_error(json_text, e.byte, line, column);
        throw ConfigError(std::string("malformed JSON: ") + e.what(), line, column);
    }
    Keys keys(document, "the config");
    const std::string kind = as_string(keys.take("kind"), "kind", "the config");
    if (known_kinds().count(kind) == 0) {
        std::string valid;
        for (const std::string& k : known_kinds()) valid += (valid.empty() ? "" : ", ") + k;
        fail("unknown experiment kind '" + kind + "'; valid kinds: " + valid);
    }
    const std::uint64_t seed = as_seed(keys.take_or("seed", 0), "the config");
    const int workers = as_int_count(keys.take_or("workers", 1), "workers", "the config");
    if (workers > 256) fail("field 'workers' in the config must be at most 256");
    const double mesh = as_positive(keys.take_or("mesh", 1.0), "mesh", "the config");
    const std::string output_dir = as_string(keys.take_or("output_dir", json(kind + "-run")),
                                             "output_dir", "the config");
    if (output_dir.empty()) fail("field 'output_dir' in the config must not be empty");

    json params;
    if (kind == "observable" || kind == "decompose") {
        params = validate_observable(keys, mesh);
        if (kind == "decompose" && params["mode"] == "monte-carlo") {
            // Monte Carlo decomposition is allowed; exact stays the default.
        }
    } else if (kind == "arms") {
        params = validate_arms(keys, mesh);
    } else if (kind == "cardy") {
        params = validate_cardy(keys);
    } else if (kind == "driving") {
        params = validate_driving(keys, mesh);
    } else if (kind == "walks") {
        params = validate_walks(keys);
    } else if (kind == "enumerate-check") {
        params = validate_enumerate_check(keys, mesh);
    } else if (kind == "c-delta") {
        params = validate_c_delta(keys, mesh);
    } else {
        params = validate_compare(keys);
    }
    keys.done();

    params["kind"] = kind;
    params["seed"] = seed;
    params["workers"] = workers;
    params["mesh"] = mesh;
    params["output_dir"] = output_dir;

    fs::path dir(output_dir);
    if (dir.is_relative()) dir = fs::path(output_root) / dir;

    ExperimentConfig config;
    config.kind = kind;
    config.parameters = params;
    config.output_dir = dir.string();
    return config;
}

RunOutcome run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    OutputWriter out(config.output_dir);
    const json& p = config.parameters;
    KindResult result;
    if (config.kind == "observable") {
        result = run_observable(p, out);
    } else if (config.kind == "decompose") {
        result = run_decompose(p, out);
    } else if (config.kind == "arms") {
        result = run_arms(p, out);
    } else if (config.kind == "cardy") {
        result = run_cardy(p, out);
    } else if (config.kind == "driving") {
        result = run_driving(p, out);
    } else if (config.kind == "walks") {
        result = run_walks(p, out);
    } else if (config.kind == "enumerate-check") {
        result = run_enumerate_check(p, out);
    } else if (config.kind == "c-delta") {
        result = run_c_delta(p, out);
    } else if (config.kind == "compare") {
        result = run_compare(p, out);
    } else {
        fail("unknown experiment kind '" + config.kind + "'");
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json manifest;
    manifest["config_hash"] = hex16(fnv1a_hash(config.parameters.dump()));
    manifest["code_version"] = kCodeVersion;
    manifest["wall_time_seconds"] = wall;
    manifest["parameters"] = config.parameters;
    std::vector<std::string> files = out.files();
    files.push_back("manifest.json");
    manifest["files"] = files;
    manifest["summary"] = result.summary;
    manifest["acceptance"] = result.acceptance;
    {
        std::ofstream f(fs::path(config.output_dir) / "manifest.json",
                        std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write the run manifest");
        f << manifest.dump(2) << '\n';
    }

    RunOutcome outcome;
    outcome.output_dir = config.output_dir;
    outcome.files = files;
    outcome.summary = result.summary;
    outcome.acceptance = result.acceptance;
    return outcome;
}

namespace {

json load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read manifest '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("unreadable manifest '" + path.string() + "': " + e.what());
    }
}

}  // namespace

std::string report_runs(const std::string& directory) {
    const fs::path root(directory);
    std::vector<std::pair<std::string, json>> runs;
    if (fs::exists(root / "manifest.json")) {
        runs.emplace_back(root.filename().string(), load_manifest(root / "manifest.json"));
    } else if (fs::is_directory(root)) {
        std::vector<fs::path> candidates;
        for (const auto& entry : fs::directory_iterator(root))
            if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
                candidates.push_back(entry.path());
        std::sort(candidates.begin(), candidates.end());
        for (const fs::path& run_dir : candidates)
            runs.emplace_back(run_dir.filename().string(),
                              load_manifest(run_dir / "manifest.json"));
    }
    if (runs.empty())
        throw ConfigError("no run manifest found under '" + directory + "'");

    std::ostringstream out;
    std::vector<std::pair<std::string, std::string>> table;
    for (const auto& [name, manifest] : runs) {
        const std::string kind = manifest.value("parameters", json::object()).value("kind", "?");
        out << "run " << name << ": kind=" << kind << "  config="
            << manifest.value("config_hash", std::string("?")) << "  version="
            << manifest.value("code_version", std::string("?")) << "  wall="
            << format_double(manifest.value("wall_time_seconds", 0.0)) << "s\n";
        std::string criteria;
        const json acceptance = manifest.value("acceptance", json::array());
        if (acceptance.empty()) {
            out << "  (no acceptance criteria evaluated)\n";
            criteria = "-";
        } else {
            for (const json& entry : acceptance) {
                const std::string id = entry.value("id", "?");
                const bool pass = entry.value("pass", false);
                out << "  " << id << ' ' << (pass ? "PASS" : "FAIL") << "  "
                    << entry.value("detail", "") << '\n';
                criteria += (criteria.empty() ? "" : "; ") + id + ' ' +
                            (pass ? "PASS" : "FAIL");
            }
        }
        table.emplace_back(name + "  [" + kind + "]", criteria);
    }
    if (runs.size() > 1) {
        std::size_t width = 0;
        for (const auto& [label, criteria] : table) width = std::max(width, label.size());
        out << '\n' << std::left << std::setw(static_cast<int>(width) + 2) << "run"
            << "acceptance\n";
        for (const auto& [label, criteria] : table)
            out << std::left << std::setw(static_cast<int>(width) + 2) << label << criteria
                << '\n';
    }
    return out.str();
}

double martingale_max_deviation(const DobrushinDomain& domain) {
    if (domain.kind != BoundaryKind::dobrushin || domain.a_medial == kAbsent)
        throw std::invalid_argument("the martingale audit needs a Dobrushin domain");
    if (domain.free_count() > 12)
        throw std::invalid_argument(
            "the martingale audit enumerates every prefix; 12 free edges at most");

    // One enumeration pass caches, per configuration, the edge bits and the
    // per-edge phase contribution exp(i W(e, exit) / 3).
    struct Record {
        std::vector<std::uint64_t> bits;
        std::vector<Complex> phase;
    };
    std::vector<Record> records;
    std::map<std::vector<int>, std::size_t> distinct_paths;
    enumerate_configurations(domain, [&](const Configuration& config) {
        const ExplorationPath path = trace_exploration(config);
        Record record;
        record.bits = config.bits;
        record.phase.assign(domain.medial_edges.size(), Complex{0.0, 0.0});
        for (std::size_t m = 0; m < domain.medial_edges.size(); ++m) {
            if (path.traversal_index[m] < 0) continue;
            record.phase[m] =
                std::polar(1.0, winding(path, static_cast<int>(m), domain.e_b_edge) / 3.0);
        }
        distinct_paths.emplace(path.edge_sequence, records.size());
        records.push_back(std::move(record));
    });

    double max_deviation = 0.0;
    std::set<std::vector<std::pair<int, bool>>> seen;
    for (const auto& [sequence, index] : distinct_paths) {
        Configuration representative(domain);
        representative.bits = records[index].bits;
        const ExplorationPath path = trace_exploration(representative);
        for (int n = 0; n < static_cast<int>(path.steps.size()); ++n) {
            const SlitDomain slit = slit_after(domain, path, n);
            if (!seen.insert(slit.revealed).second) continue;
            const ObservableField conditional = slit_observable(slit, ExactMode{});
            std::vector<Complex> direct(domain.medial_edges.size(), Complex{0.0, 0.0});
            long long kept = 0;
            for (const Record& record : records) {
                bool match = true;
                for (const auto& [edge, status] : slit.revealed) {
                    const bool open =
                        (record.bits[static_cast<std::size_t>(edge) >> 6] >> (edge & 63)) & 1u;
                    if (open != status) {
                        match = false;
                        break;
                    }
                }
                if (!match) continue;
                ++kept;
                for (std::size_t m = 0; m < direct.size(); ++m) direct[m] += record.phase[m];
            }
            if (kept == 0) throw std::runtime_error("a revealed prefix matched no configuration");
            for (std::size_t m = 0; m < direct.size(); ++m)
                max_deviation =
                    std::max(max_deviation, std::abs(conditional.values[m] -
                                                     direct[m] / static_cast<double>(kept)));
        }
    }
    return max_deviation;
}

}  // namespace perc
