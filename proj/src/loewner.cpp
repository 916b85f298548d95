#include "perc/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>
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

double standard_gaussian(RngStream& rng) {
    const double u1 = 1.0 - rng.uniform01();  // (0, 1]
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Mapping-out of a vertical slit of capacity dt4/4 based at the origin:
// u(z) = z * sqrt(1 + dt4 / z^2) ~ z at infinity. The product form keeps
// the analytic branch on the upper half-plane and the correct sign on
// both real half-axes.
Complex vertical_out(Complex z, double dt4) {
    return z * std::sqrt(Complex(1, 0) + dt4 / (z * z));
}

// Geometry of the straight slit from the origin to the point w in the
// open upper half-plane: the forward map (x + p)^(1-alpha) (x - q)^alpha
// with (1 - alpha) p = alpha q sends the upper half-plane onto its
// complement, the interval [-p, q] onto the two slit sides, and the
// critical point (1 - alpha) q - alpha p onto the tip w.
struct SlitFit {
    double alpha = 0;  // slit angle divided by pi
    double p = 0;
    double q = 0;
    double dt = 0;  // half-plane capacity of the slit
    double dw = 0;  // driving increment: preimage of the tip
};

SlitFit fit_slit(Complex w) {
    SlitFit f;
    f.alpha = std::arg(w) / std::numbers::pi;
    const double a = f.alpha;
    // (1 - a)^(1 - a) * a^a = slit length / (p + q).
    const double shape = std::exp((1.0 - a) * std::log1p(-a) + a * std::log(a));
    const double s = std::abs(w) / shape;
    f.p = a * s;
    f.q = (1.0 - a) * s;
    f.dt = a * (1.0 - a) * s * s / 4.0;
    f.dw = (1.0 - 2.0 * a) * s;
    return f;
}

Complex slit_forward(Complex x, const SlitFit& f) {
    return (x + f.p) * std::exp(f.alpha * std::log((x - f.q) / (x + f.p)));
}

// Solves slit_forward(x) = target for the unique x in the closed upper
// half-plane. warm carries the solution of a nearby target when available.
Complex slit_inverse(Complex target, const SlitFit& f, Complex warm, bool have_warm) {
    const double s = f.p + f.q;
    const double scale = std::max({std::numeric_limits<double>::min(), s, std::abs(target)});
    const double tol = 1e-14 * scale;
    const double dt4 = 4.0 * f.dt;

    Complex guesses[5];
    int n_guess = 0;
    if (have_warm) guesses[n_guess++] = warm;
    guesses[n_guess++] = vertical_out(target, dt4);
    guesses[n_guess++] = target + Complex(0, 0.5 * s);
    guesses[n_guess++] = target + Complex(0, 2.0 * s);
    guesses[n_guess++] = Complex(0, std::abs(target) + 2.0 * s);

    for (int g = 0; g < n_guess; ++g) {
        Complex x = guesses[g];
        if (x.imag() < 0) x = std::conj(x);
        for (int iter = 0; iter < 60; ++iter) {
            const Complex fx = slit_forward(x, f);
            const Complex residual = fx - target;
            if (std::abs(residual) <= tol) return x;
            const Complex deriv = fx * ((1.0 - f.alpha) / (x + f.p) + f.alpha / (x - f.q));
            if (!(std::abs(deriv) > 0)) break;
            Complex next = x - residual / deriv;
            if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
            // Reflecting a stray iterate is harmless: the map commutes
            // with conjugation, and the solution lies in the closed
            // upper half-plane.
            if (next.imag() < 0) next = std::conj(next);
            x = next;
        }
    }
    throw std::runtime_error("the slit-map inversion did not converge");
}

struct UnzipState {
    std::vector<DrivingSample> raw;  // (capacity, driving) after each slit
    double total_capacity = 0;
};

// Peels the curve off the half-plane one vertex at a time. If tracked is
// non-null the point it designates is transported through every map.
UnzipState unzip(std::span<const Complex> curve, Complex* tracked) {
    check(curve.size() >= 2, "the curve needs at least two vertices");
    check(curve[0].imag() == 0.0, "the curve must start on the real axis");
    for (std::size_t j = 1; j < curve.size(); ++j)
        check(curve[j].imag() > 0.0, "the curve exits the upper half-plane");

    const bool probe_interior = tracked != nullptr && tracked->imag() > 0;
    std::vector<Complex> img(curve.begin() + 1, curve.end());
    double w_cur = curve[0].real();
    double t_cur = 0;

    UnzipState state;
    state.raw.reserve(img.size() + 1);
    state.raw.push_back({0.0, w_cur});

    for (std::size_t k = 0; k < img.size(); ++k) {
        const Complex rel = img[k] - w_cur;
        // Vertices swallowed by the hull of the earlier curve carry no
        // new capacity and are skipped.
        if (!(rel.imag() > 0.0)) continue;
        if (!(std::abs(rel) > 0.0)) continue;

        const SlitFit fit = fit_slit(rel);
        const double dt4 = 4.0 * fit.dt;
        const bool vertical = fit.alpha == 0.5;

        Complex warm;
        bool have_warm = false;
        for (std::size_t j = k + 1; j < img.size(); ++j) {
            if (!(img[j].imag() > 0.0)) continue;  // stays swallowed
            const Complex z = img[j] - w_cur;
            if (vertical) {
                img[j] = w_cur + vertical_out(z, dt4);
            } else {
                const Complex x = slit_inverse(z, fit, warm, have_warm);
                warm = x;
                have_warm = true;
                img[j] = w_cur + x;
            }
        }
        if (tracked != nullptr) {
            const Complex z = *tracked - w_cur;
            if (!(std::abs(z) > 0.0))
                throw std::runtime_error("the probe point was swallowed by the hull");
            *tracked = w_cur + (vertical ? vertical_out(z, dt4)
                                         : slit_inverse(z, fit, warm, have_warm));
            if (probe_interior && !(tracked->imag() > 0.0))
                throw std::runtime_error("the probe point was swallowed by the hull");
        }

        w_cur += fit.dw;
        t_cur += fit.dt;
        if (t_cur > state.raw.back().t) {
            state.raw.push_back({t_cur, w_cur});
        } else {
            state.raw.back().w = w_cur;  // zero-capacity slide: keep the latest
        }
    }
    state.total_capacity = t_cur;
    return state;
}

std::vector<DrivingSample> resample_uniform(const std::vector<DrivingSample>& raw,
                                            double step) {
    const double total = raw.back().t;
    const long long grid_count = static_cast<long long>(std::floor(total / step + 1e-9));
    std::vector<DrivingSample> out;
    out.reserve(static_cast<std::size_t>(grid_count) + 1);
    std::size_t i = 0;
    for (long long j = 0; j <= grid_count; ++j) {
        const double t = step * static_cast<double>(j);
        while (i + 1 < raw.size() && raw[i + 1].t <= t) ++i;
        double w;
        if (i + 1 >= raw.size()) {
            w = raw.back().w;
        } else {
            const double t0 = raw[i].t;
            const double t1 = raw[i + 1].t;
            const double frac = t1 > t0 ? (t - t0) / (t1 - t0) : 1.0;
            w = raw[i].w + frac * (raw[i + 1].w - raw[i].w);
        }
        out.push_back({t, w});
    }
    return out;
}

}  // namespace

DrivingFunction make_driving_function(std::vector<DrivingSample> samples, DrivingSource source,
                                      double capacity_step, double total_capacity,
                                      double synthetic_kappa) {
    check(capacity_step > 0, "the capacity step must be positive");
    check(!samples.empty(), "a driving function needs at least one sample");
    check(samples[0].t == 0.0, "driving samples must start at capacity zero");
    for (std::size_t k = 0; k < samples.size(); ++k) {
        check(std::isfinite(samples[k].w), "driving values must be finite");
        const double expected = capacity_step * static_cast<double>(k);
        check(std::abs(samples[k].t - expected) <= 1e-9 * std::max(capacity_step, expected),
              "driving capacity times must follow the uniform grid");
    }
    check(std::isfinite(total_capacity) &&
              total_capacity >= samples.back().t - 1e-9 * std::max(1.0, samples.back().t),
          "the total capacity cannot fall short of the sampled grid");

    DrivingFunction driving;
    driving.samples = std::move(samples);
    driving.source = source;
    driving.capacity_step = capacity_step;
    driving.total_capacity = total_capacity;
    driving.synthetic_kappa = synthetic_kappa;
    return driving;
}

DrivingFunction extract_driving(std::span<const Complex> curve, double capacity_step,
                                DrivingSource source) {
    check(capacity_step > 0, "the capacity step must be positive");
    UnzipState state = unzip(curve, nullptr);
    return make_driving_function(resample_uniform(state.raw, capacity_step), source,
                                 capacity_step, state.total_capacity);
}

Complex zipper_image(std::span<const Complex> curve, Complex z) {
    check(z.imag() >= 0, "the probe point must lie in the closed upper half-plane");
    Complex tracked = z;
    unzip(curve, &tracked);
    return tracked;
}

std::vector<Complex> sample_sle_trace(double kappa, int n_steps, double dt, RngStream& rng) {
    check(kappa >= 0, "the diffusivity must be nonnegative");
    check(n_steps > 0, "the step count must be positive");
    check(dt > 0, "the time step must be positive");

    const std::size_t n = static_cast<std::size_t>(n_steps);
    std::vector<double> w(n + 1, 0.0);
    const double sigma = std::sqrt(kappa * dt);
    for (std::size_t k = 1; k <= n; ++k) w[k] = w[k - 1] + sigma * standard_gaussian(rng);

    // Reverse flow with one straight slit per step: the slit with capacity
    // dt and driving increment dW has r = dW / (2 sqrt(dt)) and angle
    // alpha*pi with alpha = (1 - r / sqrt(r^2 + 4)) / 2. Each slit is based
    // at the previous driving value, whose plane image is the previous tip,
    // so the trace stays connected.
    std::vector<SlitFit> fits(n);
    std::vector<double> tip_length(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double r = (w[k + 1] - w[k]) / (2.0 * std::sqrt(dt));
        const double beta = 1.0 / (r * r + 4.0);
        const double alpha = 0.5 * (1.0 - r * std::sqrt(beta));
        const double s = 2.0 * std::sqrt(dt / beta);
        SlitFit& f = fits[k];
        f.alpha = alpha;
        f.p = alpha * s;
        f.q = (1.0 - alpha) * s;
        f.dt = dt;
        f.dw = w[k + 1] - w[k];
        tip_length[k] = s * std::exp((1.0 - alpha) * std::log1p(-alpha) + alpha * std::log(alpha));
    }

    std::vector<Complex> points(n + 1);
    points[0] = Complex(0, 0);
    const double floor_im = std::numeric_limits<double>::min();
    for (std::size_t k = 1; k <= n; ++k) {
        Complex z = Complex(w[k - 1], 0) +
                    std::polar(tip_length[k - 1], std::numbers::pi * fits[k - 1].alpha);
        for (std::size_t j = k - 1; j >= 1; --j) {
            Complex rel = z - Complex(w[j - 1], 0);
            if (!(rel.imag() > 0)) rel = Complex(rel.real(), floor_im);
            z = Complex(w[j - 1], 0) + slit_forward(rel, fits[j - 1]);
        }
        // The exact tip lies strictly above the axis; keep rounding from
        // flattening it onto the boundary.
        if (!(z.imag() > 0)) z = Complex(z.real(), floor_im);
        points[k] = z;
    }
    return points;
}

DrivingFunction synthetic_brownian_driving(double kappa, int n_steps, double capacity_step,
                                           RngStream& rng) {
    check(kappa >= 0, "the diffusivity must be nonnegative");
    check(n_steps > 0, "the step count must be positive");
    check(capacity_step > 0, "the capacity step must be positive");

    std::vector<DrivingSample> samples(static_cast<std::size_t>(n_steps) + 1);
    const double sigma = std::sqrt(kappa * capacity_step);
    samples[0] = {0.0, 0.0};
    for (int k = 1; k <= n_steps; ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        samples[i].t = capacity_step * static_cast<double>(k);
        samples[i].w = samples[i - 1].w + sigma * standard_gaussian(rng);
    }
    const double total = capacity_step * static_cast<double>(n_steps);
    return make_driving_function(std::move(samples), DrivingSource::synthetic, capacity_step,
                                 total, kappa);
}

KappaEstimate estimate_kappa(const std::vector<DrivingFunction>& drivings) {
    check(drivings.size() >= 30, "at least 30 driving functions are required");
    const double step = drivings[0].capacity_step;
    check(step > 0, "the capacity step must be positive");

    std::size_t common = std::numeric_limits<std::size_t>::max();
    for (const DrivingFunction& d : drivings) {
        check(std::abs(d.capacity_step - step) <= 1e-12 * step,
              "the driving functions use different capacity steps");
        check(!d.samples.empty() && d.samples[0].t == 0.0,
              "driving samples must start at capacity zero");
        common = std::min(common, d.samples.size());
    }
    check(common >= 2, "the driving functions share no positive-capacity grid time");
    for (const DrivingFunction& d : drivings)
        for (std::size_t k = 0; k < common; ++k) {
            const double expected = step * static_cast<double>(k);
            check(std::abs(d.samples[k].t - expected) <= 1e-9 * std::max(step, expected),
                  "the driving functions do not share a time grid");
        }

    double denom = 0;
    for (std::size_t k = 1; k < common; ++k) {
        const double t = step * static_cast<double>(k);
        denom += t * t;
    }

    std::vector<double> slopes;
    slopes.reserve(drivings.size());
    for (const DrivingFunction& d : drivings) {
        const double w0 = d.samples[0].w;
        double acc = 0;
        for (std::size_t k = 1; k < common; ++k) {
            const double dw = d.samples[k].w - w0;
            acc += (step * static_cast<double>(k)) * dw * dw;
        }
        slopes.push_back(acc / denom);
    }

    const double n = static_cast<double>(slopes.size());
    double mean = 0;
    for (const double s : slopes) mean += s;
    mean /= n;
    double var = 0;
    for (const double s : slopes) var += (s - mean) * (s - mean);
    var /= (n - 1.0);

    KappaEstimate estimate;
    estimate.kappa = mean;
    estimate.std_error = std::sqrt(var / n);
    estimate.curve_count = static_cast<int>(slopes.size());
    estimate.fit_points = static_cast<int>(common - 1);
    return estimate;
}

CurveDistanceReport curve_distance(std::span<const Complex> curve1,
                                   std::span<const Complex> curve2) {
    check(!curve1.empty() && !curve2.empty(), "curve distance needs nonempty polylines");
    const std::size_t n = curve1.size();
    const std::size_t m = curve2.size();
    check(n <= 50'000'000 / m, "the curves are too long for the distance table");

    std::vector<double> table(n * m);
    auto cell = [&](std::size_t i, std::size_t j) -> double& { return table[i * m + j]; };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = std::abs(curve1[i] - curve2[j]);
            double reach;
            if (i == 0 && j == 0)
                reach = d;
            else if (i == 0)
                reach = cell(0, j - 1);
            else if (j == 0)
                reach = cell(i - 1, 0);
            else
                reach = std::min({cell(i - 1, j), cell(i, j - 1), cell(i - 1, j - 1)});
            cell(i, j) = std::max(d, reach);
        }
    }

    CurveDistanceReport report;
    report.value = cell(n - 1, m - 1);
    std::size_t i = n - 1;
    std::size_t j = m - 1;
    report.witness.emplace_back(static_cast<int>(i), static_cast<int>(j));
    while (i > 0 || j > 0) {
        // Any minimal predecessor extends an optimal matching: values never
        // increase along it and every visited pair sits below the total.
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            const double diag = cell(i - 1, j - 1);
            const double up = cell(i - 1, j);
            const double left = cell(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        report.witness.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
    std::reverse(report.witness.begin(), report.witness.end());
    return report;
}

std::vector<Complex> half_plane_embed(const ExplorationPath& path, double stop_radius) {
    check(path.domain != nullptr && !path.steps.empty(), "the path is not attached to a domain");
    const DobrushinDomain& domain = *path.domain;
    check(domain.kind == BoundaryKind::dobrushin && domain.a_medial != kAbsent,
          "the domain must carry the two marked boundary points");

    // The boundary polygon must fill its bounding box: a rectangle.
    const std::vector<HalfPoint>& corners = domain.polygon;
    check(!corners.empty(), "the domain must be a rectangle");
    long long min_x = corners[0].x, max_x = corners[0].x;
    long long min_y = corners[0].y, max_y = corners[0].y;
    long long area2 = 0;
    for (std::size_t i = 0; i < corners.size(); ++i) {
        const HalfPoint c = corners[i];
        const HalfPoint next = corners[(i + 1) % corners.size()];
        min_x = std::min<long long>(min_x, c.x);
        max_x = std::max<long long>(max_x, c.x);
        min_y = std::min<long long>(min_y, c.y);
        max_y = std::max<long long>(max_y, c.y);
        area2 += static_cast<long long>(c.x) * next.y - static_cast<long long>(next.x) * c.y;
    }
    check(area2 == 2 * (max_x - min_x) * (max_y - min_y), "the domain must be a rectangle");
    check(max_x - min_x >= 2 * (max_y - min_y),
          "the rectangle must be at least twice as wide as tall");

    const double mesh = domain.mesh;
    const Complex a_pos = domain.position_of_medial(domain.a_medial);
    const double bottom = 0.5 * mesh * static_cast<double>(min_y);
    check(std::abs(a_pos.imag() - bottom) <= 0.75 * mesh, "the start a must lie on the bottom side");
    const Complex anchor(a_pos.real(), bottom);

    const double height = 0.5 * mesh * static_cast<double>(max_y - min_y);
    const double to_left = a_pos.real() - 0.5 * mesh * static_cast<double>(min_x);
    const double to_right = 0.5 * mesh * static_cast<double>(max_x) - a_pos.real();
    double radius = stop_radius;
    if (radius == 0) radius = 0.5 * std::min({to_left, to_right, height});
    check(radius > 0, "the stop radius must be positive");

    const std::vector<Complex> polyline = path_to_polyline(path);
    std::vector<Complex> out;
    out.reserve(polyline.size());
    out.emplace_back(0, 0);
    const double slack = mesh * (0.5 + 1e-9);
    for (std::size_t j = 1; j < polyline.size(); ++j) {
        const Complex z = polyline[j] - anchor;
        if (std::abs(z) >= radius) break;
        if (!(z.imag() > 0)) continue;  // boundary teeth and touchdowns
        logic_check(z.real() >= -to_left - slack && z.real() <= to_right + slack &&
                        z.imag() <= height + slack,
                    "the embedded path left the domain bounds");
        out.push_back(z);
    }
    check(out.size() >= 2, "the path leaves the stop disc immediately");
    return out;
}

std::vector<Complex> thin_polyline(std::span<const Complex> polyline, double min_spacing) {
    check(!polyline.empty(), "thinning needs a nonempty polyline");
    check(min_spacing >= 0, "the thinning spacing must be nonnegative");
    std::vector<Complex> out;
    out.push_back(polyline[0]);
    for (std::size_t j = 1; j + 1 < polyline.size(); ++j) {
        if (std::abs(polyline[j] - out.back()) >= min_spacing) out.push_back(polyline[j]);
    }
    if (polyline.size() > 1) out.push_back(polyline[polyline.size() - 1]);
    return out;
}

void write_driving_csv(const DrivingFunction& driving, std::ostream& out) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << "t,w\n" << std::setprecision(17);
    for (const DrivingSample& s : driving.samples) out << s.t << ',' << s.w << '\n';
    out.flags(flags);
    out.precision(precision);
}

std::string kappa_report_json(const KappaEstimate& estimate) {
    nlohmann::json j;
    j["kappa"] = estimate.kappa;
    j["std_error"] = estimate.std_error;
    j["curves"] = estimate.curve_count;
    j["fit_points"] = estimate.fit_points;
    return j.dump(2);
}

}  // namespace perc
