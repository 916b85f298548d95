#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perc/exploration.hpp"
#include "perc/rng.hpp"

namespace perc {

// Where a driving function came from.
enum class DrivingSource { percolation, synthetic, slit };

struct DrivingSample {
    double t = 0;  // half-plane capacity
    double w = 0;  // driving value
};

// A chordal driving function sampled on the uniform capacity grid
// t_k = k * capacity_step. total_capacity is the exact capacity of the
// underlying hull (at least the last grid time); synthetic_kappa records
// the diffusivity used to generate synthetic samples, 0 otherwise.
struct DrivingFunction {
    std::vector<DrivingSample> samples;
    DrivingSource source = DrivingSource::slit;
    double capacity_step = 0;
    double total_capacity = 0;
    double synthetic_kappa = 0;
};

// Validating factory: requires a positive step, samples on the grid
// t_k = k * capacity_step starting at 0, and finite driving values.
DrivingFunction make_driving_function(std::vector<DrivingSample> samples,
                                      DrivingSource source, double capacity_step,
                                      double total_capacity, double synthetic_kappa = 0);

// Unzips a curve in the closed upper half-plane (first vertex on the real
// axis, later vertices strictly above it) into a driving function, one
// exact tilted-slit conformal map per vertex, resampled onto the uniform
// capacity grid. Vertices swallowed by the hull of the preceding ones are
// skipped.
DrivingFunction extract_driving(std::span<const Complex> curve, double capacity_step,
                                DrivingSource source = DrivingSource::percolation);

// Image of z under the hydrodynamically normalized map that unzips the
// whole curve. Far from the hull the expansion z + 2T/z + O(z^-2) exposes
// the total capacity T. Throws if z is swallowed by the hull.
Complex zipper_image(std::span<const Complex> curve, Complex z);

// Chordal trace driven by W_t = sqrt(kappa) B_t: the reverse flow is
// solved exactly for piecewise-constant driving (one vertical-slit map per
// step of size dt). Returns the origin followed by the n_steps tip
// positions at capacity times t_k = k * dt.
std::vector<Complex> sample_sle_trace(double kappa, int n_steps, double dt, RngStream& rng);

// Synthetic driving W_t = sqrt(kappa) B_t on the uniform capacity grid
// (n_steps + 1 samples including t = 0).
DrivingFunction synthetic_brownian_driving(double kappa, int n_steps, double capacity_step,
                                           RngStream& rng);

struct KappaEstimate {
    double kappa = 0;
    double std_error = 0;
    int curve_count = 0;
    int fit_points = 0;  // positive-capacity grid points entering the fit
};

// Diffusivity of the driving functions: per curve the through-origin
// least-squares slope of (W_t - W_0)^2 against t over the shared grid
// prefix; reported as the mean slope with its across-curve standard error.
KappaEstimate estimate_kappa(const std::vector<DrivingFunction>& drivings);

// Distance between two curves up to increasing reparametrization of their
// vertex sequences (discrete Frechet distance), with an optimal matching
// as witness: index pairs from (0, 0) to (n-1, m-1), advancing by one in
// either or both curves at each step.
struct CurveDistanceReport {
    double value = 0;
    std::vector<std::pair<int, int>> witness;
};

CurveDistanceReport curve_distance(std::span<const Complex> curve1,
                                   std::span<const Complex> curve2);

// Transplants an exploration path into the upper half-plane: the domain
// must be a rectangle at least twice as wide as tall with the start a on
// the bottom side. The polyline is translated so a becomes the origin,
// vertices on or below the axis are dropped (boundary teeth, touchdowns),
// and the curve is truncated at the first vertex beyond the stop radius
// (default: half the distance from a to the nearest other side).
std::vector<Complex> half_plane_embed(const ExplorationPath& path, double stop_radius = 0);

// Keeps the first vertex, then every vertex at least min_spacing away
// from the previously kept one, and always the last vertex.
std::vector<Complex> thin_polyline(std::span<const Complex> polyline, double min_spacing);

// CSV with header "t,w", one row per sample, full double precision.
void write_driving_csv(const DrivingFunction& driving, std::ostream& out);

std::string kappa_report_json(const KappaEstimate& estimate);

}  // namespace perc
