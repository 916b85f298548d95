#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perc/lattice.hpp"
#include "perc/observables.hpp"
#include "perc/percolation.hpp"
#include "perc/rng.hpp"

namespace perc {

// Where an arm event lives relative to the lattice boundary: annuli around
// an interior vertex, around a vertex on a straight boundary stretch, or
// around a convex boundary corner.
enum class ArmGeometry { full_plane, half_plane, quarter_plane };

const char* geometry_name(ArmGeometry geometry);

// Arm types in counterclockwise order: '1' = an arm of open primal edges,
// '0' = an arm of dual-open edges. Full-plane signatures are read
// cyclically; half- and quarter-plane signatures are read starting from the
// counterclockwise end of the boundary sector.
struct ArmSignature {
    std::string sequence;
    ArmGeometry geometry = ArmGeometry::full_plane;
};

// Rejects sequences that are empty, longer than six arms, or contain
// characters other than '0' and '1'.
void validate_signature(const ArmSignature& signature);

struct ProbabilityEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t hits = 0;
    std::int64_t trials = 0;
};

// Least-squares fit of log p against log r, reported as the decay exponent
// beta in p ~ c * r^(-beta) together with the regression's slope error.
struct PowerLawFit {
    double exponent = 0.0;
    double std_error = 0.0;
};

PowerLawFit fit_power_law(std::span<const double> radii,
                          std::span<const double> probabilities);

// Decides whether the configuration realizes the signature's arm pattern
// between distances inner_radius and outer_radius (in continuum units, whole
// multiples of the mesh) around `center`, a primal vertex in half-units.
// Annuli are square (sup-norm) by default; euclidean_metric switches to
// round ones. Arms of the same type that are adjacent in the signature must
// come from distinct clusters within the annulus, which in particular makes
// them vertex-disjoint.
bool detect_arms(const Configuration& config, HalfPoint center, double inner_radius,
                 double outer_radius, const ArmSignature& signature,
                 bool euclidean_metric = false);

struct ArmEstimate {
    ArmSignature signature;
    double inner_radius = 1.0;
    std::vector<double> radii;
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> totals;
    double exponent = 0.0;
    double std_error = 0.0;
    // Set when theory pins the decay exponent for this signature.
    std::optional<double> reference_exponent;
};

// Samples the arm-event probability on unit-mesh lattices sized to each
// outer radius and fits the decay exponent over the radius scan. The inner
// radius is held fixed (default: one lattice step). Throws when a radius
// records zero events -- the fit needs every point.
ArmEstimate estimate_exponent(const ArmSignature& signature, std::span<const double> radii,
                              int samples_per_radius, RngStream& rng,
                              double inner_radius = 1.0);

// Probability that the dual-open cluster through the dual edge directly
// below `v` -- a vertex on a long straight boundary stretch of the domain --
// reaches sup-norm distance `radius` from v on the far side of the boundary
// line. The far side is rendered as its own critical half-plane strip, so
// the answer depends on the domain only through its mesh; the domain fixes
// the geometry the anchor lives on and must keep v at least `radius` away
// from the nearest boundary corner. At radius = mesh the event is a single
// dual edge and the exact mode returns 1/2 exactly.
ProbabilityEstimate boundary_one_arm(const DobrushinDomain& domain, HalfPoint v,
                                     double radius, const ObservableMode& mode);

// One row per scanned radius: signature,r,R,hits,trials.
void write_arm_csv(const ArmEstimate& estimate, std::ostream& out);

// Fit summary as a JSON object (signature, geometry, radii, counts, totals,
// exponent, std_error, reference_exponent).
std::string arm_fit_json(const ArmEstimate& estimate);

}  // namespace perc
