#pragma once

#include <string>
#include <vector>

#include "finsler/billiard.hpp"
#include "finsler/linespace.hpp"

namespace finsler {

// A 1-parameter family of rays out of a source point: m directions uniform
// on [0, 2pi) starting at `offset`, each propagated through n reflections.
struct Pencil {
    Point2 source;
    int bounces{1};    // n >= 0; n = 0 is the pencil of lines itself
    int samples{2048}; // m >= 512
    double offset{0.0};
};

struct CuspInfo {
    double s;
    double alpha;
    double p;
    Point2 point;  // envelope point of the cusp
};

struct CausticReport {
    int n{0};
    int samples{0};
    int cusp_count{0};
    int winding{0};
    bool segre_ok{false};
    bool degenerate{false};
    std::vector<CuspInfo> cusps;
    std::vector<double> non_generic;   // tangential det zeros, not counted
    int distinct_source_lines{0};      // distinct initial lines through cusps
    Point2 collapse_point{0.0, 0.0};   // meaningful when degenerate
    double envelope_extent{0.0};       // bbox diameter of the envelope
    std::vector<Point2> envelope;
    DualCurve dual;
    int segre_probes{0};
    int segre_interior_witnesses{0};
    int segre_failed_probes{0};
};

struct CausticOptions {
    int probe_grid{20};       // probes per axis for the Segre check
    unsigned workers{0};      // 0 = hardware default; output is unaffected
    bool run_segre{true};
    int max_doublings{2};     // automatic m-doubling on crowded cusp pairs
};

// Propagates the pencil and assembles the closed dual curve of final lines,
// alpha unwrapped continuously in the pencil direction. Grazing samples are
// dropped and their gap refined by local resampling; more than 1% failures
// or an unbridgeable gap aborts with PencilBroken.
DualCurve dual_curve(const BilliardTable& table, const Pencil& pencil,
                     unsigned workers = 0);

// Envelope point of the line family at each sample:
// E = p n(alpha) + (dp/dalpha) d(alpha), with the derivative from the
// splines; where alpha'(s) ~ 0 the point comes from intersecting the two
// neighbouring sampled lines.
std::vector<Point2> envelope_points(const DualCurve& curve);

// Same, but throws DegenerateEnvelope when the envelope collapses below
// 1e-6 of the given scene scale.
std::vector<Point2> envelope(const DualCurve& curve, double scene_scale = 1.0);

// Transversal det zeros with the envelope-velocity cross-check: the count of
// direction reversals of the envelope polyline must agree, else
// CuspCountMismatch. Returns the zero parameters.
std::vector<double> cusp_parameters(const DualCurve& curve);

struct SegreCheck {
    bool all_met{false};
    int probes{0};
    int interior_witnesses{0};
    std::vector<int> failed_probes;       // indices into the probe grid
    std::vector<int> unverified_witnesses;
};

// Probes the dual curve against the sine-curve "lines" of a grid of points
// covering interior, boundary-adjacent and exterior positions up to 3x the
// table diameter. Interior witnesses are certified as genuine n-bounce shots
// by reseeding the critical-point solver with the witness trajectory.
SegreCheck segre_check(const DualCurve& curve, const BilliardTable& table,
                       const Pencil& pencil, int probe_grid = 20);

// Full pipeline: pencil -> dual curve -> winding, cusps, envelope, Segre.
// Degenerate caustics are reported (collapse point, extent), never asserted
// against.
CausticReport four_cusp_verify(const BilliardTable& table, Point2 source,
                               int bounces, int samples,
                               const CausticOptions& opts = {});

// Envelope CSV: header "s,x,y".
void write_envelope_csv(const std::string& path, const DualCurve& curve,
                        const std::vector<Point2>& envelope);

// Report JSON: {n, cusp_count, winding, segre_ok, degenerate, cusps:[...],
// envelope_csv} plus scene metadata.
void write_caustic_report_json(const std::string& path,
                               const CausticReport& report,
                               const std::string& envelope_csv,
                               const std::string& table_spec,
                               const std::string& metric_spec,
                               Point2 source, const std::string& figure_tag);

}  // namespace finsler
