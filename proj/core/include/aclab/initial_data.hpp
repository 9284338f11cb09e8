#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aclab/geometry.hpp"
#include "aclab/potential.hpp"

namespace aclab {

struct InterfaceSpec {
    enum class Kind { Line, Circle, Polyline, None };
    Kind kind = Kind::Line;
    // line through `point` with direction at `angle_deg` from the x axis (90 = vertical)
    Vec2 point{0.0, 0.0};
    double angle_deg = 90.0;
    // circle
    Vec2 center{0.0, 0.0};
    double radius = 0.5;
    // polyline with Chaikin corner cutting
    std::vector<Vec2> vertices;
    int smoothing = 0;
    // +1: u > 0 on the side the unit normal points to (outside the circle)
    int orientation = 1;
    // uniform noise added to u0 before clamping to [-1, 1]
    double noise = 0.0;
    std::uint64_t seed = 0;
    // bend the distance field in the collar so that it meets the boundary at 90 degrees
    bool collar_correction = true;
    // reject interfaces meeting the boundary further than 15 degrees from orthogonal
    bool check_transversality = true;

    static InterfaceSpec vertical_line(double x0);
    static InterfaceSpec line(Vec2 point, double angle_deg);
    static InterfaceSpec circle(Vec2 center, double radius);
    static InterfaceSpec polyline(std::vector<Vec2> pts, int smoothing);
    // no interface: u0 = orientation
    static InterfaceSpec none(int orientation = 1);

    std::string describe() const;
};

// Signed distance to the interface (no collar correction).
double interface_distance(const InterfaceSpec& s, Vec2 x);

// Grid field d_Gamma over active and ghost cells (0 elsewhere).
std::vector<double> signed_distance_to_interface(const DomainGeometry& g, const InterfaceSpec& s);

struct BoundaryCrossing {
    Vec2 p;
    double angle_deg = 0.0;  // between the interface and the boundary, 90 = orthogonal
};
// Crossings of the raw interface with the boundary loops.
std::vector<BoundaryCrossing> interface_crossings(const DomainGeometry& g, const InterfaceSpec& s);

struct AssumptionLine {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
    Vec2 witness;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionLine> lines;
    bool ok() const;
    const AssumptionLine* find(const std::string& name) const;
    std::string to_string() const;
};

struct PreparedField {
    std::vector<double> u;
    std::vector<double> d_gamma;
    double eps = 0.0;
    double lambda = 0.6;
    double D0 = 0.0;
    double c_gradient = 0.0;     // measured sup eps |grad u0|
    double c_discrepancy = 0.0;  // measured sup xi^+ eps^lambda
    AssumptionReport report;
    std::vector<std::string> warnings;
};

struct AssumptionOptions {
    double lambda = 0.6;
    // reference constant for the discrepancy bound sup xi^+ <= c eps^(-lambda)
    double discrepancy_constant = 1.0;
};

// u0 = q(d_Gamma / eps), clamped to +-1 in the far field.
PreparedField prepare(const DomainGeometry& g, const PotentialSpec& p, const InterfaceSpec& s, double eps,
                      const AssumptionOptions& opt = {});

// L-infinity bound, density ratio D0, gradient bound, discrepancy bound, Neumann residual.
AssumptionReport verify_assumptions(PreparedField& f, const DomainGeometry& g, const PotentialSpec& p,
                                    const AssumptionOptions& opt = {});

}  // namespace aclab
