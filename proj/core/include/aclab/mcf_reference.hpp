#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aclab/contour.hpp"
#include "aclab/geometry.hpp"
#include "aclab/solver.hpp"

namespace aclab {

// Parametric curve moved by curvature. Open fronts keep their endpoints on the
// boundary and meet it at 90 degrees.
struct Front {
    std::vector<Vec2> nodes;
    bool closed = false;
    double t = 0.0;
    double spacing = 0.0;  // target node spacing
    long steps = 0;
    bool extinct = false;

    static Front circle(Vec2 c, double R, double spacing);
    // straight segment a-b, resampled at the given spacing
    static Front chord(Vec2 a, Vec2 b, double spacing);
    Polyline polyline() const { return {nodes, closed}; }
    double length() const;
    // signed area of a closed front
    double area() const;
    double min_spacing() const;
    double max_spacing() const;
};

struct FrontOptions {
    int resample_every = 10;
    double safety = 0.2;  // dt <= safety * (min spacing)^2
};

// Advance by dt with internal substeps. Sets extinct once fewer than 6 nodes remain.
Front evolve_front(const Front& fr, double dt, const DomainGeometry& g, const FrontOptions& opt = {});
// Arclength resampling through a Catmull-Rom interpolant of the nodes.
Front resample(const Front& fr, double spacing);
// max over constrained endpoints of |angle to the boundary - 90| in degrees (0 for closed fronts)
double endpoint_orthogonality_defect(const Front& fr, const DomainGeometry& g);

// Pieces of pl inside Omega, cut at the boundary crossings.
std::vector<Polyline> clip_to_domain(const Polyline& pl, const DomainGeometry& g);
// Zero set of u inside Omega.
std::vector<Polyline> interior_zero_set(const DomainGeometry& g, const std::vector<double>& u);
// Longest interior zero-set piece as a front; open pieces are constrained to the boundary.
Front front_from_field(const DomainGeometry& g, const std::vector<double>& u, double spacing);

// Symmetric Hausdorff distance between a front and the interior zero set of u.
// +inf when the zero set is empty.
double hausdorff_distance(const Front& fr, const PhaseField& f, const DomainGeometry& g);
double hausdorff_distance(const Polyline& a, const std::vector<Polyline>& b);

// mean distance of the zero set from c
double zero_set_radius(const DomainGeometry& g, const std::vector<double>& u, Vec2 c);

// CSV rows "t,node,x,y"
void write_front_csv_header(std::ostream& os);
void write_front_csv(std::ostream& os, const Front& fr);

}  // namespace aclab
