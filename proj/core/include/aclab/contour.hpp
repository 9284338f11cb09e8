#pragma once

#include <functional>
#include <vector>

#include "aclab/types.hpp"

namespace aclab {

struct Polyline {
    std::vector<Vec2> pts;
    bool closed = false;
};

// Marching squares for the zero level set of a lattice function.
// Node (i, j) sits at origin + (i h, j h) for 0 <= i < nx, 0 <= j < ny.
// Squares touching an invalid node are skipped, which leaves open polylines.
std::vector<Polyline> contour_lines(int nx, int ny, Vec2 origin, double h, const std::function<double(int, int)>& value,
                                    const std::function<bool(int, int)>& valid = {});

double polyline_length(const Polyline& p);

// Distance from x to a polyline, together with the closest point.
double distance_to_polyline(const Polyline& p, Vec2 x, Vec2* closest = nullptr);

}  // namespace aclab
