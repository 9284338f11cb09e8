#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aclab/contour.hpp"
#include "aclab/level_set.hpp"
#include "aclab/types.hpp"

namespace aclab {

struct DomainSpec {
    enum class Kind { Disk, Flower, Capsule, Custom };
    Kind kind = Kind::Disk;
    double radius = 1.0;                           // disk
    double r0 = 1.0, amplitude = 0.2;              // flower
    int petals = 3;
    double length = 2.0, width = 1.0;              // capsule
    std::string expression;                        // custom, phi < 0 inside
    std::optional<Box> bbox;                       // required for custom

    static DomainSpec disk(double R);
    static DomainSpec flower(double r0, double a, int k);
    static DomainSpec capsule(double length, double width);
    static DomainSpec custom(std::string expr, Box box);

    std::unique_ptr<Shape> make_shape() const;
    std::string describe() const;
};

enum class CellKind : char { Inside = 'i', Ghost = 'g', Outside = 'o' };

struct BoundaryNode {
    Vec2 p;            // on the boundary
    double weight;     // trapezoidal arclength weight
    Vec2 normal;       // outward unit normal
    double curvature;  // positive where convex
};

// Ghost value = interpolation of interior values at the mirror point.
struct GhostCell {
    int cell = -1;
    Vec2 mirror;
    int nb[4] = {-1, -1, -1, -1};
    double w[4] = {0, 0, 0, 0};
    int count = 0;
};

struct ReflectionCheck {
    bool skipped = false;
    std::string reason;
    double lhs = 0.0;      // |x~ - y|
    double bound_a = 0.0;  // 2 |x - y~|
    double bound_b = 0.0;  // (1 + 12 kappa |x~ - y|) |x - y~|
    double slack_a = 0.0;  // bound_a - lhs
    double slack_b = 0.0;
    bool violated = false;  // slack below -4h
};

class DomainGeometry {
public:
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int cells() const { return nx_ * ny_; }
    double h() const { return h_; }
    int index(int i, int j) const { return j * nx_ + i; }
    int col(int c) const { return c % nx_; }
    int row(int c) const { return c / nx_; }
    Vec2 center(int i, int j) const { return {x0_ + i * h_, y0_ + j * h_}; }
    Vec2 center(int c) const { return center(col(c), row(c)); }
    // cell containing x, or -1
    int locate(Vec2 x) const;

    const std::vector<double>& distance() const { return dist_; }
    const std::vector<CellKind>& kind() const { return kind_; }
    // active: the cell has positive inside area
    bool active(int c) const { return kind_[c] == CellKind::Inside; }
    // control volume an active cell belongs to (cells below half volume are merged)
    int master(int c) const { return master_[static_cast<size_t>(c)]; }
    const std::vector<int>& active_cells() const { return active_; }
    // centroid of cell cap Omega, and of the control volume the cell belongs to
    Vec2 centroid(int c) const { return centroid_[static_cast<size_t>(c)]; }
    Vec2 cv_centroid(int c) const { return cv_centroid_[static_cast<size_t>(c)]; }
    const std::vector<double>& volume_fraction() const { return vol_; }
    // aperture of the face between (i,j) and (i+1,j), stored at (i,j)
    const std::vector<double>& aperture_x() const { return apx_; }
    // aperture of the face between (i,j) and (i,j+1), stored at (i,j)
    const std::vector<double>& aperture_y() const { return apy_; }
    const std::vector<GhostCell>& ghosts() const { return ghosts_; }

    bool has_projection(int c) const { return has_proj_[c] != 0; }
    Vec2 cell_projection(int c) const { return proj_[c]; }
    Vec2 cell_reflection(int c) const { return proj_[c] * 2.0 - center(c); }

    double kappa() const { return kappa_; }
    double c2() const { return c2_; }
    double clearance() const { return clearance_; }
    double band() const { return band_; }
    const std::vector<BoundaryNode>& boundary() const { return bnodes_; }
    const std::vector<Polyline>& boundary_loops() const { return loops_; }
    double boundary_length() const;
    const Shape& shape() const { return *shape_; }
    const DomainSpec& spec() const { return spec_; }

    // Exact signed distance for points near the boundary, grid interpolation elsewhere.
    double signed_distance(Vec2 x) const;
    // Unique nearest boundary point; throws ValidationError outside N_{6 c2}.
    Vec2 nearest_point(Vec2 x) const;
    Vec2 reflect(Vec2 x) const { return nearest_point(x) * 2.0 - x; }
    // Outward unit normal at the nearest boundary point.
    Vec2 normal(Vec2 x) const;

    std::vector<int> ball_mask(Vec2 a, double r) const;
    std::vector<int> reflected_ball_mask(Vec2 a, double r) const;
    ReflectionCheck reflection_inequality_check(Vec2 x, Vec2 y) const;

    // Bilinear weights over active cells around x, renormalized.
    int interpolation_stencil(Vec2 x, int nb[4], double w[4]) const;

    void dump(std::ostream& os) const;

private:
    friend DomainGeometry build_domain(const DomainSpec& spec, double h);

    Vec2 guess_point(Vec2 x, double* dist = nullptr) const;

    DomainSpec spec_;
    std::shared_ptr<const Shape> shape_;
    int nx_ = 0, ny_ = 0;
    double h_ = 0.0, x0_ = 0.0, y0_ = 0.0;
    std::vector<double> dist_, vol_, apx_, apy_;
    std::vector<Vec2> centroid_, cv_centroid_;
    std::vector<CellKind> kind_;
    std::vector<int> active_, master_;
    std::vector<char> has_proj_;
    std::vector<Vec2> proj_;
    std::vector<GhostCell> ghosts_;
    std::vector<Polyline> loops_;
    std::vector<BoundaryNode> bnodes_;
    double kappa_ = 0.0, c2_ = 0.0, clearance_ = 0.0, band_ = 0.0;

    // bucket grid over boundary segments for nearest-point guesses
    struct SegRef {
        int loop, i;
    };
    double bucket_ = 0.0, bx0_ = 0.0, by0_ = 0.0;
    int bnx_ = 0, bny_ = 0;
    std::vector<std::vector<SegRef>> buckets_;
};

DomainGeometry build_domain(const DomainSpec& spec, double h);

// Ghost values from the active cells around each mirror point, exact for
// locally constant fields.
void fill_ghost_values(const DomainGeometry& g, std::vector<double>& u);

}  // namespace aclab
