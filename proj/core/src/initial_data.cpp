#include "aclab/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "aclab/measures.hpp"
#include "aclab/solver.hpp"

namespace aclab {
namespace {

std::vector<Vec2> chaikin(std::vector<Vec2> pts, int iterations) {
    for (int it = 0; it < iterations && pts.size() > 2; ++it) {
        std::vector<Vec2> out;
        out.reserve(pts.size() * 2);
        out.push_back(pts.front());
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            Vec2 a = pts[i], b = pts[i + 1];
            if (i > 0) out.push_back(a * 0.75 + b * 0.25);
            if (i + 2 < pts.size()) out.push_back(a * 0.25 + b * 0.75);
        }
        out.push_back(pts.back());
        pts = std::move(out);
    }
    return pts;
}

double polyline_signed_distance(const std::vector<Vec2>& pts, Vec2 x) {
    double best = std::numeric_limits<double>::infinity();
    double sign = 1.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        Vec2 a = pts[i], b = pts[i + 1], t = b - a;
        double L2 = norm2(t);
        double s = L2 > 0 ? std::clamp(dot(x - a, t) / L2, 0.0, 1.0) : 0.0;
        Vec2 c = a + t * s;
        double d = norm(x - c);
        if (d < best - 1e-14) {
            best = d;
            Vec2 n{t.y, -t.x};
            // at an interior vertex use the averaged normal of both segments
            if (s >= 1.0 && i + 2 < pts.size()) {
                Vec2 t2 = pts[i + 2] - b;
                n = normalized(n) + normalized(Vec2{t2.y, -t2.x});
            } else if (s <= 0.0 && i > 0) {
                Vec2 t0 = a - pts[i - 1];
                n = normalized(n) + normalized(Vec2{t0.y, -t0.x});
            }
            sign = dot(x - c, n) >= 0 ? 1.0 : -1.0;
        }
    }
    return sign * best;
}

}  // namespace

InterfaceSpec InterfaceSpec::vertical_line(double x0) {
    InterfaceSpec s;
    s.kind = Kind::Line;
    s.point = {x0, 0.0};
    s.angle_deg = 90.0;
    return s;
}

InterfaceSpec InterfaceSpec::line(Vec2 point, double angle_deg) {
    InterfaceSpec s;
    s.kind = Kind::Line;
    s.point = point;
    s.angle_deg = angle_deg;
    return s;
}

InterfaceSpec InterfaceSpec::circle(Vec2 center, double radius) {
    if (!(radius > 0)) throw ValidationError("interface circle radius must be positive");
    InterfaceSpec s;
    s.kind = Kind::Circle;
    s.center = center;
    s.radius = radius;
    return s;
}

InterfaceSpec InterfaceSpec::polyline(std::vector<Vec2> pts, int smoothing) {
    if (pts.size() < 2) throw ValidationError("interface polyline needs at least two vertices");
    if (smoothing < 0) throw ValidationError("polyline smoothing must be nonnegative");
    InterfaceSpec s;
    s.kind = Kind::Polyline;
    s.vertices = std::move(pts);
    s.smoothing = smoothing;
    return s;
}

InterfaceSpec InterfaceSpec::none(int orientation) {
    InterfaceSpec s;
    s.kind = Kind::None;
    s.orientation = orientation >= 0 ? 1 : -1;
    return s;
}

std::string InterfaceSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Line: os << "line(point=(" << point.x << "," << point.y << "),angle=" << angle_deg << ")"; break;
        case Kind::Circle: os << "circle(center=(" << center.x << "," << center.y << "),R=" << radius << ")"; break;
        case Kind::Polyline: os << "polyline(n=" << vertices.size() << ",smoothing=" << smoothing << ")"; break;
        case Kind::None: os << "none"; break;
    }
    if (orientation < 0) os << ",flipped";
    if (noise > 0) os << ",noise=" << noise;
    return os.str();
}

double interface_distance(const InterfaceSpec& s, Vec2 x) {
    double o = s.orientation >= 0 ? 1.0 : -1.0;
    switch (s.kind) {
        case InterfaceSpec::Kind::Line: {
            double th = s.angle_deg * kPi / 180.0;
            Vec2 n{std::sin(th), -std::cos(th)};
            return o * dot(x - s.point, n);
        }
        case InterfaceSpec::Kind::Circle: return o * (norm(x - s.center) - s.radius);
        case InterfaceSpec::Kind::Polyline: return o * polyline_signed_distance(chaikin(s.vertices, s.smoothing), x);
        case InterfaceSpec::Kind::None: return o * std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

std::vector<BoundaryCrossing> interface_crossings(const DomainGeometry& g, const InterfaceSpec& s) {
    std::vector<BoundaryCrossing> out;
    if (s.kind == InterfaceSpec::Kind::None) return out;
    const Shape& shape = g.shape();
    for (const Polyline& loop : g.boundary_loops()) {
        const size_t n = loop.pts.size();
        size_t m = loop.closed ? n : n - 1;
        for (size_t i = 0; i < m; ++i) {
            Vec2 a = loop.pts[i], b = loop.pts[(i + 1) % n];
            double da = interface_distance(s, a), db = interface_distance(s, b);
            if ((da < 0) == (db < 0)) continue;
            // bisection along the segment, then back onto the boundary
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                double dm = interface_distance(s, a + (b - a) * mid);
                if ((dm < 0) == (da < 0)) lo = mid;
                else hi = mid;
            }
            Vec2 p = shape.pull_to_zero(a + (b - a) * (0.5 * (lo + hi)));
            double del = 1e-6 * std::max(1.0, norm(p));
            Vec2 gi{(interface_distance(s, p + Vec2{del, 0}) - interface_distance(s, p - Vec2{del, 0})) / (2 * del),
                    (interface_distance(s, p + Vec2{0, del}) - interface_distance(s, p - Vec2{0, del})) / (2 * del)};
            Vec2 nu = shape.unit_normal(p);
            double c = std::min(1.0, std::fabs(dot(normalized(gi), nu)));
            out.push_back({p, std::acos(c) * 180.0 / kPi});
        }
    }
    return out;
}

std::vector<double> signed_distance_to_interface(const DomainGeometry& g, const InterfaceSpec& s) {
    std::vector<double> d(static_cast<size_t>(g.cells()), 0.0);
    if (s.kind == InterfaceSpec::Kind::None) {
        for (int c = 0; c < g.cells(); ++c)
            if (g.kind()[static_cast<size_t>(c)] != CellKind::Outside)
                d[static_cast<size_t>(c)] = s.orientation >= 0 ? 1e300 : -1e300;
        return d;
    }
    if (s.check_transversality) {
        for (const auto& x : interface_crossings(g, s)) {
            if (std::fabs(x.angle_deg - 90.0) > 15.0) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "interface meets the boundary at %.2f degrees near (%.4f, %.4f); need 90 +- 15",
                              x.angle_deg, x.p.x, x.p.y);
                throw ValidationError(buf);
            }
        }
    }
    const double half = 0.5 * g.c2();
    double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
    for (int c = 0; c < g.cells(); ++c) {
        size_t uc = static_cast<size_t>(c);
        if (g.kind()[uc] == CellKind::Outside) continue;
        Vec2 x = g.center(c);
        double dom = g.distance()[uc];
        double v;
        if (s.collar_correction && std::fabs(dom) < half && g.has_projection(c)) {
            // copy the value from the inner collar edge along the normal
            Vec2 xi = g.cell_projection(c);
            Vec2 nu = g.shape().unit_normal(xi);
            v = interface_distance(s, xi - nu * half);
        } else {
            v = interface_distance(s, x);
        }
        d[uc] = v;
        if (g.active(c)) {
            dmin = std::min(dmin, v);
            dmax = std::max(dmax, v);
        }
    }
    if (dmin > g.h() || dmax < -g.h()) throw ValidationError("interface does not intersect the domain");
    return d;
}

bool AssumptionReport::ok() const {
    return std::all_of(lines.begin(), lines.end(), [](const AssumptionLine& l) { return l.pass; });
}

const AssumptionLine* AssumptionReport::find(const std::string& name) const {
    for (const auto& l : lines)
        if (l.name == name) return &l;
    return nullptr;
}

std::string AssumptionReport::to_string() const {
    std::string out;
    char buf[320];
    for (const auto& l : lines) {
        std::snprintf(buf, sizeof buf, "%-4s %-22s value=%.6g bound=%.6g witness=(%.4f, %.4f) %s\n", l.pass ? "PASS" : "FAIL",
                      l.name.c_str(), l.value, l.bound, l.witness.x, l.witness.y, l.detail.c_str());
        out += buf;
    }
    return out;
}

PreparedField prepare(const DomainGeometry& g, const PotentialSpec& p, const InterfaceSpec& s, double eps,
                      const AssumptionOptions& opt) {
    if (!(eps >= 4.0 * g.h() * (1 - 1e-12))) throw ValidationError("interface under-resolved: need eps >= 4h");
    if (!(opt.lambda >= 0.6 - 1e-12 && opt.lambda < 1.0)) throw ValidationError("lambda must lie in [3/5, 1)");
    StandingWave wave(p);
    PreparedField f;
    f.eps = eps;
    f.lambda = opt.lambda;
    f.d_gamma = signed_distance_to_interface(g, s);
    f.u.assign(f.d_gamma.size(), 0.0);
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int c : g.active_cells()) {
        size_t uc = static_cast<size_t>(c);
        double v = wave.q(f.d_gamma[uc] / eps);
        if (s.noise > 0) v = std::clamp(v + s.noise * unif(rng), -1.0, 1.0);
        f.u[uc] = v;
    }
    fill_ghost_values(g, f.u);
    for (const GhostCell& gc : g.ghosts()) f.u[static_cast<size_t>(gc.cell)] = std::clamp(f.u[static_cast<size_t>(gc.cell)], -1.0, 1.0);
    verify_assumptions(f, g, p, opt);
    for (const auto& l : f.report.lines)
        if (!l.pass) f.warnings.push_back("assumption " + l.name + " violated: value " + std::to_string(l.value) +
                                          " vs bound " + std::to_string(l.bound));
    return f;
}

AssumptionReport verify_assumptions(PreparedField& f, const DomainGeometry& g, const PotentialSpec& p,
                                    const AssumptionOptions& opt) {
    AssumptionReport rep;
    const double eps = f.eps, h = g.h();
    Solver solver(g, p, eps, StepPolicy{Scheme::SemiImplicit, 0.2, 0.0});
    PhaseField pf = solver.make_field(f.u);
    const PotentialBounds pb = potential_bounds(p);
    const double sigma = StandingWave(p).sigma();

    {
        AssumptionLine l{"max_abs_u", 0.0, 1.0, true, {}, {}};
        for (int c : g.active_cells()) {
            double a = std::fabs(f.u[static_cast<size_t>(c)]);
            if (a > l.value) {
                l.value = a;
                l.witness = g.center(c);
            }
        }
        l.pass = l.value <= 1.0 + 1e-12;
        rep.lines.push_back(l);
    }
    MeasureSnapshot m = snapshot(solver, pf);
    {
        DensityOptions dopt;
        dopt.include_reflected = false;
        dopt.larger_radii = 3;
        dopt.lambda = opt.lambda;
        DensityReport d = density_ratio(m, g, dopt);
        f.D0 = d.D;
        AssumptionLine l{"density_D0", d.D, 4.0 * sigma, d.D <= 4.0 * sigma, d.center, {}};
        char buf[96];
        std::snprintf(buf, sizeof buf, "r=%.4g centers=%d spacing=%.4g", d.radius, d.centers, d.spacing);
        l.detail = buf;
        rep.lines.push_back(l);
    }
    {
        AssumptionLine l{"gradient_bound", 0.0, 0.0, true, {}, {}};
        for (int c : g.active_cells()) {
            double v = eps * std::sqrt(solver.face_gradient_sq(pf, c));
            if (v > l.value) {
                l.value = v;
                l.witness = g.center(c);
            }
        }
        // the collar bend stretches tangential distances by at most 1 + c2 kappa / 2
        l.bound = pb.max_sqrt_2w * (1.0 + 0.5 * g.c2() * g.kappa()) * (1.0 + h / eps);
        l.pass = l.value <= l.bound;
        f.c_gradient = l.value;
        rep.lines.push_back(l);
    }
    {
        DiscrepancyNorms dn = discrepancy_norms(m, g);
        double scaled = dn.sup_pos * std::pow(eps, opt.lambda);
        AssumptionLine l{"discrepancy_bound", scaled, opt.discrepancy_constant, scaled <= opt.discrepancy_constant,
                         dn.witness, {}};
        char buf[64];
        std::snprintf(buf, sizeof buf, "sup xi+=%.6g lambda=%.3g", dn.sup_pos, opt.lambda);
        l.detail = buf;
        f.c_discrepancy = scaled;
        rep.lines.push_back(l);
    }
    {
        NeumannReport nr = neumann_residual(g, pf.u);
        AssumptionLine l{"neumann", nr.max_normal_derivative, 10.0 * h * nr.max_gradient, false,
                         nr.witness, {}};
        l.pass = l.value <= l.bound || nr.max_gradient == 0.0;
        rep.lines.push_back(l);
    }
    f.report = rep;
    return rep;
}

}  // namespace aclab
