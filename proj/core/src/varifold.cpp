#include "aclab/varifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace aclab {

namespace {

constexpr double kTangencyTol = 1e-8;

void refresh_ghosts(const DomainGeometry& g, std::vector<double>& u) { fill_ghost_values(g, u); }

double interpolate(const DomainGeometry& g, const std::vector<double>& a, Vec2 x) {
    int nb[4];
    double w[4];
    int n = g.interpolation_stencil(x, nb, w);
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += w[k] * a[static_cast<size_t>(nb[k])];
    return v;
}

double bump4(Vec2 x, Vec2 c, double R) {
    double q = 1.0 - norm2(x - c) / (R * R);
    return q > 0.0 ? q * q * q * q : 0.0;
}

// grad of bump4
Vec2 bump4_grad(Vec2 x, Vec2 c, double R) {
    double q = 1.0 - norm2(x - c) / (R * R);
    if (q <= 0.0) return {};
    return (x - c) * (-8.0 * q * q * q / (R * R));
}

}  // namespace

VectorFieldSpec VectorFieldSpec::constant(Vec2 v) {
    VectorFieldSpec s;
    s.name = "constant";
    s.g = [v](Vec2) { return v; };
    s.jacobian = [](Vec2) { return Mat2{}; };
    return s;
}

VectorFieldSpec VectorFieldSpec::interior_bump(Vec2 center, double radius, Vec2 v) {
    if (!(radius > 0.0)) throw ValidationError("vector field bump: radius must be positive");
    VectorFieldSpec s;
    s.name = "interior_bump";
    s.tangent = true;
    s.g = [=](Vec2 x) { return v * bump4(x, center, radius); };
    s.jacobian = [=](Vec2 x) {
        Vec2 db = bump4_grad(x, center, radius);
        return Mat2{v.x * db.x, v.x * db.y, v.y * db.x, v.y * db.y};
    };
    return s;
}

VectorFieldSpec VectorFieldSpec::from_function(std::string name, std::function<Vec2(Vec2)> g, bool tangent) {
    VectorFieldSpec s;
    s.name = std::move(name);
    s.g = std::move(g);
    s.tangent = tangent;
    return s;
}

Mat2 VectorFieldSpec::grad(Vec2 x) const {
    if (jacobian) return jacobian(x);
    const double d = 1e-6;
    Vec2 gx = (g({x.x + d, x.y}) - g({x.x - d, x.y})) / (2.0 * d);
    Vec2 gy = (g({x.x, x.y + d}) - g({x.x, x.y - d})) / (2.0 * d);
    return Mat2{gx.x, gy.x, gx.y, gy.y};
}

double normal_component(const VectorFieldSpec& g, const DomainGeometry& geo) {
    double m = 0.0;
    for (const BoundaryNode& b : geo.boundary()) m = std::max(m, std::fabs(dot(g(b.p), b.normal)));
    return m;
}

double boundary_integral(const DomainGeometry& g, const std::vector<double>& density) {
    double s = 0.0;
    for (const BoundaryNode& b : g.boundary()) s += b.weight * interpolate(g, density, b.p);
    return s;
}

FirstVariationReport first_variation(const Solver& s, const PhaseField& f, const VectorFieldSpec& gf) {
    const DomainGeometry& g = s.geometry();
    const PotentialSpec& p = s.potential();
    if (gf.tangent) {
        double nc = normal_component(gf, g);
        if (nc > kTangencyTol)
            throw ValidationError("vector field '" + gf.name + "' claims tangency but |<g, nu>| = " + std::to_string(nc));
    }
    const double eps = s.eps();
    std::vector<double> u = f.u;
    refresh_ghosts(g, u);
    std::vector<double> rhs;
    if (f.last_rhs.size() == f.u.size()) {
        rhs = f.last_rhs;
    } else {
        PhaseField tmp = f;
        s.evaluate_rhs(tmp);
        rhs = std::move(tmp.last_rhs);
    }
    std::vector<double> e, xi;
    s.densities(f, e, xi);

    FirstVariationReport rep;
    const double zero_tol = 1e-12 / eps;
    for (int c : g.active_cells()) {
        const size_t uc = static_cast<size_t>(c);
        const double w = s.weight(c);
        const Vec2 x = g.center(c);
        const Vec2 du = centered_gradient(g, u, c);
        const Mat2 J = gf.grad(x);
        const double n = norm(du);
        if (n < zero_tol) {
            rep.zero_gradient += w * p.W(u[uc]) / eps * J.trace();
            ++rep.zero_cells;
            continue;
        }
        const Vec2 nu = du / n;
        const double Jnn = J.xx * nu.x * nu.x + (J.xy + J.yx) * nu.x * nu.y + J.yy * nu.y * nu.y;
        rep.direct += w * (J.trace() - Jnn) * e[uc];
        rep.discrepancy += w * Jnn * xi[uc];
        rep.transport += w * eps * rhs[uc] * dot(gf(x), du);
    }
    for (const BoundaryNode& b : g.boundary()) {
        FieldSample fs = sample_field(g, u, b.p);
        double eb = 0.5 * eps * norm2(fs.grad) + p.W(fs.value) / eps;
        rep.boundary += b.weight * dot(gf(b.p), b.normal) * eb;
    }
    rep.residual = rep.direct - (rep.transport + rep.discrepancy + rep.boundary - rep.zero_gradient);
    return rep;
}

FirstVariationReport first_variation(const PhaseField& f, const VectorFieldSpec& g, const DomainGeometry& geo,
                                     const PotentialSpec& p) {
    Solver s(geo, p, f.eps, StepPolicy{Scheme::SemiImplicit, 0.2, 0.0});
    return first_variation(s, f, g);
}

BoundaryEnergySample boundary_energy(const Solver& s, const PhaseField& f) {
    BoundaryEnergySample b;
    b.t = f.t;
    std::vector<double> e, xi;
    s.densities(f, e, xi);
    b.integral = boundary_integral(s.geometry(), e);
    if (f.last_rhs.size() == f.u.size()) {
        b.dissipation = s.dissipation_rate(f);
    } else {
        PhaseField tmp = f;
        s.evaluate_rhs(tmp);
        b.dissipation = s.dissipation_rate(tmp);
    }
    return b;
}

double calibrate_boundary_constant(const std::vector<BoundaryEnergySample>& calibration) {
    double c = 0.0;
    for (const auto& b : calibration) c = std::max(c, b.integral - b.dissipation);
    return c;
}

BoundaryEnergyCheck check_boundary_energy(const std::vector<BoundaryEnergySample>& holdout, double c18) {
    BoundaryEnergyCheck chk;
    chk.c18 = c18;
    chk.samples = static_cast<int>(holdout.size());
    chk.worst_margin = holdout.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& b : holdout) {
        double m = b.dissipation + c18 - b.integral;
        chk.worst_margin = std::min(chk.worst_margin, m);
        if (m < 0.0) ++chk.violations;
    }
    return chk;
}

TestFunctionSpec TestFunctionSpec::constant(double value) {
    TestFunctionSpec t;
    t.base = value;
    return t;
}

TestFunctionSpec TestFunctionSpec::interior_bump(Vec2 center, double radius, double amplitude, double base) {
    if (!(radius > 0.0)) throw ValidationError("test function bump: radius must be positive");
    TestFunctionSpec t;
    t.base = base;
    t.amplitude = amplitude;
    t.center = center;
    t.radius = radius;
    return t;
}

double TestFunctionSpec::value(Vec2 x, double t) const {
    if (is_constant()) return base;
    return base + (amplitude + amplitude_rate * t) * bump4(x, center, radius);
}

Vec2 TestFunctionSpec::grad(Vec2 x, double t) const {
    if (is_constant()) return {};
    return bump4_grad(x, center, radius) * (amplitude + amplitude_rate * t);
}

double TestFunctionSpec::time_derivative(Vec2 x) const {
    if (amplitude_rate == 0.0) return 0.0;
    return amplitude_rate * bump4(x, center, radius);
}

double tangency_defect(const TestFunctionSpec& phi, const DomainGeometry& g) {
    double m = 0.0;
    for (const BoundaryNode& b : g.boundary()) m = std::max(m, std::fabs(dot(phi.grad(b.p, 0.0), b.normal)));
    if (phi.amplitude_rate != 0.0)
        for (const BoundaryNode& b : g.boundary())
            m = std::max(m, std::fabs(dot(bump4_grad(b.p, phi.center, phi.radius), b.normal)));
    return m;
}

BrakkeAccumulator::BrakkeAccumulator(const Solver& s, TestFunctionSpec phi) : s_(&s), phi_(phi) {
    const DomainGeometry& g = s.geometry();
    double d = tangency_defect(phi_, g);
    if (d > kTangencyTol)
        throw ValidationError("test function is not Neumann compatible: |<grad phi, nu>| = " + std::to_string(d));
    if (phi_.is_constant()) return;
    const double R2 = phi_.radius * phi_.radius;
    for (int c : g.active_cells()) {
        if (norm2(g.center(c) - phi_.center) >= R2) continue;
        support_.push_back(c);
        const int i = g.col(c), j = g.row(c);
        const int nbs[4] = {g.index(i - 1, j), g.index(i + 1, j), g.index(i, j - 1), g.index(i, j + 1)};
        for (int nb : nbs)
            if (!g.active(nb)) needs_ghosts_ = true;
    }
}

double BrakkeAccumulator::mass(const PhaseField& f) const {
    if (phi_.is_constant()) return phi_.base * s_->energy(f);
    std::vector<double> e, xi;
    s_->densities(f, e, xi);
    const DomainGeometry& g = s_->geometry();
    double m = 0.0;
    for (int c : g.active_cells()) m += s_->weight(c) * e[static_cast<size_t>(c)] * phi_.value(g.center(c), f.t);
    return m;
}

double BrakkeAccumulator::rate(const PhaseField& f) const {
    if (phi_.is_constant()) return phi_.base * s_->dissipation_rate(f);
    const DomainGeometry& g = s_->geometry();
    const double eps = s_->eps();
    double r = 0.0;
    for (int c : g.active_cells()) {
        double q = f.last_rhs[static_cast<size_t>(c)];
        r += s_->weight(c) * eps * q * q * phi_.value(g.center(c), f.t);
    }
    const std::vector<double>* u = &f.u;
    std::vector<double> tmp;
    if (needs_ghosts_) {
        tmp = f.u;
        refresh_ghosts(g, tmp);
        u = &tmp;
    }
    for (int c : support_) {
        Vec2 x = g.center(c);
        r += s_->weight(c) * eps * f.last_rhs[static_cast<size_t>(c)] * dot(phi_.grad(x, f.t), centered_gradient(g, *u, c));
    }
    if (phi_.amplitude_rate != 0.0) {
        std::vector<double> e, xi;
        s_->densities(f, e, xi);
        for (int c : support_) r -= s_->weight(c) * e[static_cast<size_t>(c)] * phi_.time_derivative(g.center(c));
    }
    return r;
}

void BrakkeAccumulator::before_step(const PhaseField& f, double dt) { consumed_ += dt * rate(f); }

void BrakkeAccumulator::on_record(const PhaseField& f) { rec_.push_back({f.t, mass(f), consumed_}); }

double brakke_identity_residual(const std::vector<BrakkeRecord>& rec, double t1, double t2) {
    if (rec.empty()) return 0.0;
    auto nearest = [&](double t) {
        size_t b = 0;
        for (size_t k = 1; k < rec.size(); ++k)
            if (std::fabs(rec[k].t - t) < std::fabs(rec[b].t - t)) b = k;
        return rec[b];
    };
    const BrakkeRecord a = nearest(t1), b = nearest(t2);
    double r = std::fabs(b.mass + (b.consumed - a.consumed) - a.mass);
    return a.mass > 0 ? r / a.mass : r;
}

double brakke_identity_residual(const BrakkeAccumulator& acc) {
    const auto& r = acc.records();
    if (r.empty()) return 0.0;
    return brakke_identity_residual(r, r.front().t, r.back().t);
}

std::vector<Polyline> zero_set(const DomainGeometry& g, const std::vector<double>& u0) {
    std::vector<double> u = u0;
    refresh_ghosts(g, u);
    const auto& kind = g.kind();
    return contour_lines(
        g.nx(), g.ny(), g.center(0, 0), g.h(), [&](int i, int j) { return u[static_cast<size_t>(g.index(i, j))]; },
        [&](int i, int j) { return kind[static_cast<size_t>(g.index(i, j))] != CellKind::Outside; });
}

std::vector<ContactAngle> contact_angle(const PhaseField& f, const DomainGeometry& g, double window) {
    const double half = 0.5 * (window > 0.0 ? window : 6.0 * f.eps);
    std::vector<ContactAngle> out;
    for (const Polyline& pl : zero_set(g, f.u)) {
        const int n = static_cast<int>(pl.pts.size());
        if (n < 2) continue;
        std::vector<double> d(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) d[static_cast<size_t>(k)] = g.signed_distance(pl.pts[static_cast<size_t>(k)]);
        const int segs = pl.closed ? n : n - 1;
        for (int k = 0; k < segs; ++k) {
            const int k1 = (k + 1) % n;
            const double da = d[static_cast<size_t>(k)], db = d[static_cast<size_t>(k1)];
            if ((da <= 0.0) == (db <= 0.0)) continue;
            const Vec2 a = pl.pts[static_cast<size_t>(k)], b = pl.pts[static_cast<size_t>(k1)];
            const Vec2 p = a + (b - a) * (da / (da - db));
            // walk into Omega from the crossing
            const int step = da <= 0.0 ? -1 : 1;
            int idx = da <= 0.0 ? k : k1;
            std::vector<Vec2> pts{p};
            double arc = 0.0;
            Vec2 prev = p;
            for (int it = 0; it < n; ++it) {
                if (!pl.closed && (idx < 0 || idx >= n)) break;
                const int m = ((idx % n) + n) % n;
                if (d[static_cast<size_t>(m)] > 0.0) break;
                arc += norm(pl.pts[static_cast<size_t>(m)] - prev);
                if (arc > half && pts.size() >= 3) break;
                pts.push_back(pl.pts[static_cast<size_t>(m)]);
                prev = pl.pts[static_cast<size_t>(m)];
                idx += step;
            }
            if (pts.size() < 2) continue;
            Vec2 mean;
            for (const Vec2& q : pts) mean = mean + q;
            mean = mean / static_cast<double>(pts.size());
            double sxx = 0, sxy = 0, syy = 0;
            for (const Vec2& q : pts) {
                Vec2 r = q - mean;
                sxx += r.x * r.x;
                sxy += r.x * r.y;
                syy += r.y * r.y;
            }
            const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
            const Vec2 tangent{std::cos(theta), std::sin(theta)};
            const Vec2 nu = g.normal(p);
            const double c = std::min(1.0, std::fabs(dot(tangent, nu)));
            out.push_back({p, 90.0 - std::acos(c) * 180.0 / std::numbers::pi, static_cast<int>(pts.size())});
        }
    }
    return out;
}

}  // namespace aclab
