#include "aclab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aclab {

double MeasureSnapshot::total() const {
    double s = 0.0;
    for (size_t c = 0; c < e.size(); ++c) s += w[c] * e[c];
    return s;
}

double MeasureSnapshot::mass(const std::vector<int>& cells) const {
    double s = 0.0;
    for (int c : cells) s += w[static_cast<size_t>(c)] * e[static_cast<size_t>(c)];
    return s;
}

MeasureSnapshot snapshot(const Solver& s, const PhaseField& f) {
    MeasureSnapshot m;
    m.t = f.t;
    m.eps = s.eps();
    s.densities(f, m.e, m.xi);
    m.w.assign(f.u.size(), 0.0);
    for (int c : s.geometry().active_cells()) m.w[static_cast<size_t>(c)] = s.weight(c);
    return m;
}

MeasureSnapshot snapshot(const PhaseField& f, const DomainGeometry& g, const PotentialSpec& p) {
    Solver s(g, p, f.eps, StepPolicy{Scheme::SemiImplicit, 0.2, 0.0});
    return snapshot(s, f);
}

DensityReport density_ratio(const MeasureSnapshot& m, const DomainGeometry& g, const DensityOptions& opt) {
    DensityReport rep;
    const double h = g.h(), c2 = g.c2();
    rep.lambda_prime = 0.5 * (1.0 + opt.lambda);
    rep.spacing = opt.spacing > 0 ? opt.spacing : c2 / 8.0;
    for (int k = opt.larger_radii; k >= 1; --k) rep.radii.push_back(c2 * std::ldexp(1.0, k));
    for (int j = 0;; ++j) {
        double r = c2 * std::ldexp(1.0, -j);
        if (r < 4.0 * h) break;
        rep.radii.push_back(r);
    }
    if (rep.radii.empty()) rep.radii.push_back(4.0 * h);

    std::vector<double> cell_mass(m.e.size(), 0.0);
    bool any = false;
    for (int c : g.active_cells()) {
        size_t uc = static_cast<size_t>(c);
        cell_mass[uc] = m.w[uc] * m.e[uc];
        any = any || cell_mass[uc] > 0.0;
    }
    const Box bb = g.shape().bbox();
    const double s = rep.spacing;
    const int ni = static_cast<int>(std::floor(bb.width() / s)) + 1;
    const int nj = static_cast<int>(std::floor(bb.height() / s)) + 1;
    const Vec2 origin = g.center(0, 0);
    for (int jj = 0; jj < nj; ++jj) {
        for (int ii = 0; ii < ni; ++ii) {
            Vec2 y{bb.xmin + ii * s, bb.ymin + jj * s};
            int cy = g.locate(y);
            if (cy < 0 || g.distance()[static_cast<size_t>(cy)] > h) continue;
            double dy = g.signed_distance(y);
            if (dy > 0.0) continue;
            ++rep.centers;
            if (!any) continue;
            bool refl = opt.include_reflected && std::fabs(dy) < 0.5 * c2;
            for (double r : rep.radii) {
                int i0 = std::max(0, static_cast<int>(std::floor((y.x - r - origin.x) / h)));
                int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((y.x + r - origin.x) / h)));
                int j0 = std::max(0, static_cast<int>(std::floor((y.y - r - origin.y) / h)));
                int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((y.y + r - origin.y) / h)));
                double r2 = r * r, mass = 0.0;
                for (int j = j0; j <= j1; ++j)
                    for (int i = i0; i <= i1; ++i) {
                        int c = g.index(i, j);
                        double cm = cell_mass[static_cast<size_t>(c)];
                        if (cm > 0.0 && norm2(g.center(i, j) - y) < r2) mass += cm;
                    }
                if (refl) mass += m.mass(g.reflected_ball_mask(y, r));
                double ratio = mass / (2.0 * r);
                if (ratio > rep.D) {
                    rep.D = ratio;
                    rep.center = y;
                    rep.radius = r;
                    rep.reflected = refl;
                }
            }
        }
    }
    return rep;
}

DiscrepancyNorms discrepancy_norms(const MeasureSnapshot& m, const DomainGeometry& g) {
    DiscrepancyNorms n;
    for (int c : g.active_cells()) {
        size_t uc = static_cast<size_t>(c);
        double x = m.xi[uc];
        n.l1 += std::fabs(x) * m.w[uc];
        if (x > n.sup_pos) {
            n.sup_pos = x;
            n.witness = g.center(c);
        }
    }
    return n;
}

double barrier_psi(double s, double c) {
    if (s <= 0.5 * c) return s;
    if (s >= c) return 0.75 * c;
    // psi' = 1 - S(t), S the cubic smoothstep on t in [0, 1]
    double half = 0.5 * c;
    double t = (s - half) / half;
    double int_s = t * t * t - 0.5 * t * t * t * t;  // int_0^t (3x^2 - 2x^3) dx
    return half + half * (t - int_s);
}

BarrierReport barrier_diagnostic(const Solver& s, const PhaseField& f, double lambda, double c3) {
    const DomainGeometry& g = s.geometry();
    const PotentialSpec& p = s.potential();
    const double eps = s.eps();
    BarrierReport rep;
    if (c3 <= 0.0) {
        for (int c : g.active_cells()) rep.c3 = std::max(rep.c3, eps * std::sqrt(s.face_gradient_sq(f, c)));
    } else {
        rep.c3 = c3;
    }
    const double scale = std::pow(eps, 1.0 - lambda);
    const double amp = g.kappa() * (rep.c3 * rep.c3 + 1.0);
    rep.max_value = -std::numeric_limits<double>::infinity();
    for (int c : g.active_cells()) {
        size_t uc = static_cast<size_t>(c);
        double u = f.u[uc];
        double grad_y = 0.5 * eps * eps * s.face_gradient_sq(f, c);
        double G = scale * (1.0 - (u - p.gamma) * (u - p.gamma) / 8.0);
        double phi = amp * barrier_psi(std::fabs(g.distance()[uc]) / eps, g.c2());
        rep.phi_max = std::max(rep.phi_max, phi);
        double v = grad_y - p.W(u) - G + eps * phi;
        if (v > rep.max_value) {
            rep.max_value = v;
            rep.witness = g.center(c);
        }
    }
    rep.normalized = rep.max_value / scale;
    return rep;
}

BarrierReport barrier_diagnostic(const PhaseField& f, const DomainGeometry& g, const PotentialSpec& p, double lambda,
                                 double c3) {
    Solver s(g, p, f.eps, StepPolicy{Scheme::SemiImplicit, 0.2, 0.0});
    return barrier_diagnostic(s, f, lambda, c3);
}

}  // namespace aclab
