#include "aclab/mcf_reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "aclab/varifold.hpp"

namespace aclab {

namespace {

Vec2 catmull_rom(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double t) {
    double t2 = t * t, t3 = t2 * t;
    return (p1 * 2.0 + (p2 - p0) * t + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2 + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3) *
           0.5;
}

}  // namespace

Front Front::circle(Vec2 c, double R, double spacing) {
    if (!(R > 0.0) || !(spacing > 0.0)) throw ValidationError("front circle: radius and spacing must be positive");
    Front f;
    f.closed = true;
    f.spacing = spacing;
    int n = std::max(6, static_cast<int>(std::lround(2.0 * std::numbers::pi * R / spacing)));
    for (int k = 0; k < n; ++k) {
        double a = 2.0 * std::numbers::pi * k / n;
        f.nodes.push_back({c.x + R * std::cos(a), c.y + R * std::sin(a)});
    }
    return f;
}

Front Front::chord(Vec2 a, Vec2 b, double spacing) {
    if (!(spacing > 0.0)) throw ValidationError("front chord: spacing must be positive");
    Front f;
    f.spacing = spacing;
    int n = std::max(1, static_cast<int>(std::lround(norm(b - a) / spacing)));
    for (int k = 0; k <= n; ++k) f.nodes.push_back(a + (b - a) * (static_cast<double>(k) / n));
    return f;
}

double Front::length() const { return polyline_length(polyline()); }

double Front::area() const {
    double a = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) a += cross(nodes[i], nodes[(i + 1) % nodes.size()]);
    return 0.5 * a;
}

double Front::min_spacing() const {
    double m = std::numeric_limits<double>::infinity();
    size_t n = nodes.size(), segs = closed ? n : n - 1;
    for (size_t i = 0; i < segs && n > 1; ++i) m = std::min(m, norm(nodes[(i + 1) % n] - nodes[i]));
    return m;
}

double Front::max_spacing() const {
    double m = 0.0;
    size_t n = nodes.size(), segs = closed ? n : n - 1;
    for (size_t i = 0; i < segs && n > 1; ++i) m = std::max(m, norm(nodes[(i + 1) % n] - nodes[i]));
    return m;
}

Front resample(const Front& fr, double spacing) {
    Front out = fr;
    const auto& p = fr.nodes;
    const int n = static_cast<int>(p.size());
    if (n < 2) return out;
    const int segs = fr.closed ? n : n - 1;
    std::vector<double> s(static_cast<size_t>(segs) + 1, 0.0);
    for (int i = 0; i < segs; ++i) s[static_cast<size_t>(i) + 1] = s[static_cast<size_t>(i)] + norm(p[static_cast<size_t>((i + 1) % n)] - p[static_cast<size_t>(i)]);
    const double L = s.back();
    auto at = [&](int i) -> Vec2 {
        if (fr.closed) return p[static_cast<size_t>(((i % n) + n) % n)];
        if (i < 0) return p[0] * 2.0 - p[1];
        if (i >= n) return p[static_cast<size_t>(n - 1)] * 2.0 - p[static_cast<size_t>(n - 2)];
        return p[static_cast<size_t>(i)];
    };
    int m = std::max(1, static_cast<int>(std::lround(L / spacing)));
    if (fr.closed) m = std::max(m, 3);
    out.nodes.clear();
    int seg = 0;
    const int last = fr.closed ? m - 1 : m;
    for (int k = 0; k <= last; ++k) {
        double target = L * k / m;
        if (!fr.closed && k == m) {
            out.nodes.push_back(p.back());
            break;
        }
        while (seg < segs - 1 && s[static_cast<size_t>(seg) + 1] < target) ++seg;
        double len = s[static_cast<size_t>(seg) + 1] - s[static_cast<size_t>(seg)];
        double tau = len > 0.0 ? (target - s[static_cast<size_t>(seg)]) / len : 0.0;
        out.nodes.push_back(catmull_rom(at(seg - 1), at(seg), at(seg + 1), at(seg + 2), std::clamp(tau, 0.0, 1.0)));
    }
    out.spacing = spacing;
    return out;
}

Front evolve_front(const Front& fr, double dt, const DomainGeometry& g, const FrontOptions& opt) {
    Front f = fr;
    if (f.extinct) return f;
    if (f.nodes.size() < 6) {
        f.extinct = true;
        return f;
    }
    const double t_end = f.t + dt;
    while (f.t < t_end - 1e-15) {
        const double ms = f.min_spacing();
        const double ds = std::min(t_end - f.t, opt.safety * ms * ms);
        const size_t n = f.nodes.size();
        std::vector<Vec2> next = f.nodes;
        const size_t lo = f.closed ? 0 : 1, hi = f.closed ? n : n - 1;
        for (size_t i = lo; i < hi; ++i) {
            const Vec2 a = f.nodes[(i + n - 1) % n], x = f.nodes[i], b = f.nodes[(i + 1) % n];
            const double l1 = norm(x - a), l2 = norm(b - x);
            const Vec2 k = ((b - x) / l2 - (x - a) / l1) * (2.0 / (l1 + l2));
            next[i] = x + k * ds;
        }
        f.nodes = std::move(next);
        f.t = (t_end - f.t - ds) < 1e-15 ? t_end : f.t + ds;
        ++f.steps;
        if (opt.resample_every > 0 && f.steps % opt.resample_every == 0) f = resample(f, f.spacing);
        if (f.nodes.size() < 6) {
            f.extinct = true;
            return f;
        }
        if (!f.closed) {
            // end segments along the boundary normal
            f.nodes.front() = g.nearest_point(f.nodes[1]);
            f.nodes.back() = g.nearest_point(f.nodes[f.nodes.size() - 2]);
        }
    }
    return f;
}

double endpoint_orthogonality_defect(const Front& fr, const DomainGeometry& g) {
    if (fr.closed || fr.nodes.size() < 2) return 0.0;
    auto defect = [&](Vec2 e, Vec2 nb) {
        Vec2 t = nb - e;
        double c = std::min(1.0, std::fabs(dot(t / norm(t), g.normal(e))));
        return std::acos(c) * 180.0 / std::numbers::pi;
    };
    const size_t n = fr.nodes.size();
    return std::max(defect(fr.nodes[0], fr.nodes[1]), defect(fr.nodes[n - 1], fr.nodes[n - 2]));
}

std::vector<Polyline> clip_to_domain(const Polyline& pl, const DomainGeometry& g) {
    std::vector<Polyline> out;
    const size_t n = pl.pts.size();
    if (n == 0) return out;
    std::vector<double> d(n);
    bool all_in = true;
    size_t start = 0;
    for (size_t k = 0; k < n; ++k) {
        d[k] = g.signed_distance(pl.pts[k]);
        if (d[k] > 0.0) {
            if (all_in) start = k;
            all_in = false;
        }
    }
    if (all_in) return {pl};
    // open walk, beginning at an outside vertex for closed input
    const size_t count = pl.closed ? n + 1 : n;
    const size_t first = pl.closed ? start : 0;
    auto crossing = [&](size_t a, size_t b) {
        Vec2 p = pl.pts[a] + (pl.pts[b] - pl.pts[a]) * (d[a] / (d[a] - d[b]));
        return g.nearest_point(p);
    };
    Polyline cur;
    for (size_t s = 0; s < count; ++s) {
        size_t k = (first + s) % n;
        if (s > 0) {
            size_t prev = (first + s - 1) % n;
            bool pin = d[prev] <= 0.0, kin = d[k] <= 0.0;
            if (pin != kin) {
                cur.pts.push_back(crossing(prev, k));
                if (pin) {
                    if (cur.pts.size() >= 2) out.push_back(cur);
                    cur.pts.clear();
                }
            }
        }
        if (d[k] <= 0.0) cur.pts.push_back(pl.pts[k]);
    }
    if (cur.pts.size() >= 2) out.push_back(cur);
    return out;
}

std::vector<Polyline> interior_zero_set(const DomainGeometry& g, const std::vector<double>& u) {
    std::vector<Polyline> out;
    for (const Polyline& pl : zero_set(g, u))
        for (Polyline& q : clip_to_domain(pl, g)) out.push_back(std::move(q));
    return out;
}

Front front_from_field(const DomainGeometry& g, const std::vector<double>& u, double spacing) {
    auto pieces = interior_zero_set(g, u);
    if (pieces.empty()) throw ValidationError("front from field: empty zero set");
    const Polyline* best = &pieces.front();
    for (const Polyline& p : pieces)
        if (polyline_length(p) > polyline_length(*best)) best = &p;
    Front f;
    f.nodes = best->pts;
    f.closed = best->closed;
    f.spacing = spacing;
    f = resample(f, spacing);
    if (!f.closed) {
        f.nodes.front() = g.nearest_point(f.nodes.front());
        f.nodes.back() = g.nearest_point(f.nodes.back());
    }
    return f;
}

double hausdorff_distance(const Polyline& a, const std::vector<Polyline>& b) {
    if (b.empty() || a.pts.empty()) return std::numeric_limits<double>::infinity();
    double h = 0.0;
    for (const Vec2& x : a.pts) {
        double m = std::numeric_limits<double>::infinity();
        for (const Polyline& q : b) m = std::min(m, distance_to_polyline(q, x));
        h = std::max(h, m);
    }
    for (const Polyline& q : b)
        for (const Vec2& x : q.pts) h = std::max(h, distance_to_polyline(a, x));
    return h;
}

double hausdorff_distance(const Front& fr, const PhaseField& f, const DomainGeometry& g) {
    return hausdorff_distance(fr.polyline(), interior_zero_set(g, f.u));
}

double zero_set_radius(const DomainGeometry& g, const std::vector<double>& u, Vec2 c) {
    double sum = 0.0, len = 0.0;
    for (const Polyline& pl : interior_zero_set(g, u)) {
        const size_t n = pl.pts.size(), segs = pl.closed ? n : n - 1;
        for (size_t i = 0; i < segs; ++i) {
            Vec2 a = pl.pts[i], b = pl.pts[(i + 1) % n];
            double l = norm(b - a);
            sum += l * norm((a + b) * 0.5 - c);
            len += l;
        }
    }
    return len > 0.0 ? sum / len : 0.0;
}

void write_front_csv_header(std::ostream& os) { os << "t,node,x,y\n"; }

void write_front_csv(std::ostream& os, const Front& fr) {
    char buf[128];
    for (size_t k = 0; k < fr.nodes.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", fr.t, k, fr.nodes[k].x, fr.nodes[k].y);
        os << buf;
    }
}

}  // namespace aclab
