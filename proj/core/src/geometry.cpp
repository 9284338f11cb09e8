#include "aclab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

namespace aclab {

DomainSpec DomainSpec::disk(double R) {
    DomainSpec s;
    s.kind = Kind::Disk;
    s.radius = R;
    return s;
}

DomainSpec DomainSpec::flower(double r0, double a, int k) {
    DomainSpec s;
    s.kind = Kind::Flower;
    s.r0 = r0;
    s.amplitude = a;
    s.petals = k;
    return s;
}

DomainSpec DomainSpec::capsule(double length, double width) {
    DomainSpec s;
    s.kind = Kind::Capsule;
    s.length = length;
    s.width = width;
    return s;
}

DomainSpec DomainSpec::custom(std::string expr, Box box) {
    DomainSpec s;
    s.kind = Kind::Custom;
    s.expression = std::move(expr);
    s.bbox = box;
    return s;
}

std::unique_ptr<Shape> DomainSpec::make_shape() const {
    switch (kind) {
        case Kind::Disk:
            if (!(radius > 0)) throw ValidationError("disk radius must be positive");
            return std::make_unique<DiskShape>(radius);
        case Kind::Flower:
            if (!(r0 > 0)) throw ValidationError("flower R0 must be positive");
            if (petals < 1) throw ValidationError("flower petal count must be at least 1");
            // r(theta) > 0 keeps the polar curve embedded
            if (!(amplitude >= 0 && amplitude < 1))
                throw ValidationError("boundary not resolvable: flower amplitude must lie in [0,1) for an embedded curve");
            return std::make_unique<FlowerShape>(r0, amplitude, petals);
        case Kind::Capsule:
            if (!(width > 0) || !(length >= 0)) throw ValidationError("capsule needs width > 0 and length >= 0");
            return std::make_unique<CapsuleShape>(length, width);
        case Kind::Custom: {
            if (!bbox) throw ValidationError("custom domain needs a bounding box");
            if (!(bbox->width() > 0 && bbox->height() > 0)) throw ValidationError("custom bounding box is empty");
            return std::make_unique<ExpressionShape>(Expression::parse(expression), *bbox);
        }
    }
    throw ValidationError("unknown domain kind");
}

std::string DomainSpec::describe() const { return make_shape()->describe(); }

namespace {

Vec2 closest_on_segment(Vec2 a, Vec2 b, Vec2 x) {
    Vec2 ab = b - a;
    double l2 = norm2(ab);
    double t = l2 > 0 ? std::clamp(dot(x - a, ab) / l2, 0.0, 1.0) : 0.0;
    return a + ab * t;
}

// Zero of phi on the segment [a, b] given opposite signs at the ends.
Vec2 edge_crossing(const Shape& s, Vec2 a, Vec2 b, double fa) {
    double lo = 0.0, hi = 1.0;
    bool neg_lo = fa < 0.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        bool neg = s.phi(a + (b - a) * mid) < 0.0;
        if (neg == neg_lo) lo = mid;
        else hi = mid;
    }
    return a + (b - a) * (0.5 * (lo + hi));
}

double polygon_area(const std::vector<Vec2>& p) {
    double a = 0.0;
    for (size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
    return 0.5 * std::fabs(a);
}

Vec2 polygon_centroid(const std::vector<Vec2>& p) {
    double a = 0.0;
    Vec2 c;
    for (size_t i = 0; i < p.size(); ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % p.size()];
        double w = cross(u, v);
        a += w;
        c = c + (u + v) * w;
    }
    return c / (3.0 * a);
}

}  // namespace

int DomainGeometry::locate(Vec2 x) const {
    int i = static_cast<int>(std::floor((x.x - x0_) / h_ + 0.5));
    int j = static_cast<int>(std::floor((x.y - y0_) / h_ + 0.5));
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
    return index(i, j);
}

double DomainGeometry::boundary_length() const {
    double L = 0.0;
    for (const auto& b : bnodes_) L += b.weight;
    return L;
}

Vec2 DomainGeometry::guess_point(Vec2 x, double* dist) const {
    double best = std::numeric_limits<double>::infinity();
    Vec2 bp;
    int bi = static_cast<int>(std::floor((x.x - bx0_) / bucket_));
    int bj = static_cast<int>(std::floor((x.y - by0_) / bucket_));
    int max_ring = std::max(bnx_, bny_) + std::max(std::abs(bi), std::abs(bj)) + 1;
    for (int k = 0; k <= max_ring; ++k) {
        for (int dj = -k; dj <= k; ++dj) {
            for (int di = -k; di <= k; ++di) {
                if (std::max(std::abs(di), std::abs(dj)) != k) continue;
                int i = bi + di, j = bj + dj;
                if (i < 0 || j < 0 || i >= bnx_ || j >= bny_) continue;
                for (const SegRef& s : buckets_[static_cast<size_t>(j * bnx_ + i)]) {
                    const auto& pts = loops_[static_cast<size_t>(s.loop)].pts;
                    Vec2 a = pts[static_cast<size_t>(s.i)], b = pts[(static_cast<size_t>(s.i) + 1) % pts.size()];
                    Vec2 c = closest_on_segment(a, b, x);
                    double d = norm(x - c);
                    if (d < best) {
                        best = d;
                        bp = c;
                    }
                }
            }
        }
        if (best <= k * bucket_) break;
    }
    if (dist) *dist = best;
    return bp;
}

Vec2 DomainGeometry::nearest_point(Vec2 x) const {
    double gd = 0.0;
    Vec2 g = guess_point(x, &gd);
    double collar = 6.0 * c2_;
    if (gd >= collar - h_ * h_) throw ValidationError("point outside the collar N_{6c2}: projection not unique");
    Vec2 p = shape_->project(x, g);
    double d = norm(x - p);
    if (d >= collar - h_ * h_) throw ValidationError("point outside the collar N_{6c2}: projection not unique");
    // a second, distant candidate at the same distance means x sits on the medial axis
    if (d > 4.0 * h_) {
        double r_search = d + 2.0 * h_ * h_;
        int bi0 = static_cast<int>(std::floor((x.x - r_search - bx0_) / bucket_));
        int bi1 = static_cast<int>(std::floor((x.x + r_search - bx0_) / bucket_));
        int bj0 = static_cast<int>(std::floor((x.y - r_search - by0_) / bucket_));
        int bj1 = static_cast<int>(std::floor((x.y + r_search - by0_) / bucket_));
        for (int j = std::max(0, bj0); j <= std::min(bny_ - 1, bj1); ++j) {
            for (int i = std::max(0, bi0); i <= std::min(bnx_ - 1, bi1); ++i) {
                for (const SegRef& s : buckets_[static_cast<size_t>(j * bnx_ + i)]) {
                    const auto& pts = loops_[static_cast<size_t>(s.loop)].pts;
                    Vec2 a = pts[static_cast<size_t>(s.i)], b = pts[(static_cast<size_t>(s.i) + 1) % pts.size()];
                    Vec2 c = closest_on_segment(a, b, x);
                    if (norm(c - p) > 4.0 * h_ && norm(x - c) < r_search)
                        throw ValidationError("point on the medial axis: nearest boundary point not unique");
                }
            }
        }
    }
    return p;
}

Vec2 DomainGeometry::normal(Vec2 x) const { return shape_->unit_normal(nearest_point(x)); }

double DomainGeometry::signed_distance(Vec2 x) const {
    double gd = 0.0;
    Vec2 g = guess_point(x, &gd);
    if (gd <= band_) {
        Vec2 p = shape_->project(x, g);
        double d = norm(x - p);
        return shape_->phi(x) < 0.0 ? -d : d;
    }
    // far from the boundary: bilinear interpolation of the grid field
    double fx = (x.x - x0_) / h_, fy = (x.y - y0_) / h_;
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
    int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
    double tx = fx - i, ty = fy - j;
    return (1 - tx) * (1 - ty) * dist_[index(i, j)] + tx * (1 - ty) * dist_[index(i + 1, j)] +
           (1 - tx) * ty * dist_[index(i, j + 1)] + tx * ty * dist_[index(i + 1, j + 1)];
}

std::vector<int> DomainGeometry::ball_mask(Vec2 a, double r) const {
    std::vector<int> out;
    int i0 = std::max(0, static_cast<int>(std::floor((a.x - r - x0_) / h_)));
    int i1 = std::min(nx_ - 1, static_cast<int>(std::ceil((a.x + r - x0_) / h_)));
    int j0 = std::max(0, static_cast<int>(std::floor((a.y - r - y0_) / h_)));
    int j1 = std::min(ny_ - 1, static_cast<int>(std::ceil((a.y + r - y0_) / h_)));
    double r2 = r * r;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            int c = index(i, j);
            if (active(c) && norm2(center(i, j) - a) < r2) out.push_back(c);
        }
    return out;
}

std::vector<int> DomainGeometry::reflected_ball_mask(Vec2 a, double r) const {
    std::vector<int> out;
    double da = std::fabs(signed_distance(a));
    // |x~ - a| < r forces |d(x)| < r + |d(a)| and |x - a| < 3r + 2|d(a)|
    double reach = 3.0 * r + 2.0 * da + h_;
    double dmax = r + da + h_;
    int i0 = std::max(0, static_cast<int>(std::floor((a.x - reach - x0_) / h_)));
    int i1 = std::min(nx_ - 1, static_cast<int>(std::ceil((a.x + reach - x0_) / h_)));
    int j0 = std::max(0, static_cast<int>(std::floor((a.y - reach - y0_) / h_)));
    int j1 = std::min(ny_ - 1, static_cast<int>(std::ceil((a.y + reach - y0_) / h_)));
    double r2 = r * r;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            int c = index(i, j);
            if (!active(c) || std::fabs(dist_[c]) > dmax) continue;
            Vec2 xt = has_projection(c) ? cell_reflection(c) : reflect(center(c));
            if (norm2(xt - a) < r2) out.push_back(c);
        }
    return out;
}

ReflectionCheck DomainGeometry::reflection_inequality_check(Vec2 x, Vec2 y) const {
    ReflectionCheck rc;
    double slack_in = h_ * h_;
    double dx = signed_distance(x), dy = signed_distance(y);
    if (dx > slack_in || dy > slack_in) {
        rc.skipped = true;
        rc.reason = "point outside the closed domain";
        return rc;
    }
    if (std::fabs(dy) >= 0.5 * c2_) {
        rc.skipped = true;
        rc.reason = "y outside N_{c2/2}";
        return rc;
    }
    Vec2 yt = reflect(y);
    double dxy = norm(x - yt);
    if (dxy > 0.5 * c2_) {
        rc.skipped = true;
        rc.reason = "|x - y~| > c2/2";
        return rc;
    }
    Vec2 xt = reflect(x);
    rc.lhs = norm(xt - y);
    rc.bound_a = 2.0 * dxy;
    rc.bound_b = (1.0 + 12.0 * kappa_ * rc.lhs) * dxy;
    rc.slack_a = rc.bound_a - rc.lhs;
    rc.slack_b = rc.bound_b - rc.lhs;
    rc.violated = rc.slack_a < -4.0 * h_ || rc.slack_b < -4.0 * h_;
    return rc;
}

int DomainGeometry::interpolation_stencil(Vec2 x, int nb[4], double w[4]) const {
    double fx = (x.x - x0_) / h_, fy = (x.y - y0_) / h_;
    int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
    double tx = fx - i, ty = fy - j;
    int n = 0;
    double total = 0.0;
    const int di[4] = {0, 1, 0, 1}, dj[4] = {0, 0, 1, 1};
    for (int k = 0; k < 4; ++k) {
        int ii = i + di[k], jj = j + dj[k];
        if (ii < 0 || jj < 0 || ii >= nx_ || jj >= ny_) continue;
        int c = index(ii, jj);
        if (!active(c)) continue;
        double wk = (di[k] ? tx : 1 - tx) * (dj[k] ? ty : 1 - ty);
        if (wk <= 0.0) continue;
        nb[n] = c;
        w[n] = wk;
        total += wk;
        ++n;
    }
    if (n > 0 && total > 1e-3) {
        for (int k = 0; k < n; ++k) w[k] /= total;
        return n;
    }
    // fall back to the nearest active cell
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    int ci = static_cast<int>(std::lround(fx)), cj = static_cast<int>(std::lround(fy));
    for (int r = 0; r <= 4 && best < 0; ++r)
        for (int jj = cj - r; jj <= cj + r; ++jj)
            for (int ii = ci - r; ii <= ci + r; ++ii) {
                if (ii < 0 || jj < 0 || ii >= nx_ || jj >= ny_) continue;
                int c = index(ii, jj);
                if (!active(c)) continue;
                double d = norm2(center(c) - x);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
    if (best < 0) return 0;
    nb[0] = best;
    w[0] = 1.0;
    return 1;
}

void DomainGeometry::dump(std::ostream& os) const {
    os.precision(17);
    os << "GEOM v1 " << nx_ << " " << ny_ << " " << h_ << " " << x0_ << " " << y0_ << " " << kappa_ << " " << c2_
       << "\n";
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            int c = index(i, j);
            if (i) os << ' ';
            os << static_cast<char>(kind_[c]) << dist_[c];
        }
        os << "\n";
    }
}

DomainGeometry build_domain(const DomainSpec& spec, double h) {
    if (!(h > 0)) throw ValidationError("grid spacing must be positive");
    DomainGeometry g;
    g.spec_ = spec;
    g.shape_ = spec.make_shape();
    const Shape& shape = *g.shape_;
    g.h_ = h;

    // boundary from a lattice aligned with the final cell corners
    Box sb = shape.bbox();
    double px0 = sb.xmin - 3 * h, py0 = sb.ymin - 3 * h;
    int pnx = static_cast<int>(std::ceil((sb.width() + 6 * h) / h)) + 1;
    int pny = static_cast<int>(std::ceil((sb.height() + 6 * h) / h)) + 1;
    if (static_cast<double>(pnx) * pny > 4e7) throw ValidationError("grid too large for this spacing");
    std::vector<double> lat(static_cast<size_t>(pnx) * pny);
    for (int j = 0; j < pny; ++j)
        for (int i = 0; i < pnx; ++i) lat[static_cast<size_t>(j * pnx + i)] = shape.phi({px0 + i * h, py0 + j * h});
    for (int i = 0; i < pnx; ++i)
        if (lat[static_cast<size_t>(i)] <= 0 || lat[static_cast<size_t>((pny - 1) * pnx + i)] <= 0)
            throw ValidationError("domain boundary leaves its bounding box");
    for (int j = 0; j < pny; ++j)
        if (lat[static_cast<size_t>(j * pnx)] <= 0 || lat[static_cast<size_t>(j * pnx + pnx - 1)] <= 0)
            throw ValidationError("domain boundary leaves its bounding box");
    g.loops_ = contour_lines(pnx, pny, {px0, py0}, h,
                             [&](int i, int j) { return lat[static_cast<size_t>(j * pnx + i)]; });
    if (g.loops_.empty()) throw ValidationError("domain is empty at this resolution");

    double gscale = 0.0;
    for (auto& loop : g.loops_) {
        if (!loop.closed || loop.pts.size() < 8)
            throw ValidationError("boundary not resolvable: zero level set does not form closed curves");
        for (auto& p : loop.pts) {
            p = shape.pull_to_zero(p);
            gscale = std::max(gscale, norm(shape.gradient(p)));
        }
    }
    // quadrature, curvature and a degeneracy scan of the boundary
    g.kappa_ = 0.0;
    for (const auto& loop : g.loops_) {
        size_t n = loop.pts.size();
        for (size_t i = 0; i < n; ++i) {
            Vec2 p = loop.pts[i], a = loop.pts[(i + n - 1) % n], b = loop.pts[(i + 1) % n];
            double la = norm(p - a), lb = norm(b - p);
            if (la > 3 * h || lb > 3 * h)
                throw ValidationError("boundary not resolvable: projected boundary samples jump (self-intersecting level set)");
            Vec2 gr = shape.gradient(p);
            if (norm(gr) < 1e-6 * gscale)
                throw ValidationError("boundary not resolvable: singular point of the level set");
            double k = shape.curvature(p);
            if (!std::isfinite(k)) throw ValidationError("boundary not resolvable: curvature not finite");
            g.bnodes_.push_back({p, 0.5 * (la + lb), normalized(gr), k});
            g.kappa_ = std::max(g.kappa_, std::fabs(k));
        }
    }
    if (!(g.kappa_ > 0)) throw ValidationError("boundary curvature vanishes identically");
    double c2_curv = 1.0 / (6.0 * g.kappa_);
    const double rel = 1e-6;
    if (c2_curv < 8.0 * h * (1 - rel))
        throw ValidationError("grid too coarse: collar N_{c2} spans fewer than 8 cells");

    // final grid: provisional lattice padded by the collar margin
    double margin = 3.0 * c2_curv + 6.0 * h;
    int m = static_cast<int>(std::ceil(margin / h));
    double cx0 = px0 - m * h, cy0 = py0 - m * h;  // lower-left corner of cell (0,0)
    g.nx_ = pnx - 1 + 2 * m;
    g.ny_ = pny - 1 + 2 * m;
    g.x0_ = cx0 + 0.5 * h;
    g.y0_ = cy0 + 0.5 * h;
    if (static_cast<double>(g.nx_) * g.ny_ > 2e7) throw ValidationError("grid too large for this spacing");
    const int nx = g.nx_, ny = g.ny_, N = nx * ny;
    g.band_ = margin;

    // buckets of boundary segments
    g.bucket_ = 4.0 * h;
    g.bx0_ = cx0;
    g.by0_ = cy0;
    g.bnx_ = static_cast<int>(std::ceil(nx * h / g.bucket_)) + 1;
    g.bny_ = static_cast<int>(std::ceil(ny * h / g.bucket_)) + 1;
    g.buckets_.assign(static_cast<size_t>(g.bnx_) * g.bny_, {});
    for (size_t l = 0; l < g.loops_.size(); ++l) {
        const auto& pts = g.loops_[l].pts;
        for (size_t i = 0; i < pts.size(); ++i) {
            Vec2 a = pts[i], b = pts[(i + 1) % pts.size()];
            int i0 = static_cast<int>(std::floor((std::min(a.x, b.x) - g.bx0_) / g.bucket_));
            int i1 = static_cast<int>(std::floor((std::max(a.x, b.x) - g.bx0_) / g.bucket_));
            int j0 = static_cast<int>(std::floor((std::min(a.y, b.y) - g.by0_) / g.bucket_));
            int j1 = static_cast<int>(std::floor((std::max(a.y, b.y) - g.by0_) / g.bucket_));
            for (int jj = j0; jj <= j1; ++jj)
                for (int ii = i0; ii <= i1; ++ii)
                    g.buckets_[static_cast<size_t>(jj * g.bnx_ + ii)].push_back({static_cast<int>(l), static_cast<int>(i)});
        }
    }

    // nearest boundary segment for every cell within the band
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pd(static_cast<size_t>(N), inf);
    std::vector<Vec2> guess(static_cast<size_t>(N));
    for (const auto& loop : g.loops_) {
        const auto& pts = loop.pts;
        for (size_t s = 0; s < pts.size(); ++s) {
            Vec2 a = pts[s], b = pts[(s + 1) % pts.size()];
            int i0 = std::max(0, static_cast<int>(std::floor((std::min(a.x, b.x) - margin - g.x0_) / h)));
            int i1 = std::min(nx - 1, static_cast<int>(std::ceil((std::max(a.x, b.x) + margin - g.x0_) / h)));
            int j0 = std::max(0, static_cast<int>(std::floor((std::min(a.y, b.y) - margin - g.y0_) / h)));
            int j1 = std::min(ny - 1, static_cast<int>(std::ceil((std::max(a.y, b.y) + margin - g.y0_) / h)));
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) {
                    Vec2 x = g.center(i, j);
                    Vec2 c = closest_on_segment(a, b, x);
                    double d = norm2(x - c);
                    size_t k = static_cast<size_t>(j * nx + i);
                    if (d < pd[k]) {
                        pd[k] = d;
                        guess[k] = c;
                    }
                }
        }
    }
    g.dist_.assign(static_cast<size_t>(N), inf);
    g.has_proj_.assign(static_cast<size_t>(N), 0);
    g.proj_.assign(static_cast<size_t>(N), Vec2{});
    std::vector<double> sgn(static_cast<size_t>(N));
    for (int c = 0; c < N; ++c) sgn[static_cast<size_t>(c)] = shape.phi(g.center(c)) < 0.0 ? -1.0 : 1.0;
    for (int c = 0; c < N; ++c) {
        size_t k = static_cast<size_t>(c);
        if (!(std::sqrt(pd[k]) <= margin)) continue;
        Vec2 x = g.center(c);
        Vec2 p = shape.project(x, guess[k]);
        // reject Newton excursions to a different part of the boundary
        if (norm(p - guess[k]) > 2.0 * h) p = shape.pull_to_zero(guess[k]);
        g.proj_[k] = p;
        g.has_proj_[k] = 1;
        g.dist_[k] = sgn[k] * norm(x - p);
    }

    // first-order fast marching for the remaining cells
    {
        std::vector<char> state(static_cast<size_t>(N), 0);  // 0 far, 1 trial, 2 known
        using QE = std::pair<double, int>;
        std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
        std::vector<double> T(static_cast<size_t>(N), inf);
        for (int c = 0; c < N; ++c)
            if (g.has_proj_[static_cast<size_t>(c)]) {
                state[static_cast<size_t>(c)] = 2;
                T[static_cast<size_t>(c)] = std::fabs(g.dist_[static_cast<size_t>(c)]);
            }
        auto update = [&](int c) {
            int i = g.col(c), j = g.row(c);
            auto known = [&](int ii, int jj) {
                if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) return inf;
                size_t k = static_cast<size_t>(jj * nx + ii);
                return state[k] == 2 ? T[k] : inf;
            };
            double a = std::min(known(i - 1, j), known(i + 1, j));
            double b = std::min(known(i, j - 1), known(i, j + 1));
            if (a > b) std::swap(a, b);
            double t;
            if (!std::isfinite(a)) return;
            if (!std::isfinite(b) || b - a >= h) t = a + h;
            else t = 0.5 * (a + b + std::sqrt(2 * h * h - (a - b) * (a - b)));
            size_t k = static_cast<size_t>(c);
            if (t < T[k]) {
                T[k] = t;
                state[k] = 1;
                pq.emplace(t, c);
            }
        };
        for (int c = 0; c < N; ++c) {
            if (state[static_cast<size_t>(c)] == 2) continue;
            int i = g.col(c), j = g.row(c);
            bool touch = false;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int q = 0; q < 4; ++q) {
                int ii = i + di[q], jj = j + dj[q];
                if (ii >= 0 && jj >= 0 && ii < nx && jj < ny && state[static_cast<size_t>(jj * nx + ii)] == 2) touch = true;
            }
            if (touch) update(c);
        }
        while (!pq.empty()) {
            auto [t, c] = pq.top();
            pq.pop();
            size_t k = static_cast<size_t>(c);
            if (state[k] == 2 || t > T[k]) continue;
            state[k] = 2;
            int i = g.col(c), j = g.row(c);
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int q = 0; q < 4; ++q) {
                int ii = i + di[q], jj = j + dj[q];
                if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
                if (state[static_cast<size_t>(jj * nx + ii)] != 2) update(jj * nx + ii);
            }
        }
        for (int c = 0; c < N; ++c) {
            size_t k = static_cast<size_t>(c);
            if (!g.has_proj_[k]) g.dist_[k] = sgn[k] * T[k];
        }
    }

    // medial-axis clearance from jumps of the projection between neighbours
    g.clearance_ = inf;
    double probe_depth = 1.0 / (3.0 * g.kappa_) + 2 * h;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int a = g.index(i, j);
            if (!g.has_proj_[static_cast<size_t>(a)]) continue;
            for (int q = 0; q < 2; ++q) {
                int ii = i + (q == 0), jj = j + (q == 1);
                if (ii >= nx || jj >= ny) continue;
                int b = g.index(ii, jj);
                if (!g.has_proj_[static_cast<size_t>(b)]) continue;
                double da = std::fabs(g.dist_[static_cast<size_t>(a)]), db = std::fabs(g.dist_[static_cast<size_t>(b)]);
                if (std::max(da, db) > probe_depth) continue;
                if (norm(g.proj_[static_cast<size_t>(a)] - g.proj_[static_cast<size_t>(b)]) > 3 * h)
                    g.clearance_ = std::min(g.clearance_, std::min(da, db));
            }
        }
    g.c2_ = std::min(c2_curv, 0.5 * g.clearance_);
    if (g.c2_ < 8.0 * h * (1 - rel)) throw ValidationError("grid too coarse: collar N_{c2} spans fewer than 8 cells");

    // cells, volume fractions, apertures; a cell is active when it has inside area
    std::vector<double> corner(static_cast<size_t>(nx + 1) * (ny + 1));
    auto cidx = [&](int i, int j) { return static_cast<size_t>(j * (nx + 1) + i); };
    auto cpos = [&](int i, int j) { return Vec2{cx0 + i * h, cy0 + j * h}; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) corner[cidx(i, j)] = shape.phi(cpos(i, j));
    auto edge_fraction = [&](int i0, int j0, int i1, int j1) {
        double f0 = corner[cidx(i0, j0)], f1 = corner[cidx(i1, j1)];
        bool in0 = f0 < 0, in1 = f1 < 0;
        if (in0 && in1) return 1.0;
        if (!in0 && !in1) return 0.0;
        Vec2 a = cpos(i0, j0), b = cpos(i1, j1);
        Vec2 x = edge_crossing(shape, a, b, f0);
        double t = norm(x - a) / h;
        return in0 ? t : 1.0 - t;
    };
    g.kind_.assign(static_cast<size_t>(N), CellKind::Outside);
    g.vol_.assign(static_cast<size_t>(N), 0.0);
    g.centroid_.assign(static_cast<size_t>(N), Vec2{});
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int c = g.index(i, j);
            int ci[4] = {i, i + 1, i + 1, i}, cj[4] = {j, j, j + 1, j + 1};
            int inside = 0;
            for (int k = 0; k < 4; ++k) inside += corner[cidx(ci[k], cj[k])] < 0;
            if (inside == 0) continue;
            double v = 1.0;
            Vec2 cen = g.center(c);
            if (inside < 4 || std::fabs(g.dist_[static_cast<size_t>(c)]) <= h) {
                std::vector<Vec2> poly;
                for (int k = 0; k < 4; ++k) {
                    int k2 = (k + 1) % 4;
                    double f0 = corner[cidx(ci[k], cj[k])], f1 = corner[cidx(ci[k2], cj[k2])];
                    if (f0 < 0) poly.push_back(cpos(ci[k], cj[k]));
                    if ((f0 < 0) != (f1 < 0))
                        poly.push_back(edge_crossing(shape, cpos(ci[k], cj[k]), cpos(ci[k2], cj[k2]), f0));
                }
                v = poly.size() >= 3 ? std::min(1.0, polygon_area(poly) / (h * h)) : 0.0;
                if (v > 1e-12 && inside < 4) cen = polygon_centroid(poly);
            }
            if (v <= 1e-12) continue;
            g.vol_[static_cast<size_t>(c)] = v;
            g.centroid_[static_cast<size_t>(c)] = cen;
            g.kind_[static_cast<size_t>(c)] = CellKind::Inside;
        }
    g.apx_.assign(static_cast<size_t>(N), 0.0);
    g.apy_.assign(static_cast<size_t>(N), 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int c = g.index(i, j);
            if (!g.active(c)) continue;
            if (i + 1 < nx && g.active(g.index(i + 1, j))) g.apx_[static_cast<size_t>(c)] = edge_fraction(i + 1, j, i + 1, j + 1);
            if (j + 1 < ny && g.active(g.index(i, j + 1))) g.apy_[static_cast<size_t>(c)] = edge_fraction(i, j + 1, i + 1, j + 1);
        }
    // cells below half volume join the neighbour behind their widest open face
    g.master_.assign(static_cast<size_t>(N), -1);
    std::vector<int> small;
    for (int c = 0; c < N; ++c) {
        if (!g.active(c)) continue;
        if (g.vol_[static_cast<size_t>(c)] >= 0.5) g.master_[static_cast<size_t>(c)] = c;
        else small.push_back(c);
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (int c : small) {
            if (g.master_[static_cast<size_t>(c)] >= 0) continue;
            int i = g.col(c), j = g.row(c);
            int nbs[4] = {c + 1, c - 1, c + nx, c - nx};
            double ap[4] = {i + 1 < nx ? g.apx_[static_cast<size_t>(c)] : 0.0, i > 0 ? g.apx_[static_cast<size_t>(c - 1)] : 0.0,
                            j + 1 < ny ? g.apy_[static_cast<size_t>(c)] : 0.0,
                            j > 0 ? g.apy_[static_cast<size_t>(c - nx)] : 0.0};
            int best = -1;
            double ba = 0.0;
            for (int q = 0; q < 4; ++q) {
                if (ap[q] <= ba) continue;
                int m = g.master_[static_cast<size_t>(nbs[q])];
                if (m < 0) continue;
                best = m;
                ba = ap[q];
            }
            if (best >= 0) {
                g.master_[static_cast<size_t>(c)] = best;
                changed = true;
            }
        }
    }
    for (int c : small)
        if (g.master_[static_cast<size_t>(c)] < 0) g.master_[static_cast<size_t>(c)] = c;
    for (int c = 0; c < N; ++c)
        if (g.active(c)) g.active_.push_back(c);
    {
        std::vector<double> mass(static_cast<size_t>(N), 0.0);
        g.cv_centroid_.assign(static_cast<size_t>(N), Vec2{});
        for (int c : g.active_) {
            size_t m = static_cast<size_t>(g.master_[static_cast<size_t>(c)]);
            double v = g.vol_[static_cast<size_t>(c)];
            mass[m] += v;
            g.cv_centroid_[m] = g.cv_centroid_[m] + g.centroid_[static_cast<size_t>(c)] * v;
        }
        for (int c : g.active_)
            if (g.master_[static_cast<size_t>(c)] == c) g.cv_centroid_[static_cast<size_t>(c)] = g.cv_centroid_[static_cast<size_t>(c)] / mass[static_cast<size_t>(c)];
        for (int c : g.active_) g.cv_centroid_[static_cast<size_t>(c)] = g.cv_centroid_[static_cast<size_t>(g.master_[static_cast<size_t>(c)])];
    }
    if (g.active_.empty()) throw ValidationError("domain has no interior cells");

    // connectivity of the active cells through open faces
    {
        std::vector<char> seen(static_cast<size_t>(N), 0);
        std::vector<int> stack{g.active_.front()};
        seen[static_cast<size_t>(g.active_.front())] = 1;
        size_t count = 0;
        while (!stack.empty()) {
            int c = stack.back();
            stack.pop_back();
            ++count;
            int i = g.col(c), j = g.row(c);
            int nbs[4] = {i + 1 < nx && g.apx_[static_cast<size_t>(c)] > 0 ? c + 1 : -1,
                          i > 0 && g.apx_[static_cast<size_t>(c - 1)] > 0 ? c - 1 : -1,
                          j + 1 < ny && g.apy_[static_cast<size_t>(c)] > 0 ? c + nx : -1,
                          j > 0 && g.apy_[static_cast<size_t>(c - nx)] > 0 ? c - nx : -1};
            for (int nb : nbs)
                if (nb >= 0 && !seen[static_cast<size_t>(nb)]) {
                    seen[static_cast<size_t>(nb)] = 1;
                    stack.push_back(nb);
                }
        }
        if (count != g.active_.size()) throw ValidationError("domain is not connected at this resolution");
    }

    // ghost band two cells wide, filled from mirror points
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int c = g.index(i, j);
            if (g.active(c)) continue;
            bool near = false;
            for (int dj = -2; dj <= 2 && !near; ++dj)
                for (int di = -2; di <= 2 && !near; ++di) {
                    int ii = i + di, jj = j + dj;
                    if (ii >= 0 && jj >= 0 && ii < nx && jj < ny && g.active(g.index(ii, jj))) near = true;
                }
            if (!near) continue;
            if (!g.has_proj_[static_cast<size_t>(c)]) throw ValidationError("ghost cell without boundary projection");
            g.kind_[static_cast<size_t>(c)] = CellKind::Ghost;
            GhostCell gc;
            gc.cell = c;
            gc.mirror = g.cell_reflection(c);
            gc.count = g.interpolation_stencil(gc.mirror, gc.nb, gc.w);
            if (gc.count == 0) throw ValidationError("ghost mirror point has no interior neighbours");
            g.ghosts_.push_back(gc);
        }
    return g;
}

void fill_ghost_values(const DomainGeometry& g, std::vector<double>& u) {
    for (const GhostCell& gc : g.ghosts()) {
        if (gc.count == 0) continue;
        const double base = u[static_cast<size_t>(gc.nb[0])];
        double v = base;
        for (int k = 1; k < gc.count; ++k) v += gc.w[k] * (u[static_cast<size_t>(gc.nb[k])] - base);
        u[static_cast<size_t>(gc.cell)] = v;
    }
}

}  // namespace aclab
