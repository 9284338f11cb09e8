#include "aclab/contour.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace aclab {
namespace {

struct Seg {
    long long e0, e1;
    Vec2 p0, p1;
};

Vec2 closest_on_segment(Vec2 a, Vec2 b, Vec2 x) {
    Vec2 ab = b - a;
    double l2 = norm2(ab);
    double t = l2 > 0 ? std::clamp(dot(x - a, ab) / l2, 0.0, 1.0) : 0.0;
    return a + ab * t;
}

}  // namespace

std::vector<Polyline> contour_lines(int nx, int ny, Vec2 origin, double h, const std::function<double(int, int)>& value,
                                    const std::function<bool(int, int)>& valid) {
    auto ok = [&](int i, int j) { return !valid || valid(i, j); };
    // edge ids: horizontal edge from (i,j) to (i+1,j) -> 2*(j*nx+i), vertical (i,j)-(i,j+1) -> 2*(j*nx+i)+1
    auto hid = [&](int i, int j) { return 2LL * (static_cast<long long>(j) * nx + i); };
    auto vid = [&](int i, int j) { return 2LL * (static_cast<long long>(j) * nx + i) + 1; };
    auto pos = [&](int i, int j) { return Vec2{origin.x + i * h, origin.y + j * h}; };
    auto cut = [&](Vec2 a, Vec2 b, double va, double vb) {
        double t = va / (va - vb);
        return a + (b - a) * t;
    };

    std::vector<Seg> segs;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            if (!ok(i, j) || !ok(i + 1, j) || !ok(i, j + 1) || !ok(i + 1, j + 1)) continue;
            double v[4] = {value(i, j), value(i + 1, j), value(i + 1, j + 1), value(i, j + 1)};
            int code = 0;
            for (int k = 0; k < 4; ++k)
                if (v[k] < 0.0) code |= 1 << k;
            if (code == 0 || code == 15) continue;
            Vec2 c[4] = {pos(i, j), pos(i + 1, j), pos(i + 1, j + 1), pos(i, j + 1)};
            // edges: 0 bottom (c0-c1), 1 right (c1-c2), 2 top (c3-c2), 3 left (c0-c3)
            long long eid[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
            auto ep = [&](int e) {
                switch (e) {
                    case 0: return cut(c[0], c[1], v[0], v[1]);
                    case 1: return cut(c[1], c[2], v[1], v[2]);
                    case 2: return cut(c[3], c[2], v[3], v[2]);
                    default: return cut(c[0], c[3], v[0], v[3]);
                }
            };
            auto add = [&](int a, int b) { segs.push_back({eid[a], eid[b], ep(a), ep(b)}); };
            bool center_neg = 0.25 * (v[0] + v[1] + v[2] + v[3]) < 0.0;
            switch (code) {
                case 1: case 14: add(3, 0); break;
                case 2: case 13: add(0, 1); break;
                case 3: case 12: add(3, 1); break;
                case 4: case 11: add(1, 2); break;
                case 6: case 9: add(0, 2); break;
                case 7: case 8: add(3, 2); break;
                case 5:
                    if (center_neg) { add(3, 2); add(0, 1); } else { add(3, 0); add(1, 2); }
                    break;
                case 10:
                    if (center_neg) { add(3, 0); add(1, 2); } else { add(3, 2); add(0, 1); }
                    break;
                default: break;
            }
        }
    }

    std::unordered_multimap<long long, size_t> by_edge;
    by_edge.reserve(segs.size() * 2);
    for (size_t k = 0; k < segs.size(); ++k) {
        by_edge.emplace(segs[k].e0, k);
        by_edge.emplace(segs[k].e1, k);
    }
    std::vector<char> used(segs.size(), 0);
    auto next_seg = [&](long long edge, size_t from) -> long long {
        auto range = by_edge.equal_range(edge);
        for (auto it = range.first; it != range.second; ++it)
            if (it->second != from && !used[it->second]) return static_cast<long long>(it->second);
        return -1;
    };
    auto degree = [&](long long edge) {
        auto range = by_edge.equal_range(edge);
        return std::distance(range.first, range.second);
    };

    std::vector<Polyline> out;
    auto trace = [&](size_t start, bool reverse_start) {
        Polyline pl;
        used[start] = 1;
        long long tail_edge = reverse_start ? segs[start].e0 : segs[start].e1;
        pl.pts.push_back(reverse_start ? segs[start].p1 : segs[start].p0);
        pl.pts.push_back(reverse_start ? segs[start].p0 : segs[start].p1);
        long long head_edge = reverse_start ? segs[start].e1 : segs[start].e0;
        size_t cur = start;
        for (;;) {
            long long n = next_seg(tail_edge, cur);
            if (n < 0) break;
            size_t k = static_cast<size_t>(n);
            used[k] = 1;
            if (segs[k].e0 == tail_edge) {
                pl.pts.push_back(segs[k].p1);
                tail_edge = segs[k].e1;
            } else {
                pl.pts.push_back(segs[k].p0);
                tail_edge = segs[k].e0;
            }
            cur = k;
        }
        if (tail_edge == head_edge && pl.pts.size() > 2) {
            pl.closed = true;
            pl.pts.pop_back();
        }
        out.push_back(std::move(pl));
    };
    // open chains first, starting from dangling ends
    for (size_t k = 0; k < segs.size(); ++k) {
        if (used[k]) continue;
        if (degree(segs[k].e0) == 1) trace(k, false);
        else if (degree(segs[k].e1) == 1) trace(k, true);
    }
    for (size_t k = 0; k < segs.size(); ++k)
        if (!used[k]) trace(k, false);
    return out;
}

double polyline_length(const Polyline& p) {
    double L = 0.0;
    for (size_t i = 1; i < p.pts.size(); ++i) L += norm(p.pts[i] - p.pts[i - 1]);
    if (p.closed && p.pts.size() > 1) L += norm(p.pts.front() - p.pts.back());
    return L;
}

double distance_to_polyline(const Polyline& p, Vec2 x, Vec2* closest) {
    double best = std::numeric_limits<double>::infinity();
    Vec2 bp;
    size_t n = p.pts.size();
    if (n == 1) {
        bp = p.pts[0];
        best = norm(x - bp);
    }
    size_t m = p.closed ? n : (n > 0 ? n - 1 : 0);
    for (size_t i = 0; i < m && n > 1; ++i) {
        Vec2 c = closest_on_segment(p.pts[i], p.pts[(i + 1) % n], x);
        double d = norm(x - c);
        if (d < best) {
            best = d;
            bp = c;
        }
    }
    if (closest) *closest = bp;
    return best;
}

}  // namespace aclab
