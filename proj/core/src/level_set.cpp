#include "aclab/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aclab {

double Shape::scale() const {
    Box b = bbox();
    return std::max({1e-3, b.width(), b.height()});
}

Vec2 Shape::gradient(Vec2 x) const {
    double d = 1e-6 * scale();
    return {(phi({x.x + d, x.y}) - phi({x.x - d, x.y})) / (2 * d), (phi({x.x, x.y + d}) - phi({x.x, x.y - d})) / (2 * d)};
}

void Shape::hessian(Vec2 x, double& hxx, double& hxy, double& hyy) const {
    double d = 2e-4 * scale();
    Vec2 gxp = gradient({x.x + d, x.y}), gxm = gradient({x.x - d, x.y});
    Vec2 gyp = gradient({x.x, x.y + d}), gym = gradient({x.x, x.y - d});
    hxx = (gxp.x - gxm.x) / (2 * d);
    hyy = (gyp.y - gym.y) / (2 * d);
    hxy = 0.5 * ((gxp.y - gxm.y) + (gyp.x - gym.x)) / (2 * d);
}

double Shape::curvature(Vec2 x) const {
    Vec2 g = gradient(x);
    double hxx, hxy, hyy;
    hessian(x, hxx, hxy, hyy);
    double n = norm(g);
    return (hxx * g.y * g.y - 2 * hxy * g.x * g.y + hyy * g.x * g.x) / (n * n * n);
}

bool Shape::closest_point_exact(Vec2, Vec2&) const { return false; }

Vec2 Shape::pull_to_zero(Vec2 p) const {
    double tol = 1e-15 * scale();
    for (int it = 0; it < 30; ++it) {
        double f = phi(p);
        if (std::fabs(f) <= tol) break;
        Vec2 g = gradient(p);
        double g2 = norm2(g);
        if (g2 == 0.0) break;
        p -= g * (f / g2);
    }
    return p;
}

Vec2 Shape::project(Vec2 x, Vec2 guess) const {
    Vec2 exact;
    if (closest_point_exact(x, exact)) return exact;
    Vec2 p = pull_to_zero(guess);
    double tol = 1e-14 * scale();
    double step_cap = std::max(norm(x - p), 1e-3 * scale());
    for (int it = 0; it < 40; ++it) {
        Vec2 g = gradient(p);
        double hxx, hxy, hyy;
        hessian(p, hxx, hxy, hyy);
        Vec2 r = x - p;
        double f1 = phi(p);
        double f2 = cross(r, g);
        double a11 = g.x, a12 = g.y;
        double a21 = -g.y + (r.x * hxy - r.y * hxx);
        double a22 = g.x + (r.x * hyy - r.y * hxy);
        double det = a11 * a22 - a12 * a21;
        if (det == 0.0) break;
        Vec2 dp{(a22 * f1 - a12 * f2) / det, (-a21 * f1 + a11 * f2) / det};
        double n = norm(dp);
        if (n > step_cap) dp = dp * (step_cap / n);
        p -= dp;
        if (n <= tol) break;
    }
    return pull_to_zero(p);
}

Vec2 DiskShape::gradient(Vec2 x) const {
    double r = norm(x);
    return r > 0 ? x / r : Vec2{1.0, 0.0};
}

std::string DiskShape::describe() const {
    std::ostringstream os;
    os << "disk(R=" << r_ << ")";
    return os.str();
}

bool DiskShape::closest_point_exact(Vec2 x, Vec2& out) const {
    double r = norm(x);
    if (r == 0.0) return false;
    out = x * (r_ / r);
    return true;
}

double FlowerShape::phi(Vec2 x) const {
    double r = norm(x);
    double th = std::atan2(x.y, x.x);
    return r - r0_ * (1.0 + a_ * std::cos(k_ * th));
}

Vec2 FlowerShape::gradient(Vec2 x) const {
    double r = norm(x);
    if (r == 0.0) return {1.0, 0.0};
    double th = std::atan2(x.y, x.x);
    double P = r0_ * a_ * k_ * std::sin(k_ * th);  // d phi / d theta
    Vec2 er = x / r;
    Vec2 et{-er.y, er.x};
    return er + et * (P / r);
}

Box FlowerShape::bbox() const {
    double R = r0_ * (1.0 + std::fabs(a_));
    return {-R, R, -R, R};
}

std::string FlowerShape::describe() const {
    std::ostringstream os;
    os << "flower(R0=" << r0_ << ", a=" << a_ << ", k=" << k_ << ")";
    return os.str();
}

double FlowerShape::polar_curvature(double th) const {
    double r = r0_ * (1.0 + a_ * std::cos(k_ * th));
    double r1 = -r0_ * a_ * k_ * std::sin(k_ * th);
    double r2 = -r0_ * a_ * k_ * k_ * std::cos(k_ * th);
    return (r * r + 2 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
}

double CapsuleShape::phi(Vec2 x) const {
    double cx = std::clamp(x.x, -0.5 * len_, 0.5 * len_);
    return std::hypot(x.x - cx, x.y) - 0.5 * w_;
}

Vec2 CapsuleShape::gradient(Vec2 x) const {
    double cx = std::clamp(x.x, -0.5 * len_, 0.5 * len_);
    Vec2 d{x.x - cx, x.y};
    double n = norm(d);
    return n > 0 ? d / n : Vec2{0.0, 1.0};
}

Box CapsuleShape::bbox() const { return {-0.5 * len_ - 0.5 * w_, 0.5 * len_ + 0.5 * w_, -0.5 * w_, 0.5 * w_}; }

std::string CapsuleShape::describe() const {
    std::ostringstream os;
    os << "capsule(length=" << len_ << ", width=" << w_ << ")";
    return os.str();
}

bool CapsuleShape::closest_point_exact(Vec2 x, Vec2& out) const {
    double cx = std::clamp(x.x, -0.5 * len_, 0.5 * len_);
    Vec2 c{cx, 0.0};
    Vec2 d = x - c;
    double n = norm(d);
    if (n == 0.0) return false;
    out = c + d * (0.5 * w_ / n);
    return true;
}

}  // namespace aclab
