#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "aclab/geometry.hpp"

using namespace aclab;

namespace {

// r(theta) = r0 (1 + a cos k theta); curvature from the closed-form polar formula
double polar_kappa(double r0, double a, int k, double th) {
    double r = r0 * (1 + a * std::cos(k * th));
    double r1 = -r0 * a * k * std::sin(k * th);
    double r2 = -r0 * a * k * k * std::cos(k * th);
    return (r * r + 2 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
}

Vec2 flower_point(double r0, double a, int k, double th) {
    double r = r0 * (1 + a * std::cos(k * th));
    return {r * std::cos(th), r * std::sin(th)};
}

// dense sampling of the boundary curve
double flower_distance(Vec2 x, int samples = 200000) {
    double best = 1e300;
    for (int i = 0; i < samples; ++i) {
        double th = 2 * kPi * i / samples;
        best = std::min(best, norm(x - flower_point(1, 0.2, 3, th)));
    }
    return best;
}

Vec2 random_collar_point(const DomainGeometry& g, std::mt19937_64& rng, double band) {
    std::uniform_real_distribution<double> th(0, 2 * kPi), d(-band, band);
    double t = th(rng);
    Vec2 p = flower_point(1, 0.2, 3, t);
    double s = d(rng);
    return p + g.normal(p) * s;
}

}  // namespace

TEST(Geometry, DiskCurvatureAndCollarWidth) {
    auto g = build_domain(DomainSpec::disk(1.0), 1.0 / 64);
    EXPECT_NEAR(g.kappa(), 1.0, 0.02);
    EXPECT_NEAR(g.c2(), 1.0 / 6.0, 0.02 / 6.0);
    EXPECT_NEAR(g.boundary_length(), 2 * kPi, 1e-3);
    double area = 0;
    for (int c : g.active_cells()) area += g.volume_fraction()[static_cast<size_t>(c)] * g.h() * g.h();
    EXPECT_NEAR(area, kPi, 2e-3);
}

TEST(Geometry, FlowerCurvatureMatchesPolarFormula) {
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), 1.0 / 128);
    double kmax = 0;
    for (int i = 0; i < 100000; ++i) kmax = std::max(kmax, std::fabs(polar_kappa(1, 0.2, 3, 2 * kPi * i / 100000)));
    EXPECT_NEAR(g.kappa(), kmax, 0.01 * kmax);
    EXPECT_LE(g.c2(), 1.0 / (6.0 * g.kappa()) + 1e-12);
}

TEST(Geometry, CoarseGridRejected) { EXPECT_THROW(build_domain(DomainSpec::disk(1.0), 0.5), ValidationError); }

TEST(Geometry, InvalidSpecsRejected) {
    EXPECT_THROW(build_domain(DomainSpec::disk(-1.0), 0.01), ValidationError);
    EXPECT_THROW(build_domain(DomainSpec::flower(1.0, 1.2, 3), 0.01), ValidationError);
    EXPECT_THROW(build_domain(DomainSpec::custom("x^2 + y^2 - 1", Box{0.0, 0.5, 0.0, 0.5}), 0.01), ValidationError);
}

TEST(Geometry, CustomExpressionDisk) {
    auto g = build_domain(DomainSpec::custom("x^2 + y^2 - 1", Box{-1.2, 1.2, -1.2, 1.2}), 1.0 / 64);
    EXPECT_NEAR(g.kappa(), 1.0, 0.02);
    EXPECT_NEAR(g.boundary_length(), 2 * kPi, 2e-3);
}

TEST(Geometry, DiskNearestPointIsRadial) {
    auto g = build_domain(DomainSpec::disk(1.0), 1.0 / 64);
    Vec2 xi = g.nearest_point({0.9, 0.0});
    EXPECT_NEAR(xi.x, 1.0, 1e-9);
    EXPECT_NEAR(xi.y, 0.0, 1e-9);
    Vec2 n = g.normal({0.9, 0.0});
    EXPECT_NEAR(n.x, 1.0, 1e-9);
}

TEST(Geometry, NearestPointOutsideCollarThrows) {
    auto g = build_domain(DomainSpec::disk(1.0), 1.0 / 64);
    EXPECT_THROW(g.nearest_point({0.0, 0.0}), ValidationError);
}

TEST(Geometry, FlowerNearestPointAgainstDenseSampling) {
    const double h = 1.0 / 128;
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), h);
    std::mt19937_64 rng(7);
    for (int k = 0; k < 200; ++k) {
        Vec2 x = random_collar_point(g, rng, 3 * g.c2());
        Vec2 xi = g.nearest_point(x);
        EXPECT_NEAR(norm(x - xi), flower_distance(x), 2 * h * h) << "x=(" << x.x << "," << x.y << ")";
        EXPECT_NEAR(std::fabs(g.signed_distance(x)), norm(x - xi), 2 * h * h);
    }
}

TEST(Geometry, ReflectionBasics) {
    const double h = 1.0 / 64;
    auto g = build_domain(DomainSpec::disk(1.0), h);
    Vec2 xt = g.reflect({0.9, 0.0});
    EXPECT_NEAR(xt.x, 1.1, 1e-9);
    EXPECT_NEAR(xt.y, 0.0, 1e-9);

    auto f = build_domain(DomainSpec::flower(1.0, 0.2, 3), 1.0 / 128);
    std::mt19937_64 rng(11);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        Vec2 x = random_collar_point(f, rng, 2 * f.c2());
        Vec2 xi = f.nearest_point(x);
        Vec2 r = f.reflect(x);
        EXPECT_NEAR(norm(r - xi), norm(x - xi), 1e-12);
        worst = std::max(worst, norm(f.reflect(r) - x));
    }
    EXPECT_LE(worst, 4 * f.h() * f.h());
}

TEST(Geometry, ReflectedBallMaskOnDisk) {
    const double h = 1.0 / 128;
    auto g = build_domain(DomainSpec::disk(1.0), h);
    Vec2 a{1.0, 0.0};
    auto mask = g.reflected_ball_mask(a, 0.05);
    ASSERT_FALSE(mask.empty());
    for (int c : mask) EXPECT_LT(norm(g.center(c) - a), 0.25);
    EXPECT_TRUE(g.reflected_ball_mask({0.8, 0.0}, 0.1).empty());
}

// B~_r(a) within B_5r(a): brute force over every collar cell, not the mask's search window
TEST(Geometry, ReflectedBallInclusionSampling) {
    const double h = 0.01;
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), h);
    std::vector<int> collar;
    std::vector<Vec2> refl;
    for (int c : g.active_cells()) {
        if (std::fabs(g.distance()[static_cast<size_t>(c)]) < 3 * g.c2()) {
            collar.push_back(c);
            refl.push_back(g.reflect(g.center(c)));
        }
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> th(0, 2 * kPi), u(0, 1);
    int samples = 0, violations = 0, mismatch = 0;
    while (samples < 10000) {
        double r = (0.02 + 0.98 * u(rng)) * g.c2();
        Vec2 p = flower_point(1, 0.2, 3, th(rng));
        Vec2 a = p - g.normal(p) * (u(rng) * r);
        if (std::fabs(g.signed_distance(a)) + r > 3 * g.c2()) continue;
        ++samples;
        std::set<int> brute;
        for (size_t k = 0; k < collar.size(); ++k)
            if (norm2(refl[k] - a) < r * r) brute.insert(collar[k]);
        for (int c : brute)
            if (norm(g.center(c) - a) > 5 * r) ++violations;
        auto mask = g.reflected_ball_mask(a, r);
        if (std::set<int>(mask.begin(), mask.end()) != brute) ++mismatch;
    }
    EXPECT_EQ(violations, 0);
    EXPECT_EQ(mismatch, 0);
}

TEST(Geometry, ReflectionInequalitySymmetricPair) {
    auto g = build_domain(DomainSpec::disk(1.0), 1.0 / 64);
    Vec2 x{0.97, 0.02};
    auto rc = g.reflection_inequality_check(x, x);
    ASSERT_FALSE(rc.skipped) << rc.reason;
    EXPECT_NEAR(rc.lhs, norm(x - g.reflect(x)), 1e-12);
    EXPECT_GT(rc.slack_a, 0);
    EXPECT_GT(rc.slack_b, 0);
    EXPECT_FALSE(rc.violated);
}

TEST(Geometry, ReflectionInequalitySampling) {
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), 0.01);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    int admissible = 0, violations = 0;
    while (admissible < 10000) {
        Vec2 y = random_collar_point(g, rng, 0.5 * g.c2());
        if (g.signed_distance(y) > 0) continue;
        Vec2 yt = g.reflect(y);
        Vec2 x = yt + Vec2{u(rng), u(rng)} * (0.5 * g.c2());
        auto rc = g.reflection_inequality_check(x, y);
        if (rc.skipped) continue;
        ++admissible;
        if (rc.violated) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(Geometry, ReflectionInequalityPreconditionSkips) {
    auto g = build_domain(DomainSpec::disk(1.0), 1.0 / 64);
    EXPECT_TRUE(g.reflection_inequality_check({0.0, 0.0}, {0.1, 0.0}).skipped);
    EXPECT_TRUE(g.reflection_inequality_check({2.0, 0.0}, {0.99, 0.0}).skipped);
}

TEST(Geometry, DumpListsEveryRow) {
    auto g = build_domain(DomainSpec::disk(1.0), 1.0 / 64);
    std::ostringstream os;
    g.dump(os);
    std::string s = os.str();
    EXPECT_GE(std::count(s.begin(), s.end(), '\n'), g.ny());
}
