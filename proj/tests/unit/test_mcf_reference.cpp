#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "aclab/initial_data.hpp"
#include "aclab/mcf_reference.hpp"

using namespace aclab;

namespace {

double mean_radius(const Front& fr, Vec2 c) {
    double r = 0;
    for (Vec2 p : fr.nodes) r += norm(p - c);
    return r / static_cast<double>(fr.nodes.size());
}

}  // namespace

TEST(McfReference, ShrinkingCircleFollowsClosedForm) {
    const double R0 = 0.5;
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    Front fr = Front::circle({0.0, 0.0}, R0, 0.01);
    EXPECT_TRUE(fr.closed);
    EXPECT_NEAR(fr.area(), kPi * R0 * R0, 1e-3);
    const double tmax = 0.9 * R0 * R0 / 2;
    double worst = 0;
    for (int k = 1; k <= 20; ++k) {
        double a0 = fr.area(), t0 = fr.t;
        fr = evolve_front(fr, tmax * k / 20 - fr.t, g);
        worst = std::max(worst, std::fabs(mean_radius(fr, {0, 0}) - std::sqrt(R0 * R0 - 2 * fr.t)));
        // area decreases at rate 2 pi
        double rate = (a0 - fr.area()) / (fr.t - t0);
        EXPECT_NEAR(rate, 2 * kPi, 0.02 * 2 * kPi) << "t=" << fr.t;
        EXPECT_FALSE(fr.extinct);
    }
    EXPECT_NEAR(fr.t, tmax, 1e-12);
    EXPECT_LE(worst, 1e-3 * R0);
}

TEST(McfReference, CircleReachesExtinction) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    Front fr = Front::circle({0.0, 0.0}, 0.2, 0.01);
    fr = evolve_front(fr, 0.021, g);
    EXPECT_TRUE(fr.extinct);
}

TEST(McfReference, OrthogonalChordIsStationary) {
    auto g = build_domain(DomainSpec::capsule(2.0, 1.0), 0.01);
    Front fr = Front::chord({0.1, -0.5}, {0.1, 0.5}, 0.02);
    const auto start = fr.nodes;
    Front next = evolve_front(fr, 0.01, g);
    ASSERT_GT(next.steps, 0);
    ASSERT_EQ(next.nodes.size(), start.size());
    double motion = 0;
    for (size_t k = 0; k < start.size(); ++k) motion = std::max(motion, norm(next.nodes[k] - start[k]));
    EXPECT_LE(motion, 1e-6 * static_cast<double>(next.steps));
    EXPECT_LE(endpoint_orthogonality_defect(next, g), 1e-6);
}

TEST(McfReference, SixtyDegreeChordTurnsOrthogonal) {
    auto g = build_domain(DomainSpec::capsule(2.0, 1.0), 0.01);
    Front fr = Front::chord({0.0, -0.5}, {1.0 / std::sqrt(3.0), 0.5}, 0.02);
    EXPECT_NEAR(endpoint_orthogonality_defect(fr, g), 30.0, 0.5);
    for (int k = 0; k < 10; ++k) {
        fr = evolve_front(fr, 1e-4, g);
        EXPECT_LE(endpoint_orthogonality_defect(fr, g), 1.0) << "t=" << fr.t;
        for (Vec2 p : {fr.nodes.front(), fr.nodes.back()}) EXPECT_LE(std::fabs(g.signed_distance(p)), 1e-3);
    }
}

TEST(McfReference, SpacingStaysInRange) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    Front fr = Front::circle({0.1, 0.0}, 0.6, 0.02);
    fr = evolve_front(fr, 0.05, g);
    EXPECT_GE(fr.min_spacing(), 0.5 * fr.spacing);
    EXPECT_LE(fr.max_spacing(), 4 * fr.spacing);
}

TEST(McfReference, HausdorffDistance) {
    Front fr = Front::circle({0.0, 0.0}, 0.5, 0.01);
    EXPECT_EQ(hausdorff_distance(fr.polyline(), {fr.polyline()}), 0.0);
    EXPECT_EQ(hausdorff_distance(fr.polyline(), {}), std::numeric_limits<double>::infinity());

    const double eps = 0.04, h = 0.01;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), h);
    auto pf = prepare(g, p, InterfaceSpec::circle({0.0, 0.0}, 0.5), eps);
    Solver s(g, p, eps);
    auto f = s.make_field(pf.u);
    EXPECT_LE(hausdorff_distance(fr, f, g), h);
    EXPECT_NEAR(zero_set_radius(g, f.u, {0, 0}), 0.5, h);
    auto one = s.make_field(std::vector<double>(static_cast<size_t>(g.cells()), 1.0));
    EXPECT_EQ(hausdorff_distance(fr, one, g), std::numeric_limits<double>::infinity());
}

TEST(McfReference, FrontFromLineField) {
    const double eps = 0.04, h = 0.01;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), h);
    auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.1), eps);
    Front fr = front_from_field(g, pf.u, h);
    EXPECT_FALSE(fr.closed);
    EXPECT_NEAR(fr.length(), 2 * std::sqrt(1 - 0.01), 2 * h);
    for (Vec2 q : fr.nodes) EXPECT_NEAR(q.x, 0.1, h);
}

TEST(McfReference, CsvRows) {
    Front fr = Front::chord({0, 0}, {0.1, 0}, 0.05);
    fr.t = 0.5;
    std::ostringstream os;
    write_front_csv_header(os);
    write_front_csv(os, fr);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,node,x,y");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(line.rfind("0.5,", 0), 0u) << line;
    }
    EXPECT_EQ(rows, static_cast<int>(fr.nodes.size()));
}
