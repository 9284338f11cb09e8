#include <gtest/gtest.h>

#include <cmath>

#include "aclab/initial_data.hpp"
#include "aclab/measures.hpp"

using namespace aclab;

namespace {

// bilinear interpolation over every non-outside cell
double bilinear(const DomainGeometry& g, const std::vector<double>& f, Vec2 x) {
    Vec2 c0 = g.center(0);
    double fx = (x.x - c0.x) / g.h(), fy = (x.y - c0.y) / g.h();
    int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
    double tx = fx - i, ty = fy - j, v = 0, w = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            int c = g.index(i + a, j + b);
            if (g.kind()[static_cast<size_t>(c)] == CellKind::Outside) continue;
            double wk = (a ? tx : 1 - tx) * (b ? ty : 1 - ty);
            v += wk * f[static_cast<size_t>(c)];
            w += wk;
        }
    return v / w;
}

const AssumptionLine& line(const AssumptionReport& r, const char* name) {
    const AssumptionLine* l = r.find(name);
    if (!l) throw std::runtime_error(std::string("missing assumption line ") + name);
    return *l;
}

}  // namespace

TEST(InitialData, LineDistanceIsX) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    auto d = signed_distance_to_interface(g, InterfaceSpec::vertical_line(0.0));
    double worst = 0;
    for (int c : g.active_cells())
        if (g.distance()[static_cast<size_t>(c)] < -g.c2()) worst = std::max(worst, std::fabs(d[static_cast<size_t>(c)] - g.center(c).x));
    EXPECT_LE(worst, 1e-12);
}

TEST(InitialData, CollarCorrectionMakesDistanceNeumann) {
    for (double h : {0.01, 0.005}) {
        auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), h);
        auto d = signed_distance_to_interface(g, InterfaceSpec::vertical_line(-0.3));
        double worst = 0;
        for (const auto& b : g.boundary()) {
            double a = bilinear(g, d, b.p + b.normal * h), c = bilinear(g, d, b.p - b.normal * h);
            worst = std::max(worst, std::fabs(a - c) / (2 * h));
        }
        EXPECT_LE(worst, 5 * h) << "h=" << h;
    }
}

TEST(InitialData, InterfaceOutsideDomainRejected) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    EXPECT_THROW(signed_distance_to_interface(g, InterfaceSpec::circle({3.0, 0.0}, 0.5)), ValidationError);
}

TEST(InitialData, UnderResolvedEpsRejected) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    EXPECT_THROW(prepare(g, PotentialSpec::quartic(), InterfaceSpec::vertical_line(0.0), 0.03), ValidationError);
}

TEST(InitialData, TransversalityEnforced) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    auto is = InterfaceSpec::vertical_line(0.3);
    auto cr = interface_crossings(g, is);
    ASSERT_EQ(cr.size(), 2u);
    EXPECT_NEAR(cr[0].angle_deg, std::acos(0.3) * 180 / kPi, 0.1);
    EXPECT_THROW(prepare(g, PotentialSpec::quartic(), is, 0.04), ValidationError);
    is.check_transversality = false;
    EXPECT_NO_THROW(prepare(g, PotentialSpec::quartic(), is, 0.04));
}

TEST(InitialData, PreparedLineEquipartition) {
    const double eps = 0.04, h = eps / 4;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), h);
    auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.0), eps);
    double worst = 0;
    for (int c : g.active_cells()) {
        if (g.distance()[static_cast<size_t>(c)] > -g.c2()) continue;
        Vec2 gr = centered_gradient(g, pf.u, c);
        double u = pf.u[static_cast<size_t>(c)];
        worst = std::max(worst, std::fabs(eps * norm2(gr) / 2 - p.W(u) / eps));
    }
    EXPECT_LE(worst, 0.05 / eps);
    EXPECT_LE(pf.c_gradient, 1 / std::sqrt(2.0) + h);
    EXPECT_TRUE(pf.report.ok()) << pf.report.to_string();
    EXPECT_EQ(pf.report.lines.size(), 5u);
    EXPECT_TRUE(pf.warnings.empty());
}

TEST(InitialData, PreparedFieldBoundedAndNeumann) {
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), 0.01);
    auto pf = prepare(g, PotentialSpec::quartic(), InterfaceSpec::vertical_line(-0.3), 0.04);
    for (double v : pf.u) EXPECT_LE(std::fabs(v), 1.0);
    EXPECT_TRUE(line(pf.report, "neumann").pass);
    EXPECT_TRUE(pf.report.ok()) << pf.report.to_string();
}

TEST(InitialData, NoInterfaceIsTrivial) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    auto pf = prepare(g, PotentialSpec::quartic(), InterfaceSpec::none(), 0.08);
    EXPECT_EQ(pf.D0, 0.0);
    EXPECT_TRUE(pf.report.ok()) << pf.report.to_string();
    for (int c : g.active_cells()) EXPECT_EQ(pf.u[static_cast<size_t>(c)], 1.0);
}

TEST(InitialData, ScaledFieldFailsBound) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    auto pf = prepare(g, PotentialSpec::quartic(), InterfaceSpec::vertical_line(0.0), 0.04);
    for (double& v : pf.u) v *= 1.2;
    auto rep = verify_assumptions(pf, g, PotentialSpec::quartic());
    const auto& l = line(rep, "max_abs_u");
    EXPECT_FALSE(l.pass);
    EXPECT_NEAR(l.value, 1.2, 1e-9);
    EXPECT_NEAR(std::fabs(pf.u[static_cast<size_t>(g.locate(l.witness))]), 1.2, 1e-9);
}

TEST(InitialData, NoisyFieldFailsDiscrepancyBound) {
    const double eps = 0.04;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    auto clean = prepare(g, p, InterfaceSpec::vertical_line(0.0), eps);
    AssumptionOptions opt;
    opt.discrepancy_constant = clean.c_discrepancy;
    auto is = InterfaceSpec::vertical_line(0.0);
    is.noise = 0.3;
    is.seed = 42;
    auto noisy = prepare(g, p, is, eps, opt);
    EXPECT_FALSE(line(noisy.report, "discrepancy_bound").pass);
    EXPECT_FALSE(noisy.warnings.empty());
}

TEST(InitialData, NoiseFollowsSeed) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    auto is = InterfaceSpec::vertical_line(0.0);
    is.noise = 0.2;
    is.seed = 1;
    auto a = prepare(g, PotentialSpec::quartic(), is, 0.08);
    auto b = prepare(g, PotentialSpec::quartic(), is, 0.08);
    is.seed = 2;
    auto c = prepare(g, PotentialSpec::quartic(), is, 0.08);
    EXPECT_EQ(a.u, b.u);
    EXPECT_NE(a.u, c.u);
}

TEST(InitialData, DensityConstantStableUnderRefinement) {
    auto p = PotentialSpec::quartic();
    auto g1 = build_domain(DomainSpec::disk(1.0), 0.01);
    auto g2 = build_domain(DomainSpec::disk(1.0), 0.005);
    auto a = prepare(g1, p, InterfaceSpec::vertical_line(0.0), 0.04);
    auto b = prepare(g2, p, InterfaceSpec::vertical_line(0.0), 0.04);
    EXPECT_NEAR(b.D0, a.D0, 0.1 * a.D0);
}

// discretization-only discrepancy: sup xi+ <= C h / eps^2 and at least halves with h
TEST(InitialData, EquipartitionRefinement) {
    const double eps = 0.04;
    auto p = PotentialSpec::quartic();
    double prev = 0, prev_h = 0;
    for (double h : {0.01, 0.005, 0.0025}) {
        auto g = build_domain(DomainSpec::disk(1.0), h);
        auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.0), eps);
        Solver s(g, p, eps);
        auto m = snapshot(s, s.make_field(pf.u));
        double sup = discrepancy_norms(m, g).sup_pos;
        EXPECT_LE(sup, h / (eps * eps));
        if (prev > 0) EXPECT_LE(sup / prev, 0.7) << "h " << prev_h << " -> " << h;
        prev = sup;
        prev_h = h;
    }
}
