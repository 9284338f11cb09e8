#include <gtest/gtest.h>

#include <cmath>

#include "aclab/initial_data.hpp"
#include "aclab/measures.hpp"
#include "synthetic.hpp"

using namespace aclab;

namespace {

MeasureSnapshot constant_snapshot(const DomainGeometry& g, double value, double eps) {
    Solver s(g, PotentialSpec::quartic(), eps);
    std::vector<double> u(static_cast<size_t>(g.cells()), value);
    return snapshot(s, s.make_field(u));
}

}  // namespace

TEST(Measures, ConstantOneCarriesNoMass) {
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), 0.01);
    auto m = constant_snapshot(g, 1.0, 0.04);
    for (int c : g.active_cells()) {
        ASSERT_EQ(m.e[static_cast<size_t>(c)], 0.0);
        ASSERT_EQ(m.xi[static_cast<size_t>(c)], 0.0);
    }
    EXPECT_EQ(m.total(), 0.0);
    EXPECT_EQ(density_ratio(m, g).D, 0.0);
    EXPECT_EQ(discrepancy_norms(m, g).sup_pos, 0.0);
}

TEST(Measures, ZeroFieldDiscrepancyIsMinusWOverEps) {
    const double eps = 0.08;
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    auto m = constant_snapshot(g, 0.0, eps);
    double area = 0;
    for (int c : g.active_cells()) {
        ASSERT_NEAR(m.xi[static_cast<size_t>(c)], -0.25 / eps, 1e-12);
        area += m.w[static_cast<size_t>(c)];
    }
    auto n = discrepancy_norms(m, g);
    EXPECT_EQ(n.sup_pos, 0.0);
    EXPECT_NEAR(n.l1, 0.25 / eps * area, 1e-9);
}

TEST(Measures, TotalMatchesEnergyAndXiBoundedByE) {
    const double eps = 0.04;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), 0.01);
    auto is = InterfaceSpec::vertical_line(-0.3);
    is.noise = 0.2;
    auto pf = prepare(g, p, is, eps);
    Solver s(g, p, eps);
    auto f = s.make_field(pf.u);
    auto m = snapshot(s, f);
    EXPECT_NEAR(m.total(), s.energy(f), 1e-12 * s.energy(f));
    for (int c : g.active_cells()) {
        size_t uc = static_cast<size_t>(c);
        ASSERT_GE(m.e[uc], 0.0);
        ASSERT_LE(std::fabs(m.xi[uc]), m.e[uc]);
    }
}

// per unit interface length the discretization-only discrepancy is O(h / eps)
TEST(Measures, PreparedLineDiscrepancyL1) {
    const double eps = 0.04, L = 2.0;
    auto p = PotentialSpec::quartic();
    for (double h : {eps / 4, eps / 8}) {
        auto g = build_domain(DomainSpec::disk(1.0), h);
        auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.0), eps);
        Solver s(g, p, eps);
        auto n = discrepancy_norms(snapshot(s, s.make_field(pf.u)), g);
        EXPECT_LE(n.l1 / L, h / eps) << "h=" << h;
    }
}

TEST(Measures, SharpLineDensityIsSigma) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.005);
    const double sigma = 2 * std::sqrt(2.0) / 3;
    MeasureSnapshot m;
    synth::sharp_vertical_line(g, sigma, 0.0, m);
    auto d = density_ratio(m, g);
    EXPECT_NEAR(d.D, sigma, 0.1 * sigma);
    EXPECT_GE(d.radius, 4 * g.h());
    EXPECT_NEAR(d.spacing, g.c2() / 8, 1e-15);

    DensityOptions interior;
    interior.include_reflected = false;
    EXPECT_NEAR(density_ratio(m, g, interior).D, sigma, 0.1 * sigma);
}

TEST(Measures, InitialDensityWithinSixD0) {
    const double eps = 0.04;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), 0.01);
    auto pf = prepare(g, p, InterfaceSpec::vertical_line(-0.3), eps);
    Solver s(g, p, eps);
    auto d = density_ratio(snapshot(s, s.make_field(pf.u)), g);
    EXPECT_GT(d.D, 0.0);
    EXPECT_LE(d.D, 6 * pf.D0);
    EXPECT_NEAR(d.lambda_prime, 0.8, 1e-15);
}

TEST(Measures, BarrierAtGammaClosedForm) {
    const double eps = 0.04, lambda = 0.6;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    Solver s(g, p, eps);
    std::vector<double> u(static_cast<size_t>(g.cells()), p.gamma);
    auto b = barrier_diagnostic(s, s.make_field(u), lambda);
    EXPECT_EQ(b.c3, 0.0);
    // deep cells sit on the psi plateau 3 c2 / 4
    double expect = -p.W(p.gamma) - std::pow(eps, 1 - lambda) + eps * g.kappa() * 0.75 * g.c2();
    EXPECT_NEAR(b.max_value, expect, 1e-12);
    EXPECT_LT(b.max_value, 0.0);
}

TEST(Measures, BarrierOnPreparedData) {
    const double lambda = 0.6;
    auto p = PotentialSpec::quartic();
    for (double eps : {0.08, 0.04}) {
        auto g = build_domain(DomainSpec::disk(1.0), eps / 4);
        auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.0), eps);
        Solver s(g, p, eps);
        auto b = barrier_diagnostic(s, s.make_field(pf.u), lambda);
        EXPECT_LE(b.normalized, 1.1) << "eps=" << eps;
        EXPECT_GT(b.c3, 0.5);
    }
}

TEST(Measures, PsiConstraints) {
    const double c = 0.3, ds = 1e-5;
    for (double s = 0; s <= 0.5 * c; s += 0.01) EXPECT_DOUBLE_EQ(barrier_psi(s, c), s);
    EXPECT_DOUBLE_EQ(barrier_psi(c, c), barrier_psi(2 * c, c));
    double max_d1 = 0, max_d2 = 0;
    for (double s = ds; s < 1.5 * c; s += ds) {
        double a = barrier_psi(s - ds, c), b = barrier_psi(s, c), d = barrier_psi(s + ds, c);
        max_d1 = std::max(max_d1, std::fabs(d - a) / (2 * ds));
        max_d2 = std::max(max_d2, std::fabs(d - 2 * b + a) / (ds * ds));
    }
    EXPECT_LE(max_d1, 1.0 + 1e-9);
    EXPECT_LE(max_d2, 4.0 / c);
}
