#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "aclab/initial_data.hpp"
#include "aclab/solver.hpp"

using namespace aclab;

namespace {

double max_abs_active(const DomainGeometry& g, const std::vector<double>& u) {
    double m = 0;
    for (int c : g.active_cells()) m = std::max(m, std::fabs(u[static_cast<size_t>(c)]));
    return m;
}

// dissipation residual of a short disk run with the given dt
double disk_residual(double dt) {
    const double eps = 0.08, h = 0.02;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), h);
    auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.2), eps);
    Solver s(g, p, eps, StepPolicy{Scheme::Explicit, 0.2, dt});
    auto f = s.make_field(pf.u);
    return dissipation_identity_residual(integrate(s, f, 0.02, 50, false));
}

}  // namespace

TEST(Solver, PolicyStepBound) {
    auto p = PotentialSpec::quartic();
    // max |W''| on [-1, 1] is 2 for the quartic
    EXPECT_DOUBLE_EQ(policy_dt(StepPolicy{}, 0.01, 0.04, p), 0.2 * std::min(0.01 * 0.01 / 4, 0.04 * 0.04 / 2));
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    Solver s(g, p, 0.08);
    const double dt = s.dt();
    EXPECT_THROW(s.set_dt(2 * dt), ValidationError);
    s.set_dt(dt / 2);
    EXPECT_DOUBLE_EQ(s.dt(), dt / 2);
}

TEST(Solver, ConstantIsFixedPoint) {
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), 0.01);
    for (Scheme sc : {Scheme::Explicit, Scheme::SemiImplicit}) {
        Solver s(g, p, 0.04, StepPolicy{sc, 0.2, 0.0});
        std::vector<double> u(static_cast<size_t>(g.cells()), 1.0);
        auto f = s.make_field(u);
        EXPECT_EQ(s.energy(f), 0.0);
        auto tr = integrate(s, f, 200 * s.dt(), 20, false);
        for (int c : g.active_cells()) ASSERT_EQ(f.u[static_cast<size_t>(c)], 1.0);
        EXPECT_EQ(dissipation_identity_residual(tr), 0.0);
        EXPECT_EQ(s.energy(f), 0.0);
    }
}

// q'' = W'(q): the profile is steady, the drift is discretization only
TEST(Solver, PlanarWaveStationaryInChannel) {
    const double eps = 0.08, h = eps / 8;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::capsule(2.0, 1.0), h);
    auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.0), eps);
    Solver s(g, p, eps);
    auto f = s.make_field(pf.u);
    const auto u0 = f.u;
    integrate(s, f, 10 * eps * eps, 1000, false);
    double worst = 0;
    for (int c : g.active_cells()) worst = std::max(worst, std::fabs(f.u[static_cast<size_t>(c)] - u0[static_cast<size_t>(c)]));
    EXPECT_LE(worst, 1e-3);
    auto rr = parabolic_rescale_check(f, g, p);
    EXPECT_FALSE(rr.flagged);
    EXPECT_GT(rr.samples, 100);
}

TEST(Solver, LineEnergyIsSigmaTimesLength) {
    const double eps = 0.02;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), eps / 4);
    auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.0), eps);
    Solver s(g, p, eps);
    const double sigmaL = StandingWave(p).sigma() * 2.0;
    EXPECT_NEAR(s.energy(s.make_field(pf.u)), sigmaL, 0.05 * sigmaL);
    EXPECT_NEAR(energy(s.make_field(pf.u), g, p), s.energy(s.make_field(pf.u)), 1e-12);
}

TEST(Solver, EnergyNonincreasingAndBounded) {
    const double eps = 0.04;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), 0.01);
    auto is = InterfaceSpec::vertical_line(-0.3);
    is.noise = 0.5;
    is.seed = 3;
    auto pf = prepare(g, p, is, eps);
    for (Scheme sc : {Scheme::Explicit, Scheme::SemiImplicit}) {
        Solver s(g, p, eps, StepPolicy{sc, 0.2, 0.0});
        auto f = s.make_field(pf.u);
        double prev = s.energy(f), worst_rise = -1e300, maxu = 0;
        RunHooks hooks;
        hooks.before_step = [&](const PhaseField& cur, double) {
            double e = s.energy(cur);
            worst_rise = std::max(worst_rise, e - prev);
            prev = e;
            maxu = std::max(maxu, max_abs_active(g, cur.u));
        };
        integrate(s, f, 0.002, 100, false, hooks);
        EXPECT_LE(worst_rise, sc == Scheme::Explicit ? 0.0 : 1e-10);
        EXPECT_LE(maxu, 1.0 + 1e-6);
        if (sc == Scheme::SemiImplicit) EXPECT_GT(s.last_cg_iterations(), 0);
    }
}

TEST(Solver, NeumannResidualAlongRun) {
    const double eps = 0.04, h = 0.01;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), h);
    auto pf = prepare(g, p, InterfaceSpec::vertical_line(-0.3), eps);
    Solver s(g, p, eps);
    auto f = s.make_field(pf.u);
    int checked = 0;
    RunHooks hooks;
    hooks.on_record = [&](const PhaseField& cur, const TrajectoryRecord&) {
        auto nr = neumann_residual(g, cur.u);
        EXPECT_LE(nr.max_normal_derivative, 10 * h * nr.max_gradient) << "t=" << cur.t;
        ++checked;
    };
    integrate(s, f, 0.005, 250, false, hooks);
    EXPECT_GE(checked, 3);
}

TEST(Solver, DissipationResidualFirstOrderInDt) {
    const double r1 = disk_residual(2e-5), r2 = disk_residual(1e-5);
    EXPECT_LE(r1, 1e-2);
    EXPECT_GT(r1 / r2, 1.4);
    EXPECT_LT(r1 / r2, 2.6);
}

TEST(Solver, RescaleWithWrongEpsFlagged) {
    const double eps = 0.08;
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    auto pf = prepare(g, p, InterfaceSpec::circle({0.0, 0.0}, 0.5), eps);
    Solver s(g, p, eps);
    auto f = s.make_field(pf.u);
    integrate(s, f, 0.002, 1000, false);
    s.evaluate_rhs(f);
    auto good = parabolic_rescale_check(f, g, p);
    auto bad = parabolic_rescale_check(f, g, p, 2 * eps);
    EXPECT_FALSE(good.flagged);
    EXPECT_TRUE(bad.flagged);
    EXPECT_GT(bad.max_residual, 10 * good.max_residual);
}

// residual ~ C (h/eps)^2 with C stable under refinement
TEST(Solver, RescaleResidualSecondOrder) {
    const double eps = 0.08;
    auto p = PotentialSpec::quartic();
    double C[2];
    int k = 0;
    for (double h : {0.02, 0.01}) {
        auto g = build_domain(DomainSpec::disk(1.0), h);
        auto pf = prepare(g, p, InterfaceSpec::circle({0.0, 0.0}, 0.5), eps);
        Solver s(g, p, eps);
        auto f = s.make_field(pf.u);
        integrate(s, f, 0.002, 1000000, false);
        s.evaluate_rhs(f);
        C[k++] = parabolic_rescale_check(f, g, p).max_residual / std::pow(h / eps, 2);
    }
    EXPECT_NEAR(C[1], C[0], 0.5 * C[0]);
}

TEST(Solver, CheckpointRoundTrip) {
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    auto pf = prepare(g, p, InterfaceSpec::vertical_line(0.1), 0.08);
    Solver s(g, p, 0.08);
    auto f = s.make_field(pf.u, 0.125);
    auto path = (std::filesystem::temp_directory_path() / "aclab_roundtrip.pfld").string();
    write_checkpoint(path, g, f);
    int nx = 0, ny = 0;
    auto r = read_checkpoint(path, &nx, &ny);
    EXPECT_EQ(nx, g.nx());
    EXPECT_EQ(ny, g.ny());
    EXPECT_EQ(r.t, 0.125);
    EXPECT_EQ(r.eps, 0.08);
    EXPECT_EQ(r.h, g.h());
    for (int c : g.active_cells()) ASSERT_EQ(r.u[static_cast<size_t>(c)], f.u[static_cast<size_t>(c)]);
    std::filesystem::remove(path);
    EXPECT_THROW(read_checkpoint(path), ValidationError);
}

TEST(Solver, NonFiniteAbortsWithDump) {
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::disk(1.0), 0.02);
    Solver s(g, p, 0.08);
    auto dump = (std::filesystem::temp_directory_path() / "aclab_abort.pfld").string();
    std::filesystem::remove(dump);
    s.set_dump_path(dump);
    std::vector<double> u(static_cast<size_t>(g.cells()), 1.0);
    u[static_cast<size_t>(g.active_cells()[g.active_cells().size() / 2])] = std::numeric_limits<double>::quiet_NaN();
    auto f = s.make_field(u);
    try {
        s.step(f);
        FAIL() << "no abort";
    } catch (const NumericalAbort& e) {
        EXPECT_EQ(e.dump_path, dump);
        EXPECT_TRUE(std::filesystem::exists(dump));
    }
    std::filesystem::remove(dump);
}
