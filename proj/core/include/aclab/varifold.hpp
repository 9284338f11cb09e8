#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aclab/contour.hpp"
#include "aclab/measures.hpp"

namespace aclab {

// J(i, j) = d g_i / d x_j
struct Mat2 {
    double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;
    double trace() const { return xx + yy; }
};

struct VectorFieldSpec {
    std::string name;
    std::function<Vec2(Vec2)> g;
    std::function<Mat2(Vec2)> jacobian;  // empty: central differences
    bool tangent = false;                // claims <g, nu> = 0 on the boundary

    static VectorFieldSpec constant(Vec2 v);
    // (1 - |x - c|^2 / R^2)^4 v inside B_R(c), zero outside
    static VectorFieldSpec interior_bump(Vec2 center, double radius, Vec2 v);
    static VectorFieldSpec from_function(std::string name, std::function<Vec2(Vec2)> g, bool tangent = false);

    Vec2 operator()(Vec2 x) const { return g(x); }
    Mat2 grad(Vec2 x) const;
};

// max over boundary nodes of |<g, nu>|
double normal_component(const VectorFieldSpec& g, const DomainGeometry& geo);

struct FirstVariationReport {
    double direct = 0.0;         // int grad g . (I - nu_u x nu_u) d mu over {grad u != 0}
    double transport = 0.0;      // int eps d_t u <g, grad u>
    double discrepancy = 0.0;    // int grad g . (nu_u x nu_u) d xi over {grad u != 0}
    double boundary = 0.0;       // int_{dOmega} <g, nu> e dH^1
    double zero_gradient = 0.0;  // int_{grad u = 0} W/eps div g
    int zero_cells = 0;
    double residual = 0.0;       // direct - (transport + discrepancy + boundary - zero_gradient)
};

// Uses f.last_rhs when present, the solver right-hand side otherwise.
// Throws ValidationError when g claims tangency but |<g, nu>| > 1e-8 somewhere on the boundary.
FirstVariationReport first_variation(const Solver& s, const PhaseField& f, const VectorFieldSpec& g);
FirstVariationReport first_variation(const PhaseField& f, const VectorFieldSpec& g, const DomainGeometry& geo,
                                     const PotentialSpec& p);

// int_{dOmega} e dH^1, with e interpolated from the cell densities
double boundary_integral(const DomainGeometry& g, const std::vector<double>& density);

struct BoundaryEnergySample {
    double t = 0.0;
    double integral = 0.0;     // int_{dOmega} e dH^1
    double dissipation = 0.0;  // int eps (d_t u)^2
};
BoundaryEnergySample boundary_energy(const Solver& s, const PhaseField& f);

// c18 = max(0, max_k integral_k - dissipation_k) over a calibration run
double calibrate_boundary_constant(const std::vector<BoundaryEnergySample>& calibration);

struct BoundaryEnergyCheck {
    double c18 = 0.0;
    int samples = 0;
    int violations = 0;
    double worst_margin = 0.0;  // min_k (dissipation_k + c18 - integral_k)
};
BoundaryEnergyCheck check_boundary_energy(const std::vector<BoundaryEnergySample>& holdout, double c18);

// phi(x, t) = base + (amplitude + amplitude_rate t) b(x), b(x) = (1 - |x - c|^2/R^2)^4 on B_R(c)
struct TestFunctionSpec {
    double base = 1.0;
    double amplitude = 0.0;
    double amplitude_rate = 0.0;
    Vec2 center;
    double radius = 0.0;

    static TestFunctionSpec constant(double value);
    static TestFunctionSpec interior_bump(Vec2 center, double radius, double amplitude, double base = 1.0);

    bool is_constant() const { return amplitude == 0.0 && amplitude_rate == 0.0; }
    double value(Vec2 x, double t) const;
    Vec2 grad(Vec2 x, double t) const;
    double time_derivative(Vec2 x) const;
};

// max over boundary nodes of |<grad phi, nu>|
double tangency_defect(const TestFunctionSpec& phi, const DomainGeometry& g);

struct BrakkeRecord {
    double t = 0.0;
    double mass = 0.0;     // mu^t(phi)
    double consumed = 0.0; // running sum of dt * int (eps (d_t u)^2 phi + eps d_t u <grad phi, grad u> - e d_t phi)
};

// Accumulates the test-function identity along a run. For phi = 1 the sums are
// the solver's energy and dissipation, in the same order as integrate().
class BrakkeAccumulator {
public:
    // Throws ValidationError when <grad phi, nu> exceeds 1e-8 on the boundary.
    BrakkeAccumulator(const Solver& s, TestFunctionSpec phi);

    void before_step(const PhaseField& f, double dt);
    void on_record(const PhaseField& f);
    double mass(const PhaseField& f) const;

    const std::vector<BrakkeRecord>& records() const { return rec_; }
    const TestFunctionSpec& test_function() const { return phi_; }

private:
    double rate(const PhaseField& f) const;

    const Solver* s_;
    TestFunctionSpec phi_;
    std::vector<int> support_;
    bool needs_ghosts_ = false;
    double consumed_ = 0.0;
    std::vector<BrakkeRecord> rec_;
};

// |mu^{t2}(phi) + (consumed(t2) - consumed(t1)) - mu^{t1}(phi)| / mu^{t1}(phi), using the
// records nearest to t1 and t2. Absolute when mu^{t1}(phi) = 0.
double brakke_identity_residual(const std::vector<BrakkeRecord>& rec, double t1, double t2);
double brakke_identity_residual(const BrakkeAccumulator& acc);

// Zero level set over active and ghost cells (ghost values refreshed from u).
std::vector<Polyline> zero_set(const DomainGeometry& g, const std::vector<double>& u);

struct ContactAngle {
    Vec2 p;
    double angle_deg = 0.0;  // between the zero set and the boundary, 90 = orthogonal
    int fit_points = 0;
};
// Total least-squares line through the zero-set vertices inside Omega within
// arclength window/2 of each boundary crossing. window <= 0 selects 6 eps.
std::vector<ContactAngle> contact_angle(const PhaseField& f, const DomainGeometry& g, double window = 0.0);

}  // namespace aclab
