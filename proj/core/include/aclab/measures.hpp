#pragma once

#include <vector>

#include "aclab/geometry.hpp"
#include "aclab/potential.hpp"
#include "aclab/solver.hpp"

namespace aclab {

// Cell densities of the diffused surface energy and of the discrepancy.
// e, xi and w are full-grid arrays, zero off the active cells.
struct MeasureSnapshot {
    double t = 0.0;
    double eps = 0.0;
    std::vector<double> e;
    std::vector<double> xi;
    std::vector<double> w;  // |cell cap Omega|

    // mu(Omega), equal to Solver::energy
    double total() const;
    // mu(B) for a list of cells
    double mass(const std::vector<int>& cells) const;
};

MeasureSnapshot snapshot(const Solver& s, const PhaseField& f);
MeasureSnapshot snapshot(const PhaseField& f, const DomainGeometry& g, const PotentialSpec& p);

struct DensityReport {
    double D = 0.0;
    Vec2 center;
    double radius = 0.0;
    bool reflected = false;  // argmax used the reflected-ball branch
    double lambda_prime = 0.8;
    double spacing = 0.0;    // lattice spacing of the centers
    int centers = 0;
    std::vector<double> radii;
};

struct DensityOptions {
    double spacing = 0.0;         // 0 selects c2/8
    bool include_reflected = true;
    int larger_radii = 0;         // also try c2 * 2^k for k = 1..larger_radii
    double lambda = 0.6;
};

// sup over a lattice of centers and dyadic radii of
// (mu(B_r(y)) + mu(B~_r(y))) / (omega_1 r), omega_1 = 2.
DensityReport density_ratio(const MeasureSnapshot& m, const DomainGeometry& g, const DensityOptions& opt = {});

struct DiscrepancyNorms {
    double sup_pos = 0.0;  // max over cells of xi^+
    double l1 = 0.0;       // sum |xi| w
    Vec2 witness;
};
DiscrepancyNorms discrepancy_norms(const MeasureSnapshot& m, const DomainGeometry& g);

// psi(s) = s on [0, c/2], psi' = 0 on [c, inf), |psi'| <= 1, |psi''| = 3/c <= 4/c
double barrier_psi(double s, double c);

struct BarrierReport {
    double max_value = 0.0;   // max over cells of xi~
    double normalized = 0.0;  // max_value / eps^(1 - lambda)
    double c3 = 0.0;          // sup eps |grad u| used in phi
    double phi_max = 0.0;
    Vec2 witness;
};
// xi~ = |grad_y v|^2/2 - W(v) - G(v) + eps phi(y) in the rescaled variables y = x/eps,
// G(s) = eps^(1-lambda) (1 - (s - gamma)^2/8), phi = kappa (c3^2 + 1) psi(dist(y, dOmega_eps)).
// c3 <= 0 selects the measured sup eps |grad u| of this field.
BarrierReport barrier_diagnostic(const Solver& s, const PhaseField& f, double lambda, double c3 = 0.0);
BarrierReport barrier_diagnostic(const PhaseField& f, const DomainGeometry& g, const PotentialSpec& p, double lambda,
                                 double c3 = 0.0);

}  // namespace aclab
