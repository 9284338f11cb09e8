#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aclab/measures.hpp"

namespace aclab {

// eta = 1 on [0, c2/4], decreasing, eta = 0 from 0.48 c2 on (support inside [0, c2/2))
double eta_cutoff(double r, double c2);
// one-dimensional backward heat kernel in the plane, tau = s - t > 0
double heat_kernel(Vec2 x, Vec2 y, double tau);

enum class KernelVariant {
    Full,       // rho, no cutoff
    Truncated,  // rho_1 = eta(|x - y|) rho
    Reflected,  // rho_1 + rho_2, rho_2 = eta(|x~ - y|) rho(x~), y in N_{c2/2}
};

struct KernelProbe {
    std::string id;
    Vec2 y;
    double s = 0.0;
};

// rho_1 + rho_2 for y in N_{c2/2}, rho_1 otherwise
KernelVariant boundary_variant(const DomainGeometry& g, Vec2 y);

struct KernelSums {
    double K = 0.0;   // int kernel d mu
    double Xi = 0.0;  // int kernel / (2 (s - t)) d xi
    double reflected_part = 0.0;
};
// Throws ValidationError when t >= s or when the reflected variant is requested away from N_{c2/2}.
KernelSums kernel_sums(const MeasureSnapshot& m, const DomainGeometry& g, const KernelProbe& probe, KernelVariant v);
double kernel_integral(const MeasureSnapshot& m, const DomainGeometry& g, const KernelProbe& probe, KernelVariant v);

struct MonotonicitySample {
    double t = 0.0;
    double K = 0.0;
    double Xi = 0.0;
};

struct MonotonicityFit {
    double c3 = 0.0;
    double c4 = 0.0;
};

struct MonotonicitySeries {
    double s = 0.0;
    std::vector<double> t, M, violation;  // violation[k] refers to [t_k, t_k+1]; last entry 0
    MonotonicityFit fit;
    double max_rate = 0.0;  // max_k (M_k+1 - M_k) / dt
};

// Smallest (c3 + c4), c3 on a 0.05 grid in [0, 20], with every
// (M_k+1 - M_k)/dt <= trapezoid of e^{c3 (s-t)^{1/4}} (c4 + Xi) up to tol.
MonotonicityFit fit_monotonicity_constants(const std::vector<MonotonicitySample>& samples, double s, double tol = 0.0);

// M(t) = e^{c3 (s-t)^{1/4}} K(t) and the per-step violations. Constants are fitted
// unless given.
MonotonicitySeries monotonicity_series(const std::vector<MonotonicitySample>& samples, double s,
                                       std::optional<MonotonicityFit> fixed = std::nullopt);
MonotonicitySeries monotonicity_series(const Trajectory& tr, const KernelProbe& probe, const DomainGeometry& g,
                                       const PotentialSpec& p, KernelVariant v,
                                       std::optional<MonotonicityFit> fixed = std::nullopt);

// Gaussian density at scale r: the eta-truncated kernel with s - t = r^2, with the
// reflected term iff y in N_{c2/2}.
double gaussian_density(const MeasureSnapshot& m, const DomainGeometry& g, Vec2 y, double r);

struct ClearingOutReport {
    double limsup_density = 0.0;  // max of mu-bar^s_{sqrt(s-t), y} over the smallest recorded dyadic s - t
    std::vector<double> scales;   // s - t used
    double later_time = 0.0;      // 2 s - t for the largest scale used
    int low_cells = 0;            // cells within sqrt(s - t) of y with |u| < alpha at later_time
    bool clear = false;           // limsup_density < delta0
    bool consistent = true;       // clear implies no |u| < alpha cells later
};

// One record after the base time t0: the Gaussian density of the measure at this
// record with radius sqrt(t - t0), and the |u| < alpha count within sqrt((t - t0)/2),
// i.e. the later-time check for s = (t + t0)/2.
struct ClearingSample {
    double t = 0.0;
    double density = 0.0;
    int low_cells = 0;
};
ClearingSample clearing_sample(const MeasureSnapshot& m, const PhaseField& f, const DomainGeometry& g,
                               const PotentialSpec& p, Vec2 y, double t0);
ClearingOutReport clearing_out_verdict(const std::vector<ClearingSample>& samples, double t0, double delta0);
// t is snapped to the nearest record.
ClearingOutReport clearing_out_probe(const Trajectory& tr, const DomainGeometry& g, const PotentialSpec& p, Vec2 y,
                                     double t, double delta0);

}  // namespace aclab
