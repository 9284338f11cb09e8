#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aclab/initial_data.hpp"
#include "aclab/kernels.hpp"
#include "aclab/varifold.hpp"

namespace aclab {

struct KernelProbeConfig {
    std::string id;
    Vec2 y;
    double s = 0.0;
    std::string variant = "auto";  // auto | full | truncated | reflected
};

struct VectorFieldConfig {
    std::string id;
    std::string type = "constant";  // constant | bump
    Vec2 v{1.0, 0.0};
    Vec2 center;
    double radius = 0.0;
    VectorFieldSpec make() const;
};

struct TestFunctionConfig {
    std::string id;
    TestFunctionSpec spec;
};

struct ClearingProbeConfig {
    std::string id;
    Vec2 y;
    double t = 0.0;
};

struct ExperimentConfig {
    std::string name = "experiment";
    DomainSpec domain;
    PotentialSpec potential = PotentialSpec::quartic();
    std::vector<double> potential_coeffs;  // polynomial potentials
    InterfaceSpec interface;
    std::vector<double> eps;
    double h_ratio = 0.25;  // h = min(h_max, h_ratio * eps)
    double h_max = 0.0;     // 0: no cap
    StepPolicy step;
    double T = 0.0;
    int records = 20;  // record intervals over [0, T]
    double lambda = 0.6;
    double discrepancy_constant = 1.0;

    std::vector<KernelProbeConfig> kernel_probes;
    std::vector<VectorFieldConfig> fields;
    std::vector<TestFunctionConfig> tests;
    std::string brakke_test;  // test feeding the series column; empty: phi = 1
    std::vector<ClearingProbeConfig> clearing;
    double delta0 = 0.1;

    double contact_window = 6.0;  // in units of eps
    double contact_from = 0.0;    // worst contact deviation counted from this time on
    bool oracle = true;
    double oracle_spacing = 0.0;  // 0: h
    bool density = true;          // density ratio column
    int checkpoint_every = 1;     // in records; 0: final state only
    std::optional<double> c18;    // frozen boundary-energy constant

    std::string out_dir = "out";
    int threads = 1;

    double h_for(double e) const;
};

// Plain INI with [sections]; see docs/config.md. Throws ValidationError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);
// key = value listing of every physical setting (output paths and threads excluded)
std::string canonical_config(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& s);

inline constexpr const char* kSeriesHeader =
    "t,E,dissipation_residual,sup_disc_pos,l1_disc,density_ratio,contact_angle_deg,brakke_residual,"
    "boundary_energy,barrier_max";
inline constexpr const char* kMonotonicityHeader = "t,M,violation,fitted_c3,fitted_c4";
inline constexpr const char* kOracleHeader = "t,hausdorff,front_length,front_nodes,zero_radius,front_radius";
inline constexpr const char* kSweepHeader =
    "eps,h,status,l1_avg,sup_disc_pos_max,sup_scaled,density_max,final_contact_angle,worst_contact_dev,"
    "hausdorff_max,radius_dev_max,barrier_norm_max,dissipation_residual,brakke_residual,max_abs_u,c3,c4,c18";
inline constexpr const char* kFirstVariationHeader =
    "t,field,direct,transport,discrepancy,boundary,zero_gradient,zero_cells,residual";

struct SeriesRow {
    double t = 0.0, E = 0.0, dissipation_residual = 0.0, sup_disc_pos = 0.0, l1_disc = 0.0, density_ratio = 0.0;
    double contact_angle_deg = 0.0, brakke_residual = 0.0, boundary_energy = 0.0, barrier_max = 0.0;
};
std::string format_series_row(const SeriesRow& r);

struct ProbeFit {
    std::string id;
    MonotonicityFit fit;
    double max_violation = 0.0;
};

struct RunSummary {
    double eps = 0.0, h = 0.0, dt = 0.0;
    long steps = 0;
    int records = 0;
    bool ok = false;
    std::string error;
    std::string dir;

    double E0 = 0.0, E_final = 0.0;
    double dissipation_residual = 0.0;
    double brakke_residual = 0.0;
    double brakke_unit_residual = 0.0;  // phi = 1
    double max_abs_u = 0.0;
    double l1_avg = 0.0, sup_pos_max = 0.0, sup_scaled = 0.0;
    double density_max = 0.0;
    double final_contact_angle = 0.0;  // worst crossing at T (NaN without crossings)
    double worst_contact_dev = 0.0;    // over records with t >= contact_from
    int contact_samples = 0;
    double hausdorff_max = 0.0;
    double radius_dev_max = 0.0;  // circle interfaces: max |zero-set radius - sqrt(R0^2 - 2t)|
    double barrier_norm_max = 0.0;
    double c18 = 0.0;
    BoundaryEnergyCheck boundary_check;
    std::vector<ProbeFit> fits;
    std::vector<std::pair<std::string, FirstVariationReport>> first_variations;
    std::vector<std::pair<std::string, ClearingOutReport>> clearing;
    AssumptionReport assumptions;
    double D0 = 0.0, c_gradient = 0.0, c_discrepancy = 0.0;
    std::vector<SeriesRow> series;
};

// Single run at eps, writing into dir (created). frozen_c18 overrides cfg.c18.
RunSummary run(const ExperimentConfig& cfg, double eps, const std::string& dir,
               std::optional<double> frozen_c18 = std::nullopt);
// First eps of the list into cfg.out_dir.
RunSummary run(const ExperimentConfig& cfg);

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SweepReport {
    std::vector<RunSummary> runs;
    std::vector<Verdict> verdicts;
    bool complete = false;
};

// Trend verdicts over runs ordered by descending eps.
std::vector<Verdict> sweep_verdicts(const std::vector<RunSummary>& runs);

// Requires at least two descending eps. Runs go to out_dir/eps_<eps>; the table to
// sweep.csv and the verdicts to sweep_report.json. c18 is calibrated on the first
// run and frozen for the rest unless the config fixes it.
SweepReport sweep(const ExperimentConfig& cfg);

// Diagnostics of a stored field against the config's geometry and potential.
struct DiagnoseReport {
    double eps = 0.0, h = 0.0, t = 0.0;
    double energy = 0.0;
    DiscrepancyNorms disc;
    DensityReport density;
    std::vector<ContactAngle> angles;
    double boundary_energy = 0.0;
    BarrierReport barrier;
    NeumannReport neumann;
    std::vector<std::pair<std::string, FirstVariationReport>> first_variations;
    std::string to_json() const;
};
// eps and h are read from the checkpoint.
DiagnoseReport diagnose(const ExperimentConfig& cfg, const std::string& checkpoint);

}  // namespace aclab
