#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "aclab/geometry.hpp"
#include "aclab/potential.hpp"

namespace aclab {

// u and last_rhs live on the full grid. Active cells carry the unknowns,
// ghost cells hold reflected values, outside cells are zero.
struct PhaseField {
    std::vector<double> u;
    std::vector<double> last_rhs;  // Delta_h u - W'(u)/eps^2 on active cells
    double eps = 0.0;
    double t = 0.0;
    double h = 0.0;
};

enum class Scheme { Explicit, SemiImplicit };

struct StepPolicy {
    Scheme scheme = Scheme::Explicit;
    double safety = 0.2;
    double dt = 0.0;  // 0 selects safety * min(h^2/4, eps^2 / max|W''|)
};

double policy_dt(const StepPolicy& pol, double h, double eps, const PotentialSpec& p);

// Cut-cell finite volumes: fluxes through face apertures, zero flux through
// the boundary. E_h below is an exact Lyapunov functional of the semi-discrete flow.
// The geometry must outlive the solver; the potential is copied.
class Solver {
public:
    Solver(const DomainGeometry& g, const PotentialSpec& p, double eps, StepPolicy pol = {});
    ~Solver();
    Solver(Solver&&) noexcept;

    PhaseField make_field(std::vector<double> u, double t = 0.0) const;
    void step(PhaseField& f);
    void evaluate_rhs(PhaseField& f) const;
    void fill_ghosts(std::vector<double>& u) const;

    double dt() const { return dt_; }
    // smaller steps only; keeps the policy bound
    void set_dt(double dt);
    double eps() const { return eps_; }
    const StepPolicy& policy() const { return pol_; }
    int last_cg_iterations() const { return cg_iters_; }
    int control_volumes() const;

    // quadrature weight |cell cap Omega| of an active cell
    double weight(int c) const;
    // cell energy density with the face energy split between neighbours
    void densities(const PhaseField& f, std::vector<double>& e, std::vector<double>& xi) const;
    double energy(const PhaseField& f) const;
    // eps * sum_c w_c (d_t u)^2
    double dissipation_rate(const PhaseField& f) const;

    // |grad u|^2 read off the face differences (the quantity inside E_h)
    double face_gradient_sq(const PhaseField& f, int c) const;

    void set_dump_path(std::string p) { dump_path_ = std::move(p); }
    const DomainGeometry& geometry() const { return *g_; }
    const PotentialSpec& potential() const { return p_; }

private:
    struct Impl;
    const DomainGeometry* g_;
    PotentialSpec p_;
    double eps_, dt_;
    StepPolicy pol_;
    int cg_iters_ = 0;
    std::string dump_path_;
    std::unique_ptr<Impl> impl_;
};

// Free-function forms of the solver operations.
PhaseField step(const PhaseField& f, const StepPolicy& pol, const DomainGeometry& g, const PotentialSpec& p);
double energy(const PhaseField& f, const DomainGeometry& g, const PotentialSpec& p);

// One relaxed sample of a recorded trajectory.
struct TrajectoryRecord {
    double t = 0.0;
    double E = 0.0;
    double dissipated = 0.0;  // running sum of dt * eps * int (d_t u)^2 up to t
    double max_abs_u = 0.0;
};

struct Trajectory {
    double eps = 0.0;
    double dt = 0.0;
    std::vector<TrajectoryRecord> records;
    std::vector<PhaseField> fields;  // optional, parallel to records
};

// |E(T) + sum_k dt eps int (d_t u)^2 - E(0)| / E(0), absolute when E(0) = 0.
double dissipation_identity_residual(const Trajectory& tr);

struct RunHooks {
    // called before each step with the state the step starts from
    std::function<void(const PhaseField&, double dt)> before_step;
    // called at t = 0 and every `stride` steps, and at the final time
    std::function<void(const PhaseField&, const TrajectoryRecord&)> on_record;
};

// Advance to time T (the last step is shortened to land on T).
Trajectory integrate(Solver& s, PhaseField& f, double T, int stride, bool keep_fields, const RunHooks& hooks = {});

struct RescaleReport {
    double max_residual = 0.0;
    int samples = 0;
    bool flagged = false;
};
// Residual of d_tau v - Delta_y v + W'(v) for v(y, tau) = u(eps' y, eps'^2 tau),
// with Delta_y from an independent fourth-order stencil.
RescaleReport parabolic_rescale_check(const PhaseField& f, const DomainGeometry& g, const PotentialSpec& p,
                                      double eps_rescale = 0.0);

// Quadratic least-squares fit around p, one sample per control volume at its
// centroid. Meant for solver fields, which are constant on each control volume.
struct FieldSample {
    double value = 0.0;
    Vec2 grad;
    int support = 0;
};
FieldSample sample_field(const DomainGeometry& g, const std::vector<double>& u, Vec2 p);

// centered-difference gradient at a cell (ghost values used across the boundary)
Vec2 centered_gradient(const DomainGeometry& g, const std::vector<double>& u, int c);

struct NeumannReport {
    double max_normal_derivative = 0.0;
    double max_gradient = 0.0;
    Vec2 witness;
};
NeumannReport neumann_residual(const DomainGeometry& g, const std::vector<double>& u);

void write_checkpoint(std::ostream& os, const DomainGeometry& g, const PhaseField& f);
void write_checkpoint(const std::string& path, const DomainGeometry& g, const PhaseField& f);
// Reads u (inactive cells come back as NaN outside and are zeroed).
PhaseField read_checkpoint(const std::string& path, int* nx = nullptr, int* ny = nullptr);

}  // namespace aclab
