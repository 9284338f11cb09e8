#include "aclab/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/QR>
#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aclab {

double policy_dt(const StepPolicy& pol, double h, double eps, const PotentialSpec& p) {
    if (!(pol.safety > 0 && pol.safety < 1)) throw ValidationError("CFL safety factor must lie in (0,1)");
    double w2 = potential_bounds(p).max_abs_d2w;
    double reaction = w2 > 0 ? eps * eps / w2 : 1e300;
    double diffusion = h * h / 4.0;
    if (pol.scheme == Scheme::Explicit) {
        double cap = pol.safety * std::min(diffusion, reaction);
        if (pol.dt > 0) {
            if (pol.dt > cap * (1 + 1e-12))
                throw ValidationError("explicit dt exceeds safety * min(h^2/4, eps^2/max|W''|)");
            return pol.dt;
        }
        return cap;
    }
    // semi-implicit: the reaction term alone limits the step
    double cap = pol.safety * reaction;
    if (pol.dt > 0) {
        if (pol.dt > reaction * (1 + 1e-12)) throw ValidationError("semi-implicit dt exceeds eps^2/max|W''|");
        return pol.dt;
    }
    return cap;
}

// Unknowns live on control volumes: an active cell, possibly with merged small neighbours.
struct Solver::Impl {
    std::vector<int> gid;        // grid cell -> control volume, -1 if inactive
    std::vector<int> cell_ptr, cells;   // CSR list of member cells
    std::vector<int> face_ptr, face_nb; // CSR list of open faces to other volumes
    std::vector<double> face_ap;
    std::vector<double> V, inv_V;       // volume |CV cap Omega|
    std::vector<double> w;              // per grid cell |cell cap Omega|
    std::vector<double> ug;             // scratch for step()
    Eigen::SparseMatrix<double> A;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    bool have_matrix = false;

    size_t size() const { return V.size(); }
    void gather(const std::vector<double>& u, std::vector<double>& out) const {
        out.resize(size());
        for (size_t k = 0; k < size(); ++k) out[k] = u[static_cast<size_t>(cells[static_cast<size_t>(cell_ptr[k])])];
    }
    void scatter(const std::vector<double>& src, std::vector<double>& dst) const {
        for (size_t k = 0; k < size(); ++k)
            for (int q = cell_ptr[k]; q < cell_ptr[k + 1]; ++q) dst[static_cast<size_t>(cells[static_cast<size_t>(q)])] = src[k];
    }
    // sum over open faces of a (u_nb - u_k)^2 / (2 V_k)
    double g2(const std::vector<double>& u, size_t k) const {
        double s = 0.0;
        for (int q = face_ptr[k]; q < face_ptr[k + 1]; ++q) {
            double d = u[static_cast<size_t>(face_nb[static_cast<size_t>(q)])] - u[k];
            s += face_ap[static_cast<size_t>(q)] * d * d;
        }
        return 0.5 * s * inv_V[k];
    }
};

Solver::Solver(const DomainGeometry& g, const PotentialSpec& p, double eps, StepPolicy pol)
    : g_(&g), p_(p), eps_(eps), pol_(pol), impl_(std::make_unique<Impl>()) {
    if (!(eps > 0)) throw ValidationError("eps must be positive");
    double h = g.h();
    if (h > eps / 3.0 * (1 + 1e-12)) throw ValidationError("resolution rule violated: h > eps/3");
    dt_ = policy_dt(pol, h, eps, p);
    Impl& m = *impl_;
    const int N = g.cells(), nx = g.nx();
    const auto& vol = g.volume_fraction();
    const auto& ax = g.aperture_x();
    const auto& ay = g.aperture_y();
    m.gid.assign(static_cast<size_t>(N), -1);
    m.w.assign(static_cast<size_t>(N), 0.0);
    std::vector<int> masters;
    for (int c : g.active_cells()) {
        if (g.master(c) == c) {
            m.gid[static_cast<size_t>(c)] = static_cast<int>(masters.size());
            masters.push_back(c);
        }
    }
    const size_t G = masters.size();
    std::vector<std::vector<int>> members(G);
    for (int c : g.active_cells()) {
        size_t uc = static_cast<size_t>(c);
        int k = m.gid[static_cast<size_t>(g.master(c))];
        m.gid[uc] = k;
        m.w[uc] = vol[uc] * h * h;
        members[static_cast<size_t>(k)].push_back(c);
    }
    m.V.assign(G, 0.0);
    m.cell_ptr.assign(G + 1, 0);
    m.face_ptr.assign(G + 1, 0);
    for (size_t k = 0; k < G; ++k) {
        auto& mem = members[k];
        // master first so gather reads its value
        std::stable_partition(mem.begin(), mem.end(), [&](int c) { return c == masters[k]; });
        std::vector<std::pair<int, double>> faces;
        for (int c : mem) {
            size_t uc = static_cast<size_t>(c);
            m.cells.push_back(c);
            m.V[k] += m.w[uc];
            int i = g.col(c), j = g.row(c);
            double a[4] = {i + 1 < nx ? ax[uc] : 0.0, i > 0 ? ax[uc - 1] : 0.0, j + 1 < g.ny() ? ay[uc] : 0.0,
                           j > 0 ? ay[uc - static_cast<size_t>(nx)] : 0.0};
            int n[4] = {c + 1, c - 1, c + nx, c - nx};
            for (int q = 0; q < 4; ++q) {
                if (!(a[q] > 0.0)) continue;
                int other = m.gid[static_cast<size_t>(n[q])];
                if (other < 0 || other == static_cast<int>(k)) continue;
                auto it = std::find_if(faces.begin(), faces.end(), [&](const auto& f) { return f.first == other; });
                if (it == faces.end()) faces.emplace_back(other, a[q]);
                else it->second += a[q];
            }
        }
        std::sort(faces.begin(), faces.end());
        for (const auto& f : faces) {
            m.face_nb.push_back(f.first);
            m.face_ap.push_back(f.second);
        }
        m.cell_ptr[k + 1] = static_cast<int>(m.cells.size());
        m.face_ptr[k + 1] = static_cast<int>(m.face_nb.size());
    }
    m.inv_V.resize(G);
    double max_rate = 0.0;
    for (size_t k = 0; k < G; ++k) {
        m.inv_V[k] = 1.0 / m.V[k];
        double sum = 0.0;
        for (int q = m.face_ptr[k]; q < m.face_ptr[k + 1]; ++q) sum += m.face_ap[static_cast<size_t>(q)];
        max_rate = std::max(max_rate, sum * m.inv_V[k]);
    }
    m.ug.assign(G, 0.0);
    if (pol.scheme == Scheme::Explicit) {
        double w2 = potential_bounds(p).max_abs_d2w;
        if (dt_ * (max_rate + w2 / (eps * eps)) > 1.0)
            throw ValidationError("explicit step violates the cut-cell stability bound; lower the safety factor");
    }
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;

void Solver::set_dt(double dt) {
    if (!(dt > 0) || dt > dt_ * (1 + 1e-12)) throw ValidationError("set_dt only accepts positive steps not above the policy step");
    if (dt != dt_) {
        dt_ = dt;
        impl_->have_matrix = false;
    }
}

double Solver::weight(int c) const { return impl_->w[static_cast<size_t>(c)]; }

PhaseField Solver::make_field(std::vector<double> u, double t) const {
    if (u.size() != static_cast<size_t>(g_->cells())) throw ValidationError("field size does not match the grid");
    const Impl& m = *impl_;
    PhaseField f;
    f.u = std::move(u);
    f.eps = eps_;
    f.t = t;
    f.h = g_->h();
    for (int c = 0; c < g_->cells(); ++c)
        if (g_->kind()[static_cast<size_t>(c)] == CellKind::Outside) f.u[static_cast<size_t>(c)] = 0.0;
    // one value per control volume: the volume-weighted mean of its cells
    std::vector<double> avg(m.size(), 0.0);
    for (size_t k = 0; k < m.size(); ++k) {
        if (m.cell_ptr[k + 1] - m.cell_ptr[k] == 1) {
            avg[k] = f.u[static_cast<size_t>(m.cells[static_cast<size_t>(m.cell_ptr[k])])];
            continue;
        }
        const double base = f.u[static_cast<size_t>(m.cells[static_cast<size_t>(m.cell_ptr[k])])];
        double s = 0.0;
        for (int q = m.cell_ptr[k]; q < m.cell_ptr[k + 1]; ++q) {
            size_t c = static_cast<size_t>(m.cells[static_cast<size_t>(q)]);
            s += m.w[c] * (f.u[c] - base);
        }
        avg[k] = base + s * m.inv_V[k];
    }
    m.scatter(avg, f.u);
    fill_ghosts(f.u);
    evaluate_rhs(f);
    return f;
}

void Solver::fill_ghosts(std::vector<double>& u) const { fill_ghost_values(*g_, u); }

void Solver::evaluate_rhs(PhaseField& f) const {
    const Impl& m = *impl_;
    f.last_rhs.assign(f.u.size(), 0.0);
    const double ie2 = 1.0 / (eps_ * eps_);
    std::vector<double> ug, rg(m.size());
    m.gather(f.u, ug);
    for (size_t k = 0; k < m.size(); ++k) {
        double uk = ug[k];
        double flux = 0.0;
        for (int q = m.face_ptr[k]; q < m.face_ptr[k + 1]; ++q)
            flux += m.face_ap[static_cast<size_t>(q)] * (ug[static_cast<size_t>(m.face_nb[static_cast<size_t>(q)])] - uk);
        rg[k] = flux * m.inv_V[k] - p_.dW(uk) * ie2;
    }
    m.scatter(rg, f.last_rhs);
}

void Solver::step(PhaseField& f) {
    Impl& m = *impl_;
    if (f.last_rhs.size() != f.u.size()) evaluate_rhs(f);
    const size_t n = m.size();
    m.gather(f.u, m.ug);
    if (pol_.scheme == Scheme::Explicit) {
        for (size_t k = 0; k < n; ++k)
            m.ug[k] += dt_ * f.last_rhs[static_cast<size_t>(m.cells[static_cast<size_t>(m.cell_ptr[k])])];
    } else {
        if (!m.have_matrix) {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(n * 5);
            for (size_t k = 0; k < n; ++k) {
                double diag = m.V[k];
                for (int q = m.face_ptr[k]; q < m.face_ptr[k + 1]; ++q) {
                    double a = dt_ * m.face_ap[static_cast<size_t>(q)];
                    diag += a;
                    trip.emplace_back(static_cast<int>(k), m.face_nb[static_cast<size_t>(q)], -a);
                }
                trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
            }
            m.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            m.A.setFromTriplets(trip.begin(), trip.end());
            m.cg.setTolerance(1e-9);
            m.cg.setMaxIterations(5000);
            m.cg.compute(m.A);
            m.have_matrix = true;
        }
        Eigen::VectorXd b(static_cast<Eigen::Index>(n)), x0(static_cast<Eigen::Index>(n));
        const double ie2 = 1.0 / (eps_ * eps_);
        for (size_t k = 0; k < n; ++k) {
            double uv = m.ug[k];
            b[static_cast<Eigen::Index>(k)] = m.V[k] * (uv - dt_ * p_.dW(uv) * ie2);
            x0[static_cast<Eigen::Index>(k)] = uv + dt_ * f.last_rhs[static_cast<size_t>(m.cells[static_cast<size_t>(m.cell_ptr[k])])];
        }
        Eigen::VectorXd x = m.cg.solveWithGuess(b, x0);
        cg_iters_ = static_cast<int>(m.cg.iterations());
        if (m.cg.info() != Eigen::Success) {
            if (!dump_path_.empty()) write_checkpoint(dump_path_, *g_, f);
            throw NumericalAbort("conjugate gradient did not converge", dump_path_);
        }
        for (size_t k = 0; k < n; ++k) m.ug[k] = x[static_cast<Eigen::Index>(k)];
    }
    m.scatter(m.ug, f.u);
    f.t += dt_;
    for (size_t k = 0; k < n; ++k) {
        if (!std::isfinite(m.ug[k])) {
            if (!dump_path_.empty()) write_checkpoint(dump_path_, *g_, f);
            throw NumericalAbort("non-finite value in the phase field at t=" + std::to_string(f.t), dump_path_);
        }
    }
    fill_ghosts(f.u);
    evaluate_rhs(f);
}

double Solver::face_gradient_sq(const PhaseField& f, int c) const {
    const Impl& m = *impl_;
    int k = m.gid[static_cast<size_t>(c)];
    if (k < 0) return 0.0;
    double s = 0.0;
    double uk = f.u[static_cast<size_t>(c)];
    size_t uk_i = static_cast<size_t>(k);
    for (int q = m.face_ptr[uk_i]; q < m.face_ptr[uk_i + 1]; ++q) {
        int nb = m.face_nb[static_cast<size_t>(q)];
        double d = f.u[static_cast<size_t>(m.cells[static_cast<size_t>(m.cell_ptr[static_cast<size_t>(nb)])])] - uk;
        s += m.face_ap[static_cast<size_t>(q)] * d * d;
    }
    return 0.5 * s * m.inv_V[uk_i];
}

void Solver::densities(const PhaseField& f, std::vector<double>& e, std::vector<double>& xi) const {
    const Impl& m = *impl_;
    e.assign(f.u.size(), 0.0);
    xi.assign(f.u.size(), 0.0);
    std::vector<double> ug, ge(m.size()), gx(m.size());
    m.gather(f.u, ug);
    for (size_t k = 0; k < m.size(); ++k) {
        double grad = 0.5 * eps_ * m.g2(ug, k);
        double pot = p_.W(ug[k]) / eps_;
        ge[k] = grad + pot;
        gx[k] = grad - pot;
    }
    m.scatter(ge, e);
    m.scatter(gx, xi);
}

double Solver::energy(const PhaseField& f) const {
    const Impl& m = *impl_;
    std::vector<double> ug;
    m.gather(f.u, ug);
    double E = 0.0;
    for (size_t k = 0; k < m.size(); ++k) E += m.V[k] * (0.5 * eps_ * m.g2(ug, k) + p_.W(ug[k]) / eps_);
    return E;
}

double Solver::dissipation_rate(const PhaseField& f) const {
    const Impl& m = *impl_;
    double D = 0.0;
    for (size_t k = 0; k < m.size(); ++k) {
        double r = f.last_rhs[static_cast<size_t>(m.cells[static_cast<size_t>(m.cell_ptr[k])])];
        D += m.V[k] * (eps_ * r * r);
    }
    return D;
}

int Solver::control_volumes() const { return static_cast<int>(impl_->size()); }

PhaseField step(const PhaseField& f, const StepPolicy& pol, const DomainGeometry& g, const PotentialSpec& p) {
    Solver s(g, p, f.eps, pol);
    PhaseField out = f;
    s.step(out);
    return out;
}

double energy(const PhaseField& f, const DomainGeometry& g, const PotentialSpec& p) {
    Solver s(g, p, f.eps, StepPolicy{Scheme::Explicit, 0.2, 0.0});
    return s.energy(f);
}

double dissipation_identity_residual(const Trajectory& tr) {
    if (tr.records.empty()) return 0.0;
    const auto& a = tr.records.front();
    const auto& b = tr.records.back();
    double r = std::fabs(b.E + (b.dissipated - a.dissipated) - a.E);
    return a.E > 0 ? r / a.E : r;
}

Trajectory integrate(Solver& s, PhaseField& f, double T, int stride, bool keep_fields, const RunHooks& hooks) {
    if (!(T > f.t)) throw ValidationError("final time must exceed the current time");
    if (stride < 1) throw ValidationError("record stride must be positive");
    Trajectory tr;
    tr.eps = s.eps();
    tr.dt = s.dt();
    long nsteps = static_cast<long>(std::ceil((T - f.t) / s.dt() - 1e-9));
    double t0 = f.t;
    s.set_dt((T - t0) / static_cast<double>(nsteps));
    tr.dt = s.dt();
    double dissipated = 0.0;
    auto record = [&]() {
        TrajectoryRecord r;
        r.t = f.t;
        r.E = s.energy(f);
        r.dissipated = dissipated;
        for (int c : s.geometry().active_cells()) r.max_abs_u = std::max(r.max_abs_u, std::fabs(f.u[static_cast<size_t>(c)]));
        tr.records.push_back(r);
        if (keep_fields) tr.fields.push_back(f);
        if (hooks.on_record) hooks.on_record(f, r);
    };
    record();
    for (long k = 0; k < nsteps; ++k) {
        double dt = s.dt();
        if (hooks.before_step) hooks.before_step(f, dt);
        dissipated += dt * s.dissipation_rate(f);
        s.step(f);
        if (k + 1 == nsteps) f.t = T;  // absorb round-off in the clock
        else f.t = t0 + (k + 1) * dt;
        if ((k + 1) % stride == 0 || k + 1 == nsteps) record();
    }
    return tr;
}

Vec2 centered_gradient(const DomainGeometry& g, const std::vector<double>& u, int c) {
    int i = g.col(c), j = g.row(c), nx = g.nx();
    double h = g.h();
    if (i == 0 || j == 0 || i == nx - 1 || j == g.ny() - 1) return {};
    size_t uc = static_cast<size_t>(c);
    return {(u[uc + 1] - u[uc - 1]) / (2 * h), (u[uc + static_cast<size_t>(nx)] - u[uc - static_cast<size_t>(nx)]) / (2 * h)};
}

FieldSample sample_field(const DomainGeometry& g, const std::vector<double>& u, Vec2 p) {
    const double h = g.h();
    const double rad = 3.0 * h;
    int ci = static_cast<int>(std::lround((p.x - g.center(0, 0).x) / h));
    int cj = static_cast<int>(std::lround((p.y - g.center(0, 0).y) / h));
    std::vector<std::array<double, 3>> pts;
    for (int j = cj - 3; j <= cj + 3; ++j)
        for (int i = ci - 3; i <= ci + 3; ++i) {
            if (i < 0 || j < 0 || i >= g.nx() || j >= g.ny()) continue;
            int c = g.index(i, j);
            // one sample per control volume, at its centroid
            if (!g.active(c) || g.master(c) != c) continue;
            Vec2 d = (g.cv_centroid(c) - p) / h;
            if (norm(d) * h > rad) continue;
            pts.push_back({d.x, d.y, u[static_cast<size_t>(c)]});
        }
    FieldSample s;
    s.support = static_cast<int>(pts.size());
    if (pts.size() < 3) return s;
    int nb = pts.size() >= 10 ? 6 : 3;
    Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), nb);
    Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
    for (size_t k = 0; k < pts.size(); ++k) {
        double X = pts[k][0], Y = pts[k][1];
        Eigen::Index r = static_cast<Eigen::Index>(k);
        A(r, 0) = 1.0;
        A(r, 1) = X;
        A(r, 2) = Y;
        if (nb == 6) {
            A(r, 3) = X * X;
            A(r, 4) = X * Y;
            A(r, 5) = Y * Y;
        }
        b[r] = pts[k][2] - pts[0][2];
    }
    // fitted relative to the first sample so constant data give an exactly zero gradient
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    s.value = coef[0] + pts[0][2];
    s.grad = Vec2{coef[1], coef[2]} / h;
    return s;
}

NeumannReport neumann_residual(const DomainGeometry& g, const std::vector<double>& u) {
    NeumannReport r;
    for (const auto& b : g.boundary()) {
        FieldSample s = sample_field(g, u, b.p);
        double dn = std::fabs(dot(s.grad, b.normal));
        if (dn > r.max_normal_derivative) {
            r.max_normal_derivative = dn;
            r.witness = b.p;
        }
    }
    for (int c : g.active_cells()) r.max_gradient = std::max(r.max_gradient, norm(centered_gradient(g, u, c)));
    return r;
}

RescaleReport parabolic_rescale_check(const PhaseField& f, const DomainGeometry& g, const PotentialSpec& p, double eps_rescale) {
    RescaleReport rep;
    double er = eps_rescale > 0 ? eps_rescale : f.eps;
    const double h = g.h();
    const int nx = g.nx();
    const auto& d = g.distance();
    double e2 = er * er;
    for (int c : g.active_cells()) {
        int i = g.col(c), j = g.row(c);
        if ((i + j) % 2 != 0) continue;  // sampled sub-grid
        if (d[static_cast<size_t>(c)] > -3.0 * h) continue;
        bool ok = true;
        for (int k = -2; k <= 2 && ok; ++k) ok = g.active(c + k) && g.active(c + k * nx);
        if (!ok) continue;
        size_t uc = static_cast<size_t>(c);
        auto U = [&](int off) { return f.u[static_cast<size_t>(c + off)]; };
        double lx = (-U(-2) + 16 * U(-1) - 30 * U(0) + 16 * U(1) - U(2)) / (12 * h * h);
        double ly = (-U(-2 * nx) + 16 * U(-nx) - 30 * U(0) + 16 * U(nx) - U(2 * nx)) / (12 * h * h);
        // chain rule: d_tau v = eps'^2 d_t u, Delta_y v = eps'^2 Delta_x u
        double res = e2 * f.last_rhs[uc] - e2 * (lx + ly) + p.dW(f.u[uc]);
        rep.max_residual = std::max(rep.max_residual, std::fabs(res));
        ++rep.samples;
    }
    rep.flagged = rep.max_residual > 0.25 * potential_bounds(p).max_abs_dw;
    return rep;
}

void write_checkpoint(std::ostream& os, const DomainGeometry& g, const PhaseField& f) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", f.h);
    os << "PFLD v1 " << g.nx() << " " << g.ny() << " " << buf;
    std::snprintf(buf, sizeof buf, " %.17g", f.eps);
    os << buf;
    std::snprintf(buf, sizeof buf, " %.17g\n", f.t);
    os << buf;
    for (int j = 0; j < g.ny(); ++j) {
        std::string line;
        for (int i = 0; i < g.nx(); ++i) {
            int c = g.index(i, j);
            if (i) line += ' ';
            if (g.kind()[static_cast<size_t>(c)] == CellKind::Outside) line += "nan";
            else {
                std::snprintf(buf, sizeof buf, "%.17g", f.u[static_cast<size_t>(c)]);
                line += buf;
            }
        }
        line += '\n';
        os << line;
    }
}

void write_checkpoint(const std::string& path, const DomainGeometry& g, const PhaseField& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write checkpoint " + path);
    write_checkpoint(os, g, f);
    if (!os) throw std::runtime_error("write failed for checkpoint " + path);
}

PhaseField read_checkpoint(const std::string& path, int* nx_out, int* ny_out) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open checkpoint " + path);
    std::string magic, ver;
    int nx = 0, ny = 0;
    PhaseField f;
    is >> magic >> ver >> nx >> ny >> f.h >> f.eps >> f.t;
    if (magic != "PFLD" || ver != "v1" || nx <= 0 || ny <= 0) throw ValidationError("not a PFLD v1 checkpoint: " + path);
    f.u.resize(static_cast<size_t>(nx) * ny);
    std::string tok;
    for (auto& v : f.u) {
        if (!(is >> tok)) throw ValidationError("truncated checkpoint " + path);
        v = tok == "nan" ? 0.0 : std::strtod(tok.c_str(), nullptr);
    }
    if (nx_out) *nx_out = nx;
    if (ny_out) *ny_out = ny;
    return f;
}

}  // namespace aclab
