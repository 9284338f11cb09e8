#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "aclab/experiment.hpp"
#include "aclab/mcf_reference.hpp"

namespace fs = std::filesystem;
using namespace aclab;

namespace {

struct Common {
    std::string config;
    std::string out;
    int threads = 0;
    long long seed = -1;
    double eps = 0.0;
};

void add_common(CLI::App* app, Common& c, bool eps = true) {
    app->add_option("--config", c.config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output directory (overrides [output] dir)");
    app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "seed of the initial-data noise")->check(CLI::NonNegativeNumber);
    if (eps) app->add_option("--eps", c.eps, "eps (default: first of the config list)")->check(CLI::PositiveNumber);
}

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = load_config(c.config);
    if (!c.out.empty()) cfg.out_dir = c.out;
    if (c.threads > 0) cfg.threads = c.threads;
    if (c.seed >= 0) cfg.interface.seed = static_cast<std::uint64_t>(c.seed);
    if (c.eps > 0.0) {
        cfg.eps.insert(cfg.eps.begin(), c.eps);
        validate_config(cfg);
    }
    return cfg;
}

int cmd_geometry(const Common& c, const std::string& dump) {
    ExperimentConfig cfg = load(c);
    const double h = cfg.h_for(cfg.eps.front());
    DomainGeometry g = build_domain(cfg.domain, h);
    int ghosts = static_cast<int>(g.ghosts().size());
    std::printf("domain     %s\n", cfg.domain.describe().c_str());
    std::printf("h          %g\ngrid       %d x %d\nactive     %zu\nghost      %d\n", h, g.nx(), g.ny(),
                g.active_cells().size(), ghosts);
    std::printf("kappa      %.6g\nc2         %.6g\nclearance  %.6g\nboundary   %.6g\n", g.kappa(), g.c2(), g.clearance(),
                g.boundary_length());
    if (!dump.empty()) {
        std::ofstream os(dump);
        if (!os) throw std::runtime_error("cannot write " + dump);
        g.dump(os);
        std::printf("grid dump  %s\n", dump.c_str());
    }
    return 0;
}

int cmd_prepare(const Common& c) {
    ExperimentConfig cfg = load(c);
    const double eps = cfg.eps.front(), h = cfg.h_for(eps);
    DomainGeometry g = build_domain(cfg.domain, h);
    AssumptionOptions opt;
    opt.lambda = cfg.lambda;
    opt.discrepancy_constant = cfg.discrepancy_constant;
    PreparedField pf = prepare(g, cfg.potential, cfg.interface, eps, opt);
    std::printf("%s", pf.report.to_string().c_str());
    for (const auto& w : pf.warnings) std::printf("warning: %s\n", w.c_str());
    fs::create_directories(cfg.out_dir);
    PhaseField f;
    f.u = pf.u;
    f.eps = eps;
    f.h = h;
    const std::string path = (fs::path(cfg.out_dir) / "initial.pfld").string();
    write_checkpoint(path, g, f);
    std::printf("checkpoint %s\n", path.c_str());
    if (!pf.report.ok()) {
        std::fprintf(stderr, "initial data violates the assumptions\n");
        return 2;
    }
    return 0;
}

void print_summary(const RunSummary& r) {
    std::printf("eps=%g h=%g dt=%g steps=%ld records=%d\n", r.eps, r.h, r.dt, r.steps, r.records);
    std::printf("  E %.10g -> %.10g  dissipation residual %.3e  brakke residual %.3e\n", r.E0, r.E_final,
                r.dissipation_residual, r.brakke_residual);
    std::printf("  max|u| %.12g  L1 avg %.6g  sup xi+ %.6g (scaled %.6g)  D max %.6g\n", r.max_abs_u, r.l1_avg,
                r.sup_pos_max, r.sup_scaled, r.density_max);
    std::printf("  contact angle at T %.4g  worst deviation %.4g  hausdorff max %.4g\n", r.final_contact_angle,
                r.worst_contact_dev, r.hausdorff_max);
    for (const auto& f : r.fits) std::printf("  probe %s: c3=%.4g c4=%.4g\n", f.id.c_str(), f.fit.c3, f.fit.c4);
    std::printf("  c18=%.6g (%d/%d violations)\n", r.c18, r.boundary_check.violations, r.boundary_check.samples);
}

int cmd_run(const Common& c) {
    ExperimentConfig cfg = load(c);
    RunSummary r = run(cfg);
    print_summary(r);
    std::printf("output %s\n", r.dir.c_str());
    return 0;
}

int cmd_sweep(const Common& c) {
    ExperimentConfig cfg = load(c);
    SweepReport rep = sweep(cfg);
    for (const auto& r : rep.runs) {
        if (r.ok) print_summary(r);
        else std::printf("eps=%g FAILED: %s\n", r.eps, r.error.c_str());
    }
    for (const auto& v : rep.verdicts) std::printf("[%s] %s: %s\n", v.pass ? "pass" : "FAIL", v.name.c_str(), v.detail.c_str());
    std::printf("output %s\n", cfg.out_dir.c_str());
    return rep.complete ? 0 : 3;
}

int cmd_diagnose(const Common& c, const std::string& checkpoint) {
    ExperimentConfig cfg = load(c);
    DiagnoseReport r = diagnose(cfg, checkpoint);
    std::printf("%s\n", r.to_json().c_str());
    return 0;
}

int cmd_mcf(const Common& c) {
    ExperimentConfig cfg = load(c);
    const double h = cfg.h_for(cfg.eps.front());
    DomainGeometry g = build_domain(cfg.domain, h);
    const double spacing = cfg.oracle_spacing > 0.0 ? cfg.oracle_spacing : h;
    Front fr = cfg.interface.kind == InterfaceSpec::Kind::Circle
                   ? Front::circle(cfg.interface.center, cfg.interface.radius, spacing)
                   : front_from_field(g, signed_distance_to_interface(g, cfg.interface), spacing);
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "front.csv").string();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_front_csv_header(os);
    write_front_csv(os, fr);
    for (int k = 1; k <= cfg.records && !fr.extinct; ++k) {
        fr = evolve_front(fr, cfg.T * k / cfg.records - fr.t, g);
        write_front_csv(os, fr);
        std::printf("t=%-10.6g nodes=%-5zu length=%-10.6g orthogonality defect=%.3g deg%s\n", fr.t, fr.nodes.size(),
                    fr.length(), endpoint_orthogonality_defect(fr, g), fr.extinct ? " (extinct)" : "");
    }
    std::printf("output %s\n", path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Allen-Cahn Neumann phase-field lab"};
    app.require_subcommand(1);
    Common common;
    std::string dump, checkpoint;

    auto* geo = app.add_subcommand("geometry", "build and validate the configured domain");
    add_common(geo, common);
    geo->add_option("--dump", dump, "write the cell grid as text");
    auto* prep = app.add_subcommand("prepare", "build and verify the initial data");
    add_common(prep, common);
    auto* runc = app.add_subcommand("run", "single run at one eps");
    add_common(runc, common);
    auto* sw = app.add_subcommand("sweep", "runs over the eps list and trend verdicts");
    add_common(sw, common, false);
    auto* diag = app.add_subcommand("diagnose", "recompute the diagnostics of a checkpoint");
    diag->add_option("checkpoint", checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
    add_common(diag, common, false);
    auto* mcf = app.add_subcommand("mcf", "front-tracking oracle only");
    add_common(mcf, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*geo) return cmd_geometry(common, dump);
        if (*prep) return cmd_prepare(common);
        if (*runc) return cmd_run(common);
        if (*sw) return cmd_sweep(common);
        if (*diag) return cmd_diagnose(common, checkpoint);
        if (*mcf) return cmd_mcf(common);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const NumericalAbort& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        if (!e.dump_path.empty()) std::fprintf(stderr, "state dump: %s\n", e.dump_path.c_str());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
