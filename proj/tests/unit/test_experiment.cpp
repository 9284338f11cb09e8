#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aclab/experiment.hpp"

using namespace aclab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string minimal_text() { return slurp(fs::path(ACLAB_SOURCE_DIR) / "configs" / "minimal.ini"); }

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("aclab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(item);
    return out;
}

std::vector<std::string> lines(const std::string& s) { return split(s, '\n'); }

const char* kNoisySweep = R"([domain]
kind = disk
radius = 1.0
[interface]
kind = line
point = 0, 0
angle = 90
noise = 0.5
seed = 7
[run]
eps = 0.16, 0.08
h_max = 0.02
T = 0.004
records = 4
[oracle]
enabled = false
[output]
checkpoint_every = 0
density = false
)";

}  // namespace

TEST(Experiment, ParsesMinimalConfig) {
    auto cfg = parse_config(minimal_text());
    EXPECT_EQ(cfg.name, "minimal");
    ASSERT_EQ(cfg.eps.size(), 1u);
    EXPECT_EQ(cfg.eps[0], 0.08);
    EXPECT_DOUBLE_EQ(cfg.h_for(0.08), 0.02);
    EXPECT_EQ(cfg.records, 20);
    EXPECT_EQ(cfg.kernel_probes.size(), 2u);
    EXPECT_EQ(cfg.fields.size(), 2u);
    EXPECT_EQ(cfg.tests.size(), 1u);
    EXPECT_EQ(cfg.brakke_test, "bump");
    EXPECT_EQ(cfg.clearing.size(), 1u);
    EXPECT_EQ(cfg.checkpoint_every, 5);
}

TEST(Experiment, RejectsInvalidConfigs) {
    const std::string base = minimal_text();
    auto with = [&](const std::string& from, const std::string& to) {
        std::string s = base;
        auto at = s.find(from);
        EXPECT_NE(at, std::string::npos) << from;
        return s.replace(at, from.size(), to);
    };
    // h = eps
    EXPECT_THROW(parse_config(with("h_ratio = 0.25", "h_ratio = 1")), ValidationError);
    EXPECT_THROW(parse_config(with("T = 0.02", "T = 0")), ValidationError);
    EXPECT_THROW(parse_config(with("lambda = 0.6", "lambda = 1")), ValidationError);
    EXPECT_THROW(parse_config(with("records = 20", "records = 0")), ValidationError);
    EXPECT_THROW(parse_config(with("brakke_test = bump", "brakke_test = missing")), ValidationError);
    EXPECT_THROW(parse_config(with("radius = 1.0", "radius = 1.0\nwobble = 2")), ValidationError);
    EXPECT_THROW(parse_config(base + "\n[mystery]\nx = 1\n"), ValidationError);
    EXPECT_THROW(parse_config(with("variant = full", "variant = sideways")), ValidationError);
    EXPECT_THROW(parse_config(with("[clearing.far]\ny = 0.6, 0\nt = 0.002", "[clearing.far]\ny = 0.6, 0\nt = 0.5")),
                 ValidationError);
    EXPECT_THROW(load_config("/nonexistent/config.ini"), ValidationError);
}

TEST(Experiment, CanonicalConfigAndHash) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    auto a = parse_config(minimal_text());
    auto b = parse_config(minimal_text());
    b.out_dir = "elsewhere";
    b.threads = 4;
    EXPECT_EQ(canonical_config(a), canonical_config(b));
    b.eps[0] = 0.1;
    EXPECT_NE(canonical_config(a), canonical_config(b));
}

TEST(Experiment, SweepNeedsDescendingEpsList) {
    auto cfg = parse_config(minimal_text());
    EXPECT_THROW(sweep(cfg), ValidationError);
    cfg.eps = {0.08, 0.16};
    EXPECT_THROW(sweep(cfg), ValidationError);
}

TEST(Experiment, MinimalRunOutputs) {
    auto cfg = parse_config(minimal_text());
    const fs::path dir = scratch("minimal");
    cfg.out_dir = dir.string();
    RunSummary r = run(cfg);
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.records, 21);  // t = 0 plus 20 intervals

    auto rows = lines(slurp(dir / "series.csv"));
    ASSERT_EQ(rows.size(), 22u);
    EXPECT_EQ(rows[0], kSeriesHeader);
    for (size_t k = 1; k < rows.size(); ++k) {
        auto cols = split(rows[k], ',');
        ASSERT_EQ(cols.size(), 10u) << rows[k];
        for (const auto& c : cols) EXPECT_TRUE(std::isfinite(std::stod(c))) << rows[k];
    }
    EXPECT_EQ(std::stod(split(rows.back(), ',')[0]), 0.02);

    for (const char* id : {"top", "center"}) {
        auto m = lines(slurp(dir / (std::string("monotonicity_") + id + ".csv")));
        ASSERT_GE(m.size(), 2u);
        EXPECT_EQ(m[0], kMonotonicityHeader);
    }
    EXPECT_EQ(lines(slurp(dir / "oracle.csv"))[0], kOracleHeader);
    EXPECT_EQ(lines(slurp(dir / "first_variation.csv"))[0], kFirstVariationHeader);
    EXPECT_EQ(lines(slurp(dir / "front.csv"))[0], "t,node,x,y");
    EXPECT_EQ(lines(slurp(dir / "clearing.csv")).size(), 2u);
    for (int k : {0, 5, 10, 15, 20}) {
        char name[32];
        std::snprintf(name, sizeof name, "rec_%04d.pfld", k);
        EXPECT_TRUE(fs::exists(dir / "checkpoints" / name)) << name;
    }

    auto man = nlohmann::json::parse(slurp(dir / "manifest.json"));
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
    EXPECT_EQ(man["config_hash"], hash);
    for (const char* k : {"D0", "c_gradient", "c_discrepancy", "c18"}) EXPECT_TRUE(man["constants"].contains(k)) << k;
    EXPECT_TRUE(man["constants"]["probes"]["top"].contains("c3"));
    EXPECT_TRUE(man["constants"]["probes"]["top"].contains("c4"));
    EXPECT_EQ(man["constants"]["probes"]["top"]["variant"], "reflected");
    EXPECT_TRUE(man["versions"].contains("aclab"));

    EXPECT_LE(r.dissipation_residual, 1e-2);
    EXPECT_LE(r.max_abs_u, 1.0 + 1e-6);

    // identical config, identical series
    auto cfg2 = parse_config(minimal_text());
    const fs::path dir2 = scratch("minimal_again");
    cfg2.out_dir = dir2.string();
    run(cfg2);
    EXPECT_EQ(slurp(dir / "series.csv"), slurp(dir2 / "series.csv"));

    // diagnose recomputes the final record
    DiagnoseReport d = diagnose(cfg, (dir / "checkpoints" / "rec_0020.pfld").string());
    EXPECT_EQ(d.eps, 0.08);
    EXPECT_EQ(d.t, 0.02);
    EXPECT_NEAR(d.energy, r.E_final, 1e-12 * r.E_final);
    EXPECT_FALSE(d.angles.empty());
    auto dj = nlohmann::json::parse(d.to_json());
    EXPECT_TRUE(dj.contains("energy"));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

// a noisy, non-prepared initial field must trip a verdict
TEST(Experiment, NoisySweepFailsVerdict) {
    auto cfg = parse_config(kNoisySweep);
    const fs::path dir = scratch("noisy");
    cfg.out_dir = dir.string();
    SweepReport rep = sweep(cfg);
    EXPECT_TRUE(rep.complete);
    ASSERT_EQ(rep.runs.size(), 2u);
    bool any_fail = false, prepared_fail = false;
    for (const auto& v : rep.verdicts) {
        any_fail = any_fail || !v.pass;
        if (v.name == "initial_data_prepared") prepared_fail = !v.pass;
    }
    EXPECT_TRUE(any_fail);
    EXPECT_TRUE(prepared_fail);

    auto rows = lines(slurp(dir / "sweep.csv"));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], kSweepHeader);
    EXPECT_EQ(split(rows[1], ',').size(), split(kSweepHeader, ',').size());
    auto js = nlohmann::json::parse(slurp(dir / "sweep_report.json"));
    EXPECT_TRUE(js.contains("verdicts"));
    EXPECT_TRUE(fs::exists(dir / "eps_0.16" / "series.csv"));
    EXPECT_TRUE(fs::exists(dir / "eps_0.08" / "series.csv"));
    // c18 calibrated on the coarsest run and frozen after it
    EXPECT_EQ(rep.runs[1].c18, rep.runs[0].c18);
    fs::remove_all(dir);
}

TEST(Experiment, VerdictsOnSyntheticSummaries) {
    auto mk = [](double eps, double l1, double sup, double contact) {
        RunSummary r;
        r.ok = true;
        r.eps = eps;
        r.l1_avg = l1;
        r.sup_scaled = sup;
        r.worst_contact_dev = contact;
        r.contact_samples = 3;
        r.max_abs_u = 1.0;
        r.density_max = 1.0;
        r.hausdorff_max = std::nan("");
        r.assumptions.lines.push_back({"max_abs_u", 1.0, 1.0, true, {}, {}});
        return r;
    };
    auto find = [](const std::vector<Verdict>& v, const std::string& name) {
        for (const auto& x : v)
            if (x.name == name) return x;
        return Verdict{name, false, "missing"};
    };
    auto good = sweep_verdicts({mk(0.16, 1.0, 0.1, 3.0), mk(0.08, 0.5, 0.1, 2.0), mk(0.04, 0.25, 0.12, 1.0)});
    EXPECT_TRUE(find(good, "l1_discrepancy_decreasing").pass);
    EXPECT_TRUE(find(good, "sup_discrepancy_bounded").pass);
    EXPECT_TRUE(find(good, "contact_angle_improves").pass);
    auto bad = sweep_verdicts({mk(0.16, 1.0, 0.1, 3.0), mk(0.08, 0.8, 0.2, 3.5)});
    EXPECT_FALSE(find(bad, "l1_discrepancy_decreasing").pass);
    EXPECT_FALSE(find(bad, "sup_discrepancy_bounded").pass);
    EXPECT_FALSE(find(bad, "contact_angle_improves").pass);
    auto failed = mk(0.08, 0.5, 0.1, 2.0);
    failed.ok = false;
    auto partial = sweep_verdicts({mk(0.16, 1.0, 0.1, 3.0), failed});
    EXPECT_FALSE(find(partial, "runs_complete").pass);
}

TEST(Experiment, SeriesRowFullPrecision) {
    SeriesRow r;
    r.t = 0.1;
    r.E = 1.0 / 3.0;
    auto cols = split(format_series_row(r), ',');
    ASSERT_EQ(cols.size(), 10u);
    EXPECT_EQ(std::stod(cols[1]), 1.0 / 3.0);
}
