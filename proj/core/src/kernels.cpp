#include "aclab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace aclab {

namespace {

constexpr double kExpCut = 40.0;

double smootherstep(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }

}  // namespace

double eta_cutoff(double r, double c2) {
    const double a = 0.25 * c2, b = 0.48 * c2;
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    return 1.0 - smootherstep((r - a) / (b - a));
}

double heat_kernel(Vec2 x, Vec2 y, double tau) {
    return std::exp(-norm2(x - y) / (4.0 * tau)) / std::sqrt(4.0 * std::numbers::pi * tau);
}

KernelVariant boundary_variant(const DomainGeometry& g, Vec2 y) {
    return std::fabs(g.signed_distance(y)) < 0.5 * g.c2() ? KernelVariant::Reflected : KernelVariant::Truncated;
}

KernelSums kernel_sums(const MeasureSnapshot& m, const DomainGeometry& g, const KernelProbe& probe, KernelVariant v) {
    const double tau = probe.s - m.t;
    if (!(tau > 0.0)) throw ValidationError("kernel probe '" + probe.id + "': requires t < s");
    const double c2 = g.c2(), h = g.h();
    if (v == KernelVariant::Reflected && !(std::fabs(g.signed_distance(probe.y)) < 0.5 * c2))
        throw ValidationError("kernel probe '" + probe.id + "': reflected kernel needs y in N_{c2/2}");

    const Vec2 y = probe.y;
    const double norm_c = 1.0 / std::sqrt(4.0 * std::numbers::pi * tau);
    const double inv4t = 1.0 / (4.0 * tau), inv2t = 1.0 / (2.0 * tau);
    double reach = std::sqrt(4.0 * kExpCut * tau);
    if (v != KernelVariant::Full) reach = std::min(reach, 0.5 * c2);
    // x~ within c2/2 of y and |x - x~| < 2 c2 put x within 2.5 c2 of y
    double box = v == KernelVariant::Reflected ? std::max(reach, 2.5 * c2) : reach;
    box += h;

    const Vec2 o = g.center(0, 0);
    const int i0 = std::max(0, static_cast<int>(std::floor((y.x - box - o.x) / h)));
    const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((y.x + box - o.x) / h)));
    const int j0 = std::max(0, static_cast<int>(std::floor((y.y - box - o.y) / h)));
    const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((y.y + box - o.y) / h)));
    const auto& dist = g.distance();

    KernelSums out;
    for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
            const int c = g.index(i, j);
            const size_t uc = static_cast<size_t>(c);
            if (!g.active(c) || m.w[uc] <= 0.0) continue;
            const Vec2 x = g.center(i, j);
            double k = 0.0;
            const double r2 = norm2(x - y);
            if (r2 * inv4t < kExpCut) {
                double cut = v == KernelVariant::Full ? 1.0 : eta_cutoff(std::sqrt(r2), c2);
                if (cut > 0.0) k = cut * norm_c * std::exp(-r2 * inv4t);
            }
            if (v == KernelVariant::Reflected && std::fabs(dist[uc]) < c2 && g.has_projection(c)) {
                const double rr2 = norm2(g.cell_reflection(c) - y);
                if (rr2 * inv4t < kExpCut) {
                    double cut = eta_cutoff(std::sqrt(rr2), c2);
                    if (cut > 0.0) {
                        double k2 = cut * norm_c * std::exp(-rr2 * inv4t);
                        out.reflected_part += k2 * m.w[uc] * m.e[uc];
                        k += k2;
                    }
                }
            }
            if (k == 0.0) continue;
            out.K += k * m.w[uc] * m.e[uc];
            out.Xi += k * inv2t * m.w[uc] * m.xi[uc];
        }
    }
    return out;
}

double kernel_integral(const MeasureSnapshot& m, const DomainGeometry& g, const KernelProbe& probe, KernelVariant v) {
    return kernel_sums(m, g, probe, v).K;
}

namespace {

// smallest c4 >= 0 satisfying every step for a given c3
double required_c4(const std::vector<MonotonicitySample>& sm, double s, double c3, double tol) {
    double need = 0.0;
    for (size_t k = 0; k + 1 < sm.size(); ++k) {
        const double dt = sm[k + 1].t - sm[k].t;
        if (!(dt > 0.0)) continue;
        const double ea = std::exp(c3 * std::pow(s - sm[k].t, 0.25));
        const double eb = std::exp(c3 * std::pow(s - sm[k + 1].t, 0.25));
        const double rate = (eb * sm[k + 1].K - ea * sm[k].K) / dt;
        const double xi_part = 0.5 * (ea * sm[k].Xi + eb * sm[k + 1].Xi);
        need = std::max(need, (rate - tol - xi_part) / (0.5 * (ea + eb)));
    }
    return need;
}

}  // namespace

MonotonicityFit fit_monotonicity_constants(const std::vector<MonotonicitySample>& samples, double s, double tol) {
    MonotonicityFit best{0.0, std::numeric_limits<double>::infinity()};
    double best_sum = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= 400; ++n) {
        double c3 = 0.05 * n;
        double c4 = required_c4(samples, s, c3, tol);
        if (c3 + c4 < best_sum - 1e-14) {
            best_sum = c3 + c4;
            best = {c3, c4};
        }
    }
    return best;
}

MonotonicitySeries monotonicity_series(const std::vector<MonotonicitySample>& samples, double s,
                                       std::optional<MonotonicityFit> fixed) {
    MonotonicitySeries out;
    out.s = s;
    for (const auto& smp : samples)
        if (!(smp.t < s)) throw ValidationError("monotonicity series: sample times must precede s");
    out.fit = fixed ? *fixed : fit_monotonicity_constants(samples, s);
    const double c3 = out.fit.c3, c4 = out.fit.c4;
    out.max_rate = -std::numeric_limits<double>::infinity();
    for (const auto& smp : samples) {
        out.t.push_back(smp.t);
        out.M.push_back(std::exp(c3 * std::pow(s - smp.t, 0.25)) * smp.K);
    }
    out.violation.assign(samples.size(), 0.0);
    for (size_t k = 0; k + 1 < samples.size(); ++k) {
        const double dt = samples[k + 1].t - samples[k].t;
        if (!(dt > 0.0)) continue;
        const double ea = std::exp(c3 * std::pow(s - samples[k].t, 0.25));
        const double eb = std::exp(c3 * std::pow(s - samples[k + 1].t, 0.25));
        const double rate = (out.M[k + 1] - out.M[k]) / dt;
        out.max_rate = std::max(out.max_rate, rate);
        out.violation[k] = rate - 0.5 * (ea * (c4 + samples[k].Xi) + eb * (c4 + samples[k + 1].Xi));
    }
    if (samples.size() < 2) out.max_rate = 0.0;
    return out;
}

MonotonicitySeries monotonicity_series(const Trajectory& tr, const KernelProbe& probe, const DomainGeometry& g,
                                       const PotentialSpec& p, KernelVariant v, std::optional<MonotonicityFit> fixed) {
    if (tr.fields.size() != tr.records.size())
        throw ValidationError("monotonicity series: trajectory was recorded without fields");
    std::vector<MonotonicitySample> samples;
    if (!tr.fields.empty()) {
        Solver s(g, p, tr.fields.front().eps, StepPolicy{Scheme::SemiImplicit, 0.2, 0.0});
        for (const auto& f : tr.fields) {
            if (!(f.t < probe.s)) break;
            MeasureSnapshot m = snapshot(s, f);
            KernelSums ks = kernel_sums(m, g, probe, v);
            samples.push_back({f.t, ks.K, ks.Xi});
        }
    }
    return monotonicity_series(samples, probe.s, fixed);
}

double gaussian_density(const MeasureSnapshot& m, const DomainGeometry& g, Vec2 y, double r) {
    if (!(r > 0.0)) throw ValidationError("gaussian density: radius must be positive");
    KernelProbe probe{"density", y, m.t + r * r};
    return kernel_sums(m, g, probe, boundary_variant(g, y)).K;
}

ClearingSample clearing_sample(const MeasureSnapshot& m, const PhaseField& f, const DomainGeometry& g,
                               const PotentialSpec& p, Vec2 y, double t0) {
    ClearingSample cs;
    cs.t = m.t;
    const double d = m.t - t0;
    if (!(d > 0.0)) throw ValidationError("clearing-out sample: record must follow the base time");
    cs.density = gaussian_density(m, g, y, std::sqrt(d));
    for (int c : g.ball_mask(y, std::sqrt(0.5 * d)))
        if (std::fabs(f.u[static_cast<size_t>(c)]) < p.alpha) ++cs.low_cells;
    return cs;
}

ClearingOutReport clearing_out_verdict(const std::vector<ClearingSample>& samples, double t0, double delta0) {
    ClearingOutReport rep;
    std::vector<ClearingSample> sm;
    for (const auto& s : samples)
        if (s.t > t0 + 1e-14) sm.push_back(s);
    if (sm.empty()) throw ValidationError("clearing-out probe: no records after t");
    std::sort(sm.begin(), sm.end(), [](const ClearingSample& a, const ClearingSample& b) { return a.t < b.t; });
    auto nearest = [&](double t) {
        const ClearingSample* best = &sm.front();
        for (const auto& s : sm)
            if (std::fabs(s.t - t) < std::fabs(best->t - t)) best = &s;
        return best;
    };
    // dyadic subsequence of the recorded scales, smallest first
    std::vector<const ClearingSample*> dyadic{&sm.front()};
    for (const auto& s : sm)
        if (s.t - t0 >= 2.0 * (dyadic.back()->t - t0) * (1.0 - 1e-9)) dyadic.push_back(&s);
    const double tmax = sm.back().t;
    for (const ClearingSample* s : dyadic) {
        double d = s->t - t0;
        if (t0 + 2.0 * d > tmax + 1e-12 || rep.scales.size() >= 3) break;
        rep.scales.push_back(d);
        rep.limsup_density = std::max(rep.limsup_density, s->density);
    }
    if (rep.scales.empty()) {
        rep.scales.push_back(dyadic.front()->t - t0);
        rep.limsup_density = dyadic.front()->density;
    }
    rep.clear = rep.limsup_density < delta0;
    rep.later_time = t0 + 2.0 * rep.scales.back();
    rep.low_cells = nearest(rep.later_time)->low_cells;
    rep.consistent = !rep.clear || rep.low_cells == 0;
    return rep;
}

ClearingOutReport clearing_out_probe(const Trajectory& tr, const DomainGeometry& g, const PotentialSpec& p, Vec2 y,
                                     double t, double delta0) {
    if (tr.fields.size() != tr.records.size() || tr.fields.empty())
        throw ValidationError("clearing-out probe: trajectory was recorded without fields");
    Solver s(g, p, tr.fields.front().eps, StepPolicy{Scheme::SemiImplicit, 0.2, 0.0});
    size_t base = 0;
    for (size_t k = 0; k < tr.fields.size(); ++k)
        if (std::fabs(tr.fields[k].t - t) < std::fabs(tr.fields[base].t - t)) base = k;
    const double t0 = tr.fields[base].t;
    std::vector<ClearingSample> samples;
    for (const auto& f : tr.fields) {
        if (!(f.t > t0 + 1e-14)) continue;
        samples.push_back(clearing_sample(snapshot(s, f), f, g, p, y, t0));
    }
    return clearing_out_verdict(samples, t0, delta0);
}

}  // namespace aclab
