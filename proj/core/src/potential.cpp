#include "aclab/potential.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "aclab/types.hpp"

namespace aclab {

PotentialSpec PotentialSpec::quartic() {
    PotentialSpec p;
    p.name = "quartic";
    // factored forms keep W accurate next to the wells
    p.W = [](double s) {
        double a = (1.0 - s) * (1.0 + s);
        return 0.25 * a * a;
    };
    p.dW = [](double s) { return s * (s * s - 1.0); };
    p.d2W = [](double s) { return 3.0 * s * s - 1.0; };
    return p;
}

PotentialSpec PotentialSpec::polynomial(std::vector<double> c, double alpha, double beta, double gamma) {
    if (c.empty()) throw ValidationError("polynomial potential needs at least one coefficient");
    auto horner = [](const std::vector<double>& a, double s) {
        double v = 0.0;
        for (size_t k = a.size(); k-- > 0;) v = v * s + a[k];
        return v;
    };
    std::vector<double> d1, d2;
    for (size_t k = 1; k < c.size(); ++k) d1.push_back(static_cast<double>(k) * c[k]);
    for (size_t k = 1; k < d1.size(); ++k) d2.push_back(static_cast<double>(k) * d1[k]);
    PotentialSpec p;
    p.name = "polynomial";
    p.W = [c, horner](double s) { return horner(c, s); };
    p.dW = [d1, horner](double s) { return d1.empty() ? 0.0 : horner(d1, s); };
    p.d2W = [d2, horner](double s) { return d2.empty() ? 0.0 : horner(d2, s); };
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = gamma;
    return p;
}

bool PotentialReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.pass; });
}

std::string PotentialReport::to_string() const {
    std::ostringstream os;
    os.precision(10);
    for (const auto& c : checks) {
        os << c.name << ": " << (c.pass ? "pass" : "FAIL") << " margin=" << c.margin << " witness=" << c.witness;
        if (!c.detail.empty()) os << " (" << c.detail << ")";
        os << "\n";
    }
    return os.str();
}

PotentialReport check_potential(const PotentialSpec& p) {
    constexpr int kSamples = 10000;
    constexpr double kLo = -1.05, kHi = 1.05;
    constexpr double kTol = 1e-12;
    PotentialReport rep;

    ConditionCheck params{"parameters", true, 1.0, 0.0, ""};
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) {
        params.pass = false;
        params.margin = -1.0;
        params.witness = p.alpha;
        params.detail = "alpha must lie in (0,1)";
    } else if (!(p.gamma > -1.0 && p.gamma < 1.0)) {
        params.pass = false;
        params.margin = -1.0;
        params.witness = p.gamma;
        params.detail = "gamma must lie in (-1,1)";
    }
    rep.checks.push_back(params);

    // wells at +-1, positive elsewhere
    ConditionCheck w1{"double_well", true, std::numeric_limits<double>::infinity(), 0.0, "W(+-1)=0, W>0 elsewhere"};
    double wl = p.W(-1.0), wr = p.W(1.0);
    double scale = 0.0;
    for (int i = 0; i <= kSamples; ++i) scale = std::max(scale, std::fabs(p.W(kLo + (kHi - kLo) * i / kSamples)));
    if (std::fabs(wl) > kTol * std::max(1.0, scale) || std::fabs(wr) > kTol * std::max(1.0, scale)) {
        w1.pass = false;
        w1.margin = -std::max(std::fabs(wl), std::fabs(wr));
        w1.witness = std::fabs(wl) > std::fabs(wr) ? -1.0 : 1.0;
    }
    // sign of W' on either side of gamma
    ConditionCheck w2{"monotone_sides", true, std::numeric_limits<double>::infinity(), 0.0, "W'<0 on (gamma,1), W'>0 on (-1,gamma)"};
    // W'' >= beta for alpha <= |s| <= 1
    ConditionCheck w3{"convex_wells", true, std::numeric_limits<double>::infinity(), 0.0, ""};
    rep.min_w2_on_wells = std::numeric_limits<double>::infinity();

    for (int i = 0; i <= kSamples; ++i) {
        double s = kLo + (kHi - kLo) * i / kSamples;
        bool at_well = std::fabs(std::fabs(s) - 1.0) < 1e-12;
        if (!at_well) {
            double w = p.W(s);
            if (w < w1.margin && w1.pass) {
                w1.margin = w;
                w1.witness = s;
            }
        }
        if (s > -1.0 && s < 1.0 && std::fabs(s - p.gamma) > 1e-12) {
            double d = p.dW(s);
            double m = s > p.gamma ? -d : d;
            if (m < w2.margin) {
                w2.margin = m;
                w2.witness = s;
            }
        }
        if (std::fabs(s) >= p.alpha - 1e-15 && std::fabs(s) <= 1.0 + 1e-15) {
            double d2 = p.d2W(s);
            rep.min_w2_on_wells = std::min(rep.min_w2_on_wells, d2);
            if (d2 - p.beta < w3.margin) {
                w3.margin = d2 - p.beta;
                w3.witness = s;
            }
        }
    }
    // the sample grid may miss the interval ends, so evaluate them directly
    for (double s : {p.alpha, -p.alpha, 1.0, -1.0}) {
        double d2 = p.d2W(s);
        rep.min_w2_on_wells = std::min(rep.min_w2_on_wells, d2);
        if (d2 - p.beta < w3.margin) {
            w3.margin = d2 - p.beta;
            w3.witness = s;
        }
    }
    if (w1.pass && !(w1.margin > 0.0)) w1.pass = false;
    w2.pass = w2.margin > 0.0;
    w3.pass = w3.margin >= -1e-9;
    std::ostringstream d3;
    d3 << "min W'' on alpha<=|s|<=1 is " << rep.min_w2_on_wells << ", beta=" << p.beta;
    w3.detail = d3.str();
    rep.checks.push_back(w1);
    rep.checks.push_back(w2);
    rep.checks.push_back(w3);
    return rep;
}

PotentialReport validate_potential(const PotentialSpec& p) {
    if (!p.W || !p.dW || !p.d2W) throw ValidationError("potential callables missing");
    PotentialReport rep = check_potential(p);
    for (const auto& c : rep.checks) {
        if (!c.pass) {
            std::ostringstream os;
            os.precision(10);
            os << "potential '" << p.name << "' violates " << c.name << " at s=" << c.witness << " (margin " << c.margin
               << "; " << c.detail << ")";
            throw ValidationError(os.str());
        }
    }
    return rep;
}

namespace {

double root2w(const PotentialSpec& p, double s) { return std::sqrt(2.0 * std::max(p.W(s), 0.0)); }

// Tabulate s(q) on one side of 0 by integrating ds/dq = 1/sqrt(2W(q)).
// The q nodes are q = sign * tanh(z) for uniform z, which gives roughly
// uniform s spacing for non-degenerate wells.
void half_table(const PotentialSpec& p, double sign, std::vector<double>& s_out, std::vector<double>& q_out) {
    constexpr double kDz = 1e-3;
    constexpr double kSLimit = 60.0;
    constexpr double kReach = 1e-6;
    const double w_floor = 1e-13 * std::max(1.0, p.W(p.gamma));
    auto integrand = [&](double q) { return 1.0 / root2w(p, q); };
    double s = 0.0, qprev = 0.0;
    s_out.push_back(0.0);
    q_out.push_back(0.0);
    for (int k = 1;; ++k) {
        double q = sign * std::tanh(kDz * k);
        if (1.0 - std::fabs(q) < 1e-10 || p.W(q) < w_floor) break;
        double lo = std::min(qprev, q), hi = std::max(qprev, q);
        double ds = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, lo, hi, 0, 0.0);
        if (!std::isfinite(ds)) break;
        s += sign * ds;
        if (std::fabs(s) > kSLimit) {
            if (1.0 - std::fabs(qprev) > kReach)
                throw ValidationError("standing wave stalls: |q| stays below 1-1e-6 within |s|<=60 (potential too flat)");
            break;
        }
        s_out.push_back(s);
        q_out.push_back(q);
        qprev = q;
    }
    if (1.0 - std::fabs(q_out.back()) > kReach)
        throw ValidationError("standing wave stalls before |q| reaches 1-1e-6");
}

}  // namespace

StandingWave::StandingWave(const PotentialSpec& p) {
    std::vector<double> sn, qn, sp, qp;
    half_table(p, -1.0, sn, qn);
    half_table(p, 1.0, sp, qp);
    s_.reserve(sn.size() + sp.size());
    for (size_t i = sn.size(); i-- > 1;) {
        s_.push_back(sn[i]);
        q_.push_back(qn[i]);
    }
    s_.insert(s_.end(), sp.begin(), sp.end());
    q_.insert(q_.end(), qp.begin(), qp.end());
    m_.resize(q_.size());
    for (size_t i = 0; i < q_.size(); ++i) m_[i] = root2w(p, q_[i]);
    for (size_t i = 1; i < s_.size(); ++i) {
        if (!(s_[i] > s_[i - 1]) || !(q_[i] > q_[i - 1]))
            throw ValidationError("standing wave table is not strictly increasing");
    }
    auto f = [&](double s) { return root2w(p, s); };
    sigma_ = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -1.0, 1.0, 15, 1e-14);
}

size_t StandingWave::locate(double s) const {
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    size_t i = static_cast<size_t>(it - s_.begin());
    return i == 0 ? 0 : std::min(i - 1, s_.size() - 2);
}

// Cubic Hermite interpolation with the exact slopes q' = sqrt(2W(q)).
double StandingWave::q(double s) const {
    if (s <= s_.front()) return -1.0;
    if (s >= s_.back()) return 1.0;
    size_t i = locate(s);
    double hseg = s_[i + 1] - s_[i];
    double t = (s - s_[i]) / hseg;
    double t2 = t * t, t3 = t2 * t;
    double v = (2 * t3 - 3 * t2 + 1) * q_[i] + (t3 - 2 * t2 + t) * hseg * m_[i] + (-2 * t3 + 3 * t2) * q_[i + 1] +
               (t3 - t2) * hseg * m_[i + 1];
    return std::clamp(v, q_[i], q_[i + 1]);
}

double StandingWave::dq(double s) const {
    if (s <= s_.front() || s >= s_.back()) return 0.0;
    size_t i = locate(s);
    double hseg = s_[i + 1] - s_[i];
    double t = (s - s_[i]) / hseg;
    double t2 = t * t;
    return ((6 * t2 - 6 * t) * q_[i] + (-6 * t2 + 6 * t) * q_[i + 1]) / hseg + (3 * t2 - 4 * t + 1) * m_[i] +
           (3 * t2 - 2 * t) * m_[i + 1];
}

double StandingWave::d2q(double s) const {
    if (s <= s_.front() || s >= s_.back()) return 0.0;
    size_t i = locate(s);
    double hseg = s_[i + 1] - s_[i];
    double t = (s - s_[i]) / hseg;
    return ((12 * t - 6) * (q_[i] - q_[i + 1])) / (hseg * hseg) + ((6 * t - 4) * m_[i] + (6 * t - 2) * m_[i + 1]) / hseg;
}

PotentialBounds potential_bounds(const PotentialSpec& p) {
    PotentialBounds b;
    constexpr int kSamples = 10000;
    for (int i = 0; i <= kSamples; ++i) {
        double s = -1.0 + 2.0 * i / kSamples;
        b.max_sqrt_2w = std::max(b.max_sqrt_2w, root2w(p, s));
        b.max_abs_d2w = std::max(b.max_abs_d2w, std::fabs(p.d2W(s)));
        b.max_abs_dw = std::max(b.max_abs_dw, std::fabs(p.dW(s)));
    }
    return b;
}

}  // namespace aclab
