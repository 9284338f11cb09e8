#pragma once

#include <functional>
#include <string>
#include <vector>

namespace aclab {

struct PotentialSpec {
    std::string name = "quartic";
    std::function<double(double)> W;
    std::function<double(double)> dW;
    std::function<double(double)> d2W;
    double alpha = 0.816496580927726;  // sqrt(2/3)
    double beta = 1.0;
    double gamma = 0.0;

    // W(s) = (1 - s^2)^2 / 4
    static PotentialSpec quartic();
    // W(s) = sum_k c[k] s^k
    static PotentialSpec polynomial(std::vector<double> coeffs, double alpha, double beta, double gamma);
};

struct ConditionCheck {
    std::string name;
    bool pass = false;
    double margin = 0.0;   // worst sampled margin, negative means violated
    double witness = 0.0;  // sample point attaining the margin
    std::string detail;
};

struct PotentialReport {
    std::vector<ConditionCheck> checks;
    double min_w2_on_wells = 0.0;  // min W'' over alpha <= |s| <= 1
    bool ok() const;
    std::string to_string() const;
};

// Samples the double-well, monotone-sides and convex-wells conditions at 10^4 points of [-1.05, 1.05].
PotentialReport check_potential(const PotentialSpec& p);
// Same, but throws ValidationError naming the first failing condition.
PotentialReport validate_potential(const PotentialSpec& p);

// Heteroclinic profile q' = sqrt(2 W(q)), q(0) = 0.
class StandingWave {
public:
    explicit StandingWave(const PotentialSpec& p);

    double q(double s) const;
    double dq(double s) const;
    double d2q(double s) const;
    double sigma() const { return sigma_; }
    double s_min() const { return s_.front(); }
    double s_max() const { return s_.back(); }
    size_t table_size() const { return s_.size(); }

private:
    size_t locate(double s) const;

    std::vector<double> s_, q_, m_;
    double sigma_ = 0.0;
};

struct PotentialBounds {
    double max_sqrt_2w = 0.0;  // max over |s| <= 1 of sqrt(2W)
    double max_abs_d2w = 0.0;  // max over |s| <= 1 of |W''|
    double max_abs_dw = 0.0;
};
PotentialBounds potential_bounds(const PotentialSpec& p);

}  // namespace aclab
