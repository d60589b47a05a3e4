#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rotstab/errors.hpp"

namespace rotstab {

enum class RateModel { power_law, exp_nu_third, linear };

inline std::string to_string(RateModel m) {
    switch (m) {
        case RateModel::power_law: return "power_law";
        case RateModel::exp_nu_third: return "exp_nu_third";
        default: return "linear";
    }
}

/// Least-squares decay/growth fit over a time window.
struct RateFit {
    double rate = 0.0;       // exponent (power_law) or rate (exp/linear)
    double intercept = 0.0;
    double r2 = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    RateModel model = RateModel::power_law;
    int n_points = 0;
};

/// Fit log(norm) against log(t) (power_law), log(norm) against t
/// (exp_nu_third), or norm against t (linear), restricted to [t_lo, t_hi].
inline RateFit measure_rate(const std::vector<double>& times, const std::vector<double>& norms,
                            RateModel model, double t_lo, double t_hi, int min_points = 20) {
    if (times.size() != norms.size()) throw FitError("measure_rate: size mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        double t = times[i], n = norms[i];
        if (t < t_lo || t > t_hi) continue;
        if (!std::isfinite(n)) continue;
        switch (model) {
            case RateModel::power_law:
                if (t <= 0.0 || n <= 0.0) continue;
                xs.push_back(std::log(t));
                ys.push_back(std::log(n));
                break;
            case RateModel::exp_nu_third:
                if (n <= 0.0) continue;
                xs.push_back(t);
                ys.push_back(std::log(n));
                break;
            case RateModel::linear:
                xs.push_back(t);
                ys.push_back(n);
                break;
        }
    }
    if (static_cast<int>(xs.size()) < min_points)
        throw FitError("measure_rate: fewer than " + std::to_string(min_points) +
                       " usable samples in the fit window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom <= 0.0) throw FitError("measure_rate: degenerate abscissae");
    RateFit fit;
    fit.model = model;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.n_points = static_cast<int>(xs.size());
    fit.rate = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.rate * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (fit.intercept + fit.rate * xs[i]);
        ss_res += r * r;
    }
    fit.r2 = (ss_tot > 0.0) ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    return fit;
}

/// Simple least-squares line through (x, y) pairs; slope + intercept.
inline std::pair<double, double> fit_line(const std::vector<double>& x,
                                          const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw FitError("fit_line: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw FitError("fit_line: degenerate abscissae");
    double slope = (n * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / n};
}

}  // namespace rotstab
