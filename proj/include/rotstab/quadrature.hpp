#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "rotstab/errors.hpp"

namespace rotstab {

namespace gk {

// 7/15 Gauss-Kronrod nodes and weights on [-1, 1].
inline constexpr double nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double wk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double wg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                 0.417959183673469};

template <class F, class R>
void panel(const F& f, double a, double b, R& value, double& err) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    R sk{}, sg{};
    for (int i = 0; i < 15; ++i) {
        R fv = f(c + h * nodes[i]);
        sk += wk[i] * fv;
        // Odd indices 1,3,...,13 are the embedded Gauss-7 nodes, weights 0,1,2,3,2,1,0.
        if (i % 2 == 1) sg += wg[(i < 7) ? i / 2 : (14 - i) / 2] * fv;
    }
    value = h * sk;
    err = std::abs(R(h * (sk - sg)));
}

}  // namespace gk

/// Adaptive Gauss-Kronrod integration of f over [a, b].
/// R is double or std::complex<double>. Throws NumericalError when the
/// requested tolerance cannot be met within max_depth bisections.
template <class R, class F>
R integrate_adaptive(const F& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                     int max_depth = 48, double* err_out = nullptr) {
    struct Seg {
        double a, b, err;
        R val;
        int depth;
    };
    R v0{};
    double e0 = 0.0;
    gk::panel(f, a, b, v0, e0);
    std::vector<Seg> worst{{a, b, e0, v0, 0}};
    R total = v0;
    double total_err = e0;
    auto tol = [&](double scale) { return std::max(abs_tol, rel_tol * scale); };
    // Refine the worst panel until the summed error estimate passes.
    for (int iter = 0; iter < 200000; ++iter) {
        if (total_err <= tol(std::abs(total))) {
            if (err_out) *err_out = total_err;
            return total;
        }
        std::size_t wi = 0;
        for (std::size_t i = 1; i < worst.size(); ++i)
            if (worst[i].err > worst[wi].err) wi = i;
        Seg s = worst[wi];
        if (s.depth >= max_depth)
            throw NumericalError("integrate_adaptive: tolerance not reached (max depth), err=" +
                                 std::to_string(total_err));
        double m = 0.5 * (s.a + s.b);
        Seg l{s.a, m, 0.0, R{}, s.depth + 1}, r{m, s.b, 0.0, R{}, s.depth + 1};
        gk::panel(f, l.a, l.b, l.val, l.err);
        gk::panel(f, r.a, r.b, r.val, r.err);
        total += l.val + r.val - s.val;
        total_err += l.err + r.err - s.err;
        worst[wi] = l;
        worst.push_back(r);
    }
    throw NumericalError("integrate_adaptive: panel budget exhausted");
}

/// Fixed-order composite Gauss-Kronrod rule with n equal panels (no adaptivity,
/// no error control): used where the node density is chosen analytically.
template <class R, class F>
R integrate_composite(const F& f, double a, double b, int n_panels) {
    R total{};
    double h = (b - a) / n_panels;
    for (int p = 0; p < n_panels; ++p) {
        R v{};
        double e;
        gk::panel(f, a + p * h, a + (p + 1) * h, v, e);
        total += v;
    }
    return total;
}

}  // namespace rotstab
