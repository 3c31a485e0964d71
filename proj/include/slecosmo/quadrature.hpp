#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "common.hpp"

namespace slecosmo {

struct VectorIntegral {
    std::vector<double> value;
    std::vector<double> error;
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double lo, hi;
    std::vector<double> value, error;
};

}  // namespace detail

// Adaptive Gauss-Kronrod quadrature of a vector-valued integrand. A component
// is converged when its error estimate is below max(abs_tol[i], rel_tol*|value[i]|);
// the panel with the largest normalised error is bisected first. Breakpoints
// seed the initial partition.
inline VectorIntegral integrate_vector(const std::function<std::vector<double>(double)>& f,
                                       std::vector<double> breakpoints, const std::vector<double>& abs_tol,
                                       double rel_tol, std::size_t max_panels = 2000) {
    using namespace detail;
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    if (breakpoints.size() < 2) throw domain_error("integration needs at least two breakpoints");
    const std::size_t dim = abs_tol.size();
    VectorIntegral out;

    auto panel = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        std::vector<double> k(dim, 0.0), g(dim, 0.0);
        auto add = [&](double x, double wk, double wg) {
            const std::vector<double> v = f(x);
            ++out.evaluations;
            for (std::size_t i = 0; i < dim; ++i) {
                k[i] += wk * v[i];
                g[i] += wg * v[i];
            }
        };
        add(c, gk15_wk[7], gk15_wg[3]);
        for (int j = 0; j < 7; ++j) {
            const double wg = (j % 2 == 1) ? gk15_wg[j / 2] : 0.0;
            add(c - h * gk15_x[j], gk15_wk[j], wg);
            add(c + h * gk15_x[j], gk15_wk[j], wg);
        }
        Panel p{lo, hi, std::vector<double>(dim), std::vector<double>(dim)};
        for (std::size_t i = 0; i < dim; ++i) {
            p.value[i] = h * k[i];
            p.error[i] = std::abs(h * (k[i] - g[i]));
        }
        return p;
    };

    std::vector<Panel> panels;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) panels.push_back(panel(breakpoints[i], breakpoints[i + 1]));

    auto totals = [&] {
        out.value.assign(dim, 0.0);
        out.error.assign(dim, 0.0);
        for (const auto& p : panels)
            for (std::size_t i = 0; i < dim; ++i) {
                out.value[i] += p.value[i];
                out.error[i] += p.error[i];
            }
    };
    auto budget = [&](std::size_t i) { return std::max(abs_tol[i], rel_tol * std::abs(out.value[i])); };

    while (true) {
        totals();
        bool ok = true;
        for (std::size_t i = 0; i < dim; ++i) ok = ok && out.error[i] <= budget(i);
        if (ok) {
            out.converged = true;
            break;
        }
        if (panels.size() >= max_panels) break;
        // bisect the panel contributing most to the worst violated component
        std::size_t worst = 0;
        double wv = -1.0;
        for (std::size_t j = 0; j < panels.size(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim; ++i) s = std::max(s, panels[j].error[i] / budget(i));
            if (s > wv) {
                wv = s;
                worst = j;
            }
        }
        const Panel p = panels[worst];
        const double mid = 0.5 * (p.lo + p.hi);
        panels[worst] = panel(p.lo, mid);
        panels.insert(panels.begin() + static_cast<std::ptrdiff_t>(worst) + 1, panel(mid, p.hi));
    }
    return out;
}

}  // namespace slecosmo
