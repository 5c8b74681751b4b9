#include "lexiphylo/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lexiphylo/error.hpp"

namespace lexiphylo {

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

double diameter(const std::vector<Vertex>& simplex) {
    double best = 0.0;
    for (std::size_t i = 0; i < simplex.size(); ++i)
        for (std::size_t j = i + 1; j < simplex.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < simplex[i].x.size(); ++k) {
                const double d = simplex[i].x[k] - simplex[j].x[k];
                s += d * d;
            }
            best = std::max(best, std::sqrt(s));
        }
    return best;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> init,
                             const NelderMeadOptions& options) {
    const std::size_t n = init.size();
    if (n == 0) fail(ErrorCode::InvalidArgument, "nelder_mead: empty start point");
    for (double v : init)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "nelder_mead: non-finite start");

    NelderMeadResult result;
    bool out_of_budget = false;
    auto eval = [&](const std::vector<double>& x) {
        if (result.evaluations >= options.max_evaluations) {
            out_of_budget = true;
            return std::numeric_limits<double>::infinity();
        }
        ++result.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    auto point = [n](const std::vector<double>& from, const std::vector<double>& to, double t) {
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = from[k] + t * (to[k] - from[k]);
        return out;
    };

    std::vector<Vertex> simplex;
    simplex.push_back({init, eval(init)});
    for (std::size_t k = 0; k < n; ++k) {
        auto x = init;
        x[k] = x[k] != 0.0 ? x[k] * (1.0 + options.initial_step) : options.zero_step;
        simplex.push_back({x, eval(x)});
    }

    while (!out_of_budget) {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        const double spread = simplex.back().f - simplex.front().f;
        if (diameter(simplex) < options.xtol) {
            result.converged = true;
            break;
        }
        if (spread <= options.ftol) {
            result.converged = result.stalled = true;
            break;
        }
        if (result.evaluations >= options.max_evaluations) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i].x[k] / static_cast<double>(n);

        Vertex& worst = simplex[n];
        const double f_best = simplex[0].f, f_second = simplex[n - 1].f;

        const auto xr = point(centroid, worst.x, -options.reflection);
        const double fr = eval(xr);
        if (out_of_budget) break;

        if (fr < f_best) {
            const auto xe = point(centroid, xr, options.expansion);
            const double fe = eval(xe);
            if (fe < fr)
                worst = {xe, fe};
            else
                worst = {xr, fr};
            continue;
        }
        if (fr < f_second) {
            worst = {xr, fr};
            continue;
        }
        if (fr < worst.f) {
            const auto xc = point(centroid, xr, options.contraction);
            const double fc = eval(xc);
            if (fc <= fr) {
                worst = {xc, fc};
                continue;
            }
        } else {
            const auto xc = point(centroid, worst.x, options.contraction);
            const double fc = eval(xc);
            if (fc < worst.f) {
                worst = {xc, fc};
                continue;
            }
        }
        if (out_of_budget) break;
        for (std::size_t i = 1; i <= n; ++i) {
            simplex[i].x = point(simplex[0].x, simplex[i].x, options.shrink);
            simplex[i].f = eval(simplex[i].x);
        }
    }

    const auto best = std::min_element(simplex.begin(), simplex.end(),
                                       [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    result.x = best->x;
    result.value = best->f;
    return result;
}

}  // namespace lexiphylo
