#pragma once
// Derivative-free simplex minimizer (Nelder & Mead, with the Lagarias et al.
// acceptance rules).

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lexiphylo {

struct NelderMeadOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double initial_step = 0.10;   // relative perturbation per coordinate
    double zero_step = 0.00025;   // absolute perturbation for zero coordinates
    double xtol = 1e-3;           // stop when the simplex diameter falls below
    double ftol = 0.0;            // stop when all vertex values are within ftol (stall)
    std::size_t max_evaluations = 200;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;  // diameter or stall criterion met within budget
    bool stalled = false;
};

using Objective = std::function<double(std::span<const double>)>;

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> init,
                             const NelderMeadOptions& options = {});

}  // namespace lexiphylo
