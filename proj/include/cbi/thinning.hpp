#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace cbi {

// Calculator for the iid-approximation bound of thinned Markov chain output:
// if the chain mixes at rate eps_t, N calibration samples taken every M steps
// are within (N - 1) * eps_M of an iid sample in total variation.

struct GeometricMixing
{
  double c = 1.0;   // eps_t = c * rho^t
  double rho = 0.5; // in (0, 1)
};

// eps[t - 1] is eps_t; strictly decreasing and positive.
struct TabulatedMixing
{
  std::vector<double> eps;
};

using MixingModel = std::variant<GeometricMixing, TabulatedMixing>;

/// Throws Error(InvalidArgument) if the model parameters are out of range.
void validate(const MixingModel& model);

/// eps_m. Throws Error(OutOfRange) for m beyond a tabulated sequence or m < 1.
double mixing_rate(const MixingModel& model, std::size_t m);

/// (N - 1) * eps_M. Requires N >= 1, M >= 1.
double tv_bound(const MixingModel& model, std::size_t n, std::size_t m);

/// Smallest M >= 1 with (N - 1) * eps_M <= budget. The geometric case starts
/// from the closed form and is then corrected by direct evaluation.
/// Throws Error(BudgetInfeasible) when no tabulated M reaches the budget.
std::size_t min_thinning(const MixingModel& model, std::size_t n, double budget);

} // namespace cbi
