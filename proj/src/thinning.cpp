#include "cbi/thinning.hpp"

#include "cbi/error.hpp"

#include <cmath>
#include <string>

namespace cbi {

void validate(const MixingModel& model)
{
  if (const auto* g = std::get_if<GeometricMixing>(&model)) {
    if (!(g->c > 0.0) || !std::isfinite(g->c))
      throw Error(ErrorCode::InvalidArgument, "geometric mixing constant must be positive");
    if (!(g->rho > 0.0 && g->rho < 1.0))
      throw Error(ErrorCode::InvalidArgument, "geometric mixing rate must lie in (0, 1)");
    return;
  }
  const auto& eps = std::get<TabulatedMixing>(model).eps;
  if (eps.empty())
    throw Error(ErrorCode::InvalidArgument, "tabulated mixing sequence is empty");
  for (std::size_t t = 0; t < eps.size(); ++t) {
    if (!(eps[t] > 0.0))
      throw Error(ErrorCode::InvalidArgument, "mixing rates must be positive");
    if (t > 0 && !(eps[t] < eps[t - 1]))
      throw Error(ErrorCode::InvalidArgument, "mixing rates must be strictly decreasing");
  }
}

double mixing_rate(const MixingModel& model, std::size_t m)
{
  if (m < 1)
    throw Error(ErrorCode::OutOfRange, "thinning gap must be at least 1");
  if (const auto* g = std::get_if<GeometricMixing>(&model))
    return g->c * std::pow(g->rho, static_cast<double>(m));
  const auto& eps = std::get<TabulatedMixing>(model).eps;
  if (m > eps.size())
    throw Error(ErrorCode::OutOfRange,
                "thinning gap " + std::to_string(m) + " beyond tabulated range " + std::to_string(eps.size()));
  return eps[m - 1];
}

double tv_bound(const MixingModel& model, std::size_t n, std::size_t m)
{
  validate(model);
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "calibration size must be at least 1");
  const double rate = mixing_rate(model, m);
  return static_cast<double>(n - 1) * rate;
}

std::size_t min_thinning(const MixingModel& model, std::size_t n, double budget)
{
  validate(model);
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "calibration size must be at least 1");
  if (!(budget > 0.0))
    throw Error(ErrorCode::InvalidArgument, "budget must be positive");
  if (n == 1)
    return 1;

  if (const auto* g = std::get_if<GeometricMixing>(&model)) {
    const double ratio = budget / (static_cast<double>(n - 1) * g->c);
    double guess = std::ceil(std::log(ratio) / std::log(g->rho));
    if (!(guess >= 1.0))
      guess = 1.0;
    guess = std::min(guess, 0x1.0p52);
    auto m = static_cast<std::size_t>(guess);
    while (m > 1 && tv_bound(model, n, m - 1) <= budget)
      --m;
    while (tv_bound(model, n, m) > budget)
      ++m;
    return m;
  }

  const auto& eps = std::get<TabulatedMixing>(model).eps;
  for (std::size_t m = 1; m <= eps.size(); ++m)
    if (tv_bound(model, n, m) <= budget)
      return m;
  throw Error(ErrorCode::BudgetInfeasible, "no tabulated thinning gap achieves the requested budget");
}

} // namespace cbi
