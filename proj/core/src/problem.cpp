#include "blowup/problem.hpp"

#include <cmath>

#include "blowup/error.hpp"

namespace blowup {

double ProblemParams::beta() const {
  return (p - static_cast<double>(d)) / (2.0 * d * (p - 1.0));
}

double ProblemParams::f0() const { return std::pow(p - 1.0, -1.0 / (p - 1.0)); }

void ProblemParams::validate() const {
  if (!(p > 1.0)) fail(ErrorCode::config_invalid, "require p > 1");
  if (d != 2 && d != 3) fail(ErrorCode::config_invalid, "require d in {2,3}");
  if (!(eps_reg > 0.0)) fail(ErrorCode::config_invalid, "require eps_reg > 0");
}

double FourthOrderParams::beta4() const { return (p - 3.0) / (12.0 * (p - 1.0)); }

double FourthOrderParams::f0() const { return std::pow(p - 1.0, -1.0 / (p - 1.0)); }

void FourthOrderParams::validate() const {
  if (!(p > 1.0)) fail(ErrorCode::config_invalid, "require p > 1");
  if (!(eps_reg > 0.0)) fail(ErrorCode::config_invalid, "require eps_reg > 0");
}

}  // namespace blowup
