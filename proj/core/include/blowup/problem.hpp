#pragma once

namespace blowup {

// Parameters of u_t = (-1)^{d-1} |D^2 u| + |u|^{p-1} u in dimension d with
// source exponent p > 1. Derived constants:
//   beta: similarity exponent of the space variable z = r / (T-t)^beta
//   f0:   spatially constant equilibrium profile amplitude
struct ProblemParams {
  double p = 2.0;
  int d = 2;
  double eps_reg = 1e-5;  // |f'| ~ sqrt(eps^2 + f'^2) regularization

  double beta() const;
  double f0() const;
  double fujita_exponent() const { return static_cast<double>(d) + 2.0; }

  // throws ErrorCode::config_invalid when out of the supported range
  void validate() const;
};

// Fourth-order analogue u_t = -(1/r^2)(u_rrr)^2 u_rrrr + |u|^{p-1} u.
struct FourthOrderParams {
  double p = 3.0;
  double eps_reg = 1e-8;

  double beta4() const;  // (p-3) / (12(p-1))
  double f0() const;     // (p-1)^{-1/(p-1)}

  void validate() const;
};

}  // namespace blowup
