#pragma once

#include <vector>

#include "blowup/ode.hpp"
#include "blowup/problem.hpp"

namespace blowup {

// Uniform grid on [0, L] with n cells; nodes r_i = i L / n, i = 0..n.
struct RadialGrid {
  double L = 8.0;
  int n = 1000;

  double h() const { return L / n; }
  double node(int i) const { return i * h(); }
  void validate() const;
};

// One spatial snapshot. monotone_violation is the largest positive centered
// difference of u recorded up to time t; the flow is well posed in the class
// u_r <= 0, so on valid runs this stays at rounding level.
struct EvolutionState {
  RadialGrid grid;
  std::vector<double> u;
  double t = 0.0;
  double monotone_violation = 0.0;
};

// Semi-discrete right side of
//   u_t = (-1)^{d-1} (u_r / r)^{d-1} u_rr + |u|^{p-1} u
// with second-order central differences and ghost-node Neumann closures at
// both ends. At r = 0 the degenerate factor takes its limit
// (u_r/r)^{d-1} -> (u_rr)^{d-1}, so the flow term becomes (-1)^{d-1}(u_rr)^d.
// with_source = false drops the reaction term (pure Monge-Ampere flow).
// The factor is evaluated as a power of the single ratio u_r/r, which stays
// bounded near the origin where both pieces vanish.
OdeSystem build_radial_system(const ProblemParams& params,
                              const RadialGrid& grid, bool with_source = true);

struct CenterSample {
  double t = 0.0;
  double u0 = 0.0;
};

struct EvolveOptions {
  double u_max_threshold = 1e6;  // stop once u(0,t) reaches this
  double t_max = 10.0;
  bool with_source = true;
  double rtol = 1e-8;
  double atol = 1e-10;
  // runs whose largest positive u_r exceeds monotone_tol * max|u| abort
  double monotone_tol = 1e-6;
  // extra snapshots at the first accepted step past each of these times, on
  // top of the initial state, the u(0,t) = 10^k u(0,0) level crossings, and
  // the final state
  std::vector<double> snapshot_times;
};

struct EvolveResult {
  std::vector<EvolutionState> snapshots;
  std::vector<CenterSample> center;
  double monotone_violation = 0.0;
  // observer_stop: threshold reached; span_end: ran to t_max
  Termination termination = Termination::span_end;
};

// Integrates the semi-discrete system with the stiff stepper from t = 0.
// Initial data must be nonnegative and radially nonincreasing.
EvolveResult evolve(const ProblemParams& params, const RadialGrid& grid,
                    const std::vector<double>& u0,
                    const EvolveOptions& options = {});

enum class Outcome { blowup, decay, undecided };

const char* outcome_name(Outcome o);

// Least-squares line through m(t) = u(0,t)^{-(p-1)}. The line reaches zero
// at the blow-up time, so T = -intercept/slope and
// u(0,t) ~ amplitude (T - t)^{-1/(p-1)} with amplitude = (-slope)^{-1/(p-1)}.
// The similarity law is the small-m asymptote, so after a first fit over the
// window the pre-asymptotic head is discarded: the fit repeats on samples
// with m below 0.3 of the current largest until the slope settles to 0.5%.
struct BlowupFit {
  double T = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double amplitude = 0.0;
  double r2 = 0.0;
  Outcome outcome = Outcome::undecided;
};

// Window in u(0,t) selecting the fitted samples; zeros pick the defaults
// 10 u(0,0) and a tenth of the largest center value seen.
struct FitWindow {
  double u_lo = 0.0;
  double u_hi = 0.0;
};

BlowupFit fit_blowup(const std::vector<CenterSample>& center,
                     const ProblemParams& params, const FitWindow& window = {});

// Similarity variables z = r (T-t)^{-beta}, w = (T-t)^{1/(p-1)} u, and the
// slow time tau = -log(T-t).
struct RescaledState {
  std::vector<double> z;
  std::vector<double> w;
  double tau = 0.0;
};

RescaledState rescale(const EvolutionState& state, const BlowupFit& fit,
                      const ProblemParams& params);

// Trapezoidal integral of u sigma_d r^{d-1} over the grid, with sigma_d the
// area of the unit sphere in d dimensions (2 pi for d = 2).
double mass(const EvolutionState& state, int d);

}  // namespace blowup
