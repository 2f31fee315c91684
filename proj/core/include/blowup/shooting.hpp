#pragma once

#include <optional>
#include <vector>

#include "blowup/ode.hpp"
#include "blowup/problem.hpp"

namespace blowup {

// Second member of the similarity profile ODE solved for f'':
//   f'' = (beta f' z + f/(p-1) - |f|^{p-1} f) z^{d-1} / (eps^2 + f'^2)^{(d-1)/2}
// signed_form drops the modulus on f' (only distinguishable for d = 2).
double similarity_rhs(const ProblemParams& params, double z, double f,
                      double fp, bool signed_form = false);

// Quadratic origin jet f(z) ~ f(0) + c z^2 / 2 with c = sgn(s)|s|^{1/d},
// s = f(0)/(p-1) - |f(0)|^{p-1} f(0).
struct OriginJet {
  double z = 0.0;
  double f = 0.0;
  double fp = 0.0;
  double c = 0.0;
};
OriginJet origin_expansion(const ProblemParams& params, double f_origin,
                           double delta);

enum class TrajectoryClass { divergent, oscillatory, decayed, unclassified };

const char* trajectory_class_name(TrajectoryClass c);

struct ClassifyOptions {
  double z_max = 50.0;
  double start_delta = 1e-6;
  double margin = 0.2;      // oscillation window f in (0, f0 (1+margin))
  double decay_tol = 1e-5;  // |f|,|f'| below this at span end -> decayed
  double rtol = 1e-10;
  double atol = 1e-12;
};

struct Classification {
  TrajectoryClass cls = TrajectoryClass::unclassified;
  double z_event = 0.0;  // where the deciding event fired
  Trajectory trajectory;
};

Classification classify(const ProblemParams& params, double f_origin,
                        const ClassifyOptions& options = {});

enum class ProfileKind { regional, single_point, global, q_profile, sign_changing };

struct RadialProfile {
  ProblemParams params;
  ProfileKind kind = ProfileKind::regional;
  double f_origin = 0.0;  // critical shooting value (plateau value for Q)
  std::vector<double> z, f, fp;
  std::optional<double> support;             // L_S when compactly supported
  std::optional<double> far_field_constant;  // C0 of the tail C0 z^{-2d/(p-d)}
  std::optional<double> q_interface;         // a0 for Q-profiles
  std::optional<double> tail_exponent_fit;   // free log-log tail fit
  int sign_changes = 0;
};

struct ShootOptions {
  double bisect_tol = 1e-10;  // absolute, on the shooting parameter
  double z_max = 50.0;
  double start_delta = 1e-6;
  double sample_dz = 5e-3;
  double support_tol = 1e-6;  // f below this defines the interface
  double margin = 0.2;
  double decay_tol = 1e-5;
  double rtol = 1e-10;
  double atol = 1e-12;
  // tail fit window as fractions of the truncation point
  double tail_window_lo = 0.45;
  double tail_window_hi = 0.92;
};

// Bisection on f(0) between a non-divergent lo and a divergent hi.
RadialProfile shoot_profile(const ProblemParams& params, double lo, double hi,
                            const ShootOptions& options = {});

// Q-profile: flat plateau f0 on [0, a0], interface jet
// f = f0 - (beta a0^2 / 2)(z - a0)^2 shot on the interface location a0.
RadialProfile shoot_q_profile(const ProblemParams& params, double a0_lo,
                              double a0_hi, const ShootOptions& options = {});

// d = 3 families indexed by the number of sign changes k >= 0.
RadialProfile shoot_sign_changing(const ProblemParams& params, int k,
                                  double lo, double hi,
                                  const ShootOptions& options = {});

// Interface envelope f ~ A (L_S - z)^{(d+1)/(d-1)} for regional profiles.
struct InterfaceLaw {
  double exponent = 0.0;
  double coefficient = 0.0;
};
InterfaceLaw interface_asymptotics(int d);

// Final-time envelope u(r, T^-) = C0 r^{-2/(p-1)} for single-point blow-up.
std::vector<double> final_time_envelope(const RadialProfile& profile,
                                        const std::vector<double>& r);

// Least squares of log|y| against log x over the window [x_lo, x_hi].
struct PowerFit {
  double coefficient = 0.0;
  double exponent = 0.0;
  std::size_t points = 0;
};
PowerFit fit_power_law(const std::vector<double>& x,
                       const std::vector<double>& y, double x_lo, double x_hi);

// Same fit against (L_S - z) for the interface region of a compact profile.
PowerFit fit_interface_law(const RadialProfile& profile, double f_lo,
                           double f_hi);

}  // namespace blowup
