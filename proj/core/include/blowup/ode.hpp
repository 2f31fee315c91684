#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace blowup {

// First-order system y' = f(t, y). The optional band limits say that
// f_i depends only on y_j with i - lower <= j <= i + upper; the stiff
// stepper exploits this when forming the finite-difference Jacobian.
struct OdeSystem {
  std::size_t dim = 0;
  std::function<void(double t, const double* y, double* dydt)> rhs;
  std::optional<int> band_lower;
  std::optional<int> band_upper;
};

enum class EventDirection { rising, falling, any };

struct EventSpec {
  std::function<double(double t, const double* y)> test;
  EventDirection direction = EventDirection::any;
  bool terminal = true;
};

enum class Termination { span_end, event, step_underflow, overflow, observer_stop };

enum class Method { rk45, stiff };

struct IntegrateOptions {
  Method method = Method::rk45;
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;     // 0 -> automatic
  double max_step = 0.0;         // 0 -> |span|
  double overflow_guard = 1e12;  // any |y_i| above this terminates
  std::vector<EventSpec> events;
  bool store_trajectory = true;
  std::size_t max_steps = 50'000'000;
};

struct EventHit {
  std::size_t index = 0;  // position in IntegrateOptions::events
  double t = 0.0;
  std::vector<double> y;
};

// Accepted-step nodes plus derivatives; sample() interpolates between nodes
// with the same cubic Hermite polynomial the event locator bisects on.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> derivs;
  std::vector<EventHit> events;
  Termination termination = Termination::span_end;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;

  double t_end() const { return times.back(); }
  const std::vector<double>& y_end() const { return states.back(); }
  std::vector<double> sample(double t) const;
};

Trajectory integrate(const OdeSystem& system, const std::vector<double>& y0,
                     double t0, double t1, const IntegrateOptions& options = {});

// Accepted-step observer; may mutate the state in place (the planar solver
// uses this for its averaging filter). Return false to stop the run.
using StepObserver = std::function<bool(double t, std::vector<double>& y)>;

Trajectory integrate_observed(const OdeSystem& system,
                              const std::vector<double>& y0, double t0,
                              double t1, const IntegrateOptions& options,
                              const StepObserver& observer);

}  // namespace blowup
