#include <doctest.h>

#include <cmath>
#include <vector>

#include "blowup/error.hpp"
#include "blowup/ode.hpp"

using namespace blowup;

namespace {

OdeSystem exp_decay() {
  OdeSystem s;
  s.dim = 1;
  s.rhs = [](double, const double* y, double* d) { d[0] = -y[0]; };
  return s;
}

OdeSystem harmonic() {
  OdeSystem s;
  s.dim = 2;
  s.rhs = [](double, const double* y, double* d) {
    d[0] = y[1];
    d[1] = -y[0];
  };
  return s;
}

}  // namespace

TEST_CASE("exponential decay reaches exp(-2)") {
  Trajectory t = integrate(exp_decay(), {1.0}, 0.0, 2.0, {});
  CHECK(t.termination == Termination::span_end);
  CHECK(t.y_end()[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
}

TEST_CASE("dense output interpolates the decay curve") {
  Trajectory t = integrate(exp_decay(), {1.0}, 0.0, 2.0, {});
  for (double tau : {0.1, 0.5, 1.0, 1.7}) {
    CHECK(t.sample(tau)[0] == doctest::Approx(std::exp(-tau)).epsilon(1e-8));
  }
}

TEST_CASE("harmonic oscillator closes after one period") {
  const double two_pi = 2.0 * std::acos(-1.0);
  IntegrateOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  Trajectory t = integrate(harmonic(), {1.0, 0.0}, 0.0, two_pi, opt);
  CHECK(t.y_end()[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(t.y_end()[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("linear rising event located at t = 1") {
  OdeSystem s;
  s.dim = 1;
  s.rhs = [](double, const double*, double* d) { d[0] = 1.0; };
  IntegrateOptions opt;
  opt.events.push_back({[](double, const double* y) { return y[0]; },
                        EventDirection::rising, true});
  Trajectory t = integrate(s, {-1.0}, 0.0, 3.0, opt);
  REQUIRE(t.termination == Termination::event);
  REQUIRE(t.events.size() == 1);
  CHECK(t.events[0].t == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(t.events[0].y[0]) < 1e-9);
}

TEST_CASE("falling direction ignores a rising crossing") {
  OdeSystem s;
  s.dim = 1;
  s.rhs = [](double, const double*, double* d) { d[0] = 1.0; };
  IntegrateOptions opt;
  opt.events.push_back({[](double, const double* y) { return y[0]; },
                        EventDirection::falling, true});
  Trajectory t = integrate(s, {-1.0}, 0.0, 3.0, opt);
  CHECK(t.termination == Termination::span_end);
  CHECK(t.events.empty());
}

TEST_CASE("nonlinear crossing of t*t - 1 is found to event tolerance") {
  OdeSystem s;
  s.dim = 1;
  s.rhs = [](double t, const double*, double* d) { d[0] = 2.0 * t; };
  IntegrateOptions opt;
  opt.events.push_back({[](double, const double* y) { return y[0]; },
                        EventDirection::rising, true});
  Trajectory t = integrate(s, {-1.0}, 0.0, 2.0, opt);
  REQUIRE(t.termination == Termination::event);
  CHECK(t.events[0].t == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("quadratic blow-up trips the overflow guard") {
  OdeSystem s;
  s.dim = 1;
  s.rhs = [](double, const double* y, double* d) { d[0] = y[0] * y[0]; };
  IntegrateOptions opt;
  opt.overflow_guard = 1e10;
  Trajectory t = integrate(s, {1.0}, 0.0, 2.0, opt);
  CHECK(t.termination == Termination::overflow);
  CHECK(t.t_end() < 1.01);
  CHECK(t.t_end() > 0.9);
}

TEST_CASE("observer can stop the integration") {
  IntegrateOptions opt;
  int calls = 0;
  StepObserver obs = [&calls](double, std::vector<double>&) {
    return ++calls < 3;
  };
  Trajectory t = integrate_observed(exp_decay(), {1.0}, 0.0, 10.0, opt, obs);
  CHECK(t.termination == Termination::observer_stop);
  CHECK(calls == 3);
}

TEST_CASE("observer state mutation is honored") {
  OdeSystem s;
  s.dim = 1;
  s.rhs = [](double, const double*, double* d) { d[0] = 0.0; };
  IntegrateOptions opt;
  opt.max_step = 0.5;
  int bumps = 0;
  StepObserver obs = [&bumps](double, std::vector<double>& y) {
    y[0] += 1.0;
    ++bumps;
    return true;
  };
  Trajectory t = integrate_observed(s, {1.0}, 0.0, 5.0, opt, obs);
  CHECK(t.y_end()[0] == doctest::Approx(1.0 + bumps));
  CHECK(bumps > 5);
}

TEST_CASE("stiff method integrates a lambda = -1e6 relaxation cheaply") {
  OdeSystem s;
  s.dim = 1;
  s.rhs = [](double t, const double* y, double* d) {
    d[0] = -1e6 * (y[0] - std::cos(t)) - std::sin(t);
  };
  IntegrateOptions opt;
  opt.method = Method::stiff;
  opt.rtol = 1e-8;
  opt.atol = 1e-10;
  Trajectory t = integrate(s, {1.0}, 0.0, 1.0, opt);
  CHECK(t.y_end()[0] == doctest::Approx(std::cos(1.0)).epsilon(1e-5));
  CHECK(t.steps_accepted < 5000);
}

TEST_CASE("banded Jacobian heat chain matches the discrete mode decay") {
  const int n = 50;
  const double pi = std::acos(-1.0);
  const double h = 1.0 / (n + 1);
  OdeSystem s;
  s.dim = n;
  s.band_lower = 1;
  s.band_upper = 1;
  s.rhs = [n, h](double, const double* y, double* d) {
    for (int i = 0; i < n; ++i) {
      const double left = i > 0 ? y[i - 1] : 0.0;
      const double right = i < n - 1 ? y[i + 1] : 0.0;
      d[i] = (left - 2.0 * y[i] + right) / (h * h);
    }
  };
  std::vector<double> y0(n);
  for (int i = 0; i < n; ++i) y0[i] = std::sin(pi * (i + 1) * h);
  const double lambda =
      4.0 / (h * h) * std::sin(pi * h / 2.0) * std::sin(pi * h / 2.0);

  IntegrateOptions opt;
  opt.method = Method::stiff;
  opt.rtol = 1e-8;
  opt.atol = 1e-12;
  opt.store_trajectory = false;
  Trajectory t = integrate(s, y0, 0.0, 0.1, opt);
  const double decay = std::exp(-lambda * 0.1);
  for (int i = 0; i < n; i += 7) {
    CHECK(t.y_end()[i] ==
          doctest::Approx(decay * y0[i]).epsilon(2e-5).scale(1.0));
  }
}

TEST_CASE("repeated runs are bitwise identical") {
  IntegrateOptions opt;
  opt.events.push_back({[](double, const double* y) { return y[0]; },
                        EventDirection::falling, false});
  Trajectory a = integrate(harmonic(), {1.0, 0.0}, 0.0, 10.0, opt);
  Trajectory b = integrate(harmonic(), {1.0, 0.0}, 0.0, 10.0, opt);
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(a.times[i] == b.times[i]);
    CHECK(a.states[i] == b.states[i]);
  }
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i)
    CHECK(a.events[i].t == b.events[i].t);
}

TEST_CASE("configuration errors are reported as such") {
  CHECK_THROWS_AS(integrate(exp_decay(), {1.0, 2.0}, 0.0, 1.0, {}), Error);
  CHECK_THROWS_AS(integrate(exp_decay(), {1.0}, 1.0, 1.0, {}), Error);
  try {
    integrate(exp_decay(), {1.0}, 2.0, 1.0, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config_invalid);
    CHECK(severity_of(e.code()) == ErrorSeverity::config);
  }
}
