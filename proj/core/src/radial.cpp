#include "blowup/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "blowup/error.hpp"

namespace blowup {
namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double max_abs(const std::vector<double>& u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

// Largest positive centered difference; the ghost closures force u_r = 0 at
// the two ends, so only interior nodes are inspected.
double max_positive_ur(const std::vector<double>& u, double h) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    worst = std::max(worst, (u[i + 1] - u[i - 1]) / (2.0 * h));
  }
  return worst;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

}  // namespace

void RadialGrid::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) {
    fail(ErrorCode::config_invalid,
         "grid length must be positive and finite, got " + format_number(L));
  }
  if (n < 4) {
    fail(ErrorCode::config_invalid,
         "grid needs at least 4 cells, got " + std::to_string(n));
  }
}

OdeSystem build_radial_system(const ProblemParams& params,
                              const RadialGrid& grid, bool with_source) {
  params.validate();
  grid.validate();
  const int n = grid.n;
  const double h = grid.h();
  const double p = params.p;
  const int d = params.d;
  const double sign = (d % 2 == 0) ? -1.0 : 1.0;

  OdeSystem sys;
  sys.dim = static_cast<std::size_t>(n) + 1;
  sys.band_lower = 1;
  sys.band_upper = 1;
  sys.rhs = [=](double, const double* u, double* du) {
    const double h2 = h * h;
    const double urr0 = 2.0 * (u[1] - u[0]) / h2;
    du[0] = sign * ipow(urr0, d - 1) * urr0;
    for (int i = 1; i < n; ++i) {
      const double ur = (u[i + 1] - u[i - 1]) / (2.0 * h);
      const double urr = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
      du[i] = sign * ipow(ur / (i * h), d - 1) * urr;
    }
    // right end: the ghost closure makes u_r vanish, killing the factor
    // for d >= 2; d = 1 has no degenerate factor at all
    du[n] = (d == 1) ? 2.0 * (u[n - 1] - u[n]) / h2 : 0.0;
    if (with_source) {
      if (p == 2.0) {
        for (int i = 0; i <= n; ++i) du[i] += std::abs(u[i]) * u[i];
      } else if (p == 3.0) {
        for (int i = 0; i <= n; ++i) du[i] += u[i] * u[i] * u[i];
      } else {
        for (int i = 0; i <= n; ++i) {
          du[i] += std::pow(std::abs(u[i]), p - 1.0) * u[i];
        }
      }
    }
  };
  return sys;
}

EvolveResult evolve(const ProblemParams& params, const RadialGrid& grid,
                    const std::vector<double>& u0,
                    const EvolveOptions& options) {
  params.validate();
  grid.validate();
  if (u0.size() != static_cast<std::size_t>(grid.n) + 1) {
    fail(ErrorCode::config_invalid,
         "initial data has " + std::to_string(u0.size()) + " values, grid has " +
             std::to_string(grid.n + 1) + " nodes");
  }
  for (double v : u0) {
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorCode::config_invalid,
           "initial data must be finite and nonnegative");
    }
  }
  const double h = grid.h();
  const double u0_max = max_abs(u0);
  if (max_positive_ur(u0, h) > 1e-6 * u0_max) {
    fail(ErrorCode::config_invalid,
         "initial data must be radially nonincreasing");
  }
  if (!(options.t_max > 0.0)) {
    fail(ErrorCode::config_invalid, "t_max must be positive");
  }
  if (!(options.u_max_threshold > u0[0])) {
    fail(ErrorCode::config_invalid,
         "stop threshold must exceed the initial center value");
  }

  const OdeSystem sys = build_radial_system(params, grid, options.with_source);

  EvolveResult res;
  double violation = max_positive_ur(u0, h);
  const auto push_snapshot = [&](double t, const std::vector<double>& y) {
    res.snapshots.push_back(EvolutionState{grid, y, t, violation});
  };
  res.center.push_back(CenterSample{0.0, u0[0]});
  push_snapshot(0.0, u0);

  std::vector<double> levels;
  for (double level = 10.0 * std::max(u0[0], 1e-300);
       level < options.u_max_threshold; level *= 10.0) {
    levels.push_back(level);
  }
  std::size_t level_idx = 0;
  std::vector<double> times = options.snapshot_times;
  std::sort(times.begin(), times.end());
  std::size_t time_idx = 0;

  bool breached = false;
  double breach_t = 0.0;
  bool hit_threshold = false;

  const StepObserver observer = [&](double t, std::vector<double>& y) {
    res.center.push_back(CenterSample{t, y[0]});
    violation = std::max(violation, max_positive_ur(y, h));
    if (violation > options.monotone_tol * max_abs(y)) {
      breached = true;
      breach_t = t;
      return false;
    }
    while (time_idx < times.size() && t >= times[time_idx]) {
      if (res.snapshots.back().t != t) push_snapshot(t, y);
      ++time_idx;
    }
    if (level_idx < levels.size() && y[0] >= levels[level_idx]) {
      if (res.snapshots.back().t != t) push_snapshot(t, y);
      while (level_idx < levels.size() && y[0] >= levels[level_idx]) {
        ++level_idx;
      }
    }
    if (y[0] >= options.u_max_threshold) {
      hit_threshold = true;
      return false;
    }
    return true;
  };

  IntegrateOptions iopt;
  iopt.method = Method::stiff;
  iopt.rtol = options.rtol;
  iopt.atol = options.atol;
  iopt.store_trajectory = false;
  iopt.overflow_guard = std::max(1e12, 10.0 * options.u_max_threshold);

  // The stepper's minimum step is a fixed fraction of the call span, and a
  // blow-up run needs steps that shrink without bound as it approaches the
  // singular time. Integrate in chunks that contract whenever the stepper
  // bottoms out, and give up only once the chunk reaches time resolution.
  double t_cur = 0.0;
  std::vector<double> y = u0;
  double chunk = options.t_max;
  Termination term = Termination::span_end;
  const double chunk_floor = 1e3 * std::numeric_limits<double>::epsilon();
  int calls = 0;
  while (true) {
    if (++calls > 10000) {
      fail(ErrorCode::no_convergence,
           "integration made no progress after 10000 restarts near t = " +
               format_number(t_cur));
    }
    const double t_end = std::min(options.t_max, t_cur + chunk);
    const Trajectory traj = integrate_observed(sys, y, t_cur, t_end, iopt, observer);
    y = traj.y_end();
    t_cur = traj.t_end();
    term = traj.termination;
    if (term == Termination::observer_stop || term == Termination::overflow) break;
    if (term == Termination::step_underflow) {
      chunk = (t_end - t_cur) * 1e-3;
      if (chunk < chunk_floor * std::max(t_cur, 1e-30)) break;
      continue;
    }
    if (t_end >= options.t_max) break;
    chunk *= 10.0;
  }

  if (breached) {
    fail(ErrorCode::monotonicity_breach,
         "largest positive u_r reached " + format_number(violation) + " at t = " +
             format_number(breach_t) + "; the run left the class u_r <= 0");
  }
  if (term == Termination::step_underflow) {
    fail(ErrorCode::step_underflow,
         "time step collapsed at t = " + format_number(t_cur) + " with u(0) = " +
             format_number(y[0]) + "; the state is near-singular");
  }
  res.termination = hit_threshold ? Termination::observer_stop : term;
  res.monotone_violation = violation;
  if (res.snapshots.back().t != t_cur) {
    push_snapshot(t_cur, y);
  }
  return res;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::blowup:
      return "blowup";
    case Outcome::decay:
      return "decay";
    default:
      return "undecided";
  }
}

BlowupFit fit_blowup(const std::vector<CenterSample>& center,
                     const ProblemParams& params, const FitWindow& window) {
  params.validate();
  if (center.size() < 2) {
    fail(ErrorCode::insufficient_data,
         "center series has " + std::to_string(center.size()) + " samples");
  }
  double peak = 0.0;
  for (const CenterSample& s : center) peak = std::max(peak, s.u0);
  const double u_lo =
      window.u_lo > 0.0 ? window.u_lo : 10.0 * center.front().u0;
  const double u_hi = window.u_hi > 0.0 ? window.u_hi : 0.1 * peak;

  std::vector<double> ts, ms;
  const double expo = -(params.p - 1.0);
  for (const CenterSample& s : center) {
    if (s.u0 >= u_lo && s.u0 <= u_hi) {
      ts.push_back(s.t);
      ms.push_back(std::pow(s.u0, expo));
    }
  }

  BlowupFit fit;
  if (ts.size() >= 10) {
    const auto line = [](const std::vector<double>& x,
                         const std::vector<double>& y, double* slope,
                         double* icept, double* r2) {
      const double np = static_cast<double>(x.size());
      double sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
      }
      const double xbar = sx / np, ybar = sy / np;
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xbar, dy = y[i] - ybar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
      }
      *slope = sxy / sxx;
      *icept = ybar - *slope * xbar;
      double ss_res = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (*icept + *slope * x[i]);
        ss_res += r * r;
      }
      *r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 0.0;
    };

    // The similarity law is the small-m asymptote and early window samples
    // bend the line, so repeat the fit on the samples with m below 0.3 of
    // the current largest until the slope settles.
    std::vector<double> tf = ts, mf = ms;
    line(tf, mf, &fit.slope, &fit.intercept, &fit.r2);
    for (int pass = 0; pass < 12; ++pass) {
      const double m_cut = 0.3 * *std::max_element(mf.begin(), mf.end());
      std::vector<double> tn, mn;
      for (std::size_t i = 0; i < tf.size(); ++i) {
        if (mf[i] <= m_cut) {
          tn.push_back(tf[i]);
          mn.push_back(mf[i]);
        }
      }
      if (tn.size() < 10) break;
      double slope = 0.0, icept = 0.0, r2 = 0.0;
      line(tn, mn, &slope, &icept, &r2);
      const bool settled = std::abs(slope - fit.slope) <= 0.005 * std::abs(fit.slope);
      tf.swap(tn);
      mf.swap(mn);
      fit.slope = slope;
      fit.intercept = icept;
      fit.r2 = r2;
      if (settled) break;
    }
    if (fit.slope < 0.0 && fit.r2 > 0.999) {
      fit.T = -fit.intercept / fit.slope;
      fit.amplitude = std::pow(-fit.slope, -1.0 / (params.p - 1.0));
      fit.outcome = Outcome::blowup;
      return fit;
    }
  }

  // decay means the center value is monotone nonincreasing over the last
  // half of the run and has dropped measurably
  const std::size_t half = center.size() / 2;
  bool decreasing = center.back().u0 < 0.995 * center[half].u0;
  for (std::size_t i = half + 1; i < center.size() && decreasing; ++i) {
    if (center[i].u0 > center[i - 1].u0 * (1.0 + 1e-12)) decreasing = false;
  }
  if (decreasing) {
    fit.outcome = Outcome::decay;
    return fit;
  }
  if (ts.size() < 10) {
    fail(ErrorCode::insufficient_data,
         "only " + std::to_string(ts.size()) + " samples inside the fit window [" +
             format_number(u_lo) + ", " + format_number(u_hi) +
             "]; need 10 and the series is not decaying");
  }
  fit.outcome = Outcome::undecided;
  return fit;
}

RescaledState rescale(const EvolutionState& state, const BlowupFit& fit,
                      const ProblemParams& params) {
  params.validate();
  state.grid.validate();
  if (state.u.size() != static_cast<std::size_t>(state.grid.n) + 1) {
    fail(ErrorCode::config_invalid, "state does not match its grid");
  }
  if (fit.outcome != Outcome::blowup) {
    fail(ErrorCode::config_invalid,
         std::string("rescaling needs a blow-up fit, outcome is ") +
             outcome_name(fit.outcome));
  }
  if (!(state.t < fit.T)) {
    fail(ErrorCode::post_T,
         "snapshot time t = " + format_number(state.t) +
             " is not before the fitted blow-up time T = " +
             format_number(fit.T));
  }
  const double gap = fit.T - state.t;
  const double z_scale = std::pow(gap, -params.beta());
  const double w_scale = std::pow(gap, 1.0 / (params.p - 1.0));
  RescaledState out;
  out.z.resize(state.u.size());
  out.w.resize(state.u.size());
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    out.z[i] = state.grid.node(static_cast<int>(i)) * z_scale;
    out.w[i] = w_scale * state.u[i];
  }
  out.tau = -std::log(gap);
  return out;
}

double mass(const EvolutionState& state, int d) {
  if (d < 1) {
    fail(ErrorCode::config_invalid,
         "dimension must be at least 1, got " + std::to_string(d));
  }
  state.grid.validate();
  if (state.u.size() != static_cast<std::size_t>(state.grid.n) + 1) {
    fail(ErrorCode::config_invalid, "state does not match its grid");
  }
  const double sigma =
      2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  const double h = state.grid.h();
  double total = 0.0;
  // the r^{d-1} weight vanishes at the origin for d >= 2 and is 1 for d = 1
  double prev = state.u[0] * sigma * ipow(0.0, d - 1);
  for (std::size_t i = 1; i < state.u.size(); ++i) {
    const double cur =
        state.u[i] * sigma * ipow(state.grid.node(static_cast<int>(i)), d - 1);
    total += 0.5 * (prev + cur) * h;
    prev = cur;
  }
  return total;
}

}  // namespace blowup
