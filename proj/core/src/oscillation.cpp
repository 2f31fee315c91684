#include "blowup/oscillation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/ode.hpp"

namespace blowup {

namespace {

// Guard width for the algebraic solves: |P1| and (P3)^2 denominators are
// replaced by their sqrt(eps^2 + .^2) counterparts so the vector field stays
// finite on the singular loci the orbit crosses.
constexpr double kGuardEps = 1e-8;

std::string format_state(double s, const std::vector<double>& y);

// Half-width of the locus band |P1| < gate (|P3| < gate for fourth order)
// that is crossed by swapping the independent variable instead of forcing
// the s-stepper through the guarded layer, where its error control stalls.
// The fourth-order cusp is cube-root in s, so the gate must sit far enough
// out that the edge is reachable with steps above the stepper minimum.
double band_gate(const OscillatorySetup& setup) {
  return setup.order == OscillatorOrder::second ? 1e-4 : 5e-3;
}

// Coefficient row of P_k over (phi, phi', ..., phi'''').
std::array<double, 5> pk_coefficients(int k, double gamma) {
  std::array<double, 5> c{gamma, 1.0, 0.0, 0.0, 0.0};
  for (int j = 1; j < k; ++j) {
    std::array<double, 5> next{};
    for (int i = 0; i < 5; ++i) {
      next[i] = (gamma - j) * c[i] + (i > 0 ? c[i - 1] : 0.0);
    }
    c = next;
  }
  return c;
}

OdeSystem second_order_system(const OscillatorySetup& setup) {
  const double g = setup.gamma;
  const double beta = setup.params.beta();
  const double pm1 = setup.params.p - 1.0;
  OdeSystem sys;
  sys.dim = 2;
  sys.rhs = [g, beta, pm1](double, const double* y, double* dy) {
    const double p1 = y[1] + g * y[0];
    const double denom = std::sqrt(kGuardEps * kGuardEps + p1 * p1);
    dy[0] = y[1];
    dy[1] = (beta * y[1] - y[0] / pm1) / denom - (2.0 * g - 1.0) * y[1] -
            g * (g - 1.0) * y[0];
  };
  return sys;
}

OdeSystem fourth_order_system(const OscillatorySetup& setup) {
  const double g = setup.gamma;
  const auto c3 = pk_coefficients(3, g);
  const auto c4 = pk_coefficients(4, g);
  const bool regional = setup.order == OscillatorOrder::fourth_regional;
  const double lambda0 = setup.lambda0;
  OdeSystem sys;
  sys.dim = 4;
  sys.rhs = [c3, c4, regional, lambda0, g](double, const double* y,
                                           double* dy) {
    dy[0] = y[1];
    dy[1] = y[2];
    dy[2] = y[3];
    const double p3 = c3[0] * y[0] + c3[1] * y[1] + c3[2] * y[2] + c3[3] * y[3];
    const double lower =
        c4[0] * y[0] + c4[1] * y[1] + c4[2] * y[2] + c4[3] * y[3];
    const double forcing =
        regional ? -lambda0 * y[0] : -(y[1] + g * y[0]);
    dy[3] = forcing / (kGuardEps * kGuardEps + p3 * p3) - lower;
  };
  return sys;
}

OdeSystem build_system(const OscillatorySetup& setup) {
  return setup.order == OscillatorOrder::second ? second_order_system(setup)
                                                : fourth_order_system(setup);
}

// Value of the guarded denominator polynomial: P1 for the second-order
// component, P3 for the fourth-order ones.
double locus_value(const OscillatorySetup& setup, const double* y) {
  if (setup.order == OscillatorOrder::second) {
    return y[1] + setup.gamma * y[0];
  }
  const auto c = pk_coefficients(3, setup.gamma);
  return c[0] * y[0] + c[1] * y[1] + c[2] * y[2] + c[3] * y[3];
}

// Numerator forced onto the denominator polynomial's derivative at the
// locus. The derivative of the locus value along the flow reduces to
// forcing / guard - const * locus, so the sign of the forcing decides the
// crossing direction and a vanishing forcing means a tangent graze.
double forcing_value(const OscillatorySetup& setup, const double* y) {
  switch (setup.order) {
    case OscillatorOrder::second:
      return setup.params.beta() * y[1] - y[0] / (setup.params.p - 1.0);
    case OscillatorOrder::fourth_regional:
      return -setup.lambda0 * y[0];
    case OscillatorOrder::fourth_single_point:
      return -(y[1] + setup.gamma * y[0]);
  }
  return 0.0;
}

struct SectionHit {
  double s = 0.0;
  std::vector<double> y;
};

// Crosses the band |locus| < band_gate with the locus value w as the
// independent variable; the square-root (cube-root for fourth order) cusp
// in s becomes a smooth graph over w. from_above picks the entry edge.
// Poincare section crossings can fall inside the band (the single-point
// orbit crosses phi = 0 there on every period), so the hop watches the
// section as well and reports swallowed crossings through hits.
void hop_band(const OscillatorySetup& setup, double& s, std::vector<double>& y,
              bool from_above, SectionKind section,
              std::vector<SectionHit>* hits) {
  const double g = setup.gamma;
  const double forcing = forcing_value(setup, y.data());
  if (std::abs(forcing) < 1e-6) {
    fail(ErrorCode::no_convergence,
         "tangent graze of the singular locus at " + format_state(s, y));
  }
  const double gate = band_gate(setup);
  const double w0 = from_above ? gate : -gate;
  const double sgn = from_above ? -1.0 : 1.0;
  const bool second = setup.order == OscillatorOrder::second;
  const auto c3 = pk_coefficients(3, g);

  // State u is (s, phi) for second order and (s, phi, phi', phi'')
  // otherwise; the top derivative is recovered from w algebraically.
  OdeSystem sys;
  if (second) {
    const double beta = setup.params.beta();
    const double pm1 = setup.params.p - 1.0;
    sys.dim = 2;
    sys.rhs = [g, beta, pm1, w0, sgn](double tau, const double* u, double* du) {
      const double w = w0 + sgn * tau;
      const double dphi = w - g * u[1];
      const double a = beta * dphi - u[1] / pm1;
      const double root = std::sqrt(kGuardEps * kGuardEps + w * w);
      const double dsdw = root / (a - (g - 1.0) * w * root);
      du[0] = sgn * dsdw;
      du[1] = sgn * dphi * dsdw;
    };
  } else {
    const bool regional = setup.order == OscillatorOrder::fourth_regional;
    const double lambda0 = setup.lambda0;
    sys.dim = 4;
    sys.rhs = [c3, regional, lambda0, g, w0, sgn](double tau, const double* u,
                                                  double* du) {
      const double w = w0 + sgn * tau;
      const double d3phi = w - (c3[0] * u[1] + c3[1] * u[2] + c3[2] * u[3]);
      const double forced = regional ? -lambda0 * u[1] : -(u[2] + g * u[1]);
      const double q = kGuardEps * kGuardEps + w * w;
      const double dsdw = q / (forced - (g - 3.0) * w * q);
      du[0] = sgn * dsdw;
      du[1] = sgn * u[2] * dsdw;
      du[2] = sgn * u[3] * dsdw;
      du[3] = sgn * d3phi * dsdw;
    };
  }

  std::vector<double> u(sys.dim);
  u[0] = s;
  u[1] = y[0];
  if (!second) {
    u[2] = y[1];
    u[3] = y[2];
  }

  IntegrateOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-15;
  opt.store_trajectory = false;
  if (hits) {
    EventSpec sec;
    sec.terminal = false;
    if (section == SectionKind::phi_prime_zero) {
      sec.direction = EventDirection::falling;
      if (second) {
        sec.test = [g, w0, sgn](double tau, const double* u) {
          return (w0 + sgn * tau) - g * u[1];
        };
      } else {
        sec.test = [](double, const double* u) { return u[2]; };
      }
    } else {
      sec.direction = EventDirection::rising;
      sec.test = [](double, const double* u) { return u[1]; };
    }
    opt.events = {sec};
  }

  const Trajectory cross = integrate(sys, u, 0.0, 2.0 * gate, opt);
  if (cross.termination != Termination::span_end) {
    fail(ErrorCode::step_underflow,
         "locus band crossing stalled at " + format_state(s, y));
  }

  if (hits) {
    for (const EventHit& ev : cross.events) {
      const double w = w0 + sgn * ev.t;
      SectionHit hit;
      hit.s = ev.y[0];
      hit.y.resize(y.size());
      hit.y[0] = ev.y[1];
      if (second) {
        hit.y[1] = w - g * hit.y[0];
      } else {
        hit.y[1] = ev.y[2];
        hit.y[2] = ev.y[3];
        hit.y[3] = w - (c3[0] * hit.y[0] + c3[1] * hit.y[1] + c3[2] * hit.y[2]);
      }
      hits->push_back(std::move(hit));
    }
  }

  const std::vector<double>& ue = cross.y_end();
  const double w_exit = -w0;
  s = ue[0];
  y[0] = ue[1];
  if (second) {
    y[1] = w_exit - g * y[0];
  } else {
    y[1] = ue[2];
    y[2] = ue[3];
    y[3] = w_exit - (c3[0] * y[0] + c3[1] * y[1] + c3[2] * y[2]);
  }
}

void check_gamma(const OscillatorySetup& setup) {
  double expected = 0.0;
  switch (setup.order) {
    case OscillatorOrder::second:
      expected = 2.0 * setup.params.d / (setup.params.d - 1.0);
      break;
    case OscillatorOrder::fourth_regional:
      expected = 3.0;
      break;
    case OscillatorOrder::fourth_single_point:
      expected = 4.5;
      break;
  }
  if (std::abs(setup.gamma - expected) > 1e-12) {
    std::ostringstream msg;
    msg << "gamma " << setup.gamma << " does not match the order table value "
        << expected;
    fail(ErrorCode::config_invalid, msg.str());
  }
}

std::string format_state(double s, const std::vector<double>& y) {
  std::ostringstream out;
  out << "s=" << s << " state=(";
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i) out << ", ";
    out << y[i];
  }
  out << ")";
  return out.str();
}

}  // namespace

OscillatorySetup make_oscillatory_setup(OscillatorOrder order,
                                        const ProblemParams& params,
                                        double lambda0) {
  params.validate();
  OscillatorySetup setup;
  setup.order = order;
  setup.params = params;
  setup.lambda0 = lambda0;
  switch (order) {
    case OscillatorOrder::second:
      setup.gamma = 2.0 * params.d / (params.d - 1.0);
      break;
    case OscillatorOrder::fourth_regional:
      setup.gamma = 3.0;
      break;
    case OscillatorOrder::fourth_single_point:
      setup.gamma = 4.5;
      break;
  }
  return setup;
}

double eval_Pk(int k, const PkJet& jet) {
  if (k < 1 || k > 4) {
    fail(ErrorCode::config_invalid, "eval_Pk expects k in 1..4");
  }
  const auto c = pk_coefficients(k, jet.gamma);
  return c[0] * jet.phi + c[1] * jet.dphi + c[2] * jet.d2phi +
         c[3] * jet.d3phi + c[4] * jet.d4phi;
}

double phase_plane_rhs(const ProblemParams& params, double phi, double psi) {
  params.validate();
  if (params.d != 2) {
    fail(ErrorCode::config_invalid,
         "the phase-plane reduction is the d = 2 form");
  }
  const double denom = psi + 4.0 * phi;
  if (psi == 0.0) {
    fail(ErrorCode::singular_locus, "psi = 0 at phi=" + std::to_string(phi));
  }
  if (denom == 0.0) {
    fail(ErrorCode::singular_locus,
         "psi + 4 phi = 0 at phi=" + std::to_string(phi));
  }
  const double forced =
      (params.beta() * psi - phi / (params.p - 1.0)) / std::abs(denom);
  return (forced - 7.0 * psi - 12.0 * phi) / psi;
}

PeriodicOrbit find_limit_cycle(const OscillatorySetup& setup,
                               const std::vector<double>& init, double s_span,
                               const CycleOptions& options) {
  setup.params.validate();
  check_gamma(setup);
  const std::size_t dim = setup.order == OscillatorOrder::second ? 2u : 4u;
  if (init.size() != dim) {
    std::ostringstream msg;
    msg << "initial state has " << init.size() << " components, expected "
        << dim;
    fail(ErrorCode::config_invalid, msg.str());
  }
  if (!(s_span > 0.0)) {
    fail(ErrorCode::config_invalid, "s_span must be positive");
  }

  const OdeSystem sys = build_system(setup);
  const bool prime_section = options.section == SectionKind::phi_prime_zero;

  EventSpec section;
  section.terminal = true;
  if (prime_section) {
    section.test = [](double, const double* y) { return y[1]; };
    section.direction = EventDirection::falling;
  } else {
    section.test = [](double, const double* y) { return y[0]; };
    section.direction = EventDirection::rising;
  }

  // Band-edge events bracket the singular locus from both sides; crossing
  // the band itself is delegated to hop_band.
  EventSpec band_above;
  band_above.terminal = true;
  band_above.direction = EventDirection::falling;
  band_above.test = [&setup](double, const double* y) {
    return locus_value(setup, y) - band_gate(setup);
  };
  EventSpec band_below;
  band_below.terminal = true;
  band_below.direction = EventDirection::rising;
  band_below.test = [&setup](double, const double* y) {
    return locus_value(setup, y) + band_gate(setup);
  };

  IntegrateOptions run;
  run.rtol = options.rtol;
  run.atol = options.atol;
  run.overflow_guard = options.escape_bound;
  run.events = {section, band_above, band_below};
  run.store_trajectory = false;

  IntegrateOptions nudge = run;
  nudge.events.clear();

  // Restarting exactly on the section root would retrigger the terminal
  // event immediately, so each restart first coasts a short event-free leg.
  // Periods here are O(1), far above the nudge length.
  const double nudge_ds = 1e-4;

  double s = 0.0;
  std::vector<double> y = init;
  double prev_s = 0.0;
  std::vector<double> prev_state;
  double last_s = 0.0;
  std::vector<double> last_state;
  std::size_t returns = 0;
  bool converged = false;
  double period = 0.0;

  // State chosen to anchor the one-period resample: the converged return
  // itself, plus the point integration actually resumes from (these differ
  // when convergence lands on a mid-hop section crossing).
  std::vector<double> anchor;
  double cap_offset = 0.0;
  std::vector<double> cap_state;

  const auto process_return = [&](double s_ret, const std::vector<double>& yr) {
    const double positivity = prime_section ? yr[0] : yr[1];
    if (positivity <= 0.0) return false;
    ++returns;
    if (!prev_state.empty()) {
      double diff = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        diff = std::max(diff, std::abs(yr[i] - prev_state[i]));
      }
      if (diff <= options.tol) {
        converged = true;
        period = s_ret - prev_s;
        anchor = yr;
        return true;
      }
    }
    last_s = prev_s;
    last_state = prev_state;
    prev_s = s_ret;
    prev_state = yr;
    return false;
  };

  std::size_t segments = 0;
  while (s < s_span && !converged) {
    if (++segments > 200000) {
      fail(ErrorCode::no_convergence, "segment budget exhausted");
    }
    const Trajectory leg = integrate(sys, y, s, s_span, run);
    if (leg.termination == Termination::overflow) {
      fail(ErrorCode::escaped,
           "trajectory left the box |y| <= " +
               std::to_string(options.escape_bound) + " near " +
               format_state(leg.t_end(), leg.y_end()));
    }
    if (leg.termination == Termination::step_underflow) {
      fail(ErrorCode::step_underflow,
           "integration stalled at " + format_state(leg.t_end(), leg.y_end()));
    }
    if (leg.termination != Termination::event) break;

    s = leg.t_end();
    y = leg.y_end();
    const std::size_t which = leg.events.back().index;
    if (which != 0) {
      std::vector<SectionHit> hits;
      hop_band(setup, s, y, which == 1, options.section, &hits);
      for (const SectionHit& hit : hits) {
        if (process_return(hit.s, hit.y)) {
          cap_offset = s - hit.s;
          cap_state = y;
          break;
        }
      }
      continue;
    }

    if (process_return(s, y)) {
      cap_offset = 0.0;
      cap_state = y;
      break;
    }

    const double stop = std::min(s + nudge_ds, s_span);
    const Trajectory hop = integrate(sys, y, s, stop, nudge);
    if (hop.termination == Termination::overflow) {
      fail(ErrorCode::escaped,
           "trajectory left the box |y| <= " +
               std::to_string(options.escape_bound) + " near " +
               format_state(hop.t_end(), hop.y_end()));
    }
    s = hop.t_end();
    y = hop.y_end();
  }

  if (!converged) {
    std::ostringstream msg;
    msg << "returns failed to contract within s_span=" << s_span << " ("
        << returns << " returns)";
    if (!prev_state.empty()) {
      msg << "; last return " << format_state(prev_s, prev_state);
    }
    if (!last_state.empty()) {
      msg << "; previous return " << format_state(last_s, last_state);
    }
    fail(ErrorCode::no_cycle, msg.str());
  }

  // Resample one period from the converged return, stitching dense legs
  // across the locus band hops onto a uniform grid.
  PeriodicOrbit result;
  result.period = period;
  result.section = prime_section ? "phi'=0, phi>0" : "phi=0, phi'>0";
  result.convergence_iterations = returns;
  const std::size_t n = std::max<std::size_t>(options.sample_count, 2);
  result.s.reserve(n + 1);
  result.samples.reserve(n + 1);

  IntegrateOptions capture;
  capture.rtol = options.rtol;
  capture.atol = options.atol;
  capture.overflow_guard = options.escape_bound;
  capture.events = {band_above, band_below};
  capture.store_trajectory = true;

  result.s.push_back(0.0);
  result.samples.push_back(anchor);
  double t = cap_offset;
  std::vector<double> yc = cap_state;
  std::size_t next = 1;
  std::size_t capture_segments = 0;
  while (next <= n && t < period) {
    if (++capture_segments > 10000) {
      fail(ErrorCode::no_convergence, "failed to resample the converged orbit");
    }
    const Trajectory leg = integrate(sys, yc, t, period, capture);
    if (leg.termination != Termination::span_end &&
        leg.termination != Termination::event) {
      fail(ErrorCode::no_convergence, "failed to resample the converged orbit");
    }
    const double leg_end = leg.t_end();
    while (next <= n) {
      const double si =
          period * static_cast<double>(next) / static_cast<double>(n);
      if (si > leg_end && leg.termination == Termination::event) break;
      result.s.push_back(si);
      result.samples.push_back(leg.sample(std::clamp(si, t, leg_end)));
      ++next;
    }
    t = leg_end;
    yc = leg.y_end();
    if (leg.termination == Termination::event) {
      hop_band(setup, t, yc, leg.events.back().index == 0, options.section,
               nullptr);
      while (next <= n) {
        const double si =
            period * static_cast<double>(next) / static_cast<double>(n);
        if (si > t) break;
        result.s.push_back(si);
        result.samples.push_back(yc);
        ++next;
      }
    } else if (next <= n) {
      break;
    }
  }

  double amplitude = 0.0;
  for (const auto& row : result.samples) {
    amplitude = std::max(amplitude, std::abs(row[0]));
  }
  result.amplitude = amplitude;
  return result;
}

}  // namespace blowup
