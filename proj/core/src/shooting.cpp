#include "blowup/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/error.hpp"

namespace blowup {

namespace {

OdeSystem profile_system(const ProblemParams& params) {
  OdeSystem sys;
  sys.dim = 2;
  sys.rhs = [params](double z, const double* y, double* dydt) {
    dydt[0] = y[1];
    dydt[1] = similarity_rhs(params, z, y[0], y[1]);
  };
  return sys;
}

struct JetStart {
  double z;
  std::vector<double> y;
};

JetStart origin_start(const ProblemParams& params, double f_origin,
                      double delta) {
  const OriginJet jet = origin_expansion(params, f_origin, delta);
  return {jet.z, {jet.f, jet.fp}};
}

double algebraic_terms(const ProblemParams& params, double f) {
  return f / (params.p - 1.0) -
         std::pow(std::abs(f), params.p - 1.0) * f;
}

// The regularized equation turns every f-extremum with |N| = O(1) into a
// near-corner of curvature |N| z^{d-1} / eps^{d-1} (the unregularized
// solution is only C^1 there).  Explicit steps collapse on such corners,
// so turns are crossed with the independent variable swapped to v = f'.
// corner_gate gives the |v| below which the curvature exceeds a cap.
constexpr double kCurvatureCap = 1e4;

double corner_gate(const ProblemParams& params, double z, double f) {
  const double n0 = std::abs(algebraic_terms(params, f));
  double gate;
  if (params.d == 2)
    gate = n0 * z / kCurvatureCap;
  else
    gate = std::sqrt(n0 * z * z / kCurvatureCap);
  return std::clamp(gate, 2.0 * params.eps_reg, 0.05);
}

// Integrates across a turn using v as the parameter:
//   dz/dv = (eps^2+v^2)^{(d-1)/2} / (N z^{d-1}),  df/dv = v dz/dv,
// which is regular at v = 0.  Exact reparameterization, no approximation.
// minimum = true crosses v: -g -> +g, false crosses a maximum.
// Fails on tangencies (N ~ 0 at the turn).
bool corner_hop(const ProblemParams& params, bool minimum, double& z,
                std::vector<double>& y) {
  const double g = std::abs(y[1]);
  const double s = minimum ? 1.0 : -1.0;
  const double n_entry =
      params.beta() * y[1] * z + algebraic_terms(params, y[0]);
  if (!(g > 0.0) || s * n_entry <= 1e-9) return false;

  OdeSystem swapped;
  swapped.dim = 2;
  swapped.rhs = [params, s](double sigma, const double* w, double* out) {
    const double zz = w[0];
    const double v = s * sigma;
    const double n = params.beta() * v * zz + algebraic_terms(params, w[1]);
    const double mag2 = params.eps_reg * params.eps_reg + sigma * sigma;
    const double numer = params.d == 2 ? std::sqrt(mag2) : mag2;
    const double zfac = params.d == 2 ? zz : zz * zz;
    const double dz = numer / (s * n * zfac);
    out[0] = dz;
    out[1] = v * dz;
  };
  IntegrateOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-15;
  opt.store_trajectory = false;
  opt.max_steps = 200000;
  try {
    Trajectory t = integrate(swapped, {z, y[0]}, -g, g, opt);
    if (t.termination != Termination::span_end) return false;
    z = t.y_end()[0];
    y[0] = t.y_end()[1];
    y[1] = s * g;
    return true;
  } catch (const Error&) {
    return false;
  }
}

// Shared classification core. Divergence means crossing below -f0; for
// p < d that level is a stable node of the slow manifold beta f' z + N = 0
// and is approached asymptotically from above, so the committed signature
// is crossing zero instead (N < 0 throughout (-f0, 0) for every p > 1,
// hence no return once across).
Classification classify_jet(const ProblemParams& params, const JetStart& start,
                            const ClassifyOptions& options, bool store) {
  const double f0 = params.f0();
  const double window_top = f0 * (1.0 + options.margin);
  const bool commit_at_zero = params.p < params.d;
  OdeSystem sys = profile_system(params);

  IntegrateOptions iopt;
  iopt.rtol = options.rtol;
  iopt.atol = options.atol;
  iopt.store_trajectory = store;
  iopt.overflow_guard = 1e10;
  iopt.events.push_back(
      {[f0](double, const double* y) { return y[0] + f0; },
       EventDirection::falling, true});
  iopt.events.push_back({[](double, const double* y) { return y[1]; },
                         EventDirection::rising, true});
  const std::size_t idx_commit = commit_at_zero ? 2 : SIZE_MAX;
  if (commit_at_zero)
    iopt.events.push_back(
        {[](double, const double* y) { return y[0] + 1e-8; },
         EventDirection::falling, true});
  const std::size_t idx_min = iopt.events.size();
  iopt.events.push_back(
      {[params](double z, const double* y) {
         return y[1] + corner_gate(params, z, y[0]);
       },
       EventDirection::rising, true});
  iopt.events.push_back(
      {[params](double z, const double* y) {
         return y[1] - corner_gate(params, z, y[0]);
       },
       EventDirection::falling, true});

  Classification out;
  double z = start.z;
  std::vector<double> y = start.y;
  for (int segment = 0; segment < 4000; ++segment) {
    Trajectory traj = integrate(sys, y, z, options.z_max, iopt);
    const Termination term = traj.termination;
    const double z_end = traj.t_end();
    const std::vector<double> y_end = traj.y_end();
    EventHit hit;
    if (term == Termination::event) hit = traj.events.back();
    if (store) {
      if (out.trajectory.times.empty()) {
        out.trajectory = std::move(traj);
      } else {
        for (std::size_t i = 1; i < traj.times.size(); ++i) {
          out.trajectory.times.push_back(traj.times[i]);
          out.trajectory.states.push_back(std::move(traj.states[i]));
          out.trajectory.derivs.push_back(std::move(traj.derivs[i]));
        }
        out.trajectory.termination = term;
      }
    }

    if (term == Termination::event) {
      if (hit.index == 0 || hit.index == idx_commit) {
        out.cls = TrajectoryClass::divergent;
        out.z_event = hit.t;
        return out;
      }
      if (hit.index == 1 || hit.index == idx_min) {
        // a minimum; oscillation about f0 once the turn sits in the band
        if (hit.y[0] > 0.0 && hit.y[0] < window_top) {
          out.cls = TrajectoryClass::oscillatory;
          out.z_event = hit.t;
          return out;
        }
      }
      z = hit.t;
      y = hit.y;
      if (hit.index >= idx_min) {
        if (!corner_hop(params, hit.index == idx_min, z, y)) {
          out.cls = TrajectoryClass::unclassified;
          out.z_event = z;
          return out;
        }
      }
      continue;
    }
    if (term == Termination::span_end) {
      if (std::abs(y_end[0]) < options.decay_tol &&
          std::abs(y_end[1]) < options.decay_tol) {
        out.cls = TrajectoryClass::decayed;
      } else if (y_end[0] > 0.0 && y_end[0] < window_top) {
        // trapped in the band around f0 (equilibria, slow-manifold creep)
        out.cls = TrajectoryClass::oscillatory;
      } else {
        out.cls = TrajectoryClass::unclassified;
      }
      out.z_event = z_end;
      return out;
    }
    // overflow / step underflow deep in the divergent regime
    out.cls = y_end[0] < -f0 ? TrajectoryClass::divergent
                             : TrajectoryClass::unclassified;
    out.z_event = z_end;
    return out;
  }
  out.cls = TrajectoryClass::unclassified;
  return out;
}

ClassifyOptions to_classify(const ShootOptions& o) {
  ClassifyOptions c;
  c.z_max = o.z_max;
  c.start_delta = o.start_delta;
  c.margin = o.margin;
  c.decay_tol = o.decay_tol;
  c.rtol = o.rtol;
  c.atol = o.atol;
  return c;
}

bool is_divergent(const ProblemParams& params, const JetStart& start,
                  const ClassifyOptions& copt) {
  ClassifyOptions ext = copt;
  Classification c = classify_jet(params, start, ext, false);
  if (c.cls == TrajectoryClass::unclassified) {
    ext.z_max *= 2.0;
    c = classify_jet(params, start, ext, false);
    // still hugging the profile: treat as the non-divergent side
  }
  return c.cls == TrajectoryClass::divergent;
}

// Integrates a bisected jet and samples it on a uniform grid, truncating
// where the trajectory leaves the profile: a rebound (minimum approach) or
// the fall through the support floor.
struct Extraction {
  std::vector<double> z, f, fp;
  double z_trunc = 0.0;
  bool hit_floor = false;
};

Extraction extract_profile(const ProblemParams& params, const JetStart& start,
                           const ShootOptions& options) {
  OdeSystem sys = profile_system(params);
  IntegrateOptions iopt;
  iopt.rtol = options.rtol;
  iopt.atol = options.atol;
  iopt.overflow_guard = 1e10;
  iopt.events.push_back({[](double, const double* y) { return y[1]; },
                         EventDirection::rising, true});
  iopt.events.push_back(
      {[params](double z, const double* y) {
         return y[1] + corner_gate(params, z, y[0]);
       },
       EventDirection::rising, true});
  iopt.events.push_back(
      {[&options](double, const double* y) {
         return y[0] - options.support_tol;
       },
       EventDirection::falling, true});

  Trajectory traj = integrate(sys, start.y, start.z, options.z_max, iopt);
  Extraction out;
  out.z_trunc = traj.t_end();
  out.hit_floor = traj.termination == Termination::event &&
                  traj.events.back().index == 2;
  for (double z = start.z; z < out.z_trunc; z += options.sample_dz) {
    const std::vector<double> y = traj.sample(z);
    out.z.push_back(z);
    out.f.push_back(y[0]);
    out.fp.push_back(y[1]);
  }
  out.z.push_back(out.z_trunc);
  out.f.push_back(traj.y_end()[0]);
  out.fp.push_back(traj.y_end()[1]);
  return out;
}

void pad_compact_tail(RadialProfile& prof, double dz) {
  if (!prof.support) return;
  const double z_end = *prof.support + std::max(0.5, 0.15 * *prof.support);
  for (double z = prof.z.back() + dz; z < z_end; z += dz) {
    prof.z.push_back(z);
    prof.f.push_back(0.0);
    prof.fp.push_back(0.0);
  }
}

int count_sign_changes(const std::vector<double>& f, double floor) {
  int count = 0;
  int side = 0;
  for (double v : f) {
    if (std::abs(v) <= floor) continue;
    const int s = v > 0.0 ? 1 : -1;
    if (side != 0 && s != side) ++count;
    side = s;
  }
  return count;
}

void fit_tail(RadialProfile& prof, double z_lo, double z_hi) {
  const PowerFit free = fit_power_law(prof.z, prof.f, z_lo, z_hi);
  if (free.points < 5) return;
  prof.tail_exponent_fit = free.exponent;

  // C0 with the exponent pinned to the analytic value
  const double nu = -2.0 * prof.params.d / (prof.params.p - prof.params.d);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < prof.z.size(); ++i) {
    if (prof.z[i] < z_lo || prof.z[i] > z_hi) continue;
    if (prof.f[i] <= 0.0) continue;
    acc += std::log(prof.f[i]) - nu * std::log(prof.z[i]);
    ++n;
  }
  if (n >= 5) prof.far_field_constant = std::exp(acc / n);
}

// The bisection residual tears the trajectory off the algebraic tail well
// before the z^{-2d/(p-d)} slope settles, and direct integration cannot
// follow the tail further (it is unstable in forward z: any residual
// re-diverges). Once the diffusion term is a small bounded fraction of the
// algebraic ones the profile is continued along the first-order balance
//   beta z f' + f/(p-1) - |f|^{p-1} f = 0,
// which the full equation approaches on its tail and whose solutions decay
// exactly like C z^{-2d/(p-d)}. Returns the fit window on the extension.
std::optional<std::pair<double, double>> extend_algebraic_tail(
    const ProblemParams& params, Extraction& ex, const ShootOptions& options) {
  const double beta = params.beta();
  std::size_t cut = ex.z.size();
  for (std::size_t i = 0; i + 1 < ex.z.size(); ++i) {
    const double z = ex.z[i], f = ex.f[i], v = ex.fp[i];
    if (!(f > 0.0) || !(v < 0.0) || f > 0.5 * params.f0()) continue;
    const double fpp = similarity_rhs(params, z, f, v);
    const double diffusion = std::abs(fpp) *
                             std::pow(std::abs(v), params.d - 1.0) /
                             std::pow(z, params.d - 1.0);
    if (diffusion * (params.p - 1.0) / f < 0.02) {
      cut = i;
      break;
    }
  }
  if (cut == ex.z.size()) return std::nullopt;

  const double z_h = ex.z[cut];
  const double z_ext = std::min(std::max(12.0, 3.0 * z_h), options.z_max);
  ex.z.resize(cut + 1);
  ex.f.resize(cut + 1);
  ex.fp.resize(cut + 1);
  ex.z_trunc = z_ext;
  ex.hit_floor = false;

  OdeSystem reduced;
  reduced.dim = 1;
  reduced.rhs = [params, beta](double z, const double* y, double* out) {
    out[0] = -algebraic_terms(params, y[0]) / (beta * z);
  };
  IntegrateOptions iopt;
  iopt.rtol = 1e-12;
  iopt.atol = 1e-14;
  Trajectory tail = integrate(reduced, {ex.f[cut]}, z_h, z_ext, iopt);
  for (double z = z_h + options.sample_dz; z <= z_ext; z += options.sample_dz) {
    const double f = tail.sample(z)[0];
    ex.z.push_back(z);
    ex.f.push_back(f);
    ex.fp.push_back(-algebraic_terms(params, f) / (beta * z));
  }
  return std::make_pair(std::max(1.5 * z_h, 0.3 * z_ext), 0.95 * z_ext);
}

}  // namespace

const char* trajectory_class_name(TrajectoryClass c) {
  switch (c) {
    case TrajectoryClass::divergent: return "divergent";
    case TrajectoryClass::oscillatory: return "oscillatory";
    case TrajectoryClass::decayed: return "decayed";
    case TrajectoryClass::unclassified: return "unclassified";
  }
  return "unknown";
}

double similarity_rhs(const ProblemParams& params, double z, double f,
                      double fp, bool signed_form) {
  const double num = params.beta() * fp * z + f / (params.p - 1.0) -
                     std::pow(std::abs(f), params.p - 1.0) * f;
  const double mag2 = params.eps_reg * params.eps_reg + fp * fp;
  double denom;
  double zfac;
  if (params.d == 2) {
    denom = std::sqrt(mag2);
    if (signed_form && fp > 0.0) denom = -denom;
    zfac = z;
  } else {
    denom = mag2;  // |f'|^2 and the signed (f')^2 coincide for d = 3
    zfac = z * z;
  }
  return num * zfac / denom;
}

OriginJet origin_expansion(const ProblemParams& params, double f_origin,
                           double delta) {
  params.validate();
  if (!(delta > 0.0)) fail(ErrorCode::config_invalid, "delta must be > 0");
  const double s = algebraic_terms(params, f_origin);
  const double c =
      (s >= 0.0 ? 1.0 : -1.0) * std::pow(std::abs(s), 1.0 / params.d);
  OriginJet jet;
  jet.z = delta;
  jet.c = c;
  jet.f = f_origin + 0.5 * c * delta * delta;
  jet.fp = c * delta;
  return jet;
}

Classification classify(const ProblemParams& params, double f_origin,
                        const ClassifyOptions& options) {
  params.validate();
  return classify_jet(params,
                      origin_start(params, f_origin, options.start_delta),
                      options, true);
}

RadialProfile shoot_profile(const ProblemParams& params, double lo, double hi,
                            const ShootOptions& options) {
  params.validate();
  if (!(lo < hi)) fail(ErrorCode::bracket_invalid, "need lo < hi");
  const ClassifyOptions copt = to_classify(options);

  if (is_divergent(params, origin_start(params, lo, options.start_delta), copt))
    fail(ErrorCode::bracket_invalid, "lower end already divergent");
  if (!is_divergent(params, origin_start(params, hi, options.start_delta), copt))
    fail(ErrorCode::bracket_invalid, "upper end not divergent");

  while (hi - lo > options.bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // parameter resolution exhausted
    if (is_divergent(params, origin_start(params, mid, options.start_delta),
                     copt))
      hi = mid;
    else
      lo = mid;
  }

  const double critical = 0.5 * (lo + hi);
  Extraction ex = extract_profile(
      params, origin_start(params, critical, options.start_delta), options);
  std::optional<std::pair<double, double>> tail_window;
  if (params.p > params.d)
    tail_window = extend_algebraic_tail(params, ex, options);

  RadialProfile prof;
  prof.params = params;
  prof.f_origin = critical;
  prof.kind = params.p == params.d
                  ? ProfileKind::regional
                  : (params.p > params.d ? ProfileKind::single_point
                                         : ProfileKind::global);
  prof.z.push_back(0.0);
  prof.f.push_back(critical);
  prof.fp.push_back(0.0);
  prof.z.insert(prof.z.end(), ex.z.begin(), ex.z.end());
  prof.f.insert(prof.f.end(), ex.f.begin(), ex.f.end());
  prof.fp.insert(prof.fp.end(), ex.fp.begin(), ex.fp.end());
  // the floor crossing is the interface for compact kinds and a mere
  // truncation point for the infinite-support ones
  if (ex.hit_floor && params.p <= params.d) prof.support = ex.z_trunc;
  prof.sign_changes = count_sign_changes(prof.f, options.support_tol);
  if (prof.kind == ProfileKind::single_point) {
    if (tail_window)
      fit_tail(prof, tail_window->first, tail_window->second);
    else
      fit_tail(prof, options.tail_window_lo * ex.z_trunc,
               options.tail_window_hi * ex.z_trunc);
  }
  pad_compact_tail(prof, options.sample_dz);
  return prof;
}

RadialProfile shoot_q_profile(const ProblemParams& params, double a0_lo,
                              double a0_hi, const ShootOptions& options) {
  params.validate();
  if (!(params.p > params.d))
    fail(ErrorCode::config_invalid, "Q-profiles need p > d");
  if (!(a0_lo < a0_hi) || a0_lo <= 0.0)
    fail(ErrorCode::bracket_invalid, "need 0 < lo < hi");

  const double f0 = params.f0();
  const double beta = params.beta();
  const double dq = 1e-4;
  auto interface_jet = [&](double a0) -> JetStart {
    return {a0 + dq,
            {f0 - 0.5 * beta * a0 * a0 * dq * dq, -beta * a0 * a0 * dq}};
  };
  const ClassifyOptions copt = to_classify(options);

  // the divergent side of the a0 bracket is detected, not prescribed
  const bool lo_div = is_divergent(params, interface_jet(a0_lo), copt);
  const bool hi_div = is_divergent(params, interface_jet(a0_hi), copt);
  if (lo_div == hi_div)
    fail(ErrorCode::bracket_invalid, "bracket ends classify identically");

  double lo = a0_lo, hi = a0_hi;
  while (hi - lo > options.bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (is_divergent(params, interface_jet(mid), copt) == lo_div)
      lo = mid;
    else
      hi = mid;
  }
  const double a0 = 0.5 * (lo + hi);
  Extraction ex = extract_profile(params, interface_jet(a0), options);
  std::optional<std::pair<double, double>> tail_window =
      extend_algebraic_tail(params, ex, options);

  RadialProfile prof;
  prof.params = params;
  prof.kind = ProfileKind::q_profile;
  prof.f_origin = f0;
  prof.q_interface = a0;
  for (double z = 0.0; z < a0; z += options.sample_dz) {
    prof.z.push_back(z);
    prof.f.push_back(f0);
    prof.fp.push_back(0.0);
  }
  prof.z.insert(prof.z.end(), ex.z.begin(), ex.z.end());
  prof.f.insert(prof.f.end(), ex.f.begin(), ex.f.end());
  prof.fp.insert(prof.fp.end(), ex.fp.begin(), ex.fp.end());
  prof.sign_changes = count_sign_changes(prof.f, options.support_tol);
  if (tail_window)
    fit_tail(prof, tail_window->first, tail_window->second);
  else
    fit_tail(prof, options.tail_window_lo * ex.z_trunc,
             options.tail_window_hi * ex.z_trunc);
  return prof;
}

namespace {

// Statistic for the d = 3 families: hysteresis-counted zero crossings of f
// until the trajectory escapes or the span ends, with turns hopped.
struct KStatistic {
  int zero_crossings = 0;
  bool escaped = false;
};

KStatistic k_statistic(const ProblemParams& params, double a,
                       const ShootOptions& options) {
  OdeSystem sys = profile_system(params);
  const double guard = std::max(2.5 * std::abs(a), 3.0 * params.f0() + 1.0);
  IntegrateOptions iopt;
  iopt.rtol = options.rtol;
  iopt.atol = options.atol;
  iopt.store_trajectory = false;
  iopt.events.push_back(
      {[guard](double, const double* y) { return y[0] - guard; },
       EventDirection::rising, true});
  iopt.events.push_back(
      {[guard](double, const double* y) { return y[0] + guard; },
       EventDirection::falling, true});
  iopt.events.push_back(
      {[params](double z, const double* y) {
         return y[1] + corner_gate(params, z, y[0]);
       },
       EventDirection::rising, true});
  iopt.events.push_back(
      {[params](double z, const double* y) {
         return y[1] - corner_gate(params, z, y[0]);
       },
       EventDirection::falling, true});

  const double eta = 0.05 * params.f0();
  KStatistic st;
  int side = 0;
  StepObserver obs = [&](double, std::vector<double>& y) {
    const double f = y[0];
    if (std::abs(f) > eta) {
      const int s = f > 0.0 ? 1 : -1;
      if (side != 0 && s != side) ++st.zero_crossings;
      side = s;
    }
    return true;
  };

  // crossings can only occur while the state can still reach zero; well
  // captures at later z never add any, so a short span suffices
  const double z_stat = std::min(options.z_max, 20.0);
  JetStart start = origin_start(params, a, options.start_delta);
  double z = start.z;
  std::vector<double> y = start.y;
  for (int segment = 0; segment < 2000; ++segment) {
    Trajectory traj = integrate_observed(sys, y, z, z_stat, iopt, obs);
    if (traj.termination == Termination::event) {
      const EventHit& hit = traj.events.back();
      if (hit.index <= 1) {
        st.escaped = true;
        return st;
      }
      z = hit.t;
      y = hit.y;
      if (!corner_hop(params, hit.index == 2, z, y)) return st;
      continue;
    }
    if (traj.termination == Termination::overflow) st.escaped = true;
    return st;
  }
  return st;
}

}  // namespace

RadialProfile shoot_sign_changing(const ProblemParams& params, int k,
                                  double lo, double hi,
                                  const ShootOptions& options) {
  params.validate();
  if (params.d != 3)
    fail(ErrorCode::config_invalid, "sign-changing families need d = 3");
  if (k < 0) fail(ErrorCode::config_invalid, "k must be >= 0");
  if (!(lo < hi)) fail(ErrorCode::bracket_invalid, "need lo < hi");

  if (params.p > params.d) {
    // Positive family: k = 0 is the ordinary critical profile.
    if (k != 0)
      fail(ErrorCode::target_count_unreachable,
           "only k = 0 is isolated by a divergence bracket for p > d");
    return shoot_profile(params, lo, hi, options);
  }
  if (params.p != params.d)
    fail(ErrorCode::config_invalid, "sign-changing shooting needs p >= d");

  // p = d = 3: F_k sits on the boundary between k and k+1 zero crossings.
  auto above = [&](double a) {
    return k_statistic(params, a, options).zero_crossings >= k + 1;
  };
  if (above(lo))
    fail(ErrorCode::bracket_invalid, "lower end already has > k crossings");
  if (!above(hi))
    fail(ErrorCode::target_count_unreachable,
         "upper end does not reach k+1 crossings");

  double a_lo = lo, a_hi = hi;
  while (a_hi - a_lo > options.bisect_tol) {
    const double mid = 0.5 * (a_lo + a_hi);
    if (mid <= a_lo || mid >= a_hi) break;
    if (above(mid))
      a_hi = mid;
    else
      a_lo = mid;
  }
  const double critical = 0.5 * (a_lo + a_hi);
  // Extract from the captured side: it follows the profile through its k
  // crossings and turns at the zero touch instead of crossing past it.
  const double a_extract = a_lo;

  // Extraction: follow the profile through its k sign changes and stop at
  // the touch of zero (or once the trajectory commits past it).
  OdeSystem sys = profile_system(params);
  const double guard = std::max(2.5 * std::abs(critical), 3.0 * params.f0());
  IntegrateOptions iopt;
  iopt.rtol = options.rtol;
  iopt.atol = options.atol;
  iopt.events.push_back(
      {[guard](double, const double* y) { return std::abs(y[0]) - guard; },
       EventDirection::rising, true});
  iopt.events.push_back(
      {[](double, const double* y) { return std::abs(y[0]) - 1e-8; },
       EventDirection::falling, true});
  iopt.events.push_back(
      {[params](double z, const double* y) {
         return y[1] + corner_gate(params, z, y[0]);
       },
       EventDirection::rising, true});
  iopt.events.push_back(
      {[params](double z, const double* y) {
         return y[1] - corner_gate(params, z, y[0]);
       },
       EventDirection::falling, true});

  const double eta = 0.05 * params.f0();
  int side = 0;
  int crossings = 0;
  StepObserver obs = [&](double, std::vector<double>& y) {
    const double f = y[0];
    if (std::abs(f) > eta) {
      const int s = f > 0.0 ? 1 : -1;
      if (side != 0 && s != side) ++crossings;
      side = s;
      if (crossings > k) return false;
    }
    return true;
  };

  JetStart start = origin_start(params, a_extract, options.start_delta);
  Trajectory full;
  std::optional<double> support;
  double z = start.z;
  std::vector<double> y = start.y;
  const double z_span = std::min(options.z_max, 20.0);
  for (int segment = 0; segment < 2000; ++segment) {
    Trajectory traj = integrate_observed(sys, y, z, z_span, iopt, obs);
    const Termination term = traj.termination;
    EventHit hit;
    if (term == Termination::event) hit = traj.events.back();
    if (full.times.empty()) {
      full = std::move(traj);
    } else {
      for (std::size_t i = 1; i < traj.times.size(); ++i) {
        full.times.push_back(traj.times[i]);
        full.states.push_back(std::move(traj.states[i]));
        full.derivs.push_back(std::move(traj.derivs[i]));
      }
      full.termination = term;
    }
    if (term == Termination::event && hit.index >= 2) {
      // a turn with |f| inside the hysteresis band is the zero touch that
      // terminates the compact profile (the bisection residual keeps the
      // touch off exact zero, so the floor events cannot see it)
      if (std::abs(hit.y[0]) < eta) {
        support = hit.t;
        break;
      }
      z = hit.t;
      y = hit.y;
      if (corner_hop(params, hit.index == 2, z, y)) continue;
    }
    break;
  }

  // fallback: last pass below the floor (deeply resolved touch)
  if (!support) {
    for (std::size_t i = full.times.size(); i-- > 0;) {
      if (std::abs(full.states[i][0]) < options.support_tol) {
        support = full.times[i];
      } else if (support) {
        break;
      }
    }
  }

  RadialProfile prof;
  prof.params = params;
  prof.kind = ProfileKind::sign_changing;
  prof.f_origin = critical;
  prof.support = support;
  const double z_end = support ? *support : full.t_end();
  prof.z.push_back(0.0);
  prof.f.push_back(critical);
  prof.fp.push_back(0.0);
  for (double zz = start.z; zz < z_end; zz += options.sample_dz) {
    const std::vector<double> yy = full.sample(zz);
    prof.z.push_back(zz);
    prof.f.push_back(yy[0]);
    prof.fp.push_back(yy[1]);
  }
  prof.sign_changes = count_sign_changes(prof.f, options.support_tol);
  pad_compact_tail(prof, options.sample_dz);
  return prof;
}

InterfaceLaw interface_asymptotics(int d) {
  if (d != 2 && d != 3) fail(ErrorCode::config_invalid, "require d in {2,3}");
  InterfaceLaw law;
  law.exponent = static_cast<double>(d + 1) / (d - 1);
  law.coefficient = std::pow(
      std::pow(d - 1.0, d + 1.0) / (2.0 * std::pow(d + 1.0, d)), 1.0 / (d - 1));
  return law;
}

std::vector<double> final_time_envelope(const RadialProfile& profile,
                                        const std::vector<double>& r) {
  if (!profile.far_field_constant)
    fail(ErrorCode::missing_C0, "profile has no fitted far-field constant");
  const double expo = -2.0 / (profile.params.p - 1.0);
  std::vector<double> out;
  out.reserve(r.size());
  for (double ri : r) {
    if (!(ri > 0.0)) fail(ErrorCode::config_invalid, "need r > 0");
    out.push_back(*profile.far_field_constant * std::pow(ri, expo));
  }
  return out;
}

PowerFit fit_power_law(const std::vector<double>& x,
                       const std::vector<double>& y, double x_lo,
                       double x_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] < x_lo || x[i] > x_hi || x[i] <= 0.0) continue;
    const double ay = std::abs(y[i]);
    if (ay < 1e-300) continue;
    const double lx = std::log(x[i]), ly = std::log(ay);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  PowerFit fit;
  fit.points = n;
  if (n < 2) return fit;
  const double denom = n * sxx - sx * sx;
  fit.exponent = (n * sxy - sx * sy) / denom;
  fit.coefficient = std::exp((sy - fit.exponent * sx) / n);
  return fit;
}

PowerFit fit_interface_law(const RadialProfile& profile, double f_lo,
                           double f_hi) {
  if (!profile.support)
    fail(ErrorCode::insufficient_data, "profile has no finite support");
  std::vector<double> zs, fs;
  for (std::size_t i = 0; i < profile.z.size(); ++i) {
    const double f = std::abs(profile.f[i]);
    if (f < f_lo || f > f_hi || profile.z[i] >= *profile.support) continue;
    zs.push_back(profile.z[i]);
    fs.push_back(f);
  }
  if (zs.size() < 5)
    fail(ErrorCode::insufficient_data, "too few points in the interface band");

  // The measured support sits slightly inside the true touch point (it is
  // the crossing of the floor tolerance), and the log-log slope is very
  // sensitive to the pivot; search the pivot for the best linear fit.
  PowerFit best;
  double best_sse = std::numeric_limits<double>::infinity();
  const double lo = *profile.support;
  const double hi = lo * 1.05;
  std::vector<double> s(zs.size());
  for (int j = 0; j <= 400; ++j) {
    const double pivot = lo + (hi - lo) * j / 400.0;
    if (pivot <= zs.back()) continue;
    for (std::size_t i = 0; i < zs.size(); ++i) s[i] = pivot - zs[i];
    const PowerFit fit = fit_power_law(s, fs, 0.0, 1e300);
    double sse = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r = std::log(fs[i]) -
                       (std::log(fit.coefficient) +
                        fit.exponent * std::log(s[i]));
      sse += r * r;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

}  // namespace blowup
