#include "blowup/planar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "blowup/error.hpp"
#include "blowup/ode.hpp"

namespace blowup {

namespace {

double source_term(double p, double u) {
  if (p == 2.0) return std::abs(u) * u;
  if (p == 3.0) return u * u * u;
  return std::pow(std::abs(u), p - 1.0) * u;
}

double kernel_at(const PlanarGrid& g, const std::vector<double>& u,
                 std::size_t i, std::size_t j) {
  const std::size_t c = g.index(i, j);
  const std::size_t s = g.index(i, j - 1);
  const std::size_t n = g.index(i, j + 1);
  return (u[s - 1] + u[s + 1] + u[n - 1] + u[n + 1] +
          2.0 * (u[s] + u[n] + u[c - 1] + u[c + 1]) + 4.0 * u[c]) /
         16.0;
}

double det_at(const PlanarGrid& g, const std::vector<double>& u, std::size_t i,
              std::size_t j) {
  const double hx = g.hx(), hy = g.hy();
  const std::size_t c = g.index(i, j);
  const std::size_t s = g.index(i, j - 1);
  const std::size_t n = g.index(i, j + 1);
  const double uxx = (u[c + 1] - 2.0 * u[c] + u[c - 1]) / (hx * hx);
  const double uyy = (u[n] - 2.0 * u[c] + u[s]) / (hy * hy);
  const double uxy = (u[n + 1] - u[n - 1] - u[s + 1] + u[s - 1]) / (4.0 * hx * hy);
  return uxx * uyy - uxy * uxy;
}

}  // namespace

void PlanarGrid::validate() const {
  if (nx < 3 || ny < 3)
    fail(ErrorCode::config_invalid, "planar grid needs at least 3 nodes per side");
}

std::vector<double> ma_det(const PlanarState& state) {
  const PlanarGrid& g = state.grid;
  g.validate();
  if (state.u.size() != g.size())
    fail(ErrorCode::config_invalid, "field size does not match the grid");
  std::vector<double> det(g.size(), 0.0);
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i)
      det[g.index(i, j)] = det_at(g, state.u, i, j);
  return det;
}

PlanarState smooth(const PlanarState& state, double theta) {
  if (!(theta >= 0.0 && theta <= 0.5))
    fail(ErrorCode::config_invalid, "filter blend must lie in [0, 1/2]");
  const PlanarGrid& g = state.grid;
  g.validate();
  if (state.u.size() != g.size())
    fail(ErrorCode::config_invalid, "field size does not match the grid");
  PlanarState out = state;
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i)
      out.u[g.index(i, j)] = (1.0 - theta) * state.at(i, j) +
                             theta * kernel_at(g, state.u, i, j);
  return out;
}

Evolve2dResult evolve_2d(const ProblemParams& params, const PlanarGrid& grid,
                         const std::vector<double>& u0,
                         const Evolve2dOptions& options) {
  params.validate();
  grid.validate();
  if (params.d != 2)
    fail(ErrorCode::config_invalid, "the planar solver is two dimensional");
  if (u0.size() != grid.size())
    fail(ErrorCode::config_invalid, "initial field size does not match the grid");
  double u00 = 0.0;
  for (double v : u0) {
    if (!std::isfinite(v))
      fail(ErrorCode::config_invalid, "initial field must be finite");
    u00 = std::max(u00, std::abs(v));
  }
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j : {std::size_t{0}, grid.ny - 1})
      if (std::abs(u0[grid.index(i, j)]) > 1e-12 * u00)
        fail(ErrorCode::config_invalid, "initial field must vanish on the boundary");
  for (std::size_t j = 0; j < grid.ny; ++j)
    for (std::size_t i : {std::size_t{0}, grid.nx - 1})
      if (std::abs(u0[grid.index(i, j)]) > 1e-12 * u00)
        fail(ErrorCode::config_invalid, "initial field must vanish on the boundary");
  if (!(options.t_max > 0.0))
    fail(ErrorCode::config_invalid, "t_max must be positive");
  const double peak0 = *std::max_element(u0.begin(), u0.end());
  if (options.u_max_threshold <= peak0)
    fail(ErrorCode::config_invalid, "threshold must exceed the initial peak");

  const double sign = -1.0;  // (-1)^{d-1} with d = 2
  const double hx = grid.hx(), hy = grid.hy();
  const double ixx = 1.0 / (hx * hx), iyy = 1.0 / (hy * hy);
  const double ixy = 1.0 / (4.0 * hx * hy);
  const std::size_t nx = grid.nx, ny = grid.ny;
  const double p = params.p;
  const bool with_source = options.with_source;

  OdeSystem sys;
  sys.dim = grid.size();
  sys.rhs = [=](double, const double* u, double* du) {
    std::fill(du, du + nx * ny, 0.0);
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        const std::size_t c = j * nx + i;
        const double uxx = (u[c + 1] - 2.0 * u[c] + u[c - 1]) * ixx;
        const double uyy = (u[c + nx] - 2.0 * u[c] + u[c - nx]) * iyy;
        const double uxy = (u[c + nx + 1] - u[c + nx - 1] - u[c - nx + 1] +
                            u[c - nx - 1]) *
                           ixy;
        du[c] = sign * (uxx * uyy - uxy * uxy);
        if (with_source) du[c] += source_term(p, u[c]);
      }
    }
  };

  Evolve2dResult res;
  std::vector<double> levels;
  for (double level = 10.0 * std::max(peak0, 0.0);
       level > 0.0 && level < options.u_max_threshold; level *= 10.0)
    levels.push_back(level);
  std::vector<double> snap_times = options.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());

  std::vector<double> y = u0;
  for (std::size_t i = 0; i < nx; ++i) {
    y[grid.index(i, 0)] = 0.0;
    y[grid.index(i, ny - 1)] = 0.0;
  }
  for (std::size_t j = 0; j < ny; ++j) {
    y[grid.index(0, j)] = 0.0;
    y[grid.index(nx - 1, j)] = 0.0;
  }

  auto push_snapshot = [&](double t, const std::vector<double>& u) {
    if (!res.snapshots.empty() && res.snapshots.back().t == t) return;
    res.snapshots.push_back({grid, u, t});
  };
  push_snapshot(0.0, y);
  res.peak.push_back({0.0, peak0});

  std::size_t next_level = 0, next_time = 0, since_filter = 0;
  double residual0 = -1.0;
  bool hit_threshold = false;

  StepObserver observer = [&](double t, std::vector<double>& u) {
    const double umax = *std::max_element(u.begin(), u.end());
    res.peak.push_back({t, umax});
    while (next_time < snap_times.size() && t >= snap_times[next_time]) {
      push_snapshot(t, u);
      ++next_time;
    }
    if (next_level < levels.size() && umax >= levels[next_level]) {
      push_snapshot(t, u);
      ++next_level;
    }
    if (options.filter_every > 0 && ++since_filter >= options.filter_every) {
      since_filter = 0;
      double resid = 0.0;
      std::size_t arg = 0;
      for (std::size_t j = 1; j + 1 < ny; ++j) {
        for (std::size_t i = 1; i + 1 < nx; ++i) {
          const double e = std::abs(u[grid.index(i, j)] - kernel_at(grid, u, i, j));
          if (e > resid) {
            resid = e;
            arg = grid.index(i, j);
          }
        }
      }
      if (residual0 < 0.0) residual0 = resid;
      // Grid-frequency spikes sit in a locally convex pit, so concavity
      // loss shows on the surrounding nodes, not at the spike itself.
      bool concavity_lost = false;
      const std::size_t ai = arg % nx, aj = arg / nx;
      for (std::size_t jj = std::max<std::size_t>(aj - 1, 1);
           jj <= std::min(aj + 1, ny - 2) && !concavity_lost; ++jj)
        for (std::size_t ii = std::max<std::size_t>(ai - 1, 1);
             ii <= std::min(ai + 1, nx - 2); ++ii)
          if (det_at(grid, u, ii, jj) < 0.0) {
            concavity_lost = true;
            break;
          }
      if (!res.instability.triggered && resid > 100.0 * residual0 &&
          resid > 1e-6 * std::abs(umax) && concavity_lost) {
        res.instability = {true, t, ai, aj};
      }
      if (options.theta > 0.0) {
        PlanarState tmp{grid, u, t};
        u = smooth(tmp, options.theta).u;
      }
    }
    if (umax >= options.u_max_threshold) {
      hit_threshold = true;
      push_snapshot(t, u);
      return false;
    }
    return true;
  };

  IntegrateOptions iopt;
  iopt.method = Method::rk45;
  iopt.rtol = options.rtol;
  iopt.atol = options.atol;
  iopt.store_trajectory = false;
  iopt.overflow_guard = std::max(1e12, 10.0 * options.u_max_threshold);

  // The step floor scales with the current span, so on underflow retry with
  // a contracted window before reporting the onset.
  double t_cur = 0.0;
  double chunk = options.t_max;
  Termination term = Termination::span_end;
  for (int calls = 0;; ++calls) {
    if (calls > 1000) fail(ErrorCode::no_convergence, "evolution stalled");
    const double t_end = std::min(options.t_max, t_cur + chunk);
    auto traj = integrate_observed(sys, y, t_cur, t_end, iopt, observer);
    y = traj.y_end();
    t_cur = traj.t_end();
    term = traj.termination;
    if (term == Termination::observer_stop || term == Termination::overflow) break;
    if (term == Termination::step_underflow) {
      chunk = (t_end - t_cur) * 1e-3;
      if (chunk < 1e3 * std::numeric_limits<double>::epsilon() *
                      std::max(t_cur, 1e-30))
        break;
      continue;
    }
    if (t_end >= options.t_max) break;
    chunk *= 10.0;
  }

  res.termination = hit_threshold ? Termination::observer_stop : term;
  push_snapshot(t_cur, y);

  std::vector<double> du(sys.dim);
  sys.rhs(t_cur, y.data(), du.data());
  std::size_t arg = 0;
  for (std::size_t k = 1; k < du.size(); ++k)
    if (std::abs(du[k]) > std::abs(du[arg])) arg = k;
  res.residual_i = arg % nx;
  res.residual_j = arg / nx;

  try {
    res.fit = fit_blowup(res.peak, params);
  } catch (const Error&) {
    res.fit = BlowupFit{};  // outcome stays undecided
  }
  return res;
}

ContourMetrics contour_metrics(const PlanarState& state, double level_fraction) {
  const PlanarGrid& g = state.grid;
  g.validate();
  if (state.u.size() != g.size())
    fail(ErrorCode::config_invalid, "field size does not match the grid");
  if (!(level_fraction > 0.0 && level_fraction < 1.0))
    fail(ErrorCode::config_invalid, "level fraction must lie in (0, 1)");
  const double umax = *std::max_element(state.u.begin(), state.u.end());
  if (!(umax > 0.0))
    fail(ErrorCode::config_invalid, "contour metrics need a positive peak");
  const double level = level_fraction * umax;

  double area = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  double px[8], py[8];
  for (std::size_t j = 0; j + 1 < g.ny; ++j) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const double cx[4] = {g.x(i), g.x(i + 1), g.x(i + 1), g.x(i)};
      const double cy[4] = {g.y(j), g.y(j), g.y(j + 1), g.y(j + 1)};
      const double cv[4] = {state.at(i, j), state.at(i + 1, j),
                            state.at(i + 1, j + 1), state.at(i, j + 1)};
      int m = 0;
      for (int k = 0; k < 4; ++k) {
        const int k2 = (k + 1) % 4;
        if (cv[k] >= level) {
          px[m] = cx[k];
          py[m] = cy[k];
          ++m;
        }
        if ((cv[k] - level) * (cv[k2] - level) < 0.0) {
          const double s = (level - cv[k]) / (cv[k2] - cv[k]);
          px[m] = cx[k] + s * (cx[k2] - cx[k]);
          py[m] = cy[k] + s * (cy[k2] - cy[k]);
          ++m;
        }
      }
      if (m < 3) continue;
      for (int k = 0; k < m; ++k) {
        const int k2 = (k + 1) % m;
        const double cross = px[k] * py[k2] - px[k2] * py[k];
        area += cross / 2.0;
        sx += cross * (px[k] + px[k2]) / 6.0;
        sy += cross * (py[k] + py[k2]) / 6.0;
        sxx += cross * (px[k] * px[k] + px[k] * px[k2] + px[k2] * px[k2]) / 12.0;
        syy += cross * (py[k] * py[k] + py[k] * py[k2] + py[k2] * py[k2]) / 12.0;
        sxy += cross *
               (2.0 * px[k] * py[k] + px[k] * py[k2] + px[k2] * py[k] +
                2.0 * px[k2] * py[k2]) /
               24.0;
      }
    }
  }
  if (!(area > 0.0))
    fail(ErrorCode::empty_level_set, "no node clears the requested level");

  const double mx = sx / area, my = sy / area;
  const double cxx = sxx / area - mx * mx;
  const double cyy = syy / area - my * my;
  const double cxy = sxy / area - mx * my;
  const double mean = 0.5 * (cxx + cyy);
  const double disc = std::sqrt(0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy);
  const double lo = std::max(mean - disc, 1e-300);

  ContourMetrics out;
  out.level = level;
  out.area = area;
  out.aspect_ratio = std::sqrt((mean + disc) / lo);
  out.orientation = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  return out;
}

NonradialProfile::NonradialProfile(RadialProfile profile, double a)
    : profile_(std::move(profile)), a_(a) {
  if (!(a > 0.0)) fail(ErrorCode::config_invalid, "stretch factor must be positive");
  if (profile_.kind != ProfileKind::regional &&
      profile_.kind != ProfileKind::single_point)
    fail(ErrorCode::config_invalid,
         "elliptic stretch needs a regional or single point profile");
  if (profile_.z.size() < 2)
    fail(ErrorCode::config_invalid, "profile carries no nodes");
  if (profile_.support) {
    const double ls = *profile_.support;
    ellipse_area_ = M_PI * ls * ls;
  }
}

double NonradialProfile::radial(double rho) const {
  const std::vector<double>& z = profile_.z;
  if (rho <= z.front()) return profile_.f.front();
  if (rho >= z.back()) {
    if (profile_.support) return 0.0;
    const double tail = profile_.tail_exponent_fit.value_or(
        -2.0 * profile_.params.d / (profile_.params.p - profile_.params.d));
    return profile_.f.back() * std::pow(rho / z.back(), tail);
  }
  const auto it = std::upper_bound(z.begin(), z.end(), rho);
  const std::size_t k = static_cast<std::size_t>(it - z.begin());
  const double h = z[k] - z[k - 1];
  const double s = (rho - z[k - 1]) / h;
  const double f0 = profile_.f[k - 1], f1 = profile_.f[k];
  const double d0 = profile_.fp[k - 1] * h, d1 = profile_.fp[k] * h;
  const double s2 = s * s, s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * d0 +
         (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * d1;
}

double NonradialProfile::operator()(double x, double y) const {
  const double xa = x / a_, ya = y * a_;
  return radial(std::sqrt(xa * xa + ya * ya));
}

void write_planar_csv(std::ostream& os, const PlanarState& state) {
  char buf[32];
  os << state.grid.nx << "," << state.grid.ny << "\n";
  for (std::size_t j = 0; j < state.grid.ny; ++j) {
    for (std::size_t i = 0; i < state.grid.nx; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", state.at(i, j));
      os << (i ? "," : "") << buf;
    }
    os << "\n";
  }
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  os.write(b, 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  os.write(b, 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
  return std::bit_cast<double>(v);
}

}  // namespace

void write_planar_mapl1(std::ostream& os, const PlanarState& state) {
  os.write("MAPL1", 5);
  put_u32(os, static_cast<std::uint32_t>(state.grid.nx));
  put_u32(os, static_cast<std::uint32_t>(state.grid.ny));
  put_f64(os, state.t);
  for (double v : state.u) put_f64(os, v);
}

PlanarState read_planar_mapl1(std::istream& is) {
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "MAPL1", 5) != 0)
    fail(ErrorCode::config_invalid, "not a MAPL1 dump");
  PlanarState state;
  state.grid.nx = get_u32(is);
  state.grid.ny = get_u32(is);
  state.grid.validate();
  state.t = get_f64(is);
  state.u.resize(state.grid.size());
  for (double& v : state.u) v = get_f64(is);
  if (!is) fail(ErrorCode::config_invalid, "truncated MAPL1 dump");
  return state;
}

}  // namespace blowup
