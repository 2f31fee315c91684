#include "blowup/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "blowup/error.hpp"

namespace blowup {

namespace {

// 17 significant digits round-trip a double exactly
std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double sixth_root(double v) { return std::pow(v, 1.0 / 6.0); }

}  // namespace

void ScaledFamilyParams::validate() const {
  if (a == 0.0 || b == 0.0 || c == 0.0)
    fail(ErrorCode::config_invalid, "scaling factors a, b, c must be nonzero");
  if (!(d_param > 0.0))
    fail(ErrorCode::config_invalid, "interface constant must be positive");
  if (!(T > 0.0))
    fail(ErrorCode::config_invalid, "time shift must be positive");
}

double source_type(double d_param, double r, double t) {
  return source_type_jet(d_param, r, t).u;
}

SourceJet source_type_jet(double d_param, double r, double t) {
  if (!(d_param > 0.0))
    fail(ErrorCode::config_invalid, "interface constant must be positive");
  if (!(t > 0.0))
    fail(ErrorCode::config_invalid, "source-type solution needs t > 0");
  const double s = 1.0 / std::cbrt(t);  // t^{-1/3}
  const double w = d_param * d_param - r * r * s;
  SourceJet jet;
  if (w <= 0.0) return jet;
  jet.u = s * w * w / 48.0;
  jet.ur = -s * s * w * r / 12.0;
  jet.urr = -s * s * (w - 2.0 * r * r * s) / 12.0;
  jet.ut = s * w * (2.0 * r * r * s - w) / (144.0 * t);
  return jet;
}

double scaled_family(const ScaledFamilyParams& params, double x, double y,
                     double t) {
  return scaled_family_jet(params, x, y, t).u;
}

FamilyJet scaled_family_jet(const ScaledFamilyParams& params, double x,
                            double y, double t) {
  if (params.a == 0.0 || params.b == 0.0 || params.c == 0.0)
    fail(ErrorCode::config_invalid, "scaling factors a, b, c must be nonzero");
  if (!(params.d_param > 0.0))
    fail(ErrorCode::config_invalid, "interface constant must be positive");
  const double s = params.T + t;
  if (!(s > 0.0))
    fail(ErrorCode::config_invalid, "scaled family needs T + t > 0");

  const double c13 = std::cbrt(params.c);
  const double sinv13 = 1.0 / std::cbrt(s);
  const double pref =
      params.a * params.a * params.b * params.b / (48.0 * c13 * c13);
  const double g = c13 * sinv13;  // coefficient of the quadratic form
  const double xa = x / params.a, yb = y / params.b;
  const double rho = xa * xa + yb * yb;
  const double w = params.d_param * params.d_param - g * rho;

  FamilyJet jet;
  if (w <= 0.0) return jet;
  const double base = pref * sinv13;  // u = base w^2
  jet.u = base * w * w;
  const double a2 = params.a * params.a, b2 = params.b * params.b;
  jet.ux = -4.0 * base * g * w * x / a2;
  jet.uy = -4.0 * base * g * w * y / b2;
  jet.uxx = -4.0 * base * g * (w - 2.0 * g * x * x / a2) / a2;
  jet.uyy = -4.0 * base * g * (w - 2.0 * g * y * y / b2) / b2;
  jet.uxy = 8.0 * base * g * g * x * y / (a2 * b2);
  jet.ut = base * w * (2.0 * g * rho - w) / (3.0 * s);
  return jet;
}

std::array<double, 2> family_support_axes(const ScaledFamilyParams& params,
                                          double t) {
  if (!(params.c > 0.0))
    fail(ErrorCode::config_invalid,
         "support is compact only for positive time scalings");
  const double s = params.T + t;
  if (!(s > 0.0))
    fail(ErrorCode::config_invalid, "scaled family needs T + t > 0");
  const double common = params.d_param * sixth_root(s) / sixth_root(params.c);
  return {std::fabs(params.a) * common, std::fabs(params.b) * common};
}

double family_mass(const ScaledFamilyParams& params) {
  if (!(params.c > 0.0))
    fail(ErrorCode::config_invalid,
         "mass is finite only for positive time scalings");
  if (!(params.d_param > 0.0))
    fail(ErrorCode::config_invalid, "interface constant must be positive");
  const double a3 = std::pow(std::fabs(params.a), 3);
  const double b3 = std::pow(std::fabs(params.b), 3);
  const double d6 = std::pow(params.d_param, 6);
  return std::numbers::pi * a3 * b3 * d6 / (144.0 * params.c);
}

namespace {

// peak of a family member at probe time t
double family_peak(const ScaledFamilyParams& params, double t) {
  return scaled_family(params, 0.0, 0.0, t);
}

}  // namespace

ComparisonReport comparison_witness(const ScaledFamilyParams& params,
                                    std::size_t grid_n,
                                    const std::vector<double>& t_probe) {
  params.validate();
  if (!(params.c > 0.0))
    fail(ErrorCode::config_invalid,
         "comparison needs a compactly supported member, c > 0");
  if (grid_n < 3)
    fail(ErrorCode::config_invalid, "sample grid needs at least 3 nodes");

  const ScaledFamilyParams ref{};

  ComparisonReport report;
  report.params = params;
  const double c16 = sixth_root(params.c);
  const double ad = std::fabs(params.a) * params.d_param;
  const double bd = std::fabs(params.b) * params.d_param;
  const double q1 = ad * sixth_root(params.T) / c16;
  const double q2 = bd * sixth_root(params.T) / c16;
  const double q3 = params.a * params.a * params.b * params.b *
                    std::pow(params.d_param, 4) /
                    (std::cbrt(params.c * params.c) * std::cbrt(params.T));
  const double q4 = ad / c16;
  report.inequality_values = {q1, q2, q3, q4};

  const auto star_axes = [&](double t) { return family_support_axes(params, t); };
  const auto ref_axis = [](double t) { return sixth_root(1.0 + t); };
  const auto slack = [&](double t) {
    return 1e-12 * (1.0 + family_peak(params, t) + family_peak(ref, t));
  };

  // a point fails the ordering when the member exceeds the unit member
  const auto violates_at = [&](double x, double y, double t) {
    return scaled_family(params, x, y, t) >
           scaled_family(ref, x, y, t) + slack(t);
  };
  const auto sweep_finds_violation = [&](double t) {
    const auto ax = star_axes(t);
    const double hx = 1.05 * std::max(ax[0], ref_axis(t));
    const double hy = 1.05 * std::max(ax[1], ref_axis(t));
    for (std::size_t j = 0; j < grid_n; ++j) {
      const double y = -hy + 2.0 * hy * static_cast<double>(j) /
                                 static_cast<double>(grid_n - 1);
      for (std::size_t i = 0; i < grid_n; ++i) {
        const double x = -hx + 2.0 * hx * static_cast<double>(i) /
                                   static_cast<double>(grid_n - 1);
        if (violates_at(x, y, t)) return true;
      }
    }
    return false;
  };

  report.initial_ordering_holds = !sweep_finds_violation(0.0);

  std::vector<double> probes = t_probe;
  if (probes.empty()) {
    if (q4 > 1.0) {
      // the interface ratio q4 (T+t)^{1/6} / (1+t)^{1/6} crosses 1 at t_cross
      const double q46 = std::pow(q4, 6);
      const double t_cross = (1.0 - q46 * params.T) / (q46 - 1.0);
      if (t_cross > 0.0)
        probes = {1.05 * t_cross, 1.5 * t_cross, 3.0 * t_cross,
                  10.0 * t_cross, 100.0 * t_cross};
      else
        probes = {1e-3, 1e-2, 0.1, 1.0, 10.0};
    } else {
      probes = {0.01, 0.1, 1.0, 10.0, 100.0};
    }
  }

  for (double t : probes) {
    if (!(t > -params.T) || !(t > -1.0)) continue;
    // the proof's argument: beyond the unit member's interface on an axis
    // but still inside the member's, the ordering fails outright
    const auto ax = star_axes(t);
    const double rx = ref_axis(t);
    bool found = false;
    if (ax[0] > rx) found = violates_at(0.5 * (ax[0] + rx), 0.0, t);
    if (!found && ax[1] > rx) found = violates_at(0.0, 0.5 * (ax[1] + rx), t);
    if (!found) found = violates_at(0.0, 0.0, t);
    if (!found) found = sweep_finds_violation(t);
    if (found) {
      report.ordering_violated_at = t;
      break;
    }
  }
  return report;
}

std::string to_json(const ComparisonReport& report) {
  std::string out = "{\"params\":{";
  out += "\"a\":" + num17(report.params.a);
  out += ",\"b\":" + num17(report.params.b);
  out += ",\"c\":" + num17(report.params.c);
  out += ",\"d_param\":" + num17(report.params.d_param);
  out += ",\"T\":" + num17(report.params.T);
  out += "},\"inequality_values\":[";
  for (std::size_t k = 0; k < report.inequality_values.size(); ++k) {
    if (k) out += ",";
    out += num17(report.inequality_values[k]);
  }
  out += "],\"initial_ordering_holds\":";
  out += report.initial_ordering_holds ? "true" : "false";
  out += ",\"ordering_violated_at\":";
  out += report.ordering_violated_at ? num17(*report.ordering_violated_at)
                                     : "null";
  out += "}";
  return out;
}

HessianDivergence hessian_divergence(const PlanarState& state) {
  const PlanarGrid& grid = state.grid;
  grid.validate();
  if (grid.nx < 5 || grid.ny < 5)
    fail(ErrorCode::config_invalid,
         "divergence check needs at least 5 nodes per side");
  if (state.u.size() != grid.size())
    fail(ErrorCode::config_invalid, "field size does not match the grid");

  const double hx = grid.hx(), hy = grid.hy();
  HessianDivergence result;
  result.vx.assign(grid.size(), 0.0);
  result.vy.assign(grid.size(), 0.0);
  result.divergence.assign(grid.size(), 0.0);
  result.det = ma_det(state);

  const auto& u = state.u;
  const auto idx = [&](std::size_t i, std::size_t j) { return grid.index(i, j); };
  for (std::size_t j = 1; j + 1 < grid.ny; ++j) {
    for (std::size_t i = 1; i + 1 < grid.nx; ++i) {
      const double ux = (u[idx(i + 1, j)] - u[idx(i - 1, j)]) / (2.0 * hx);
      const double uy = (u[idx(i, j + 1)] - u[idx(i, j - 1)]) / (2.0 * hy);
      const double uxx =
          (u[idx(i + 1, j)] - 2.0 * u[idx(i, j)] + u[idx(i - 1, j)]) / (hx * hx);
      const double uyy =
          (u[idx(i, j + 1)] - 2.0 * u[idx(i, j)] + u[idx(i, j - 1)]) / (hy * hy);
      const double uxy = (u[idx(i + 1, j + 1)] - u[idx(i + 1, j - 1)] -
                          u[idx(i - 1, j + 1)] + u[idx(i - 1, j - 1)]) /
                         (4.0 * hx * hy);
      result.vx[idx(i, j)] = 0.5 * (ux * uyy - uy * uxy);
      result.vy[idx(i, j)] = 0.5 * (uy * uxx - ux * uxy);
    }
  }

  for (std::size_t j = 2; j + 2 < grid.ny; ++j) {
    for (std::size_t i = 2; i + 2 < grid.nx; ++i) {
      const double div =
          (result.vx[idx(i + 1, j)] - result.vx[idx(i - 1, j)]) / (2.0 * hx) +
          (result.vy[idx(i, j + 1)] - result.vy[idx(i, j - 1)]) / (2.0 * hy);
      result.divergence[idx(i, j)] = div;
      const double mismatch = std::fabs(div - result.det[idx(i, j)]);
      if (mismatch > result.max_mismatch) {
        result.max_mismatch = mismatch;
        result.argmax_i = i;
        result.argmax_j = j;
      }
    }
  }
  return result;
}

}  // namespace blowup
