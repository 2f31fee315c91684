#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "blowup/radial.hpp"
#include "blowup/shooting.hpp"

namespace blowup {

// Uniform node-centered mesh on the unit square; the outermost nodes are the
// Dirichlet boundary and always carry the value 0.
struct PlanarGrid {
  std::size_t nx = 100;
  std::size_t ny = 100;

  double hx() const { return 1.0 / static_cast<double>(nx - 1); }
  double hy() const { return 1.0 / static_cast<double>(ny - 1); }
  double x(std::size_t i) const { return static_cast<double>(i) * hx(); }
  double y(std::size_t j) const { return static_cast<double>(j) * hy(); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  std::size_t size() const { return nx * ny; }

  // throws ErrorCode::config_invalid when either side has fewer than 3 nodes
  void validate() const;
};

struct PlanarState {
  PlanarGrid grid;
  std::vector<double> u;  // row-major, u[j*nx + i]
  double t = 0.0;

  double at(std::size_t i, std::size_t j) const { return u[grid.index(i, j)]; }
};

// Determinant of the discrete Hessian at interior nodes, zero on the
// boundary ring.  u_xx and u_yy use the 3-point second difference, u_xy the
// centered cross difference over the four diagonal neighbours, so the
// footprint is the full 9-point square and the value is second order and
// exact on quadratics.
std::vector<double> ma_det(const PlanarState& state);

// One blended pass of the separable averaging kernel (1,2,1;2,4,2;1,2,1)/16:
//   u <- (1-theta) u + theta (K*u)    on interior nodes, boundary untouched.
// The kernel symbol vanishes at the Nyquist mode, so the +-1 checkerboard is
// damped by the factor (1-theta) per pass while smooth fields change only at
// O(h^2).  theta must lie in [0, 1/2].
PlanarState smooth(const PlanarState& state, double theta);

struct Evolve2dOptions {
  double u_max_threshold = 1e6;  // stop once max u reaches this
  double t_max = 1.0;
  bool with_source = true;
  double rtol = 1e-6;
  double atol = 1e-6;
  std::size_t filter_every = 10;  // accepted steps between filter passes
  double theta = 0.05;            // filter blend; 0 disables filtering
  std::vector<double> snapshot_times;
};

// Checkerboard diagnostic: triggered when the residual u - K*u grows two
// orders past its starting level and the field has lost concavity at the
// offending node, which is how grid-frequency breakdown shows up.
struct InstabilityReport {
  bool triggered = false;
  double t = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
};

struct Evolve2dResult {
  std::vector<PlanarState> snapshots;
  std::vector<CenterSample> peak;  // running max of the field
  BlowupFit fit;                   // outcome undecided when no fit is possible
  InstabilityReport instability;
  Termination termination = Termination::span_end;
  // node of largest |du/dt| at the end, the onset location when the
  // integrator underflows
  std::size_t residual_i = 0;
  std::size_t residual_j = 0;
};

// Explicit adaptive integration of du/dt = -|D^2 u| + |u|^{p-1} u with
// Dirichlet data on the unit square; the averaging filter is applied every
// filter_every accepted steps.  Snapshots are taken at the requested times,
// at each decade of max u below the threshold, and at the final state.  The
// blow-up time is fitted from the max-u series exactly like the radial
// center fit; an unfittable series (no growth) leaves outcome undecided.
Evolve2dResult evolve_2d(const ProblemParams& params, const PlanarGrid& grid,
                         const std::vector<double>& u0,
                         const Evolve2dOptions& options = {});

struct ContourMetrics {
  double level = 0.0;
  double aspect_ratio = 1.0;  // >= 1
  double orientation = 0.0;   // radians in (-pi/2, pi/2], 0 = x aligned
  double area = 0.0;
};

// Region metrics of the superlevel set {u >= level_fraction * max u}: each
// grid cell contributes the polygon cut off by linear interpolation along
// its edges, and the accumulated area moments give the equivalent-ellipse
// aspect ratio and orientation.  Throws empty_level_set when no node clears
// the level.
ContourMetrics contour_metrics(const PlanarState& state, double level_fraction);

// Elliptic stretch F(sqrt((x/a)^2 + (a y)^2)) of a shot similarity profile,
// cubic Hermite interpolated from the profile nodes.  Compact profiles
// vanish beyond their support; decaying profiles continue with their fitted
// power tail.  The support ellipse has semi-axes (a L_S, L_S / a), so its
// area pi L_S^2 does not depend on a.
class NonradialProfile {
 public:
  NonradialProfile(RadialProfile profile, double a);

  double operator()(double x, double y) const;
  double radial(double rho) const;
  double stretch() const { return a_; }
  // pi L_S^2 for compactly supported profiles, 0 otherwise
  double ellipse_area() const { return ellipse_area_; }

 private:
  RadialProfile profile_;
  double a_ = 1.0;
  double ellipse_area_ = 0.0;
};

// Row-major CSV with a "nx,ny" header line; 17 significant digits.
void write_planar_csv(std::ostream& os, const PlanarState& state);

// Compact binary dump: magic "MAPL1", little-endian uint32 nx, ny, then the
// time and the field as little-endian 64-bit floats, row-major.
void write_planar_mapl1(std::ostream& os, const PlanarState& state);
PlanarState read_planar_mapl1(std::istream& is);

}  // namespace blowup
