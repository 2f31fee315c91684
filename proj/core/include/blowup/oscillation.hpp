#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "blowup/problem.hpp"

namespace blowup {

// Which oscillatory-component equation the setup integrates, written in the
// log variable s. The second-order form governs oscillations about the
// constant equilibrium of the gradient-regularized profile ODE; the two
// fourth-order forms govern the near-interface oscillations of the
// fourth-order problem (regional case and single-point case).
enum class OscillatorOrder { second, fourth_regional, fourth_single_point };

struct OscillatorySetup {
  OscillatorOrder order = OscillatorOrder::second;
  // Scaling exponent tied to the order: 2d/(d-1) for second,
  // 3 for fourth_regional, 9/2 for fourth_single_point.
  double gamma = 4.0;
  double lambda0 = 1.0;  // forcing coefficient, used by fourth_regional only
  ProblemParams params;
};

// Fills gamma from the order table above and validates params.
OscillatorySetup make_oscillatory_setup(OscillatorOrder order,
                                        const ProblemParams& params,
                                        double lambda0 = 1.0);

// Derivative jet (phi .. phi'''') at a point together with the gamma the
// P_k polynomials are built from.
struct PkJet {
  double gamma = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  double d2phi = 0.0;
  double d3phi = 0.0;
  double d4phi = 0.0;
};

// Linear differential polynomials P_1 = phi' + gamma*phi and
// P_{k+1} = P_k' + (gamma - k) P_k, evaluated on the jet. k in 1..4.
double eval_Pk(int k, const PkJet& jet);

// Slope field dpsi/dphi of the phase-plane reduction psi(phi) of the
// second-order component, d = 2 form only. Throws singular_locus when
// psi = 0 or psi + 4 phi = 0.
double phase_plane_rhs(const ProblemParams& params, double phi, double psi);

enum class SectionKind { phi_prime_zero, phi_zero };

struct CycleOptions {
  double tol = 1e-6;   // sup-norm agreement of consecutive return states
  double rtol = 1e-9;
  double atol = 1e-12;
  double escape_bound = 1e4;  // sup-norm box; leaving it raises escaped
  SectionKind section = SectionKind::phi_prime_zero;
  std::size_t sample_count = 1024;  // samples stored over one period
};

struct PeriodicOrbit {
  double period = 0.0;
  std::vector<double> s;  // sample offsets from the section hit, [0, period]
  std::vector<std::vector<double>> samples;  // state rows (phi, phi', ...)
  double amplitude = 0.0;                    // max |phi| over one period
  std::string section;
  std::size_t convergence_iterations = 0;  // section returns consumed
};

// Integrates the s-form equation forward from init (size 2 for second order,
// 4 otherwise), records successive crossings of the Poincare section, and
// declares convergence once two consecutive return states agree within tol.
// The period is the s gap between those converged returns. Throws no_cycle
// when the returns fail to contract within s_span and escaped when the
// trajectory leaves the box.
PeriodicOrbit find_limit_cycle(const OscillatorySetup& setup,
                               const std::vector<double>& init, double s_span,
                               const CycleOptions& options = {});

}  // namespace blowup
