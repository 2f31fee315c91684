#include <cmath>
#include <vector>

#include "blowup/error.hpp"
#include "blowup/oscillation.hpp"
#include "doctest.h"

using namespace blowup;

namespace {

PkJet exp_jet(double gamma, double mu, double s) {
  const double e = std::exp(-mu * s);
  PkJet jet;
  jet.gamma = gamma;
  jet.phi = e;
  jet.dphi = -mu * e;
  jet.d2phi = mu * mu * e;
  jet.d3phi = -mu * mu * mu * e;
  jet.d4phi = mu * mu * mu * mu * e;
  return jet;
}

// On exponential jets every P_k reduces to a product over its factor roots,
// which pins all recursion coefficients at once.
double product_formula(int k, double gamma, double mu, double s) {
  double value = std::exp(-mu * s);
  for (int j = 0; j < k; ++j) value *= gamma - j - mu;
  return value;
}

}  // namespace

TEST_CASE("Pk polynomials match the exponential product formula") {
  const double gammas[] = {3.0, 4.5, 4.0, 2.7};
  const double mus[] = {-1.3, 0.0, 0.8, 2.0, 3.7, 5.1};
  const double ss[] = {-0.4, 0.0, 0.9};
  for (double g : gammas) {
    for (double mu : mus) {
      for (double s : ss) {
        const PkJet jet = exp_jet(g, mu, s);
        for (int k = 1; k <= 4; ++k) {
          CAPTURE(g);
          CAPTURE(mu);
          CAPTURE(k);
          const double expected = product_formula(k, g, mu, s);
          CHECK(eval_Pk(k, jet) ==
                doctest::Approx(expected).epsilon(1e-12).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("Pk worked values") {
  // e^{-gamma s} spans the kernel of P1 and of every later Pk
  for (double s : {-1.0, 0.0, 0.5}) {
    const PkJet jet = exp_jet(3.0, 3.0, s);
    CHECK(eval_Pk(1, jet) == doctest::Approx(0.0).scale(1.0));
    CHECK(eval_Pk(4, jet) == doctest::Approx(0.0).scale(1.0));
  }

  PkJet unit;
  unit.gamma = 3.0;
  unit.phi = 1.0;
  CHECK(eval_Pk(3, unit) == doctest::Approx(6.0));   // 3*2*1
  CHECK(eval_Pk(4, unit) == doctest::Approx(0.0).scale(1.0));  // (gamma-3)=0

  unit.gamma = 4.5;
  CHECK(eval_Pk(4, unit) == doctest::Approx(4.5 * 3.5 * 2.5 * 1.5));

  // e^{-(gamma-3)s} lies in the kernel of P4 but not of P3
  const PkJet mode = exp_jet(4.5, 1.5, 0.7);
  CHECK(eval_Pk(4, mode) == doctest::Approx(0.0).scale(1.0));
  CHECK(std::abs(eval_Pk(3, mode)) > 1.0);

  CHECK_THROWS_AS(eval_Pk(0, unit), Error);
  CHECK_THROWS_AS(eval_Pk(5, unit), Error);
}

TEST_CASE("phase plane slope worked value and singular loci") {
  const ProblemParams params{3.0, 2, 1e-5};
  CHECK(phase_plane_rhs(params, 0.0, 1.0) == doctest::Approx(-6.875));

  CHECK_THROWS_WITH_AS(phase_plane_rhs(params, 0.3, 0.0),
                       doctest::Contains("singular_locus"), Error);
  CHECK_THROWS_WITH_AS(phase_plane_rhs(params, 0.25, -1.0),
                       doctest::Contains("singular_locus"), Error);

  const ProblemParams bad{3.0, 3, 1e-5};
  CHECK_THROWS_WITH_AS(phase_plane_rhs(bad, 0.1, 0.2),
                       doctest::Contains("config_invalid"), Error);
}

TEST_CASE("phase plane slope is invariant under point reflection") {
  const ProblemParams params{3.0, 2, 1e-5};
  const double pts[][2] = {
      {0.01, 0.02}, {-0.3, 1.0}, {2.0, -0.5}, {0.7, 0.7}, {-0.02, -0.11}};
  for (const auto& pt : pts) {
    CAPTURE(pt[0]);
    const double fwd = phase_plane_rhs(params, pt[0], pt[1]);
    const double rev = phase_plane_rhs(params, -pt[0], -pt[1]);
    CHECK(fwd == doctest::Approx(rev).epsilon(1e-13));
  }
}

TEST_CASE("second order limit cycle converges to the frozen orbit") {
  const ProblemParams params{3.0, 2, 1e-5};
  const auto setup = make_oscillatory_setup(OscillatorOrder::second, params);
  CHECK(setup.gamma == doctest::Approx(4.0));

  const PeriodicOrbit orbit = find_limit_cycle(setup, {0.01, 0.0}, 200.0);
  CHECK(orbit.period == doctest::Approx(0.80810).epsilon(1e-3));
  CHECK(orbit.amplitude == doctest::Approx(0.0036076).epsilon(1e-2));
  CHECK(orbit.amplitude > 0.0);
  CHECK(orbit.convergence_iterations >= 2);
  CHECK(orbit.section == "phi'=0, phi>0");
  REQUIRE(orbit.samples.size() == orbit.s.size());
  REQUIRE(orbit.samples.size() >= 3);

  // closure of the sampled period: 1e-6 on phi, looser on derivatives
  // whose endpoint mismatch inherits the return-map tolerance
  const auto& first = orbit.samples.front();
  const auto& last = orbit.samples.back();
  CHECK(std::abs(first[0] - last[0]) < 1e-6);
  for (std::size_t j = 0; j < first.size(); ++j) {
    CHECK(std::abs(first[j] - last[j]) < 1e-4);
  }

  // a second start lands on the same cycle
  const PeriodicOrbit other = find_limit_cycle(setup, {-0.02, 0.01}, 200.0);
  CHECK(std::abs(other.period - orbit.period) < 1e-4);
}

TEST_CASE("sampled cycle satisfies the phase plane slope field") {
  const ProblemParams params{3.0, 2, 1e-5};
  const auto setup = make_oscillatory_setup(OscillatorOrder::second, params);
  const PeriodicOrbit orbit = find_limit_cycle(setup, {0.01, 0.0}, 200.0);

  // finite-difference slope between neighbouring samples against the
  // phase-plane formula, away from both singular loci
  std::size_t checked = 0;
  for (std::size_t i = 1; i < orbit.samples.size(); ++i) {
    const double phi0 = orbit.samples[i - 1][0];
    const double psi0 = orbit.samples[i - 1][1];
    const double phi1 = orbit.samples[i][0];
    const double psi1 = orbit.samples[i][1];
    const double phim = 0.5 * (phi0 + phi1);
    const double psim = 0.5 * (psi0 + psi1);
    if (std::abs(psim) < 5e-3) continue;
    if (std::abs(psim + 4.0 * phim) < 5e-3) continue;
    if (std::abs(phi1 - phi0) < 1e-9) continue;
    const double fd = (psi1 - psi0) / (phi1 - phi0);
    const double slope = phase_plane_rhs(params, phim, psim);
    CHECK(fd == doctest::Approx(slope).epsilon(2e-2));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("limit cycle is stable under perturbation of the return state") {
  const ProblemParams params{3.0, 2, 1e-5};
  const auto setup = make_oscillatory_setup(OscillatorOrder::second, params);
  const PeriodicOrbit orbit = find_limit_cycle(setup, {0.01, 0.0}, 200.0);

  const auto& state = orbit.samples.front();
  const std::vector<double> nudged{state[0] * 1.01,
                                   state[1] + 0.01 * state[0]};
  const PeriodicOrbit again = find_limit_cycle(setup, nudged, 200.0);
  CHECK(std::abs(again.period - orbit.period) / orbit.period < 1e-3);
}

TEST_CASE("measured period does not depend on the section") {
  const ProblemParams params{3.0, 2, 1e-5};
  const auto setup = make_oscillatory_setup(OscillatorOrder::second, params);
  CycleOptions tight;
  tight.tol = 1e-10;
  const PeriodicOrbit prime = find_limit_cycle(setup, {0.01, 0.0}, 400.0, tight);
  CycleOptions alt = tight;
  alt.section = SectionKind::phi_zero;
  const PeriodicOrbit zero = find_limit_cycle(setup, {0.01, 0.0}, 400.0, alt);
  CHECK(zero.section == "phi=0, phi'>0");
  CHECK(std::abs(prime.period - zero.period) / prime.period < 1e-6);
}

TEST_CASE("regional fourth order cycle is bounded and sign alternating") {
  const ProblemParams params{3.0, 2, 1e-5};
  const auto setup =
      make_oscillatory_setup(OscillatorOrder::fourth_regional, params, 1.0);
  CHECK(setup.gamma == doctest::Approx(3.0));
  CHECK(setup.lambda0 == doctest::Approx(1.0));

  const PeriodicOrbit orbit =
      find_limit_cycle(setup, {0.01, 0.0, 0.0, 0.0}, 400.0);
  CHECK(orbit.period == doctest::Approx(6.33053).epsilon(1e-3));
  CHECK(orbit.amplitude == doctest::Approx(0.070084).epsilon(1e-2));

  double phimin = 1e300, phimax = -1e300;
  for (const auto& row : orbit.samples) {
    phimin = std::min(phimin, row[0]);
    phimax = std::max(phimax, row[0]);
  }
  CHECK(phimin < 0.0);
  CHECK(phimax > 0.0);
  CHECK(std::abs(phimin + phimax) < 1e-3 * orbit.amplitude);

  const auto& first = orbit.samples.front();
  const auto& last = orbit.samples.back();
  CHECK(std::abs(first[0] - last[0]) < 1e-6);
  for (std::size_t j = 0; j < first.size(); ++j) {
    CHECK(std::abs(first[j] - last[j]) < 1e-4);
  }

  // a larger start contracts onto the same orbit
  const PeriodicOrbit big =
      find_limit_cycle(setup, {0.5, 0.0, 0.0, 0.0}, 400.0);
  CHECK(std::abs(big.period - orbit.period) / orbit.period < 1e-4);
}

TEST_CASE("single point fourth order cycle converges") {
  const ProblemParams params{3.0, 2, 1e-5};
  const auto setup =
      make_oscillatory_setup(OscillatorOrder::fourth_single_point, params);
  CHECK(setup.gamma == doctest::Approx(4.5));

  const PeriodicOrbit orbit =
      find_limit_cycle(setup, {0.01, 0.0, 0.0, 0.0}, 400.0);
  CHECK(orbit.period == doctest::Approx(1.05620).epsilon(1e-3));
  CHECK(orbit.amplitude == doctest::Approx(3.5558e-4).epsilon(2e-2));

  double phimin = 1e300, phimax = -1e300;
  for (const auto& row : orbit.samples) {
    phimin = std::min(phimin, row[0]);
    phimax = std::max(phimax, row[0]);
  }
  CHECK(phimin < 0.0);
  CHECK(phimax > 0.0);

  const auto& first = orbit.samples.front();
  const auto& last = orbit.samples.back();
  CHECK(std::abs(first[0] - last[0]) < 1e-6);
  for (std::size_t j = 0; j < first.size(); ++j) {
    CHECK(std::abs(first[j] - last[j]) < 1e-4);
  }
}

TEST_CASE("limit cycle input validation") {
  const ProblemParams params{3.0, 2, 1e-5};
  auto setup = make_oscillatory_setup(OscillatorOrder::second, params);

  CHECK_THROWS_WITH_AS(find_limit_cycle(setup, {0.01, 0.0, 0.0}, 100.0),
                       doctest::Contains("config_invalid"), Error);
  CHECK_THROWS_WITH_AS(find_limit_cycle(setup, {0.01, 0.0}, -5.0),
                       doctest::Contains("config_invalid"), Error);

  setup.gamma = 3.9;  // breaks the order table invariant
  CHECK_THROWS_WITH_AS(find_limit_cycle(setup, {0.01, 0.0}, 100.0),
                       doctest::Contains("config_invalid"), Error);
}

TEST_CASE("limit cycle failure modes") {
  const ProblemParams params{3.0, 2, 1e-5};
  const auto setup = make_oscillatory_setup(OscillatorOrder::second, params);

  // span shorter than one return
  CHECK_THROWS_WITH_AS(find_limit_cycle(setup, {0.01, 0.0}, 0.3),
                       doctest::Contains("no_cycle"), Error);

  // box tighter than the start state
  CycleOptions pinched;
  pinched.escape_bound = 5e-3;
  CHECK_THROWS_WITH_AS(find_limit_cycle(setup, {0.01, 0.0}, 100.0, pinched),
                       doctest::Contains("escaped"), Error);
}
