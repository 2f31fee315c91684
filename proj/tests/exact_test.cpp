#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <random>

#include "blowup/error.hpp"
#include "blowup/exact.hpp"

using namespace blowup;

namespace {

constexpr double kPi = 3.14159265358979323846;

// the counterexample parameters: narrow in y, sped-up time, small shift
const ScaledFamilyParams witness_params{1.0, 0.125, 2.0, 2.0, 0.02};

PlanarState field_on(std::size_t nx, std::size_t ny,
                     double (*f)(double, double)) {
  PlanarState st;
  st.grid = PlanarGrid{nx, ny};
  st.u.assign(st.grid.size(), 0.0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      st.u[st.grid.index(i, j)] = f(st.grid.x(i), st.grid.y(j));
  return st;
}

}  // namespace

TEST_CASE("the source type solution matches its closed form and support") {
  CHECK(source_type(1.0, 0.0, 1.0) == doctest::Approx(1.0 / 48.0).epsilon(1e-14));

  const double d = 1.3, t = 2.7;
  const double interface = d * std::pow(t, 1.0 / 6.0);
  CHECK(source_type(d, 0.8 * interface, t) > 0.0);
  CHECK(source_type(d, interface, t) == 0.0);
  CHECK(source_type(d, interface * (1.0 + 1e-12), t) == 0.0);
  CHECK(source_type(d, 5.0 * interface, t) == 0.0);

  // peak decays like t^{-1/3}
  CHECK(source_type(d, 0.0, 8.0) ==
        doctest::Approx(0.5 * source_type(d, 0.0, 1.0)).epsilon(1e-13));

  CHECK_THROWS_AS(source_type(1.0, 0.5, 0.0), Error);
  CHECK_THROWS_AS(source_type(1.0, 0.5, -1.0), Error);
  CHECK_THROWS_AS(source_type(0.0, 0.5, 1.0), Error);
  CHECK_THROWS_AS(source_type(-2.0, 0.5, 1.0), Error);
}

TEST_CASE("the source type solution satisfies the radial flow equation") {
  std::mt19937 rng(20260814);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double d = 0.7 + 1.5 * uni(rng);
    const double t = 0.4 + 2.6 * uni(rng);
    const double r = (0.02 + 0.96 * uni(rng)) * d * std::pow(t, 1.0 / 6.0);
    const auto jet = source_type_jet(d, r, t);
    worst = std::max(worst, std::fabs(jet.ut + jet.ur * jet.urr / r));
  }
  CHECK(worst < 1e-10);

  // outside the support every component vanishes
  const auto far = source_type_jet(1.0, 3.0, 1.0);
  CHECK(far.u == 0.0);
  CHECK(far.ur == 0.0);
  CHECK(far.urr == 0.0);
  CHECK(far.ut == 0.0);
}

TEST_CASE("the scaled family reduces to the source type at identity parameters") {
  ScaledFamilyParams id{1.0, 1.0, 1.0, 1.4, 0.0};
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  std::uniform_real_distribution<double> ut(0.3, 2.0);
  for (int k = 0; k < 200; ++k) {
    const double x = uni(rng), y = uni(rng), t = ut(rng);
    const double expect = source_type(1.4, std::hypot(x, y), t);
    CHECK(scaled_family(id, x, y, t) ==
          doctest::Approx(expect).epsilon(1e-14));
  }

  // T only shifts the time origin
  ScaledFamilyParams shifted = id;
  shifted.T = 0.7;
  CHECK(scaled_family(shifted, 0.3, -0.2, 0.5) ==
        doctest::Approx(scaled_family(id, 0.3, -0.2, 1.2)).epsilon(1e-15));

  CHECK_THROWS_AS(scaled_family(id, 0.0, 0.0, 0.0), Error);
  CHECK_THROWS_AS(scaled_family(id, 0.0, 0.0, -1.0), Error);
  CHECK_THROWS_AS(scaled_family(ScaledFamilyParams{0.0, 1.0, 1.0, 1.0, 1.0},
                                0.0, 0.0, 0.5),
                  Error);
}

TEST_CASE("the scaled family satisfies the planar flow equation") {
  const ScaledFamilyParams sets[4] = {witness_params,
                                      {1.7, 0.6, 3.2, 1.1, 0.5},
                                      {0.8, 1.9, 0.37, 2.3, 1.25},
                                      {-1.2, 0.9, 2.0, 1.0, 0.3}};
  std::mt19937 rng(20260814);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto& ps = sets[k % 4];
    const double t = 2.0 * uni(rng);
    const auto axes = family_support_axes(ps, t);
    const double phi = 2.0 * kPi * uni(rng);
    const double fr = 0.98 * std::sqrt(uni(rng));
    const auto jet = scaled_family_jet(ps, axes[0] * fr * std::cos(phi),
                                       axes[1] * fr * std::sin(phi), t);
    worst = std::max(worst,
                     std::fabs(jet.ut + jet.uxx * jet.uyy - jet.uxy * jet.uxy));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("hand derivatives agree with finite differences") {
  const double h = 1e-4;

  const double d = 1.3, t = 1.7;
  const double r = 0.5 * d * std::pow(t, 1.0 / 6.0);
  const auto sj = source_type_jet(d, r, t);
  const auto s = [&](double rr, double tt) { return source_type(d, rr, tt); };
  CHECK((s(r + h, t) - s(r - h, t)) / (2.0 * h) ==
        doctest::Approx(sj.ur).epsilon(1e-6));
  CHECK((s(r + h, t) - 2.0 * s(r, t) + s(r - h, t)) / (h * h) ==
        doctest::Approx(sj.urr).epsilon(1e-5));
  CHECK((s(r, t + h) - s(r, t - h)) / (2.0 * h) ==
        doctest::Approx(sj.ut).epsilon(1e-6));

  const auto& ps = witness_params;
  const double x = 0.31, y = 0.05, tf = 0.4;
  const auto fj = scaled_family_jet(ps, x, y, tf);
  REQUIRE(fj.u > 0.0);
  const auto f = [&](double xx, double yy, double tt) {
    return scaled_family(ps, xx, yy, tt);
  };
  CHECK((f(x + h, y, tf) - f(x - h, y, tf)) / (2.0 * h) ==
        doctest::Approx(fj.ux).epsilon(1e-6));
  CHECK((f(x, y + h, tf) - f(x, y - h, tf)) / (2.0 * h) ==
        doctest::Approx(fj.uy).epsilon(1e-6));
  CHECK((f(x, y, tf + h) - f(x, y, tf - h)) / (2.0 * h) ==
        doctest::Approx(fj.ut).epsilon(1e-6));
  CHECK((f(x + h, y, tf) - 2.0 * f(x, y, tf) + f(x - h, y, tf)) / (h * h) ==
        doctest::Approx(fj.uxx).epsilon(1e-4));
  CHECK((f(x, y + h, tf) - 2.0 * f(x, y, tf) + f(x, y - h, tf)) / (h * h) ==
        doctest::Approx(fj.uyy).epsilon(1e-4));
  CHECK((f(x + h, y + h, tf) - f(x + h, y - h, tf) - f(x - h, y + h, tf) +
         f(x - h, y - h, tf)) /
            (4.0 * h * h) ==
        doctest::Approx(fj.uxy).epsilon(1e-4));
}

TEST_CASE("the support ellipse grows on the sixth root law") {
  const auto& ps = witness_params;
  for (double t : {0.0, 1.0, 10.0}) {
    const auto axes = family_support_axes(ps, t);
    CHECK(scaled_family(ps, 0.999 * axes[0], 0.0, t) > 0.0);
    CHECK(scaled_family(ps, 1.001 * axes[0], 0.0, t) == 0.0);
    CHECK(scaled_family(ps, 0.0, 0.999 * axes[1], t) > 0.0);
    CHECK(scaled_family(ps, 0.0, 1.001 * axes[1], t) == 0.0);
    CHECK(axes[0] / axes[1] == doctest::Approx(8.0).epsilon(1e-14));
  }

  const auto a0 = family_support_axes(ps, 0.0);
  const auto a1 = family_support_axes(ps, 1.0);
  CHECK(a1[0] / a0[0] ==
        doctest::Approx(std::pow(1.02 / 0.02, 1.0 / 6.0)).epsilon(1e-14));
  // at t = 0 the x semi-axis equals the first comparison ratio
  CHECK(a0[0] == doctest::Approx(0.92831776672255584).epsilon(1e-12));

  CHECK_THROWS_AS(family_support_axes(
                      ScaledFamilyParams{1.0, 1.0, -2.0, 1.0, 1.0}, 0.0),
                  Error);
}

TEST_CASE("the mass integral is conserved and matches the closed form") {
  const auto& ps = witness_params;
  const double closed = family_mass(ps);
  CHECK(closed == doctest::Approx(kPi / 2304.0).epsilon(1e-14));

  // polar quadrature treats the solution as a black box: Simpson radially
  // (the integrand is polynomial in the radius), uniform angles
  const auto quad_mass = [&](double t) {
    const auto axes = family_support_axes(ps, t);
    const int nr = 2000, nphi = 256;
    double total = 0.0;
    for (int a = 0; a < nphi; ++a) {
      const double phi = 2.0 * kPi * a / nphi;
      double line = 0.0;
      for (int i = 0; i <= nr; ++i) {
        const double R = static_cast<double>(i) / nr;
        const double w = (i == 0 || i == nr) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        line += w * R *
                scaled_family(ps, axes[0] * R * std::cos(phi),
                              axes[1] * R * std::sin(phi), t);
      }
      total += line * (1.0 / nr) / 3.0;
    }
    return total * (2.0 * kPi / nphi) * axes[0] * axes[1];
  };

  const double m0 = quad_mass(0.0);
  CHECK(m0 == doctest::Approx(closed).epsilon(1e-10));
  CHECK(quad_mass(1.0) == doctest::Approx(m0).epsilon(1e-8));
  CHECK(quad_mass(10.0) == doctest::Approx(m0).epsilon(1e-8));

  CHECK_THROWS_AS(family_mass(ScaledFamilyParams{1.0, 1.0, -1.0, 1.0, 1.0}),
                  Error);
}

TEST_CASE("axis and time scalings form a group") {
  // rescaling space by (alpha, beta) and time by gamma maps a member to the
  // member with multiplied parameters; T picks up the time factor
  const auto rescaled = [](const ScaledFamilyParams& p, double alpha,
                           double beta, double gamma) {
    return ScaledFamilyParams{alpha * p.a, beta * p.b, gamma * p.c, p.d_param,
                              gamma * p.T};
  };
  const ScaledFamilyParams base{1.0, 1.0, 1.0, 1.2, 0.5};

  std::mt19937 rng(4711);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double alpha = 1.6, beta = -0.7, gamma = 2.3;
  const auto mapped = rescaled(base, alpha, beta, gamma);
  for (int k = 0; k < 100; ++k) {
    const double x = 2.0 * uni(rng), y = 2.0 * uni(rng);
    const double t = 1.5 * (uni(rng) + 1.0);
    const double pushed = (alpha * alpha * beta * beta / gamma) *
                          scaled_family(base, x / alpha, y / beta, t / gamma);
    CHECK(scaled_family(mapped, x, y, t) ==
          doctest::Approx(pushed).epsilon(1e-13));
  }

  // two rescalings compose into the product rescaling
  const auto twice = rescaled(rescaled(base, 1.3, 0.4, 1.7), 0.6, 2.5, 0.9);
  const auto once = rescaled(base, 1.3 * 0.6, 0.4 * 2.5, 1.7 * 0.9);
  CHECK(twice.a == doctest::Approx(once.a).epsilon(1e-15));
  CHECK(twice.b == doctest::Approx(once.b).epsilon(1e-15));
  CHECK(twice.c == doctest::Approx(once.c).epsilon(1e-15));
  CHECK(twice.T == doctest::Approx(once.T).epsilon(1e-15));
  for (int k = 0; k < 50; ++k) {
    const double x = uni(rng), y = uni(rng), t = uni(rng) + 1.1;
    CHECK(scaled_family(twice, x, y, t) ==
          doctest::Approx(scaled_family(once, x, y, t)).epsilon(1e-13));
  }
}

TEST_CASE("the comparison witness reproduces the counterexample") {
  const auto report = comparison_witness(witness_params);

  CHECK(report.inequality_values[0] ==
        doctest::Approx(0.92831776672255584).epsilon(1e-10));
  CHECK(report.inequality_values[1] ==
        doctest::Approx(0.11603972084031948).epsilon(1e-10));
  CHECK(report.inequality_values[2] ==
        doctest::Approx(0.58019860420159741).epsilon(1e-10));
  CHECK(report.inequality_values[3] ==
        doctest::Approx(1.7817974362806785).epsilon(1e-10));
  CHECK(report.inequality_values[0] < 1.0);
  CHECK(report.inequality_values[1] < 1.0);
  CHECK(report.inequality_values[2] < 1.0);
  CHECK(report.inequality_values[3] > 1.0);

  CHECK(report.initial_ordering_holds);
  REQUIRE(report.ordering_violated_at.has_value());

  // the supports reorder at (1 - 32 T) / 31; the violation must sit just past
  const double t_cross = (1.0 - 32.0 * 0.02) / 31.0;
  const double tv = *report.ordering_violated_at;
  CHECK(tv > t_cross);
  CHECK(tv < 2.0 * t_cross);

  // re-verify the reported violation directly between the two interfaces
  const double star_edge = family_support_axes(witness_params, tv)[0];
  const double ref_edge = std::pow(1.0 + tv, 1.0 / 6.0);
  REQUIRE(star_edge > ref_edge);
  const double xm = 0.5 * (star_edge + ref_edge);
  CHECK(scaled_family(witness_params, xm, 0.0, tv) >
        scaled_family(ScaledFamilyParams{}, xm, 0.0, tv));

  CHECK_THROWS_AS(comparison_witness(witness_params, 2), Error);
  CHECK_THROWS_AS(
      comparison_witness(ScaledFamilyParams{1.0, 1.0, -2.0, 1.0, 1.0}), Error);
}

TEST_CASE("comparison is not violated without an interface excess") {
  // the unit member against itself: ordered forever, all ratios exactly 1
  const auto self = comparison_witness(ScaledFamilyParams{});
  CHECK(self.initial_ordering_holds);
  CHECK(!self.ordering_violated_at.has_value());
  for (double q : self.inequality_values)
    CHECK(q == doctest::Approx(1.0).epsilon(1e-14));

  // interface ratio below 1: the member stays inside and below
  const auto low = comparison_witness(ScaledFamilyParams{0.5, 1.0, 2.0, 1.0, 1.0});
  CHECK(low.initial_ordering_holds);
  CHECK(!low.ordering_violated_at.has_value());
  CHECK(low.inequality_values[3] ==
        doctest::Approx(0.5 / std::pow(2.0, 1.0 / 6.0)).epsilon(1e-14));

  // too small a time shift inflates the peak: ordering fails at t = 0
  ScaledFamilyParams early = witness_params;
  early.T = 0.002;
  const auto hot = comparison_witness(early);
  CHECK(!hot.initial_ordering_holds);
  CHECK(hot.inequality_values[2] > 1.0);
  CHECK(hot.ordering_violated_at.has_value());
}

TEST_CASE("the violation invariant holds over random admissible parameters") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int hits = 0;
  for (int k = 0; k < 3000 && hits < 20; ++k) {
    ScaledFamilyParams p;
    p.a = 0.4 + 2.1 * uni(rng);
    p.b = 0.05 + 0.8 * uni(rng);
    p.c = 0.5 + 3.5 * uni(rng);
    p.d_param = 0.5 + 1.7 * uni(rng);
    p.T = 0.05 + 0.85 * uni(rng);
    const double c16 = std::pow(p.c, 1.0 / 6.0);
    const double q1 = p.a * p.d_param * std::pow(p.T, 1.0 / 6.0) / c16;
    const double q2 = p.b * p.d_param * std::pow(p.T, 1.0 / 6.0) / c16;
    const double q3 = p.a * p.a * p.b * p.b * std::pow(p.d_param, 4.0) /
                      (std::cbrt(p.c * p.c) * std::cbrt(p.T));
    const double q4 = p.a * p.d_param / c16;
    if (!(q1 < 0.98 && q2 < 0.98 && q3 < 0.98 && q4 > 1.02)) continue;
    ++hits;
    const auto report = comparison_witness(p, 101);
    CHECK(report.initial_ordering_holds);
    CHECK(report.ordering_violated_at.has_value());
  }
  REQUIRE(hits == 20);
}

TEST_CASE("the comparison report serializes to json") {
  const auto report = comparison_witness(witness_params);
  const auto parsed = nlohmann::json::parse(to_json(report));

  CHECK(parsed["params"]["a"].get<double>() == 1.0);
  CHECK(parsed["params"]["b"].get<double>() == 0.125);
  CHECK(parsed["params"]["c"].get<double>() == 2.0);
  CHECK(parsed["params"]["d_param"].get<double>() == 2.0);
  CHECK(parsed["params"]["T"].get<double>() == 0.02);
  REQUIRE(parsed["inequality_values"].size() == 4);
  for (int k = 0; k < 4; ++k)
    CHECK(parsed["inequality_values"][k].get<double>() ==
          doctest::Approx(report.inequality_values[k]).epsilon(1e-15));
  CHECK(parsed["initial_ordering_holds"].get<bool>());
  CHECK(parsed["ordering_violated_at"].get<double>() ==
        doctest::Approx(*report.ordering_violated_at).epsilon(1e-15));

  const auto self = nlohmann::json::parse(
      to_json(comparison_witness(ScaledFamilyParams{})));
  CHECK(self["ordering_violated_at"].is_null());
}

TEST_CASE("the hessian divergence identity is stencil exact on quadratics") {
  const auto bowl = field_on(41, 33, [](double x, double y) {
    return x * x + y * y;
  });
  const auto hd = hessian_divergence(bowl);
  CHECK(hd.max_mismatch < 1e-10);
  const auto& g = bowl.grid;
  for (std::size_t j = 2; j + 2 < g.ny; j += 7) {
    for (std::size_t i = 2; i + 2 < g.nx; i += 7) {
      CHECK(hd.vx[g.index(i, j)] ==
            doctest::Approx(2.0 * g.x(i)).epsilon(1e-11));
      CHECK(hd.vy[g.index(i, j)] ==
            doctest::Approx(2.0 * g.y(j)).epsilon(1e-11));
      CHECK(hd.divergence[g.index(i, j)] == doctest::Approx(4.0).epsilon(1e-11));
      CHECK(hd.det[g.index(i, j)] == doctest::Approx(4.0).epsilon(1e-11));
    }
  }
  // outer rings carry no stencil values
  CHECK(hd.vx[g.index(0, 5)] == 0.0);
  CHECK(hd.divergence[g.index(1, 5)] == 0.0);

  const auto saddle = field_on(21, 21, [](double x, double y) { return x * y; });
  const auto hs = hessian_divergence(saddle);
  CHECK(hs.max_mismatch < 1e-11);
  CHECK(hs.divergence[saddle.grid.index(10, 10)] ==
        doctest::Approx(-1.0).epsilon(1e-12));

  PlanarState tiny;
  tiny.grid = PlanarGrid{4, 6};
  tiny.u.assign(tiny.grid.size(), 0.0);
  CHECK_THROWS_AS(hessian_divergence(tiny), Error);
  PlanarState wrong;
  wrong.grid = PlanarGrid{8, 8};
  wrong.u.assign(17, 0.0);
  CHECK_THROWS_AS(hessian_divergence(wrong), Error);
}

TEST_CASE("the hessian divergence mismatch converges at second order") {
  const auto quartic = [](double x, double y) { return x * x * y * y; };
  const auto bump = [](double x, double y) {
    return std::sin(kPi * x) * std::sin(kPi * y) * std::exp(x - y);
  };

  const auto m51q = hessian_divergence(field_on(51, 51, quartic));
  const auto m101q = hessian_divergence(field_on(101, 101, quartic));
  CHECK(m51q.max_mismatch / m101q.max_mismatch > 3.5);
  CHECK(m51q.max_mismatch / m101q.max_mismatch < 4.2);

  // analytic check at the grid centre: V = (-2x^3y^2, -2x^2y^3), div = -12x^2y^2
  const auto& g = PlanarGrid{51, 51};
  const double xc = g.x(25), yc = g.y(25);
  CHECK(m51q.vx[g.index(25, 25)] ==
        doctest::Approx(-2.0 * xc * xc * xc * yc * yc).epsilon(2e-3));
  CHECK(m51q.divergence[g.index(25, 25)] ==
        doctest::Approx(-12.0 * xc * xc * yc * yc).epsilon(2e-2));

  const double r51 = hessian_divergence(field_on(51, 51, bump)).max_mismatch;
  const double r101 = hessian_divergence(field_on(101, 101, bump)).max_mismatch;
  CHECK(r51 / r101 > 3.5);
  CHECK(r51 / r101 < 4.5);
}
