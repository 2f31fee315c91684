#include "blowup/ode.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/error.hpp"

namespace blowup {

namespace {

using Vec = std::vector<double>;

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Weighted RMS norm used for both error control and Newton increments.
double scaled_norm(const Vec& e, const Vec& ya, const Vec& yb, double atol,
                   double rtol) {
  double s = 0.0;
  const std::size_t n = e.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double sc =
        atol + rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
    const double q = e[i] / sc;
    s += q * q;
  }
  return std::sqrt(s / static_cast<double>(n));
}

void hermite_eval(double t, double t0, double t1, const Vec& y0, const Vec& y1,
                  const Vec& f0, const Vec& f1, Vec& out) {
  const double h = t1 - t0;
  const double th = (t - t0) / h;
  const double a = th * (th - 1.0);
  const double b = 1.0 - 2.0 * th;
  out.resize(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) {
    out[i] = (1.0 - th) * y0[i] + th * y1[i] +
             a * (b * (y1[i] - y0[i]) + (th - 1.0) * h * f0[i] +
                  th * h * f1[i]);
  }
}

struct StepCounters {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

// Dormand-Prince 5(4) with FSAL.
class Rk45Stepper {
 public:
  Rk45Stepper(const OdeSystem& sys, const IntegrateOptions& opt, double t0,
              double t1, const Vec& y0, const Vec& f0)
      : sys_(sys), opt_(opt), span_(t1 - t0), hmin_(1e-14 * (t1 - t0)) {
    for (auto& k : k_) k.resize(sys.dim);
    ytmp_.resize(sys.dim);
    yerr_.resize(sys.dim);
    h_ = initial_step(t0, y0, f0);
  }

  double h() const { return h_; }

  // Advances (t, y, f) to the next accepted node. Returns false on step
  // underflow; the caller keeps the last accepted state.
  bool step(double& t, Vec& y, Vec& f, double t_end, StepCounters& counters) {
    double facmax = 5.0;
    for (int attempt = 0; attempt < 200; ++attempt) {
      double h = std::min(h_, t_end - t);
      if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
      // the final clamped step may land one ulp short of t_end; snap
      const bool final_step = h == t_end - t;
      if (h < hmin_ && !final_step) return false;

      stages(t, y, f, h);
      bool ok = all_finite(ynew_) && all_finite(yerr_);
      double err = std::numeric_limits<double>::infinity();
      if (ok) err = scaled_norm(yerr_, y, ynew_, opt_.atol, opt_.rtol);

      if (ok && err <= 1.0) {
        t = final_step ? t_end : t + h;
        y = ynew_;
        f = k_[6];  // FSAL
        const double fac = std::clamp(
            0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, facmax);
        h_ = h * fac;
        ++counters.accepted;
        return true;
      }
      ++counters.rejected;
      if (!ok) {
        h_ = h * 0.3;
      } else {
        h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
      }
      facmax = 1.0;  // no growth right after a rejection
    }
    return false;
  }

 private:
  void stages(double t, const Vec& y, const Vec& f, double h) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    const std::size_t n = sys_.dim;
    k_[0] = f;
    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y[i] + h * a21 * k_[0][i];
    sys_.rhs(t + h / 5.0, ytmp_.data(), k_[1].data());
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
    sys_.rhs(t + 3.0 * h / 10.0, ytmp_.data(), k_[2].data());
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
    sys_.rhs(t + 4.0 * h / 5.0, ytmp_.data(), k_[3].data());
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a51 * k_[0][i] + a52 * k_[1][i] +
                             a53 * k_[2][i] + a54 * k_[3][i]);
    sys_.rhs(t + 8.0 * h / 9.0, ytmp_.data(), k_[4].data());
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] +
                             a64 * k_[3][i] + a65 * k_[4][i]);
    sys_.rhs(t + h, ytmp_.data(), k_[5].data());
    ynew_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      ynew_[i] = y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] +
                             b5 * k_[4][i] + b6 * k_[5][i]);
    sys_.rhs(t + h, ynew_.data(), k_[6].data());
    for (std::size_t i = 0; i < n; ++i)
      yerr_[i] = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] +
                      e5 * k_[4][i] + e6 * k_[5][i] + e7 * k_[6][i]);
  }

  double initial_step(double t0, const Vec& y0, const Vec& f0) {
    const std::size_t n = sys_.dim;
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opt_.atol + opt_.rtol * std::abs(y0[i]);
      d0 += (y0[i] / sc) * (y0[i] / sc);
      d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    if (opt_.initial_step > 0.0) return opt_.initial_step;
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span_ : 0.01 * d0 / d1;
    h0 = std::min({h0, 0.1 * span_,
                   opt_.max_step > 0.0 ? opt_.max_step : span_});
    Vec y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h0 * f0[i];
    sys_.rhs(t0 + h0, y1.data(), f1.data());
    if (!all_finite(f1)) return std::max(hmin_ * 10.0, h0 * 1e-3);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opt_.atol + opt_.rtol * std::abs(y0[i]);
      const double q = (f1[i] - f0[i]) / sc;
      d2 += q * q;
    }
    d2 = std::sqrt(d2 / n) / h0;
    const double dm = std::max(d1, d2);
    double h1 = dm <= 1e-15 ? std::max(1e-6 * span_, h0 * 1e-3)
                            : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, span_,
                     opt_.max_step > 0.0 ? opt_.max_step : span_});
  }

  const OdeSystem& sys_;
  const IntegrateOptions& opt_;
  double span_;
  double hmin_;
  double h_ = 0.0;
  Vec k_[7];
  Vec ytmp_, ynew_, yerr_;
};

// TR-BDF2: one-step, L-stable, both implicit stages share the iteration
// matrix I - (gamma/2) h J. Embedded third-order weights give the error
// estimate, filtered through the iteration matrix for stiff robustness.
class Trbdf2Stepper {
 public:
  Trbdf2Stepper(const OdeSystem& sys, const IntegrateOptions& opt, double t0,
                double t1, const Vec& y0, const Vec& f0)
      : sys_(sys),
        opt_(opt),
        span_(t1 - t0),
        hmin_(1e-14 * (t1 - t0)),
        n_(sys.dim) {
    (void)t0;
    (void)y0;
    u_.resize(n_);
    psi_.resize(n_);
    ftmp_.resize(n_);
    resid_.resize(n_);
    double f_scale = std::max(max_abs(f0), 1e-8);
    double y_scale = std::max(max_abs(y0), 1e-8);
    h_ = opt.initial_step > 0.0
             ? opt.initial_step
             : std::min(0.01 * y_scale / f_scale, 0.1 * span_);
    h_ = std::max(h_, hmin_ * 10.0);
  }

  bool step(double& t, Vec& y, Vec& f, double t_end, StepCounters& counters) {
    for (int attempt = 0; attempt < 60; ++attempt) {
      double h = std::min(h_, t_end - t);
      if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
      const bool final_step = h == t_end - t;
      if (h < hmin_ && !final_step) return false;

      if (!factor_ready(t, y, f, h)) {
        h_ = h * 0.5;
        ++counters.rejected;
        continue;
      }

      // Stage 1: trapezoid to t + gamma h.
      Vec ug = y, fg(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        psi_[i] = y[i] + cdiag_ * h * f[i];
        ug[i] = y[i] + kGamma * h * f[i];
      }
      if (!newton(t + kGamma * h, h, ug, fg)) {
        if (!retry_after_newton_failure(t, y, f, h, counters)) return false;
        continue;
      }

      // Stage 2: BDF2 to t + h using (y, u_gamma).
      const double r1 = 1.0 / (kGamma * (2.0 - kGamma));
      const double r2 =
          (1.0 - kGamma) * (1.0 - kGamma) / (kGamma * (2.0 - kGamma));
      Vec y1(n_), f1(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        psi_[i] = r1 * ug[i] - r2 * y[i];
        y1[i] = y[i] + (ug[i] - y[i]) / kGamma;  // linear predictor
      }
      if (!newton(t + h, h, y1, f1)) {
        if (!retry_after_newton_failure(t, y, f, h, counters)) return false;
        continue;
      }

      // Embedded error estimate (Hosea-Shampine weights), filtered by the
      // iteration matrix so stiff components are not overestimated.
      Vec est(n_);
      for (std::size_t i = 0; i < n_; ++i)
        est[i] = h * (kE1 * f[i] + kE2 * fg[i] + kE3 * f1[i]);
      Eigen::VectorXd rhs(n_);
      for (std::size_t i = 0; i < n_; ++i) rhs[i] = est[i];
      Eigen::VectorXd filt = lu_.solve(rhs);
      for (std::size_t i = 0; i < n_; ++i) est[i] = filt[i];

      bool ok = all_finite(y1) && all_finite(est);
      double err = std::numeric_limits<double>::infinity();
      if (ok) err = scaled_norm(est, y, y1, opt_.atol, opt_.rtol);

      if (ok && err <= 1.0) {
        t = final_step ? t_end : t + h;
        y = y1;
        f = f1;
        ++jac_age_;
        ++counters.accepted;
        h_ = h * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0),
                            0.2, 4.0);
        return true;
      }
      ++counters.rejected;
      h_ = ok ? h * std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.1, 1.0)
              : h * 0.3;
    }
    return false;
  }

 private:
  static constexpr double kGamma = 0.585786437626904951;  // 2 - sqrt(2)
  static constexpr double cdiag_ = kGamma / 2.0;
  // b - bhat for the embedded pair
  static constexpr double kE1 = 0.138071187457698350;
  static constexpr double kE2 = -1.0 / 3.0;
  static constexpr double kE3 = 0.195262145875632370;

  bool retry_after_newton_failure(double t, const Vec& y, const Vec& f,
                                  double h, StepCounters& counters) {
    ++counters.rejected;
    if (!jac_fresh_) {
      compute_jacobian(t, y, f);
      if (!factorize(h)) return false;
      jac_fresh_ = true;
      return true;  // retry same h with fresh Jacobian
    }
    h_ = h * 0.3;
    jac_fresh_ = false;
    return h_ >= hmin_;
  }

  bool factor_ready(double t, const Vec& y, const Vec& f, double h) {
    const bool jac_stale = jac_triplets_.empty() || jac_age_ > 25;
    if (jac_stale) {
      compute_jacobian(t, y, f);
      jac_fresh_ = true;
    } else {
      jac_fresh_ = false;
    }
    if (jac_stale || h_factored_ <= 0.0 ||
        std::abs(h - h_factored_) > 0.1 * h_factored_) {
      return factorize(h);
    }
    return true;
  }

  void compute_jacobian(double t, const Vec& y, const Vec& f0) {
    jac_triplets_.clear();
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    Vec yp = y, fp(n_);
    if (sys_.band_lower && sys_.band_upper) {
      const int bl = *sys_.band_lower, bu = *sys_.band_upper;
      const int g = bl + bu + 1;
      for (int k = 0; k < g; ++k) {
        Vec dels(n_, 0.0);
        for (std::size_t j = k; j < n_; j += g) {
          dels[j] = sqrt_eps * std::max(std::abs(y[j]), 1e-5);
          yp[j] = y[j] + dels[j];
        }
        sys_.rhs(t, yp.data(), fp.data());
        for (std::size_t j = k; j < n_; j += g) {
          const int lo = std::max<int>(0, static_cast<int>(j) - bl);
          const int hi =
              std::min<int>(static_cast<int>(n_) - 1, static_cast<int>(j) + bu);
          for (int i = lo; i <= hi; ++i) {
            const double v = (fp[i] - f0[i]) / dels[j];
            if (v != 0.0)
              jac_triplets_.emplace_back(i, static_cast<int>(j), v);
          }
          yp[j] = y[j];
        }
      }
    } else {
      for (std::size_t j = 0; j < n_; ++j) {
        const double del = sqrt_eps * std::max(std::abs(y[j]), 1e-5);
        yp[j] = y[j] + del;
        sys_.rhs(t, yp.data(), fp.data());
        for (std::size_t i = 0; i < n_; ++i) {
          const double v = (fp[i] - f0[i]) / del;
          if (v != 0.0)
            jac_triplets_.emplace_back(static_cast<int>(i),
                                       static_cast<int>(j), v);
        }
        yp[j] = y[j];
      }
    }
    jac_age_ = 0;
  }

  bool factorize(double h) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(jac_triplets_.size() + n_);
    for (const auto& tr : jac_triplets_)
      trips.emplace_back(tr.row(), tr.col(), -cdiag_ * h * tr.value());
    for (std::size_t i = 0; i < n_; ++i)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    Eigen::SparseMatrix<double> m(static_cast<int>(n_), static_cast<int>(n_));
    m.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(m);
    if (lu_.info() != Eigen::Success) return false;
    h_factored_ = h;
    return true;
  }

  bool newton(double ts, double h, Vec& u, Vec& fout) {
    double nd_prev = -1.0;
    for (int it = 0; it < 8; ++it) {
      sys_.rhs(ts, u.data(), ftmp_.data());
      if (!all_finite(ftmp_)) return false;
      for (std::size_t i = 0; i < n_; ++i)
        resid_[i] = psi_[i] + cdiag_ * h * ftmp_[i] - u[i];
      Eigen::VectorXd r(n_);
      for (std::size_t i = 0; i < n_; ++i) r[i] = resid_[i];
      Eigen::VectorXd d = lu_.solve(r);
      for (std::size_t i = 0; i < n_; ++i) u[i] += d[i];
      Vec dd(n_);
      for (std::size_t i = 0; i < n_; ++i) dd[i] = d[i];
      const double nd = scaled_norm(dd, u, u, opt_.atol, opt_.rtol);
      if (!std::isfinite(nd)) return false;
      if (nd < 0.03) {
        sys_.rhs(ts, u.data(), fout.data());
        return all_finite(fout);
      }
      if (nd_prev >= 0.0 && nd > 2.0 * nd_prev) return false;
      nd_prev = nd;
    }
    return false;
  }

  const OdeSystem& sys_;
  const IntegrateOptions& opt_;
  double span_;
  double hmin_;
  std::size_t n_;
  double h_ = 0.0;
  double h_factored_ = -1.0;
  int jac_age_ = 1000;
  bool jac_fresh_ = false;
  std::vector<Eigen::Triplet<double>> jac_triplets_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  Vec u_, psi_, ftmp_, resid_;
};

struct EventTracker {
  const std::vector<EventSpec>* specs;
  std::vector<double> g_prev;

  void init(double t, const Vec& y) {
    g_prev.resize(specs->size());
    for (std::size_t i = 0; i < specs->size(); ++i)
      g_prev[i] = (*specs)[i].test(t, y.data());
  }

  static bool crossed(double g0, double g1, EventDirection dir) {
    switch (dir) {
      case EventDirection::rising:
        return g0 < 0.0 && g1 >= 0.0;
      case EventDirection::falling:
        return g0 > 0.0 && g1 <= 0.0;
      case EventDirection::any:
        return g0 != 0.0 && (g1 == 0.0 || (g0 > 0.0) != (g1 > 0.0));
    }
    return false;
  }
};

template <class Stepper>
Trajectory run_integration(const OdeSystem& sys, const Vec& y0, double t0,
                           double t1, const IntegrateOptions& opt,
                           const StepObserver* observer) {
  if (sys.dim == 0 || !sys.rhs) fail(ErrorCode::config_invalid, "empty system");
  if (y0.size() != sys.dim)
    fail(ErrorCode::config_invalid, "state size does not match system dim");
  if (!(t1 > t0)) fail(ErrorCode::config_invalid, "span must be increasing");

  Trajectory traj;
  Vec y = y0, f(sys.dim);
  sys.rhs(t0, y.data(), f.data());
  if (!all_finite(f))
    fail(ErrorCode::config_invalid, "initial derivative not finite");

  const double event_tol = 1e-12 * (t1 - t0);
  EventTracker tracker{&opt.events, {}};
  tracker.init(t0, y);

  auto record = [&](double t, const Vec& ys, const Vec& fs) {
    if (!opt.store_trajectory && !traj.times.empty()) {
      traj.times.back() = t;
      traj.states.back() = ys;
      traj.derivs.back() = fs;
      return;
    }
    traj.times.push_back(t);
    traj.states.push_back(ys);
    traj.derivs.push_back(fs);
  };
  record(t0, y, f);

  Stepper stepper(sys, opt, t0, t1, y, f);
  StepCounters counters;
  double t = t0;
  Vec y_prev = y, f_prev = f, ytmp;

  while (t < t1) {
    if (counters.accepted + counters.rejected > opt.max_steps) {
      fail(ErrorCode::no_convergence, "step budget exhausted");
    }
    y_prev = y;
    f_prev = f;
    const double t_prev = t;
    if (!stepper.step(t, y, f, t1, counters)) {
      traj.termination = Termination::step_underflow;
      break;
    }

    // Event scan over [t_prev, t] on the Hermite interpolant.
    bool terminal_hit = false;
    double t_terminal = 0.0;
    std::size_t idx_terminal = 0;
    std::vector<EventHit> hits;
    for (std::size_t i = 0; i < opt.events.size(); ++i) {
      const auto& ev = opt.events[i];
      const double g1 = ev.test(t, y.data());
      if (EventTracker::crossed(tracker.g_prev[i], g1, ev.direction)) {
        double a = t_prev, b = t;
        double ga = tracker.g_prev[i];
        while (b - a > event_tol) {
          const double m = 0.5 * (a + b);
          hermite_eval(m, t_prev, t, y_prev, y, f_prev, f, ytmp);
          const double gm = ev.test(m, ytmp.data());
          const bool crossed_left =
              EventTracker::crossed(ga, gm, ev.direction);
          if (crossed_left)
            b = m;
          else {
            a = m;
            ga = gm;
          }
        }
        hermite_eval(b, t_prev, t, y_prev, y, f_prev, f, ytmp);
        hits.push_back({i, b, ytmp});
        if (ev.terminal && (!terminal_hit || b < t_terminal)) {
          terminal_hit = true;
          t_terminal = b;
          idx_terminal = i;
        }
      }
      tracker.g_prev[i] = g1;
    }
    if (terminal_hit) {
      for (auto& h : hits)
        if (h.t <= t_terminal) traj.events.push_back(h);
      hermite_eval(t_terminal, t_prev, t, y_prev, y, f_prev, f, ytmp);
      t = t_terminal;
      y = ytmp;
      sys.rhs(t, y.data(), f.data());
      record(t, y, f);
      traj.termination = Termination::event;
      (void)idx_terminal;
      break;
    }
    for (auto& h : hits) traj.events.push_back(h);

    if (max_abs(y) > opt.overflow_guard) {
      record(t, y, f);
      traj.termination = Termination::overflow;
      break;
    }

    record(t, y, f);

    if (observer) {
      const Vec before = y;
      const bool keep_going = (*observer)(t, y);
      if (y != before) {
        sys.rhs(t, y.data(), f.data());
        traj.states.back() = y;
        traj.derivs.back() = f;
        tracker.init(t, y);
      }
      if (!keep_going) {
        traj.termination = Termination::observer_stop;
        break;
      }
    }
  }

  if (t >= t1 && traj.termination == Termination::span_end) {
    // natural end of span; nothing to adjust
  }
  traj.steps_accepted = counters.accepted;
  traj.steps_rejected = counters.rejected;
  return traj;
}

}  // namespace

std::vector<double> Trajectory::sample(double t) const {
  if (times.empty()) fail(ErrorCode::config_invalid, "empty trajectory");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  std::vector<double> out;
  hermite_eval(t, times[j - 1], times[j], states[j - 1], states[j],
               derivs[j - 1], derivs[j], out);
  return out;
}

Trajectory integrate(const OdeSystem& system, const std::vector<double>& y0,
                     double t0, double t1, const IntegrateOptions& options) {
  if (options.method == Method::rk45)
    return run_integration<Rk45Stepper>(system, y0, t0, t1, options, nullptr);
  return run_integration<Trbdf2Stepper>(system, y0, t0, t1, options, nullptr);
}

Trajectory integrate_observed(const OdeSystem& system,
                              const std::vector<double>& y0, double t0,
                              double t1, const IntegrateOptions& options,
                              const StepObserver& observer) {
  if (options.method == Method::rk45)
    return run_integration<Rk45Stepper>(system, y0, t0, t1, options,
                                        &observer);
  return run_integration<Trbdf2Stepper>(system, y0, t0, t1, options,
                                        &observer);
}

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::config_invalid: return "config_invalid";
    case ErrorCode::bracket_invalid: return "bracket_invalid";
    case ErrorCode::unclassified: return "unclassified";
    case ErrorCode::target_count_unreachable: return "target_count_unreachable";
    case ErrorCode::missing_C0: return "missing_C0";
    case ErrorCode::post_T: return "post_T";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::empty_level_set: return "empty_level_set";
    case ErrorCode::p_equals_3: return "p_equals_3";
    case ErrorCode::no_transition_found: return "no_transition_found";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::no_cycle: return "no_cycle";
    case ErrorCode::escaped: return "escaped";
    case ErrorCode::singular_locus: return "singular_locus";
    case ErrorCode::monotonicity_breach: return "monotonicity_breach";
    case ErrorCode::degenerate_gradient: return "degenerate_gradient";
    case ErrorCode::step_underflow: return "step_underflow";
  }
  return "unknown";
}

}  // namespace blowup
