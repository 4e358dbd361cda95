#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace switchinv {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using VectorField = std::function<Vector<Scalar>(const Vector<Scalar>&)>;

template <typename Scalar>
using ScalarField = std::function<Scalar(const Vector<Scalar>&)>;

struct IntegratorOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Largest allowed |x(t_{k+1}) - x(t_k)| between consecutive samples while
  /// |x| <= dense_radius; beyond it the bound scales with |x| / dense_radius.
  double max_dx = 1e-2;
  double dense_radius = 100.0;
  /// |x| above this is reported as finite escape.
  double bound = 1e9;
  /// Residual on the switching surface accepted by event location, scaled by (1 + |x|).
  double event_tol = 1e-10;
  std::size_t max_switches = 100000;
  double h_init = 0.0;
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
  double max_local_error = 0.0;
  double local_error_sum = 0.0;

  IntegratorStats& operator+=(const IntegratorStats& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    evaluations += o.evaluations;
    max_local_error = std::max(max_local_error, o.max_local_error);
    local_error_sum += o.local_error_sum;
    return *this;
  }
};

/// |x| exceeded IntegratorOptions::bound (or became non-finite) at escape_time.
class FiniteEscapeError : public std::runtime_error {
 public:
  explicit FiniteEscapeError(double t)
      : std::runtime_error(message(t)), escape_time(t) {}
  double escape_time;

 private:
  static std::string message(double t) {
    std::ostringstream os;
    os << "finite escape: solution unbounded near t = " << t;
    return os.str();
  }
};

class StiffnessError : public std::runtime_error {
 public:
  explicit StiffnessError(double t)
      : std::runtime_error("step size underflow at t = " + std::to_string(t)), time(t) {}
  double time;
};

class ChatteringError : public std::runtime_error {
 public:
  ChatteringError(std::size_t switches, double t)
      : std::runtime_error("chattering: more than " + std::to_string(switches) + " switches by t = " +
                           std::to_string(t)),
        time(t) {}
  double time;
};

/// One Dormand-Prince 5(4) step. k1 = f(y) on entry; on exit y_new is the fifth-order
/// solution, err the embedded error estimate and k_last = f(y_new) (FSAL).
template <typename Scalar>
void dopri_step(const VectorField<Scalar>& f, const Vector<Scalar>& y, const Vector<Scalar>& k1, double h,
                Vector<Scalar>& y_new, Vector<Scalar>& err, Vector<Scalar>& k_last) {
  constexpr double a21 = 1.0 / 5.0;
  constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                   a54 = -212.0 / 729.0;
  constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                   a65 = -5103.0 / 18656.0;
  constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                   b6 = 11.0 / 84.0;
  constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                   e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  const Scalar hs = static_cast<Scalar>(h);
  const Vector<Scalar> k2 = f(y + hs * Scalar(a21) * k1);
  const Vector<Scalar> k3 = f(y + hs * (Scalar(a31) * k1 + Scalar(a32) * k2));
  const Vector<Scalar> k4 = f(y + hs * (Scalar(a41) * k1 + Scalar(a42) * k2 + Scalar(a43) * k3));
  const Vector<Scalar> k5 =
      f(y + hs * (Scalar(a51) * k1 + Scalar(a52) * k2 + Scalar(a53) * k3 + Scalar(a54) * k4));
  const Vector<Scalar> k6 = f(y + hs * (Scalar(a61) * k1 + Scalar(a62) * k2 + Scalar(a63) * k3 +
                                        Scalar(a64) * k4 + Scalar(a65) * k5));
  y_new = y + hs * (Scalar(b1) * k1 + Scalar(b3) * k3 + Scalar(b4) * k4 + Scalar(b5) * k5 + Scalar(b6) * k6);
  k_last = f(y_new);
  err = hs * (Scalar(e1) * k1 + Scalar(e3) * k3 + Scalar(e4) * k4 + Scalar(e5) * k5 + Scalar(e6) * k6 +
              Scalar(e7) * k_last);
}

template <typename Scalar>
struct ArcEnd {
  double t = 0.0;
  Vector<Scalar> x;
  /// True when integration stopped at a located crossing instead of reaching t_end.
  bool crossed = false;
  /// |surface(x)| at the crossing.
  double residual = 0.0;
};

/// Adaptive integration of x' = f(x) on [t0, t_end]. Every accepted step end is
/// passed to on_sample(t, x) (the initial point is not). When `leaves` is set and
/// becomes true at a step end, the first such time inside the step is bracketed by
/// bisection until |surface(x)| <= event_tol (1 + |x|) and the bracket is below
/// 1e-12 (1 + t); integration stops there with crossed = true.
///
/// h carries the step-size suggestion across calls.
template <typename Scalar, typename OnSample>
ArcEnd<Scalar> integrate_arc(const VectorField<Scalar>& f, double t0, const Vector<Scalar>& x0, double t_end,
                             const IntegratorOptions& opts, IntegratorStats& stats, double& h,
                             OnSample&& on_sample,
                             const std::function<bool(const Vector<Scalar>&)>& leaves = {},
                             const std::function<Scalar(const Vector<Scalar>&)>& surface = {}) {
  using std::abs;
  ArcEnd<Scalar> end{t0, x0, false, 0.0};
  if (!(t_end > t0)) return end;

  double t = t0;
  Vector<Scalar> y = x0;
  Vector<Scalar> k1 = f(y);
  ++stats.evaluations;
  Vector<Scalar> y_new(y.size()), err(y.size()), k_last(y.size());

  auto scale = [&](const Vector<Scalar>& a, const Vector<Scalar>& b, Eigen::Index i) {
    return opts.atol + opts.rtol * static_cast<double>(std::max(abs(a[i]), abs(b[i])));
  };

  if (!(h > 0.0)) {
    h = opts.h_init;
    if (!(h > 0.0)) {
      double d0 = 0.0, d1 = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc = opts.atol + opts.rtol * static_cast<double>(abs(y[i]));
        d0 = std::max(d0, static_cast<double>(abs(y[i])) / sc);
        d1 = std::max(d1, static_cast<double>(abs(k1[i])) / sc);
      }
      h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }
  }

  std::size_t steps = 0;
  while (t < t_end) {
    if (++steps > opts.max_steps) throw StiffnessError(t);
    h = std::min(h, opts.h_max);
    bool last = false;
    if (t + h >= t_end || t_end - (t + h) < 1e-12 * std::max(1.0, std::abs(t_end))) {
      h = t_end - t;
      last = true;
    }
    if (!last && h < opts.h_min * std::max(1.0, std::abs(t))) throw StiffnessError(t);

    dopri_step<Scalar>(f, y, k1, h, y_new, err, k_last);
    stats.evaluations += 6;

    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      err_norm = std::max(err_norm, static_cast<double>(abs(err[i])) / scale(y, y_new, i));
    if (!std::isfinite(err_norm) || !y_new.allFinite()) {
      if (!y.allFinite() || static_cast<double>(y.norm()) > opts.bound) throw FiniteEscapeError(t);
      h *= 0.25;
      ++stats.rejected;
      continue;
    }
    if (err_norm > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      ++stats.rejected;
      continue;
    }
    const double dx = static_cast<double>((y_new - y).norm());
    const double dx_cap =
        opts.max_dx * std::max(1.0, static_cast<double>(y.norm()) / opts.dense_radius);
    if (dx > dx_cap) {
      h *= std::max(0.1, 0.9 * dx_cap / dx);
      ++stats.rejected;
      continue;
    }

    const double t_new = last ? t_end : t + h;
    const double local = static_cast<double>(err.template lpNorm<Eigen::Infinity>());
    ++stats.accepted;
    stats.max_local_error = std::max(stats.max_local_error, local);
    stats.local_error_sum += local;

    if (static_cast<double>(y_new.norm()) > opts.bound) throw FiniteEscapeError(t_new);

    if (leaves && leaves(y_new)) {
      double lo = 0.0, hi = t_new - t;
      Vector<Scalar> y_hi = y_new, y_mid(y.size()), e_mid(y.size()), k_mid(y.size());
      for (int it = 0; it < 200; ++it) {
        const double res = surface ? static_cast<double>(abs(surface(y_hi))) : 0.0;
        const double tol = opts.event_tol * (1.0 + static_cast<double>(y_hi.norm()));
        if (res <= tol && hi - lo <= 1e-12 * (1.0 + std::abs(t))) break;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        dopri_step<Scalar>(f, y, k1, mid, y_mid, e_mid, k_mid);
        stats.evaluations += 6;
        if (leaves(y_mid)) {
          hi = mid;
          y_hi = y_mid;
        } else {
          lo = mid;
        }
      }
      end.t = t + hi;
      end.x = y_hi;
      end.crossed = true;
      end.residual = surface ? static_cast<double>(abs(surface(y_hi))) : 0.0;
      on_sample(end.t, end.x);
      return end;
    }

    on_sample(t_new, y_new);
    t = t_new;
    y = y_new;
    k1 = k_last;
    h *= std::min(5.0, std::max(0.2, err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0));
  }
  end.t = t;
  end.x = y;
  return end;
}

}  // namespace switchinv
