#include "nonholib/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nonholib/errors.hpp"

namespace nonholib {

namespace {

bool all_finite(const Vector& x) { return x.allFinite(); }

void require_finite(const Vector& x, double t) {
  if (!all_finite(x)) {
    std::ostringstream msg;
    msg << "non-finite state at t = " << t;
    throw NonFiniteState(t, msg.str());
  }
}

// Fehlberg 4(5) tableau.
constexpr double kA21 = 1.0 / 4.0;
constexpr double kA31 = 3.0 / 32.0, kA32 = 9.0 / 32.0;
constexpr double kA41 = 1932.0 / 2197.0, kA42 = -7200.0 / 2197.0, kA43 = 7296.0 / 2197.0;
constexpr double kA51 = 439.0 / 216.0, kA52 = -8.0, kA53 = 3680.0 / 513.0, kA54 = -845.0 / 4104.0;
constexpr double kA61 = -8.0 / 27.0, kA62 = 2.0, kA63 = -3544.0 / 2565.0, kA64 = 1859.0 / 4104.0,
                 kA65 = -11.0 / 40.0;
constexpr double kB1 = 25.0 / 216.0, kB3 = 1408.0 / 2565.0, kB4 = 2197.0 / 4104.0, kB5 = -1.0 / 5.0;
constexpr double kE1 = 1.0 / 360.0, kE3 = -128.0 / 4275.0, kE4 = -2197.0 / 75240.0, kE5 = 1.0 / 50.0,
                 kE6 = 2.0 / 55.0;

struct Rkf45Result {
  Vector x4;
  double err;
};

Rkf45Result rkf45_step(const VectorField& f, const Vector& x, double h, double atol, double rtol) {
  const Vector k1 = f(x);
  const Vector k2 = f(x + h * (kA21 * k1));
  const Vector k3 = f(x + h * (kA31 * k1 + kA32 * k2));
  const Vector k4 = f(x + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
  const Vector k5 = f(x + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
  const Vector k6 = f(x + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
  Vector x4 = x + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5);
  const Vector e = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6);
  double err = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double scale = atol + rtol * std::max(std::abs(x[i]), std::abs(x4[i]));
    err = std::max(err, std::abs(e[i]) / scale);
  }
  if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
  return {std::move(x4), err};
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidConfig("integrator dt must be > 0");
  if (!(t1 > t0)) throw InvalidConfig("integrator t1 must exceed t0");
  if (!(sample_dt > 0.0)) throw InvalidConfig("integrator sample_dt must be > 0");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw InvalidConfig("tolerances must be > 0");
}

std::size_t IntegratorConfig::sample_count() const {
  // Small slack so that e.g. 10 / 1e-2 does not round down to 999.
  const double ratio = (t1 - t0) / sample_dt;
  return static_cast<std::size_t>(std::floor(ratio + 1e-9)) + 1;
}

Trajectory::Trajectory(std::vector<double> times, std::vector<Vector> states,
                       std::vector<Vector> derivatives)
    : times_(std::move(times)), states_(std::move(states)), derivatives_(std::move(derivatives)) {
  if (times_.empty()) throw InvalidConfig("trajectory needs at least one sample");
  if (states_.size() != times_.size() || derivatives_.size() != times_.size())
    throw InvalidConfig("trajectory times, states and derivatives differ in length");
  const auto dim = states_.front().size();
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (states_[i].size() != dim || derivatives_[i].size() != dim)
      throw InvalidConfig("trajectory state dimension varies between samples");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw InvalidConfig("trajectory times must be strictly increasing");
  }
}

double Trajectory::min_spacing() const noexcept {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < times_.size(); ++i) h = std::min(h, times_[i] - times_[i - 1]);
  return h;
}

Vector Trajectory::sample_at(double t) const {
  if (!(t >= times_.front() && t <= times_.back())) {
    std::ostringstream msg;
    msg << "sample time " << t << " outside [" << times_.front() << ", " << times_.back() << "]";
    throw OutOfRange(msg.str());
  }
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  auto hi = static_cast<std::size_t>(it - times_.begin());
  if (times_[hi] == t) return states_[hi];
  const std::size_t lo = hi - 1;
  const double h = times_[hi] - times_[lo];
  const double s = (t - times_[lo]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * states_[lo] + (h10 * h) * derivatives_[lo] + h01 * states_[hi] +
         (h11 * h) * derivatives_[hi];
}

Vector rk4_step(const VectorField& field, const Vector& x, double h) {
  const Vector k1 = field(x);
  const Vector k2 = field(x + (0.5 * h) * k1);
  const Vector k3 = field(x + (0.5 * h) * k2);
  const Vector k4 = field(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const VectorField& field, const Vector& x0, const IntegratorConfig& cfg) {
  cfg.validate();
  require_finite(x0, cfg.t0);

  const std::size_t count = cfg.sample_count();
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> derivs;
  times.reserve(count);
  states.reserve(count);
  derivs.reserve(count);

  Vector x = x0;
  times.push_back(cfg.t0);
  states.push_back(x);
  derivs.push_back(field(x));
  require_finite(derivs.back(), cfg.t0);

  double t_step = cfg.t0;
  const VectorField guarded = [&](const Vector& y) {
    require_finite(y, t_step);
    return field(y);
  };

  const double min_step = 1e-14 * (cfg.t1 - cfg.t0);
  double h_adaptive = std::min(cfg.dt, cfg.sample_dt);

  for (std::size_t i = 1; i < count; ++i) {
    const double t_prev = cfg.t0 + static_cast<double>(i - 1) * cfg.sample_dt;
    const double t_next = cfg.t0 + static_cast<double>(i) * cfg.sample_dt;
    const double span = t_next - t_prev;

    if (cfg.method == Method::RK4) {
      const auto substeps =
          static_cast<std::size_t>(std::max(1.0, std::ceil(span / cfg.dt * (1.0 - 1e-12))));
      const double h = span / static_cast<double>(substeps);
      for (std::size_t s = 0; s < substeps; ++s) {
        t_step = t_prev + static_cast<double>(s) * h;
        x = rk4_step(guarded, x, h);
        require_finite(x, t_prev + static_cast<double>(s + 1) * h);
      }
    } else {
      double t = t_prev;
      while (t < t_next) {
        const bool last = t + h_adaptive >= t_next;
        const double h = last ? t_next - t : h_adaptive;
        if (h < min_step) throw StepUnderflow("adaptive step fell below 1e-14 * (t1 - t0)");
        t_step = t;
        auto [x_new, err] = rkf45_step(guarded, x, h, cfg.abs_tol, cfg.rel_tol);
        if (err <= 1.0) {
          t = last ? t_next : t + h;
          x = std::move(x_new);
          require_finite(x, t);
        }
        const double factor =
            err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // Keep the step proposed before clamping to the sample boundary.
        if (!(last && err <= 1.0)) h_adaptive = h * factor;
        if (h_adaptive < min_step) throw StepUnderflow("adaptive step fell below 1e-14 * (t1 - t0)");
      }
    }
    times.push_back(t_next);
    states.push_back(x);
    derivs.push_back(field(x));
    require_finite(derivs.back(), t_next);
  }
  return Trajectory(std::move(times), std::move(states), std::move(derivs));
}

}  // namespace nonholib
