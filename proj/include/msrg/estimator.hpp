#pragma once

// Type-II maximum likelihood for (alpha, beta, gamma).
//
// The search runs in theta = (ln alpha, ln beta, ln gamma), so every iterate is
// a valid Hyperparams. Each start performs quasi-Newton (BFGS) ascent with a
// backtracking Armijo line search on the analytic gradient; when the line
// search cannot make progress away from a stationary point, a Nelder-Mead pass
// takes over from the current iterate.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msrg/ggm_model.hpp"

namespace msrg {

struct OptimizerConfig {
  int max_iterations = 500;
  double relative_tolerance = 1e-9;
  std::vector<Hyperparams> initial_points = default_initial_points();
  double step_shrink = 0.5;
  bool record_trace = false;

  static std::vector<Hyperparams> default_initial_points() {
    return {{1.0, 1.0, 1.0}, {1e-2, 1.0, 1e-4}, {1.0, 1e-2, 1e-4}, {1e2, 1e-1, 1e-2}};
  }

  void validate() const {
    if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be >= 1");
    if (!(relative_tolerance > 0.0)) throw Error(ErrorCode::InvalidConfig, "relative_tolerance must be > 0");
    if (initial_points.empty()) throw Error(ErrorCode::InvalidConfig, "at least one initial point is required");
    if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw Error(ErrorCode::InvalidConfig, "step_shrink must lie in (0,1)");
  }
};

enum class EstimationStatus { Converged, NotConverged, DegenerateData };

inline const char* to_string(EstimationStatus s) noexcept {
  switch (s) {
    case EstimationStatus::Converged: return "converged";
    case EstimationStatus::NotConverged: return "not_converged";
    case EstimationStatus::DegenerateData: return "degenerate_data";
  }
  return "unknown";
}

struct TracePoint {
  Hyperparams iterate;
  double value;
};

struct EstimationResult {
  Hyperparams estimate;
  double objective_value;
  int iterations;
  bool converged;
  EstimationStatus status;
  /// Norm of the projected log-coordinate gradient at the estimate.
  double gradient_norm;
  /// Condition number of the final inverse-curvature estimate; large values
  /// flag a ridge along which the objective is nearly flat.
  double curvature_condition;
  /// Coordinates pinned at the search box, e.g. "beta" on a noiseless plateau.
  std::vector<std::string> at_bound;
  std::string diagnostics;
  std::vector<TracePoint> trace;
};

namespace detail {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Search box in log coordinates; exp(+-50) is far outside any physically
// meaningful precision while keeping all per-mode terms finite.
inline constexpr double kLogBound = 50.0;
inline constexpr double kMaxStep = 10.0;
inline constexpr double kStepTolerance = 1e-8;
inline constexpr double kArmijo = 1e-4;

inline Vec3 clamp_box(Vec3 v) {
  for (int i = 0; i < 3; ++i) v[i] = std::clamp(v[i], -kLogBound, kLogBound);
  return v;
}

inline std::array<double, 3> to_array(const Vec3& v) { return {v[0], v[1], v[2]}; }

// Zero the components that push outward at an active bound.
inline Vec3 project(const Vec3& theta, Vec3 g) {
  for (int i = 0; i < 3; ++i) {
    if (theta[i] >= kLogBound && g[i] > 0.0) g[i] = 0.0;
    if (theta[i] <= -kLogBound && g[i] < 0.0) g[i] = 0.0;
  }
  return g;
}

struct LogObjective {
  std::function<double(const Hyperparams&)> value;
  std::function<Gradient(const Hyperparams&)> gradient;

  double at(const Vec3& theta) const { return value(Hyperparams::from_log(to_array(theta))); }
  Vec3 grad(const Vec3& theta) const {
    const Hyperparams h = Hyperparams::from_log(to_array(theta));
    const auto g = log_gradient(h, gradient(h));
    return {g[0], g[1], g[2]};
  }
};

struct StartOutcome {
  Vec3 theta;
  double value;
  int iterations;
  bool converged;
  double gradient_norm;
  double condition;
  std::vector<TracePoint> trace;
};

inline bool improved_enough(double f_new, double f_old, double tol) {
  return (f_new - f_old) >= tol * std::max(1.0, std::abs(f_old));
}

// Bounded Nelder-Mead in log space. Returns the best vertex and its value;
// `iterations` is advanced once per simplex step.
inline std::pair<Vec3, double> nelder_mead(const LogObjective& obj, const Vec3& start, double start_value,
                                           int max_iter, double tol, int& iterations) {
  std::array<Vec3, 4> simplex;
  std::array<double, 4> values;
  simplex[0] = start;
  values[0] = start_value;
  for (int i = 0; i < 3; ++i) {
    Vec3 v = start;
    v[i] += (v[i] + 0.25 > kLogBound) ? -0.25 : 0.25;
    simplex[i + 1] = clamp_box(v);
    values[i + 1] = obj.at(simplex[i + 1]);
  }
  std::array<int, 4> order{0, 1, 2, 3};
  for (int it = 0; it < max_iter; ++it) {
    ++iterations;
    // Maximisation: order by descending value, ties by index for determinism.
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
    const int best = order[0], worst = order[3], second_worst = order[2];
    if (std::abs(values[best] - values[worst]) <= tol * std::max(1.0, std::abs(values[best]))) break;

    Vec3 centroid = (simplex[order[0]] + simplex[order[1]] + simplex[order[2]]) / 3.0;
    const Vec3 reflected = clamp_box(centroid + (centroid - simplex[worst]));
    const double f_r = obj.at(reflected);
    if (f_r > values[best]) {
      const Vec3 expanded = clamp_box(centroid + 2.0 * (centroid - simplex[worst]));
      const double f_e = obj.at(expanded);
      if (f_e > f_r) {
        simplex[worst] = expanded;
        values[worst] = f_e;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_r;
      }
    } else if (f_r > values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_r;
    } else {
      const Vec3 contracted = clamp_box(centroid + 0.5 * (simplex[worst] - centroid));
      const double f_c = obj.at(contracted);
      if (f_c > values[worst]) {
        simplex[worst] = contracted;
        values[worst] = f_c;
      } else {
        for (int i = 1; i < 4; ++i) {
          const int idx = order[i];
          simplex[idx] = clamp_box(simplex[best] + 0.5 * (simplex[idx] - simplex[best]));
          values[idx] = obj.at(simplex[idx]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (values[i] > values[best]) best = i;
  return {simplex[best], values[best]};
}

inline StartOutcome ascend(const LogObjective& obj, const Hyperparams& start, const OptimizerConfig& cfg) {
  StartOutcome out;
  Vec3 theta = clamp_box(Eigen::Map<const Vec3>(start.log().data()));
  double f = obj.at(theta);
  Vec3 g = obj.grad(theta);
  Mat3 inv_hessian = Mat3::Identity();
  int iterations = 0;
  bool converged = false;
  auto record = [&](const Vec3& t, double v) {
    if (cfg.record_trace) out.trace.push_back({Hyperparams::from_log(to_array(t)), v});
  };
  record(theta, f);
  auto stationary = [&](const Vec3& t, const Vec3& grad, double value) {
    return project(t, grad).norm() <= 1e-6 * (1.0 + std::abs(value));
  };

  while (iterations < cfg.max_iterations) {
    const Vec3 pg = project(theta, g);
    // Ascent direction: -H^{-1} g for a concave model, i.e. inv_hessian * g
    // with inv_hessian positive definite.
    Vec3 direction = project(theta, inv_hessian * pg);
    if (direction.dot(pg) <= 0.0) {
      inv_hessian.setIdentity();
      direction = pg;
    }
    if (direction.norm() > kMaxStep) direction *= kMaxStep / direction.norm();

    double t = 1.0;
    bool accepted = false;
    Vec3 trial;
    double f_trial = f;
    for (int ls = 0; ls < 80 && t * direction.norm() > 1e-16; ++ls) {
      trial = clamp_box(theta + t * direction);
      f_trial = obj.at(trial);
      if (std::isfinite(f_trial) && f_trial >= f + kArmijo * pg.dot(trial - theta) && f_trial > f) {
        accepted = true;
        break;
      }
      t *= cfg.step_shrink;
    }

    if (!accepted) {
      if (stationary(theta, g, f)) {
        converged = true;
        break;
      }
      // Stalled away from a stationary point: hand over to Nelder-Mead.
      const int budget = std::min(200, cfg.max_iterations - iterations);
      auto [nm_theta, nm_value] = nelder_mead(obj, theta, f, budget, cfg.relative_tolerance, iterations);
      if (nm_value > f) {
        theta = nm_theta;
        f = nm_value;
        g = obj.grad(theta);
        inv_hessian.setIdentity();
        record(theta, f);
        continue;
      }
      break;
    }

    ++iterations;
    const Vec3 step = trial - theta;
    const Vec3 g_new = obj.grad(trial);
    const double f_old = f;
    theta = trial;
    f = f_trial;
    record(theta, f);

    // BFGS update on the negated objective: y = -(g_new - g).
    const Vec3 y = -(g_new - g);
    const double sy = step.dot(y);
    if (sy > 1e-12 * step.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Mat3 left = Mat3::Identity() - rho * step * y.transpose();
      inv_hessian = left * inv_hessian * left.transpose() + rho * step * step.transpose();
    }
    g = g_new;

    if (!improved_enough(f, f_old, cfg.relative_tolerance) && step.norm() < kStepTolerance) {
      converged = true;
      break;
    }
    // Pinned at the box with nothing left to gain in the free coordinates.
    if (step.norm() < kStepTolerance && stationary(theta, g, f)) {
      converged = true;
      break;
    }
  }

  out.theta = theta;
  out.value = f;
  out.iterations = iterations;
  out.converged = converged;
  out.gradient_norm = project(theta, g).norm();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (inv_hessian + inv_hessian.transpose()));
  const auto ev = eig.eigenvalues().cwiseAbs();
  out.condition = ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff() : std::numeric_limits<double>::infinity();
  return out;
}

inline bool flat_spectrum(std::span<const ModeStats> stats) {
  if (stats.empty()) return true;
  double lo = stats[0].data_power, hi = lo;
  for (const auto& s : stats) {
    lo = std::min(lo, s.data_power);
    hi = std::max(hi, s.data_power);
  }
  return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(hi), 1e-300);
}

// Multi-start driver on the exponent-free objective. `final_value` maps the
// winning estimate to the reported objective.
inline EstimationResult maximize(std::span<const ModeStats> stats, const OptimizerConfig& cfg,
                                 const std::function<double(const Hyperparams&)>& final_value) {
  cfg.validate();
  if (stats.empty()) throw Error(ErrorCode::InvalidArgument, "no modes to estimate from");
  const LogObjective obj{[&](const Hyperparams& h) { return log_evidence(h, stats); },
                         [&](const Hyperparams& h) { return objective_gradient(h, stats); }};

  std::optional<StartOutcome> best;
  int total_iterations = 0;
  for (const auto& start : cfg.initial_points) {
    StartOutcome o = ascend(obj, start, cfg);
    total_iterations += o.iterations;
    if (!best || o.value > best->value || (o.value == best->value && o.theta.norm() < best->theta.norm()))
      best = std::move(o);
  }

  const Hyperparams estimate = Hyperparams::from_log(to_array(best->theta));
  const bool degenerate = flat_spectrum(stats);
  EstimationResult r{estimate,
                     final_value(estimate),
                     total_iterations,
                     best->converged,
                     degenerate ? EstimationStatus::DegenerateData
                                : (best->converged ? EstimationStatus::Converged : EstimationStatus::NotConverged),
                     best->gradient_norm,
                     best->condition,
                     {},
                     {},
                     std::move(best->trace)};
  static constexpr const char* names[] = {"alpha", "beta", "gamma"};
  for (int i = 0; i < 3; ++i)
    if (std::abs(best->theta[i]) >= kLogBound) r.at_bound.emplace_back(names[i]);

  std::ostringstream d;
  if (degenerate) d << "flat data spectrum: alpha is not identifiable and 1/beta + 1/gamma is fixed only in sum; ";
  if (!best->converged) d << "iteration budget exhausted before the stopping rule held; ";
  if (!r.at_bound.empty()) {
    d << "estimate pinned at the search box for";
    for (const auto& n : r.at_bound) d << ' ' << n;
    d << "; ";
  }
  if (r.curvature_condition > 1e8) d << "nearly flat ridge (curvature condition " << r.curvature_condition << "); ";
  r.diagnostics = d.str();
  return r;
}

}  // namespace detail

/// Maximise the renormalised log evidence of observed, band-limited data.
inline EstimationResult estimate_empirical(const WindowedCoefficients& g, const OptimizerConfig& cfg = {},
                                           const ScaleExponents& exponents = {}) {
  const auto stats = empirical_mode_stats(g);
  return detail::maximize(stats, cfg, [&](const Hyperparams& h) { return empirical_objective(h, g, g.n, exponents); });
}

/// Statistical-average estimates: the argmax of the expected objective L_n.
inline EstimationResult estimate_expected(const TrueModel& tm, LatticeSize n, const OptimizerConfig& cfg = {},
                                          const ScaleExponents& exponents = {}) {
  const auto stats = expected_mode_stats(tm, n);
  return detail::maximize(stats, cfg, [&](const Hyperparams& h) { return expected_objective(h, tm, n, exponents); });
}

}  // namespace msrg
