#include "infoconf/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "infoconf/error.hpp"
#include "infoconf/kernels.hpp"

namespace infoconf {
namespace {

std::string describe(const char* op, const char* what, double value) {
  std::ostringstream os;
  os.precision(17);
  os << op << ": " << what << " (got " << value << ")";
  return os.str();
}

void require_expectation(const char* op, double e) {
  if (!(e > 0.0) || !std::isfinite(e)) throw DomainError(describe(op, "expectation must be positive and finite", e));
}

void require_unit(const char* op, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(describe(op, "performance must lie in [0, 1]", p));
}

// Open-interval check shared by every log-ratio formula.
void require_open_unit(const char* op, double p) {
  require_unit(op, p);
  if (p == 0.0 || p == 1.0) throw DivergenceError(describe(op, "diverges at performance 0 or 1", p));
}

double neg_p_log_p(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

}  // namespace

double shannon_entropy(std::span<const double> probs) {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      throw DomainError(describe("shannon_entropy", ("probability out of [0, 1] at index " + std::to_string(i)).c_str(),
                                 probs[i]));
    }
  }
  return std::max(0.0, kernels::sum_neg_p_log_p(probs));
}

double general_entropy_summand(const PerformanceFunction& perf_fn, double guess,
                               const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError(describe("general_entropy_summand", "tolerance must be positive", opts.tol));
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
    throw DomainError(describe("general_entropy_summand", "damping must lie in (0, 1]", opts.damping));
  }

  auto perf = [&](double k) {
    const double p = perf_fn(k);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError(describe("general_entropy_summand", "performance function left [0, 1]", p));
    }
    return p;
  };
  auto residual = [&](double k) { return k - neg_p_log_p(perf(k)); };

  // Scan [0, 1] for the first sign change from negative to non-negative.
  constexpr int kScan = 256;
  double lo = 0.0;
  double f_lo = residual(0.0);
  bool seen_negative = f_lo < 0.0;
  double hi = -1.0;
  for (int i = 1; i <= kScan; ++i) {
    const double x = static_cast<double>(i) / kScan;
    const double fx = residual(x);
    if (fx < 0.0) {
      lo = x;
      f_lo = fx;
      seen_negative = true;
    } else if (seen_negative) {
      if (fx == 0.0) return x;
      hi = x;
      break;
    }
  }
  if (!seen_negative) return 0.0;  // residual >= 0 everywhere on the grid; root at 0

  int budget = opts.max_iterations;
  double last = f_lo;

  // Damped fixed-point iteration inside the bracket.
  double k = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  while (budget-- > 0) {
    const double fk = residual(k);
    last = fk;
    if (std::abs(fk) <= opts.tol) return k;
    if (fk < 0.0) lo = k; else hi = k;
    const double next = (1.0 - opts.damping) * k + opts.damping * neg_p_log_p(perf(k));
    if (!(next > lo && next < hi)) break;
    k = next;
  }

  // Bisection on what is left of the bracket.
  while (budget-- > 0) {
    const double mid = 0.5 * (lo + hi);
    const double fm = residual(mid);
    last = fm;
    if (std::abs(fm) <= opts.tol) return mid;
    if (fm < 0.0) lo = mid; else hi = mid;
  }
  throw ConvergenceError("general_entropy_summand: no convergence within " +
                             std::to_string(opts.max_iterations) + " iterations",
                         last);
}

double general_entropy(std::span<const PerformanceFunction> perf_fns, const SolverOptions& opts) {
  double sum = 0.0;
  for (const auto& fn : perf_fns) sum += general_entropy_summand(fn, 0.0, opts);
  return sum;
}

double force_a(double perf, double expectation) {
  require_unit("force_a", perf);
  require_expectation("force_a", expectation);
  if (perf == 1.0) throw DivergenceError("force_a: Force A is infinite at performance 1");
  return -expectation * std::log1p(-perf);
}

double force_b(double perf, double expectation) {
  require_unit("force_b", perf);
  require_expectation("force_b", expectation);
  if (perf == 0.0) throw DivergenceError("force_b: Force B is infinite at performance 0");
  return -expectation * std::log(perf);
}

double net_force(double perf, double expectation) {
  require_open_unit("net_force", perf);
  require_expectation("net_force", expectation);
  return -expectation * std::log((1.0 - perf) / perf);
}

double sigmoid(double k, double expectation) {
  require_expectation("sigmoid", expectation);
  if (!std::isfinite(k)) throw DomainError(describe("sigmoid", "argument must be finite", k));
  return 1.0 / (1.0 + std::exp(-k / expectation));
}

double net_force_self(double perf) {
  require_open_unit("net_force_self", perf);
  return -perf * std::log((1.0 - perf) / perf);
}

double force_b_self(double perf) {
  require_unit("force_b_self", perf);
  if (perf == 0.0) throw DivergenceError("force_b_self: expectation would be zero at performance 0");
  return -perf * std::log(perf);
}

double mirrored_net_force_self(double perf) {
  require_open_unit("mirrored_net_force_self", perf);
  return -(1.0 - perf) * std::log((1.0 - perf) / perf);
}

std::vector<double> sigmoid(std::span<const double> k, double expectation) {
  require_expectation("sigmoid", expectation);
  for (double v : k) {
    if (!std::isfinite(v)) throw DomainError(describe("sigmoid", "argument must be finite", v));
  }
  std::vector<double> out(k.size());
  kernels::sigmoid(k, expectation, out);
  return out;
}

std::vector<double> net_force(std::span<const double> perf, double expectation) {
  require_expectation("net_force", expectation);
  for (double p : perf) require_open_unit("net_force", p);
  std::vector<double> out(perf.size());
  kernels::net_force(perf, expectation, out);
  return out;
}

double golden_ratio() { return 0.5 * (1.0 + std::sqrt(5.0)); }

std::pair<double, double> golden_ratio_roots() {
  const double s5 = std::sqrt(5.0);
  return {0.5 * (s5 - 1.0), 0.5 * (-1.0 - s5)};
}

std::pair<double, double> golden_ratio_roots_numeric() {
  // p = (1 - p)/p  <=>  p = 1/(1 + p) for p != -1; a contraction near 0.618.
  double pos = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double next = 1.0 / (1.0 + pos);
    if (next == pos) break;
    pos = next;
  }
  double neg = -2.0;
  for (int i = 0; i < 100; ++i) {
    const double step = (neg * neg + neg - 1.0) / (2.0 * neg + 1.0);
    neg -= step;
    if (std::abs(step) < 1e-17) break;
  }
  return {pos, neg};
}

SpiralParams spiral_params(double perf) {
  if (!std::isfinite(perf)) throw DomainError(describe("spiral_params", "performance must be finite", perf));
  if (perf == 0.0) throw DivergenceError("spiral_params: b = -1/p diverges at performance 0");
  return {1.0 - perf, -1.0 / perf};
}

std::vector<PolarPoint> spiral_curve(std::span<const double> perf_samples) {
  for (std::size_t i = 0; i < perf_samples.size(); ++i) {
    const double p = perf_samples[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError(describe("spiral_curve", ("sample " + std::to_string(i) + " outside (0, 1)").c_str(), p));
    }
    if (p == 0.0 || p == 1.0) {
      throw DivergenceError(describe("spiral_curve", ("sample " + std::to_string(i) + " diverges").c_str(), p));
    }
  }
  std::vector<double> theta(perf_samples.size());
  std::vector<double> r(perf_samples.size());
  kernels::spiral_polar(perf_samples, theta, r);
  std::vector<PolarPoint> out(perf_samples.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {theta[i], r[i]};
  return out;
}

std::pair<std::vector<CartesianPoint>, std::vector<CartesianPoint>> mirrored_spirals(
    std::span<const double> perf_samples) {
  const auto polar = spiral_curve(perf_samples);
  std::vector<CartesianPoint> branch;
  std::vector<CartesianPoint> mirror;
  branch.reserve(polar.size());
  mirror.reserve(polar.size());
  for (const auto& pt : polar) {
    const CartesianPoint c{pt.r * std::cos(pt.theta), pt.r * std::sin(pt.theta)};
    branch.push_back(c);
    mirror.push_back({-c.x, -c.y});
  }
  return {std::move(branch), std::move(mirror)};
}

double lorentz_factor(double v_over_c) {
  if (!(v_over_c >= 0.0 && v_over_c < 1.0)) {
    throw DomainError(describe("lorentz_factor", "v/c must lie in [0, 1)", v_over_c));
  }
  return std::sqrt((1.0 - v_over_c) * (1.0 + v_over_c));
}

double observed_performance(double relative_speed) {
  require_unit("observed_performance", relative_speed);
  return std::sqrt(relative_speed);
}

double perception_correction(double observed_perf) {
  require_unit("perception_correction", observed_perf);
  return 1.0 / (1.0 + observed_perf);
}

}  // namespace infoconf
