#pragma once

// Closed-form information measures built on the exponential performance
// function p(K) = 1 - exp(-K/E): Shannon and general entropy, the confidence
// (Force A) and counter-confidence (Force B) equations, their net force and
// its sigmoid inverse, golden-ratio fixed points, logarithmic spirals, and
// the Lorentz-factor demo.
//
// All logarithms are natural (nats). Performances at exactly 0 or 1 that
// would drive a logarithm to infinity raise DivergenceError; values outside
// their domain raise DomainError. No function returns a non-finite value.

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace infoconf {

struct SpiralParams {
  double a;  // scale
  double b;  // tightness / direction of wrapping
};

struct PolarPoint {
  double theta;
  double r;
};

struct CartesianPoint {
  double x;
  double y;
};

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

/// Sum of -p ln p over the inputs, in nats. Zero probabilities contribute
/// zero. Does not require the inputs to sum to one.
double shannon_entropy(std::span<const double> probs);

/// Maps a confidence value to a performance in [0, 1].
using PerformanceFunction = std::function<double(double)>;

struct SolverOptions {
  double tol = 1e-10;
  int max_iterations = 200;
  double damping = 0.5;
};

/// Solves the general-entropy fixed point K = -p(K) ln p(K) for K >= 0.
///
/// The residual K + p(K) ln p(K) is never positive at K = 0 and always
/// positive at K = 1 (since -p ln p <= 1/e), so every root lies in [0, 1].
/// The returned root is the smallest positive one at which the residual
/// changes sign; K = 0 is returned only when the residual has no sign change
/// on (0, 1]. Inside the bracket a damped fixed-point iteration starts from
/// `guess` and bisection takes over if it leaves the bracket.
///
/// Throws ConvergenceError (with the last residual) when the iteration budget
/// is exhausted, DomainError if tol <= 0 or perf_fn leaves [0, 1].
double general_entropy_summand(const PerformanceFunction& perf_fn, double guess,
                               const SolverOptions& opts = {});

/// General entropy: the sum of the fixed-point summands of each outcome's
/// performance function.
double general_entropy(std::span<const PerformanceFunction> perf_fns,
                       const SolverOptions& opts = {});

// ---------------------------------------------------------------------------
// Opposing forces
// ---------------------------------------------------------------------------

/// Confidence: -E ln(1 - p). Requires 0 <= p < 1, E > 0.
double force_a(double perf, double expectation);

/// Counter-confidence: -E ln(p). Requires 0 < p <= 1, E > 0.
double force_b(double perf, double expectation);

/// Net force -E ln((1 - p) / p) = force_a - force_b. Requires 0 < p < 1.
double net_force(double perf, double expectation);

/// 1 / (1 + exp(-k/E)); the inverse of net_force for fixed E.
double sigmoid(double k, double expectation);

/// Net force with the expectation tied to the performance (E = p).
double net_force_self(double perf);

/// Counter-confidence with E = p, i.e. one general-entropy summand -p ln p.
double force_b_self(double perf);

/// -(1 - p) ln((1 - p) / p); equals -net_force_self(1 - p).
double mirrored_net_force_self(double perf);

// Batch variants, evaluated with the fastest kernel available at runtime.
std::vector<double> sigmoid(std::span<const double> k, double expectation);
std::vector<double> net_force(std::span<const double> perf, double expectation);

// ---------------------------------------------------------------------------
// Golden ratio
// ---------------------------------------------------------------------------

/// phi = (1 + sqrt 5) / 2.
double golden_ratio();

/// Closed-form roots of p^2 + p - 1 = 0: ((sqrt5 - 1)/2, (-1 - sqrt5)/2).
std::pair<double, double> golden_ratio_roots();

/// The same roots found numerically from p = (1 - p) / p: the positive one by
/// the contraction p <- 1 / (1 + p), the negative one by Newton's method.
std::pair<double, double> golden_ratio_roots_numeric();

// ---------------------------------------------------------------------------
// Logarithmic spirals
// ---------------------------------------------------------------------------

/// Spiral r = a exp(b theta) traced by the negated self net force:
/// a = 1 - p, b = -1/p. Any finite nonzero p is accepted so the golden-ratio
/// point p = phi (where a == b) can be checked.
SpiralParams spiral_params(double perf);

/// theta = -p ln(p / (1 - p)), r = (1 - p) exp(-theta / p) per sample.
/// Samples must lie strictly inside (0, 1); the offending index is reported.
std::vector<PolarPoint> spiral_curve(std::span<const double> perf_samples);

/// The spiral in Cartesian coordinates and its reflection through the origin.
std::pair<std::vector<CartesianPoint>, std::vector<CartesianPoint>> mirrored_spirals(
    std::span<const double> perf_samples);

// ---------------------------------------------------------------------------
// Relativity demo
// ---------------------------------------------------------------------------

/// sqrt(1 - (v/c)^2) for 0 <= v/c < 1.
double lorentz_factor(double v_over_c);

/// Observed performance for a relative speed: sqrt(speed).
double observed_performance(double relative_speed);

/// Sigmoid-corrected performance 1 / (1 + observed), in [0.5, 1].
double perception_correction(double observed_perf);

}  // namespace infoconf
