#include "infoconf/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace infoconf::kernels {
namespace {

double sum_neg_p_log_p_scalar(const double* p, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) sum -= p[i] * std::log(p[i]);
  }
  return sum;
}

void sigmoid_scalar(const double* k, std::size_t n, double inv_e, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-k[i] * inv_e));
}

void net_force_scalar(const double* p, std::size_t n, double e, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = -e * std::log((1.0 - p[i]) / p[i]);
}

void informational_confidence_scalar(const double* p, std::size_t n, double inv_ic,
                                     double e_hat, double cap, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] <= 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double normalized = std::min(std::exp(inv_ic * std::log(p[i])), cap);
    out[i] = -e_hat * std::log(1.0 - normalized);
  }
}

void exp_density_scalar(const double* x, std::size_t n, double lambda, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = lambda * std::exp(-lambda * x[i]);
}

void exp_distribution_scalar(const double* x, std::size_t n, double lambda, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 - std::exp(-lambda * x[i]);
}

void spiral_polar_scalar(const double* p, std::size_t n, double* theta, double* r) {
  for (std::size_t i = 0; i < n; ++i) {
    const double q = 1.0 - p[i];
    theta[i] = -p[i] * std::log(p[i] / q);
    r[i] = q * std::exp(-theta[i] / p[i]);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      Isa::kScalar,
      "scalar",
      &sum_neg_p_log_p_scalar,
      &sigmoid_scalar,
      &net_force_scalar,
      &informational_confidence_scalar,
      &exp_density_scalar,
      &exp_distribution_scalar,
      &spiral_polar_scalar,
  };
  return table;
}

}  // namespace infoconf::kernels
