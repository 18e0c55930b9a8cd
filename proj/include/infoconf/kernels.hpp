#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation built on <cmath>; an AVX2/FMA variant is compiled into a
// separate translation unit and selected once at runtime when the CPU
// supports it. Set INFOCONF_SIMD=scalar in the environment to force the
// reference path.
//
// Kernels do not validate their inputs; callers (entropy, calibration, plots)
// check domains first.

#include <cstddef>
#include <span>
#include <string_view>

namespace infoconf::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  // sum of -p ln p, with p == 0 contributing 0; p in [0, 1]
  double (*sum_neg_p_log_p)(const double* p, std::size_t n);
  // 1 / (1 + exp(-k * inv_e))
  void (*sigmoid)(const double* k, std::size_t n, double inv_e, double* out);
  // -e ln((1 - p) / p); p in (0, 1)
  void (*net_force)(const double* p, std::size_t n, double e, double* out);
  // -e_hat ln(1 - min(p^inv_ic, cap)); p in [0, 1], p == 0 maps to 0
  void (*informational_confidence)(const double* p, std::size_t n, double inv_ic,
                                   double e_hat, double cap, double* out);
  // lambda exp(-lambda x)
  void (*exp_density)(const double* x, std::size_t n, double lambda, double* out);
  // 1 - exp(-lambda x)
  void (*exp_distribution)(const double* x, std::size_t n, double lambda, double* out);
  // theta = -p ln(p / (1 - p)), r = (1 - p) exp(-theta / p); p in (0, 1)
  void (*spiral_polar)(const double* p, std::size_t n, double* theta, double* r);
};

const KernelTable& scalar_table();

/// The AVX2 table, or nullptr when it was not compiled in or the CPU lacks
/// AVX2/FMA.
const KernelTable* avx2_table();

/// The table used by the library; chosen on first call.
const KernelTable& active();

std::string_view isa_name(Isa isa);

// Convenience wrappers over active().
double sum_neg_p_log_p(std::span<const double> p);
void sigmoid(std::span<const double> k, double expectation, std::span<double> out);
void net_force(std::span<const double> p, double expectation, std::span<double> out);
void informational_confidence(std::span<const double> p, double inv_ic, double e_hat,
                              double cap, std::span<double> out);
void exp_density(std::span<const double> x, double lambda, std::span<double> out);
void exp_distribution(std::span<const double> x, double lambda, std::span<double> out);
void spiral_polar(std::span<const double> p, std::span<double> theta, std::span<double> r);

}  // namespace infoconf::kernels
