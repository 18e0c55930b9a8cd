#include <cassert>
#include <cstdlib>
#include <cstring>

#include "infoconf/kernels.hpp"

namespace infoconf::kernels {

#if defined(INFOCONF_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(INFOCONF_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  const char* forced = std::getenv("INFOCONF_SIMD");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return scalar_table();
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(INFOCONF_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

double sum_neg_p_log_p(std::span<const double> p) {
  return active().sum_neg_p_log_p(p.data(), p.size());
}

void sigmoid(std::span<const double> k, double expectation, std::span<double> out) {
  assert(out.size() >= k.size());
  active().sigmoid(k.data(), k.size(), 1.0 / expectation, out.data());
}

void net_force(std::span<const double> p, double expectation, std::span<double> out) {
  assert(out.size() >= p.size());
  active().net_force(p.data(), p.size(), expectation, out.data());
}

void informational_confidence(std::span<const double> p, double inv_ic, double e_hat,
                              double cap, std::span<double> out) {
  assert(out.size() >= p.size());
  active().informational_confidence(p.data(), p.size(), inv_ic, e_hat, cap, out.data());
}

void exp_density(std::span<const double> x, double lambda, std::span<double> out) {
  assert(out.size() >= x.size());
  active().exp_density(x.data(), x.size(), lambda, out.data());
}

void exp_distribution(std::span<const double> x, double lambda, std::span<double> out) {
  assert(out.size() >= x.size());
  active().exp_distribution(x.data(), x.size(), lambda, out.data());
}

void spiral_polar(std::span<const double> p, std::span<double> theta, std::span<double> r) {
  assert(theta.size() >= p.size() && r.size() >= p.size());
  active().spiral_polar(p.data(), p.size(), theta.data(), r.data());
}

}  // namespace infoconf::kernels
