// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after a runtime CPU check.
//
// exp and log use the Cephes double-precision rational approximations
// (about 1 ulp). Lanes outside the range where the vector code is valid fall
// back to <cmath> for that block of four.

#include <immintrin.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>

#include "infoconf/kernels.hpp"

namespace infoconf::kernels {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

// Valid for |x| <= 708, where 2^n stays a normal number.
inline __m256d exp_core(__m256d x) {
  const __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(x, set1(1.4426950408889634073599), set1(0.5)));
  x = _mm256_fnmadd_pd(n, set1(6.93145751953125e-1), x);
  x = _mm256_fnmadd_pd(n, set1(1.42860682030941723212e-6), x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_fmadd_pd(set1(1.26177193074810590878e-4), xx, set1(3.02994407707441961300e-2));
  px = _mm256_fmadd_pd(px, xx, set1(9.99999999999999999910e-1));
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_fmadd_pd(set1(3.00198505138664455042e-6), xx, set1(2.52448340349684104192e-3));
  qx = _mm256_fmadd_pd(qx, xx, set1(2.27265548208155028766e-1));
  qx = _mm256_fmadd_pd(qx, xx, set1(2.00000000000000000009e0));
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(set1(2.0), r, set1(1.0));

  // 2^n through the exponent field; n fits comfortably in the magic window.
  const __m256d magic = set1(6755399441055744.0);  // 1.5 * 2^52
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(r, _mm256_castsi256_pd(bits));
}

// Valid for positive normal finite x.
inline __m256d log_core(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  const __m256d two52 = set1(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(biased, _mm256_castpd_si256(two52))), two52);
  e = _mm256_sub_pd(e, set1(1022.0));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
  const __m256i half_exp = _mm256_set1_epi64x(0x3fe0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_exp));

  const __m256d below = _mm256_cmp_pd(m, set1(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, set1(1.0)));
  m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(below, m)), set1(1.0));

  const __m256d z = _mm256_mul_pd(m, m);
  __m256d p = _mm256_fmadd_pd(set1(1.01875663804580931796e-4), m, set1(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, m, set1(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, m, set1(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, m, set1(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, m, set1(7.70838733755885391666e0));
  __m256d q = _mm256_add_pd(m, set1(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, m, set1(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, m, set1(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, m, set1(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, m, set1(2.31251620126765340583e1));

  __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fnmadd_pd(e, set1(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(set1(0.5), z, y);
  __m256d out = _mm256_add_pd(m, y);
  return _mm256_fmadd_pd(e, set1(0.693359375), out);
}

inline bool all_lanes(__m256d mask) { return _mm256_movemask_pd(mask) == 0xF; }

inline __m256d exp4(__m256d x) {
  const __m256d ax = _mm256_andnot_pd(set1(-0.0), x);
  if (all_lanes(_mm256_cmp_pd(ax, set1(708.0), _CMP_LE_OQ))) return exp_core(x);
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, x);
  for (double& v : lanes) v = std::exp(v);
  return _mm256_load_pd(lanes);
}

inline __m256d log4(__m256d x) {
  const __m256d ok = _mm256_and_pd(_mm256_cmp_pd(x, set1(DBL_MIN), _CMP_GE_OQ),
                                   _mm256_cmp_pd(x, set1(DBL_MAX), _CMP_LE_OQ));
  if (all_lanes(ok)) return log_core(x);
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, x);
  for (double& v : lanes) v = std::log(v);
  return _mm256_load_pd(lanes);
}

// Loads up to four values; missing lanes are filled with `pad`.
inline __m256d load_partial(const double* src, std::size_t count, double pad) {
  if (count == kLanes) return _mm256_loadu_pd(src);
  alignas(32) double lanes[kLanes] = {pad, pad, pad, pad};
  std::copy_n(src, count, lanes);
  return _mm256_load_pd(lanes);
}

inline void store_partial(double* dst, std::size_t count, __m256d v) {
  if (count == kLanes) {
    _mm256_storeu_pd(dst, v);
    return;
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, v);
  std::copy_n(lanes, count, dst);
}

template <typename Body>
inline void for_each_block(std::size_t n, Body&& body) {
  for (std::size_t i = 0; i < n; i += kLanes) body(i, std::min(kLanes, n - i));
}

double sum_neg_p_log_p_avx2(const double* p, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  for_each_block(n, [&](std::size_t i, std::size_t count) {
    const __m256d v = load_partial(p + i, count, 0.0);
    const __m256d zero = _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d safe = _mm256_blendv_pd(v, set1(1.0), zero);
    acc = _mm256_fnmadd_pd(v, log4(safe), acc);
  });
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, acc);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void sigmoid_avx2(const double* k, std::size_t n, double inv_e, double* out) {
  const __m256d neg_inv_e = set1(-inv_e);
  for_each_block(n, [&](std::size_t i, std::size_t count) {
    const __m256d v = load_partial(k + i, count, 0.0);
    const __m256d ex = exp4(_mm256_mul_pd(v, neg_inv_e));
    store_partial(out + i, count, _mm256_div_pd(set1(1.0), _mm256_add_pd(set1(1.0), ex)));
  });
}

void net_force_avx2(const double* p, std::size_t n, double e, double* out) {
  const __m256d neg_e = set1(-e);
  for_each_block(n, [&](std::size_t i, std::size_t count) {
    const __m256d v = load_partial(p + i, count, 0.5);
    const __m256d ratio = _mm256_div_pd(_mm256_sub_pd(set1(1.0), v), v);
    store_partial(out + i, count, _mm256_mul_pd(neg_e, log4(ratio)));
  });
}

void informational_confidence_avx2(const double* p, std::size_t n, double inv_ic, double e_hat,
                                   double cap, double* out) {
  for_each_block(n, [&](std::size_t i, std::size_t count) {
    const __m256d v = load_partial(p + i, count, 0.5);
    const __m256d nonpos = _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_LE_OQ);
    const __m256d safe = _mm256_blendv_pd(v, set1(1.0), nonpos);
    __m256d normalized = exp4(_mm256_mul_pd(set1(inv_ic), log4(safe)));
    normalized = _mm256_min_pd(normalized, set1(cap));
    __m256d k = _mm256_mul_pd(set1(-e_hat), log4(_mm256_sub_pd(set1(1.0), normalized)));
    k = _mm256_blendv_pd(k, _mm256_setzero_pd(), nonpos);
    store_partial(out + i, count, k);
  });
}

void exp_density_avx2(const double* x, std::size_t n, double lambda, double* out) {
  for_each_block(n, [&](std::size_t i, std::size_t count) {
    const __m256d v = load_partial(x + i, count, 0.0);
    store_partial(out + i, count, _mm256_mul_pd(set1(lambda), exp4(_mm256_mul_pd(set1(-lambda), v))));
  });
}

void exp_distribution_avx2(const double* x, std::size_t n, double lambda, double* out) {
  for_each_block(n, [&](std::size_t i, std::size_t count) {
    const __m256d v = load_partial(x + i, count, 0.0);
    store_partial(out + i, count, _mm256_sub_pd(set1(1.0), exp4(_mm256_mul_pd(set1(-lambda), v))));
  });
}

void spiral_polar_avx2(const double* p, std::size_t n, double* theta, double* r) {
  for_each_block(n, [&](std::size_t i, std::size_t count) {
    const __m256d v = load_partial(p + i, count, 0.5);
    const __m256d q = _mm256_sub_pd(set1(1.0), v);
    const __m256d th = _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), v),
                                     log4(_mm256_div_pd(v, q)));
    const __m256d rad = _mm256_mul_pd(q, exp4(_mm256_div_pd(_mm256_sub_pd(_mm256_setzero_pd(), th), v)));
    store_partial(theta + i, count, th);
    store_partial(r + i, count, rad);
  });
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{
      Isa::kAvx2,
      "avx2",
      &sum_neg_p_log_p_avx2,
      &sigmoid_avx2,
      &net_force_avx2,
      &informational_confidence_avx2,
      &exp_density_avx2,
      &exp_distribution_avx2,
      &spiral_polar_avx2,
  };
  return table;
}

}  // namespace infoconf::kernels
