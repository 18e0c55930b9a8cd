#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "infoconf/kernels.hpp"

using namespace infoconf::kernels;

namespace {

constexpr double kTol = 1e-14;

bool close(double a, double b) { return std::abs(a - b) <= kTol * (1.0 + std::abs(b)); }

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 1000, 4099};

void compare(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    INFO("index " << i << " simd " << a[i] << " scalar " << b[i]);
    CHECK(close(a[i], b[i]));
  }
}

}  // namespace

TEST_CASE("dispatch") {
  const auto& t = active();
  CHECK(t.name != nullptr);
  CHECK(scalar_table().isa == Isa::kScalar);
  if (avx2_table() != nullptr) CHECK(avx2_table()->isa == Isa::kAvx2);
  MESSAGE("active kernel table: " << std::string(t.name));
}

TEST_CASE("scalar reference against <cmath>") {
  const auto& s = scalar_table();
  const auto p = uniform(257, 1e-9, 1.0 - 1e-9, 1);
  std::vector<double> out(p.size());
  s.net_force(p.data(), p.size(), 1.5, out.data());
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(close(out[i], -1.5 * std::log((1.0 - p[i]) / p[i])));
  double sum = 0.0;
  for (double x : p) sum -= x * std::log(x);
  CHECK(close(s.sum_neg_p_log_p(p.data(), p.size()), sum));
  const double with_zero[] = {0.0, 1.0, 0.0};
  CHECK(s.sum_neg_p_log_p(with_zero, 3) == 0.0);
}

TEST_CASE("avx2 matches scalar") {
  const KernelTable* v = avx2_table();
  if (v == nullptr) {
    MESSAGE("AVX2 not available, skipping");
    return;
  }
  const auto& s = scalar_table();

  for (std::size_t n : kSizes) {
    CAPTURE(n);
    const auto p = uniform(n, 1e-12, 1.0 - 1e-12, 10 + n);
    const auto k = uniform(n, -40.0, 40.0, 20 + n);
    const auto x = uniform(n, 0.0, 1.0, 30 + n);
    std::vector<double> a(n), b(n), a2(n), b2(n);

    CHECK(close(v->sum_neg_p_log_p(p.data(), n), s.sum_neg_p_log_p(p.data(), n)));

    for (double e : {0.1, 1.0, 3.0}) {
      v->sigmoid(k.data(), n, 1.0 / e, a.data());
      s.sigmoid(k.data(), n, 1.0 / e, b.data());
      compare(a, b);
      v->net_force(p.data(), n, e, a.data());
      s.net_force(p.data(), n, e, b.data());
      compare(a, b);
    }

    v->informational_confidence(p.data(), n, 1.0 / 2.3, 0.95, 1.0 - 1e-12, a.data());
    s.informational_confidence(p.data(), n, 1.0 / 2.3, 0.95, 1.0 - 1e-12, b.data());
    compare(a, b);

    for (double lambda : {100.0, 20.0, 10.0, 0.5}) {
      v->exp_density(x.data(), n, lambda, a.data());
      s.exp_density(x.data(), n, lambda, b.data());
      compare(a, b);
      v->exp_distribution(x.data(), n, lambda, a.data());
      s.exp_distribution(x.data(), n, lambda, b.data());
      compare(a, b);
    }

    v->spiral_polar(p.data(), n, a.data(), a2.data());
    s.spiral_polar(p.data(), n, b.data(), b2.data());
    compare(a, b);
    compare(a2, b2);
  }
}

TEST_CASE("avx2 edge values") {
  const KernelTable* v = avx2_table();
  if (v == nullptr) return;
  const auto& s = scalar_table();

  // Exact zeros, exact halves and extreme arguments that push exp/log to the
  // ends of their ranges.
  const std::vector<double> p{0.0, 1.0, 0.5, 1e-300, 5e-324, 1.0 - 1e-16, 0.25, 0.75};
  std::vector<double> a(p.size()), b(p.size());
  v->informational_confidence(p.data(), p.size(), 0.7, 0.9, 1.0 - 1e-12, a.data());
  s.informational_confidence(p.data(), p.size(), 0.7, 0.9, 1.0 - 1e-12, b.data());
  compare(a, b);
  CHECK(a[0] == 0.0);

  const std::vector<double> k{0.0, -0.0, 745.0, -745.0, 1e6, -1e6, 708.0, -708.0};
  std::vector<double> c(k.size()), d(k.size());
  v->sigmoid(k.data(), k.size(), 1.0, c.data());
  s.sigmoid(k.data(), k.size(), 1.0, d.data());
  compare(c, d);
  CHECK(c[0] == 0.5);
  CHECK(c[1] == 0.5);

  const std::vector<double> x{0.0, 1e-300, 7.0, 50.0, 1e3, 1e5};
  std::vector<double> e(x.size()), f(x.size());
  v->exp_density(x.data(), x.size(), 100.0, e.data());
  s.exp_density(x.data(), x.size(), 100.0, f.data());
  compare(e, f);
  CHECK(e[0] == 100.0);
  v->exp_distribution(x.data(), x.size(), 10.0, e.data());
  s.exp_distribution(x.data(), x.size(), 10.0, f.data());
  compare(e, f);
  CHECK(e[0] == 0.0);

  const std::vector<double> q{0.5, 1e-300, 1.0 - 1e-16, 0.999999};
  std::vector<double> th(q.size()), r(q.size()), th2(q.size()), r2(q.size());
  v->spiral_polar(q.data(), q.size(), th.data(), r.data());
  s.spiral_polar(q.data(), q.size(), th2.data(), r2.data());
  compare(th, th2);
  compare(r, r2);
  CHECK(th[0] == 0.0);
  CHECK(r[0] == 0.5);
}
