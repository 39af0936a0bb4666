#include "ttlkit/kernels.hpp"

#include <atomic>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define TTLKIT_HAVE_AVX2_PATH 1
#endif

namespace ttlkit::kernels {

namespace scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    const size_t n = a.size() < b.size() ? a.size() : b.size();
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares(std::span<const double> p) {
    double acc = 0.0;
    for (double v : p) acc += v * v;
    return acc;
}

double shifted_dot(std::span<const double> p, size_t k) {
    if (k >= p.size()) return 0.0;
    double acc = 0.0;
    for (size_t i = k; i < p.size(); ++i) acc += p[i] * p[i - k];
    return acc;
}

}  // namespace scalar

#ifdef TTLKIT_HAVE_AVX2_PATH
namespace avx2 {

__attribute__((target("avx2")))
static double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

__attribute__((target("avx2")))
double dot(std::span<const double> a, std::span<const double> b) {
    const size_t n = a.size() < b.size() ? a.size() : b.size();
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a.data() + i);
        __m256d vb = _mm256_loadu_pd(b.data() + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    double out = hsum(acc);
    for (; i < n; ++i) out += a[i] * b[i];
    return out;
}

__attribute__((target("avx2")))
double sum_squares(std::span<const double> p) {
    return dot(p, p);
}

__attribute__((target("avx2")))
double shifted_dot(std::span<const double> p, size_t k) {
    if (k >= p.size()) return 0.0;
    return dot(p.subspan(k), p.subspan(0, p.size() - k));
}

}  // namespace avx2
#endif  // TTLKIT_HAVE_AVX2_PATH

namespace {

std::atomic<bool> g_force_scalar{false};

bool avx2_available() {
#ifdef TTLKIT_HAVE_AVX2_PATH
    static const bool avail = __builtin_cpu_supports("avx2");
    return avail;
#else
    return false;
#endif
}

bool use_avx2() { return avx2_available() && !g_force_scalar.load(std::memory_order_relaxed); }

}  // namespace

void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

const char* active_backend() { return use_avx2() ? "avx2" : "scalar"; }

double dot(std::span<const double> a, std::span<const double> b) {
#ifdef TTLKIT_HAVE_AVX2_PATH
    if (use_avx2()) return avx2::dot(a, b);
#endif
    return scalar::dot(a, b);
}

double sum_squares(std::span<const double> p) {
#ifdef TTLKIT_HAVE_AVX2_PATH
    if (use_avx2()) return avx2::sum_squares(p);
#endif
    return scalar::sum_squares(p);
}

double shifted_dot(std::span<const double> p, size_t k) {
#ifdef TTLKIT_HAVE_AVX2_PATH
    if (use_avx2()) return avx2::shifted_dot(p, k);
#endif
    return scalar::shifted_dot(p, k);
}

}  // namespace ttlkit::kernels
