#ifndef TTLKIT_KERNELS_HPP
#define TTLKIT_KERNELS_HPP

#include <cstddef>
#include <span>

// Inner products over probability mass arrays. Scalar versions are the
// reference; an AVX2 variant is selected at runtime when the CPU supports
// it. Both are equivalence-tested against each other.

namespace ttlkit::kernels {

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> p);
/// sum_{i=k}^{n-1} p[i] * p[i-k]
double shifted_dot(std::span<const double> p, size_t k);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> p);
double shifted_dot(std::span<const double> p, size_t k);
}  // namespace avx2
#endif

/// Runtime-dispatched entry points.
double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> p);
double shifted_dot(std::span<const double> p, size_t k);

/// Name of the active backend ("avx2" or "scalar").
const char* active_backend();

/// Force the scalar path (for tests and benchmarking); pass false to
/// restore auto-detection.
void force_scalar(bool on);

}  // namespace ttlkit::kernels

#endif
