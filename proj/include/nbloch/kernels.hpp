#pragma once

#include <complex>
#include <cstddef>
#include <string>

#include "nbloch/model.hpp"

namespace nbloch::kernels {

enum class Backend { scalar, avx2 };

bool avx2_supported();
Backend active_backend();
// Throws if the requested backend is not supported on this CPU.
void set_backend(Backend b);
// Honors NBLOCH_KERNEL=scalar|avx2; default is the best supported backend.
void init_from_env();
std::string backend_name(Backend b);

// y = H x for the banded block-Toeplitz truncation (open or periodic).
void banded_matvec(const TruncatedHamiltonian& H, const cd* x, cd* y);

// y += a * x
void axpy(cd a, const cd* x, cd* y, std::size_t n);
// x *= a
void scale(cd a, cd* x, std::size_t n);
double norm_sq(const cd* x, std::size_t n);

// Reference implementations, kept callable for equivalence tests.
namespace scalar {
void banded_matvec(const TruncatedHamiltonian& H, const cd* x, cd* y);
void axpy(cd a, const cd* x, cd* y, std::size_t n);
void scale(cd a, cd* x, std::size_t n);
double norm_sq(const cd* x, std::size_t n);
}  // namespace scalar

#ifdef NBLOCH_HAVE_AVX2
namespace avx2 {
void banded_matvec(const TruncatedHamiltonian& H, const cd* x, cd* y);
void axpy(cd a, const cd* x, cd* y, std::size_t n);
void scale(cd a, cd* x, std::size_t n);
double norm_sq(const cd* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace nbloch::kernels
