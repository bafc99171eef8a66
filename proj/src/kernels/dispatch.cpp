#include "nbloch/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace nbloch::kernels {

namespace {

struct Vtable {
  void (*matvec)(const TruncatedHamiltonian&, const cd*, cd*);
  void (*axpy)(cd, const cd*, cd*, std::size_t);
  void (*scale)(cd, cd*, std::size_t);
  double (*norm_sq)(const cd*, std::size_t);
};

constexpr Vtable kScalar{scalar::banded_matvec, scalar::axpy, scalar::scale,
                         scalar::norm_sq};
#ifdef NBLOCH_HAVE_AVX2
constexpr Vtable kAvx2{avx2::banded_matvec, avx2::axpy, avx2::scale,
                       avx2::norm_sq};
#endif

Backend g_backend = Backend::scalar;
const Vtable* g_vt = &kScalar;
bool g_initialized = false;

void ensure_init() {
  if (!g_initialized) init_from_env();
}

}  // namespace

bool avx2_supported() {
#ifdef NBLOCH_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() {
  ensure_init();
  return g_backend;
}

void set_backend(Backend b) {
  if (b == Backend::avx2) {
#ifdef NBLOCH_HAVE_AVX2
    if (!avx2_supported())
      throw std::runtime_error("kernels: avx2 backend not supported on this CPU");
    g_vt = &kAvx2;
#else
    throw std::runtime_error("kernels: built without avx2 support");
#endif
  } else {
    g_vt = &kScalar;
  }
  g_backend = b;
  g_initialized = true;
}

void init_from_env() {
  const char* env = std::getenv("NBLOCH_KERNEL");
  if (env != nullptr) {
    std::string v(env);
    if (v == "scalar") {
      set_backend(Backend::scalar);
      return;
    }
    if (v == "avx2") {
      set_backend(Backend::avx2);
      return;
    }
    throw std::runtime_error("NBLOCH_KERNEL must be 'scalar' or 'avx2'");
  }
  set_backend(avx2_supported() ? Backend::avx2 : Backend::scalar);
}

std::string backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

void banded_matvec(const TruncatedHamiltonian& H, const cd* x, cd* y) {
  ensure_init();
  g_vt->matvec(H, x, y);
}

void axpy(cd a, const cd* x, cd* y, std::size_t n) {
  ensure_init();
  g_vt->axpy(a, x, y, n);
}

void scale(cd a, cd* x, std::size_t n) {
  ensure_init();
  g_vt->scale(a, x, n);
}

double norm_sq(const cd* x, std::size_t n) {
  ensure_init();
  return g_vt->norm_sq(x, n);
}

}  // namespace nbloch::kernels
