#include "nbloch/kernels.hpp"

namespace nbloch::kernels::scalar {

void banded_matvec(const TruncatedHamiltonian& H, const cd* x, cd* y) {
  const int N = H.N, b = H.bands, r = H.r, s = H.s;
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < b; ++a) y[n * b + a] = cd(0.0, 0.0);
    for (int l = -r; l <= s; ++l) {
      int m = n - l;
      if (H.boundary == Boundary::periodic)
        m = ((m % N) + N) % N;
      else if (m < 0 || m >= N)
        continue;
      const cd* blk = H.block(l);
      for (int a = 0; a < b; ++a) {
        cd acc(0.0, 0.0);
        for (int c = 0; c < b; ++c) acc += blk[a * b + c] * x[m * b + c];
        y[n * b + a] += acc;
      }
    }
  }
}

void axpy(cd a, const cd* x, cd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(cd a, cd* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double norm_sq(const cd* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::norm(x[i]);
  return acc;
}

}  // namespace nbloch::kernels::scalar
