#include "lmaflow/rng.hpp"

#include <cmath>

#include "lmaflow/grid.hpp"

namespace lmaflow {

void random_orthogonal(int n, Xorshift64Star& rng, double q[3][3]) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q[i][j] = (i == j) ? 1.0 : 0.0;
  if (n == 1) return;
  // Compose random Givens rotations over each axis pair, two passes.
  for (int pass = 0; pass < 2; ++pass)
    for (int p = 0; p < n - 1; ++p)
      for (int r = p + 1; r < n; ++r) {
        const double th = rng.uniform(0.0, kTwoPi);
        const double c = std::cos(th), s = std::sin(th);
        for (int i = 0; i < n; ++i) {
          const double qip = q[i][p], qir = q[i][r];
          q[i][p] = c * qip - s * qir;
          q[i][r] = s * qip + c * qir;
        }
      }
}

SymMat random_symmetric_with_spectrum(int n, double lo, double hi,
                                      Xorshift64Star& rng) {
  std::array<double, 3> lam{};
  for (int i = 0; i < n; ++i) lam[i] = rng.uniform(lo, hi);
  double q[3][3];
  random_orthogonal(n, rng, q);
  return sym_from_eigen(n, lam, q);
}

}  // namespace lmaflow
