#pragma once

#include <vector>

namespace lmaflow {

/// General banded matrix with kl sub- and ku super-diagonals, LU-factored
/// in place with partial pivoting (LAPACK band storage layout, so the
/// factorization can fill up to kl extra super-diagonals).
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);

  void add(int i, int j, double v);
  double get(int i, int j) const;

  /// Factor in place; throws std::runtime_error on an exactly singular
  /// pivot. Must be called once before solve().
  void factor();

  /// Solve A x = b using the stored factors.
  std::vector<double> solve(const std::vector<double>& b) const;

  int size() const { return n_; }

 private:
  int n_, kl_, ku_, ldab_;
  bool factored_ = false;
  std::vector<double> ab_;   // column-major band storage
  std::vector<int> ipiv_;

  double& at(int i, int j);
  double at(int i, int j) const;
};

}  // namespace lmaflow
