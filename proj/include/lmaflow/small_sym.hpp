#pragma once

#include <array>

namespace lmaflow {

/// Symmetric n x n matrix, n <= 3. Storage order: xx yy zz xy xz yz.
///
/// Eigenvalues use closed forms for n = 1, 2 and a cyclic Jacobi sweep
/// (tolerance 1e-13) for n = 3, so results are deterministic and carry
/// no external dependency.
struct SymMat {
  int n = 1;
  std::array<double, 6> a{};

  static SymMat zero(int n);
  static SymMat identity(int n);
  static SymMat diagonal(int n, const std::array<double, 3>& d);

  double& at(int i, int j);
  double at(int i, int j) const;

  SymMat plus(const SymMat& other) const;
  SymMat scaled(double s) const;
  /// Symmetric product M*M (always symmetric).
  SymMat squared() const;

  double trace() const;
  double det() const;
  SymMat inverse() const;

  std::array<double, 3> matvec(const std::array<double, 3>& x) const;
  double quad_form(const std::array<double, 3>& x) const;  // x^T A x

  /// Ascending eigenvalues.
  std::array<double, 3> eigenvalues() const;
  double min_eigenvalue() const;
  double max_eigenvalue() const;

  /// A = Q diag(lam) Q^T with Q[i][k] = component i of eigenvector k,
  /// eigenvalues ascending.
  void eigen_decompose(std::array<double, 3>& lam, double q[3][3]) const;

  bool positive_definite() const;
};

/// Rebuild Q diag(lam) Q^T.
SymMat sym_from_eigen(int n, const std::array<double, 3>& lam,
                      const double q[3][3]);

}  // namespace lmaflow
