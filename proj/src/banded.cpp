#include "lmaflow/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmaflow {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1) {
  ab_.assign(static_cast<size_t>(ldab_) * n_, 0.0);
  ipiv_.assign(n_, 0);
}

double& BandedMatrix::at(int i, int j) {
  // Row i of column j sits at offset kl + ku + i - j; factorization fill
  // occupies the first kl rows of the storage.
  return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
}

double BandedMatrix::at(int i, int j) const {
  return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
}

void BandedMatrix::add(int i, int j, double v) {
  if (i < 0 || i >= n_ || j < 0 || j >= n_)
    throw std::out_of_range("banded index out of range");
  if (j - i > ku_ || i - j > kl_)
    throw std::out_of_range("entry outside the band");
  at(i, j) += v;
}

double BandedMatrix::get(int i, int j) const {
  if (j - i > ku_ || i - j > kl_) return 0.0;
  return at(i, j);
}

void BandedMatrix::factor() {
  if (factored_) throw std::logic_error("already factored");
  const int kv = kl_ + ku_;  // effective superdiagonals with fill
  for (int j = 0; j < n_; ++j) {
    const int ilast = std::min(n_ - 1, j + kl_);
    // Pivot search in column j among rows j..j+kl.
    int piv = j;
    double pmax = std::abs(at(j, j));
    for (int i = j + 1; i <= ilast; ++i) {
      const double v = std::abs(at(i, j));
      if (v > pmax) {
        pmax = v;
        piv = i;
      }
    }
    if (pmax == 0.0) throw std::runtime_error("banded matrix is singular");
    ipiv_[j] = piv;
    const int jlast = std::min(n_ - 1, j + kv);
    if (piv != j)
      for (int k = j; k <= jlast; ++k) std::swap(at(j, k), at(piv, k));
    const double d = at(j, j);
    for (int i = j + 1; i <= ilast; ++i) {
      const double l = at(i, j) / d;
      at(i, j) = l;
      if (l != 0.0)
        for (int k = j + 1; k <= jlast; ++k) at(i, k) -= l * at(j, k);
    }
  }
  factored_ = true;
}

std::vector<double> BandedMatrix::solve(const std::vector<double>& b) const {
  if (!factored_) throw std::logic_error("factor() before solve()");
  if (static_cast<int>(b.size()) != n_)
    throw std::invalid_argument("rhs size mismatch");
  std::vector<double> x = b;
  const int kv = kl_ + ku_;
  // Forward substitution with row swaps.
  for (int j = 0; j < n_; ++j) {
    if (ipiv_[j] != j) std::swap(x[j], x[ipiv_[j]]);
    const int ilast = std::min(n_ - 1, j + kl_);
    for (int i = j + 1; i <= ilast; ++i) x[i] -= at(i, j) * x[j];
  }
  // Back substitution.
  for (int j = n_ - 1; j >= 0; --j) {
    x[j] /= at(j, j);
    const int ifirst = std::max(0, j - kv);
    for (int i = ifirst; i < j; ++i) x[i] -= at(i, j) * x[j];
  }
  return x;
}

}  // namespace lmaflow
