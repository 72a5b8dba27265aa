#include "lmaflow/small_sym.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmaflow {

namespace {

// (i,j) -> packed offset for the xx yy zz xy xz yz layout.
inline int pack(int i, int j) {
  if (i == j) return i;
  const int lo = std::min(i, j), hi = std::max(i, j);
  if (lo == 0 && hi == 1) return 3;
  if (lo == 0 && hi == 2) return 4;
  return 5;  // (1,2)
}

}  // namespace

SymMat SymMat::zero(int n) {
  SymMat m;
  m.n = n;
  return m;
}

SymMat SymMat::identity(int n) {
  SymMat m;
  m.n = n;
  for (int i = 0; i < n; ++i) m.a[i] = 1.0;
  return m;
}

SymMat SymMat::diagonal(int n, const std::array<double, 3>& d) {
  SymMat m;
  m.n = n;
  for (int i = 0; i < n; ++i) m.a[i] = d[i];
  return m;
}

double& SymMat::at(int i, int j) { return a[pack(i, j)]; }
double SymMat::at(int i, int j) const { return a[pack(i, j)]; }

SymMat SymMat::plus(const SymMat& other) const {
  SymMat m = *this;
  for (int k = 0; k < 6; ++k) m.a[k] += other.a[k];
  return m;
}

SymMat SymMat::scaled(double s) const {
  SymMat m = *this;
  for (int k = 0; k < 6; ++k) m.a[k] *= s;
  return m;
}

SymMat SymMat::squared() const {
  SymMat m = SymMat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += at(i, k) * at(k, j);
      m.at(i, j) = s;
    }
  return m;
}

double SymMat::trace() const {
  double t = 0.0;
  for (int i = 0; i < n; ++i) t += a[i];
  return t;
}

double SymMat::det() const {
  switch (n) {
    case 1:
      return a[0];
    case 2:
      return a[0] * a[1] - a[3] * a[3];
    default: {
      const double xx = a[0], yy = a[1], zz = a[2];
      const double xy = a[3], xz = a[4], yz = a[5];
      return xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) +
             xz * (xy * yz - yy * xz);
    }
  }
}

SymMat SymMat::inverse() const {
  const double d = det();
  if (d == 0.0) throw std::runtime_error("singular symmetric matrix");
  SymMat m = SymMat::zero(n);
  switch (n) {
    case 1:
      m.a[0] = 1.0 / a[0];
      break;
    case 2:
      m.a[0] = a[1] / d;
      m.a[1] = a[0] / d;
      m.a[3] = -a[3] / d;
      break;
    default: {
      const double xx = a[0], yy = a[1], zz = a[2];
      const double xy = a[3], xz = a[4], yz = a[5];
      m.a[0] = (yy * zz - yz * yz) / d;
      m.a[1] = (xx * zz - xz * xz) / d;
      m.a[2] = (xx * yy - xy * xy) / d;
      m.a[3] = (xz * yz - xy * zz) / d;
      m.a[4] = (xy * yz - xz * yy) / d;
      m.a[5] = (xy * xz - xx * yz) / d;
    }
  }
  return m;
}

std::array<double, 3> SymMat::matvec(const std::array<double, 3>& x) const {
  std::array<double, 3> y{};
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double SymMat::quad_form(const std::array<double, 3>& x) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += x[i] * at(i, j) * x[j];
  return s;
}

std::array<double, 3> SymMat::eigenvalues() const {
  std::array<double, 3> lam{};
  double q[3][3];
  eigen_decompose(lam, q);
  return lam;
}

double SymMat::min_eigenvalue() const { return eigenvalues()[0]; }

double SymMat::max_eigenvalue() const { return eigenvalues()[n - 1]; }

void SymMat::eigen_decompose(std::array<double, 3>& lam, double q[3][3]) const {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q[i][j] = (i == j) ? 1.0 : 0.0;
  lam = {0.0, 0.0, 0.0};

  if (n == 1) {
    lam[0] = a[0];
    return;
  }

  if (n == 2) {
    const double axx = a[0], ayy = a[1], axy = a[3];
    if (axy == 0.0) {
      // Already diagonal; sort.
      if (axx <= ayy) {
        lam = {axx, ayy, 0.0};
      } else {
        lam = {ayy, axx, 0.0};
        q[0][0] = 0.0;
        q[1][0] = 1.0;
        q[0][1] = 1.0;
        q[1][1] = 0.0;
      }
      return;
    }
    const double mean = 0.5 * (axx + ayy);
    const double r = std::hypot(0.5 * (axx - ayy), axy);
    const double lo = mean - r, hi = mean + r;
    // Eigenvector for lo from the better-conditioned row.
    double vx, vy;
    if (std::abs(axx - lo) >= std::abs(ayy - lo)) {
      vx = -axy;
      vy = axx - lo;
    } else {
      vx = ayy - lo;
      vy = -axy;
    }
    const double norm = std::hypot(vx, vy);
    vx /= norm;
    vy /= norm;
    lam = {lo, hi, 0.0};
    q[0][0] = vx;
    q[1][0] = vy;
    q[0][1] = -vy;
    q[1][1] = vx;
    return;
  }

  // n == 3: cyclic Jacobi rotations.
  double m[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = at(i, j);

  const double fro = std::sqrt(m[0][0] * m[0][0] + m[1][1] * m[1][1] +
                               m[2][2] * m[2][2] +
                               2 * (m[0][1] * m[0][1] + m[0][2] * m[0][2] +
                                    m[1][2] * m[1][2]));
  const double tol = 1e-13 * std::max(1.0, fro);

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = std::sqrt(m[0][1] * m[0][1] + m[0][2] * m[0][2] +
                                 m[1][2] * m[1][2]);
    if (off <= tol) break;
    for (int p = 0; p < 2; ++p)
      for (int r = p + 1; r < 3; ++r) {
        if (m[p][r] == 0.0) continue;
        const double theta = (m[r][r] - m[p][p]) / (2.0 * m[p][r]);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double t =
            sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double mpr = m[p][r];
        m[p][r] = m[r][p] = 0.0;
        m[p][p] -= t * mpr;
        m[r][r] += t * mpr;
        for (int k = 0; k < 3; ++k) {
          if (k != p && k != r) {
            const double mkp = m[k][p], mkr = m[k][r];
            m[k][p] = m[p][k] = mkp - s * (mkr + tau * mkp);
            m[k][r] = m[r][k] = mkr + s * (mkp - tau * mkr);
          }
          const double qkp = q[k][p], qkr = q[k][r];
          q[k][p] = qkp - s * (qkr + tau * qkp);
          q[k][r] = qkr + s * (qkp - tau * qkr);
        }
      }
  }

  // Sort ascending, carrying eigenvector columns.
  std::array<int, 3> ord{0, 1, 2};
  std::sort(ord.begin(), ord.end(),
            [&](int i, int j) { return m[i][i] < m[j][j]; });
  double qs[3][3];
  for (int k = 0; k < 3; ++k) {
    lam[k] = m[ord[k]][ord[k]];
    for (int i = 0; i < 3; ++i) qs[i][k] = q[i][ord[k]];
  }
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) q[i][k] = qs[i][k];
}

bool SymMat::positive_definite() const {
  // Leading principal minors.
  if (!(a[0] > 0.0)) return false;
  if (n == 1) return true;
  if (!(a[0] * a[1] - a[3] * a[3] > 0.0)) return false;
  if (n == 2) return true;
  return det() > 0.0;
}

SymMat sym_from_eigen(int n, const std::array<double, 3>& lam,
                      const double q[3][3]) {
  SymMat m = SymMat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q[i][k] * lam[k] * q[j][k];
      m.at(i, j) = s;
    }
  return m;
}

}  // namespace lmaflow
