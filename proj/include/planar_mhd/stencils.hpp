#ifndef PLANAR_MHD_STENCILS_HPP
#define PLANAR_MHD_STENCILS_HPP

// Discrete operators shared by the solver, the compatibility check and the
// diagnostics. Face k sits between cells k-1 and k; faces 0 and n are the
// walls. Ghost values: odd reflection (wall value zero) for u, w, b and even
// reflection (zero wall gradient) for rho and theta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "planar_mhd/core.hpp"

namespace planar_mhd {

enum class Wall { Odd, Even };

/// Values at the n+1 faces: arithmetic mean inside, wall value from the ghost.
inline std::vector<double> face_average(std::span<const double> v, Wall wall) {
  const std::size_t n = v.size();
  std::vector<double> f(n + 1);
  for (std::size_t k = 1; k < n; ++k) f[k] = 0.5 * (v[k - 1] + v[k]);
  f[0] = wall == Wall::Odd ? 0.0 : v[0];
  f[n] = wall == Wall::Odd ? 0.0 : v[n - 1];
  return f;
}

/// Gradients at the n+1 faces. Odd walls give 2 v_0 / dx, even walls give 0.
inline std::vector<double> face_gradient(std::span<const double> v, double dx, Wall wall) {
  const std::size_t n = v.size();
  std::vector<double> g(n + 1);
  for (std::size_t k = 1; k < n; ++k) g[k] = (v[k] - v[k - 1]) / dx;
  g[0] = wall == Wall::Odd ? 2.0 * v[0] / dx : 0.0;
  g[n] = wall == Wall::Odd ? -2.0 * v[n - 1] / dx : 0.0;
  return g;
}

/// Cell divergence of face values: (f_{k+1} - f_k) / dx.
inline std::vector<double> face_divergence(std::span<const double> f, double dx) {
  std::vector<double> d(f.size() - 1);
  for (std::size_t i = 0; i + 1 < f.size(); ++i) d[i] = (f[i + 1] - f[i]) / dx;
  return d;
}

/// Central cell derivative through face averages.
inline std::vector<double> cell_derivative(std::span<const double> v, double dx, Wall wall) {
  return face_divergence(face_average(v, wall), dx);
}

/// Energy-consistent cell value of v_x^2: half the squared gradients of the
/// two bounding faces. Summing over cells reproduces the face sum of the
/// discrete Dirichlet form.
inline std::vector<double> cell_gradient_squared(std::span<const double> v, double dx, Wall wall) {
  const auto g = face_gradient(v, dx, wall);
  std::vector<double> s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = 0.5 * (g[i] * g[i] + g[i + 1] * g[i + 1]);
  return s;
}

/// Three-point second difference using the wall ghosts.
inline std::vector<double> laplacian(std::span<const double> v, double dx, Wall wall) {
  return face_divergence(face_gradient(v, dx, wall), dx);
}

/// Three-point second difference inside, one-sided four-point at the two end
/// cells. Used for norms where no boundary condition is assumed.
inline std::vector<double> second_difference_free(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n < 4) return d;
  const double h2 = dx * dx;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
  d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
  d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
  return d;
}

inline std::vector<double> component(const std::vector<Vec2>& v, std::size_t c) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i][c];
  return out;
}

/// dx-weighted sum.
inline double integrate(std::span<const double> v, double dx) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * dx;
}

/// Discrete L2 norm sqrt(sum v_i^2 dx).
inline double l2_norm(std::span<const double> v, double dx) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s * dx);
}

/// Face conductivities: mean of kappa in the two adjacent cells (the wall
/// faces reuse the boundary cell).
inline std::vector<double> kappa_faces(std::span<const double> theta, const PhysParams& params) {
  const std::size_t n = theta.size();
  std::vector<double> k_cell(n);
  for (std::size_t i = 0; i < n; ++i) k_cell[i] = kappa(std::max(theta[i], 0.0), params);
  return face_average(k_cell, Wall::Even);
}

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tridiagonal system: lower[i] multiplies x[i-1], upper[i] multiplies x[i+1].
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += lower[i] * x[i - 1];
      if (i + 1 < n) s += upper[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }
};

/// Thomas algorithm without pivoting. Throws SingularSystem when a pivot
/// vanishes relative to the row scale.
inline std::vector<double> solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs) {
  const std::size_t n = m.size();
  if (rhs.size() != n) throw std::invalid_argument("solve_tridiagonal: size mismatch");
  std::vector<double> c(n), d(n);
  auto check = [&](double pivot, std::size_t i) {
    const double scale = std::abs(m.diag[i]) + std::abs(m.lower[i]) + std::abs(m.upper[i]);
    if (!(std::abs(pivot) > 1e-300) || !(std::abs(pivot) > 1e-14 * scale)) {
      throw SingularSystem("tridiagonal solve: zero pivot at row " + std::to_string(i));
    }
  };
  check(m.diag[0], 0);
  c[0] = m.upper[0] / m.diag[0];
  d[0] = rhs[0] / m.diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double pivot = m.diag[i] - m.lower[i] * c[i - 1];
    check(pivot, i);
    c[i] = m.upper[i] / pivot;
    d[i] = (rhs[i] - m.lower[i] * d[i - 1]) / pivot;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

/// Backward-Euler diffusion operator  weight_i x_i - dt (coef_f x_x)_x  with
/// face coefficients coef (n+1 entries, walls included) and the given wall
/// ghost convention.
inline Tridiagonal implicit_diffusion(std::span<const double> weight, std::span<const double> coef,
                                      double dt, double dx, Wall wall) {
  const std::size_t n = weight.size();
  Tridiagonal m(n);
  const double s = dt / (dx * dx);
  for (std::size_t i = 0; i < n; ++i) {
    double left = coef[i] * s;
    double right = coef[i + 1] * s;
    double d = weight[i];
    if (i == 0) {
      d += wall == Wall::Odd ? 2.0 * left : 0.0;
      left = 0.0;
    } else {
      d += left;
    }
    if (i + 1 == n) {
      d += wall == Wall::Odd ? 2.0 * right : 0.0;
      right = 0.0;
    } else {
      d += right;
    }
    m.diag[i] = d;
    m.lower[i] = -left;
    m.upper[i] = -right;
  }
  return m;
}

}  // namespace planar_mhd

#endif  // PLANAR_MHD_STENCILS_HPP
