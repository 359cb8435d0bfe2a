// Copyright 2026 The fxsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fxsynth/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "fxsynth/error.hpp"

namespace fxsynth::linalg {

void require_valid(const Matrix& a, std::string_view what) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw DimensionError(std::string(what) + ": empty matrix");
  }
  if (!a.allFinite()) {
    throw Error(std::string(what) + ": non-finite entry");
  }
}

void require_square(const Matrix& a, std::string_view what) {
  require_valid(a, what);
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + ": expected square matrix, got " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
  }
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw DimensionError("matrix must have at least one row and column");
  }
  const auto cols = rows.front().size();
  Matrix a(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw DimensionError("ragged matrix: row " + std::to_string(i) +
                           " has " + std::to_string(rows[i].size()) +
                           " entries, expected " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  require_valid(a, "matrix");
  return a;
}

std::vector<std::vector<double>> to_rows(const Matrix& a) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      rows[static_cast<std::size_t>(i)].push_back(a(i, j));
    }
  }
  return rows;
}

Matrix mat_exp(const Matrix& a, double t) {
  require_square(a, "mat_exp");
  if (!std::isfinite(t)) throw Error("mat_exp: non-finite time");
  // Eigen uses Pade approximants with scaling and squaring.
  Matrix at = a * t;
  return at.exp();
}

Spectrum eigenvalues(const Matrix& a) {
  require_square(a, "eigenvalues");
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError(
        "eigenvalues: QR iteration did not converge within the per-row cap");
  }
  Spectrum values(solver.eigenvalues().begin(), solver.eigenvalues().end());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  std::vector<bool> paired(values.size(), false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::abs(values[i].imag()) <= tol) {
      values[i] = Complex(values[i].real(), 0.0);
      paired[i] = true;
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (paired[i] || values[i].imag() < 0) continue;
    std::size_t best = values.size();
    double best_dist = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (paired[j] || values[j].imag() >= 0) continue;
      const double d = std::abs(values[j] - std::conj(values[i]));
      if (best == values.size() || d < best_dist) {
        best = j;
        best_dist = d;
      }
    }
    if (best == values.size()) continue;
    values[best] = std::conj(values[i]);
    paired[i] = paired[best] = true;
  }
  std::sort(values.begin(), values.end(), [](Complex x, Complex y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return values;
}

double spectral_radius(const Matrix& a) {
  double radius = 0;
  for (const auto& lambda : eigenvalues(a)) {
    radius = std::max(radius, std::abs(lambda));
  }
  return radius;
}

double induced_2_norm(const Matrix& a) {
  require_valid(a, "induced_2_norm");
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double induced_2_norm(const ComplexMatrix& a) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw DimensionError("induced_2_norm: empty matrix");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

double complex_resolvent_norm(const Matrix& g, const Matrix& h,
                              const Matrix& c_out, double theta) {
  require_square(g, "complex_resolvent_norm(G)");
  require_valid(h, "complex_resolvent_norm(H)");
  require_valid(c_out, "complex_resolvent_norm(C_out)");
  const auto n = g.rows();
  if (h.rows() != n || c_out.cols() != n) {
    throw DimensionError("complex_resolvent_norm: shape mismatch");
  }
  ComplexMatrix m = -g.cast<Complex>();
  m.diagonal().array() += std::polar(1.0, theta);
  Eigen::PartialPivLU<ComplexMatrix> lu(m);
  if (!(lu.rcond() > 1e-14)) {
    throw SingularError("complex_resolvent_norm: e^{i theta} is an eigenvalue");
  }
  ComplexMatrix x = lu.solve(h.cast<Complex>());
  ComplexMatrix y = c_out.cast<Complex>() * x;
  return induced_2_norm(y);
}

Matrix solve_discrete_lyapunov(const Matrix& m, const Matrix& w) {
  require_square(m, "solve_discrete_lyapunov(M)");
  require_square(w, "solve_discrete_lyapunov(W)");
  const auto n = m.rows();
  if (w.rows() != n) {
    throw DimensionError("solve_discrete_lyapunov: M and W differ in size");
  }
  if (spectral_radius(m) >= 1.0) {
    throw NoSolutionError("solve_discrete_lyapunov: spectral radius >= 1");
  }
  // vec(M^T X M) = (M^T kron M^T) vec(X) for column-major vec.
  const Matrix mt = m.transpose();
  Matrix k(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) = mt(i, j) * mt;
    }
  }
  k -= Matrix::Identity(n * n, n * n);
  const Vector rhs = -Eigen::Map<const Vector>(w.data(), n * n);
  Eigen::PartialPivLU<Matrix> lu(k);
  Vector vec_x = lu.solve(rhs);
  Matrix x = Eigen::Map<Matrix>(vec_x.data(), n, n);
  x = 0.5 * (x + x.transpose()).eval();
  const double residual = (mt * x * m - x + w).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) ||
      residual > 1e-9 * (1.0 + w.cwiseAbs().maxCoeff()) *
                     std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw NoSolutionError("solve_discrete_lyapunov: residual " +
                          std::to_string(residual) + " too large");
  }
  return x;
}

DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r) {
  require_square(a, "solve_dare(A)");
  require_valid(b, "solve_dare(B)");
  require_square(q, "solve_dare(Q)");
  require_square(r, "solve_dare(R)");
  const auto n = a.rows();
  if (b.rows() != n || q.rows() != n || r.rows() != b.cols()) {
    throw DimensionError("solve_dare: shape mismatch");
  }
  Eigen::LLT<Matrix> r_llt(r);
  if (r_llt.info() != Eigen::Success) {
    throw Error("solve_dare: R is not positive definite");
  }
  // Doubling on the Riccati difference iteration: after k steps h holds the
  // iterate X_{2^k - 1} started from X_0 = Q.
  Matrix ak = a;
  Matrix gk = b * r_llt.solve(b.transpose());
  Matrix hk = q;
  const Matrix id = Matrix::Identity(n, n);
  DareSolution out;
  for (int it = 1; it <= kDareIterationCap; ++it) {
    Eigen::PartialPivLU<Matrix> w(id + gk * hk);
    const Matrix w_a = w.solve(ak);
    const Matrix w_g = w.solve(gk);
    Matrix h_next = hk + ak.transpose() * hk * w_a;
    Matrix g_next = gk + ak * w_g * ak.transpose();
    Matrix a_next = ak * w_a;
    h_next = 0.5 * (h_next + h_next.transpose()).eval();
    g_next = 0.5 * (g_next + g_next.transpose()).eval();
    if (!h_next.allFinite()) {
      throw ConvergenceError("solve_dare: iteration diverged");
    }
    const double change = (h_next - hk).norm();
    hk = std::move(h_next);
    gk = std::move(g_next);
    ak = std::move(a_next);
    if (change <= 1e-10 * hk.norm()) {
      out.iterations = it;
      out.cost = hk;
      const Matrix btx = b.transpose() * hk;
      out.gain = (r + btx * b).ldlt().solve(btx * a);
      return out;
    }
  }
  throw ConvergenceError("solve_dare: iteration cap exceeded");
}

}  // namespace fxsynth::linalg
