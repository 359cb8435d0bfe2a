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

#pragma once

#include <complex>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fxsynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

namespace linalg {

// Throws DimensionError for empty matrices and Error for non-finite entries.
void require_valid(const Matrix& a, std::string_view what);
void require_square(const Matrix& a, std::string_view what);

// Builds a matrix from nested rows; all rows must have equal length.
Matrix from_rows(const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> to_rows(const Matrix& a);

Matrix mat_exp(const Matrix& a, double t);

// Eigenvalues sorted by (real, imag) with exact conjugate pairing.
Spectrum eigenvalues(const Matrix& a);
double spectral_radius(const Matrix& a);

double induced_2_norm(const Matrix& a);
double induced_2_norm(const ComplexMatrix& a);

// ||C_out (e^{i theta} I - G)^{-1} H||. Throws SingularError when e^{i theta}
// is (numerically) an eigenvalue of G.
double complex_resolvent_norm(const Matrix& g, const Matrix& h,
                              const Matrix& c_out, double theta);

// Solves M^T X M - X + W = 0. Throws NoSolutionError if rho(M) >= 1.
Matrix solve_discrete_lyapunov(const Matrix& m, const Matrix& w);

struct DareSolution {
  Matrix gain;  // K = (R + B^T X B)^{-1} B^T X A
  Matrix cost;  // X
  int iterations = 0;
};

inline constexpr int kDareIterationCap = 10000;

// Stabilizing solution of the discrete algebraic Riccati equation.
DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r);

}  // namespace linalg
}  // namespace fxsynth
