// Copyright (c) 2026 The GNOLR Authors. All Rights Reserved.
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

// Dense numerical kernel: matrices, activations, normalization, cosine
// similarity, Adam and a finite-difference gradient checker. Every forward
// op has a hand-derived backward; there is no graph or tape.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gnolr::tensor {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Rng = std::mt19937_64;

inline constexpr double kNormEpsilon = 1e-12;

Matrix matmul_forward(const Matrix& a, const Matrix& b);

struct MatmulGrads {
  Matrix a;
  Matrix b;
};
// upstream * b^T and a^T * upstream.
MatmulGrads matmul_backward(const Matrix& upstream, const Matrix& a, const Matrix& b);

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }
inline double leaky_relu_grad(double x, double slope) { return x >= 0.0 ? 1.0 : slope; }
Matrix leaky_relu(const Matrix& x, double slope);
Matrix leaky_relu_backward(const Matrix& upstream, const Matrix& pre_activation, double slope);

double stable_sigmoid(double x);
// log(1 + e^x) without overflow.
double softplus(double x);

struct Normalized {
  std::vector<double> unit;
  double norm = 0.0;
  bool degenerate = false;
};
// v / max(|v|, kNormEpsilon); a zero vector comes back as zeros, flagged.
Normalized l2_normalize(std::span<const double> v);
std::vector<double> l2_normalize_backward(std::span<const double> upstream,
                                          std::span<const double> input);

// Row-wise normalization of a batch.
struct NormalizedRows {
  Matrix unit;
  Vector norms;
  std::int64_t degenerate_rows = 0;
};
NormalizedRows normalize_rows(const Matrix& x);
Matrix normalize_rows_backward(const Matrix& upstream, const NormalizedRows& fwd);

double cosine_kernel(std::span<const double> a, std::span<const double> b);
struct CosineGrads {
  std::vector<double> a;
  std::vector<double> b;
};
CosineGrads cosine_kernel_backward(std::span<const double> a, std::span<const double> b,
                                   double upstream);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  std::int64_t step_count = 0;

  Parameter() = default;
  Parameter(std::string name, Matrix init);

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

// Bias-corrected Adam. Rows whose gradient is entirely zero keep their value
// and moments, so embedding rows a batch never touched stay bit-identical.
// The gradient is cleared afterwards.
void adam_step(Parameter& param, const AdamConfig& cfg);

// Glorot-uniform in [-sqrt(6/(fan_in+fan_out)), +sqrt(...)].
Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);
Matrix uniform(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng);

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  int samples = 100;
  // Denominator floor for the relative error, so that coordinates with
  // vanishing gradients are judged on absolute error.
  double denom_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  int coordinates_checked = 0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  bool passed = true;
};

// Compares the gradients already stored in each parameter's `grad` against
// central differences of `loss` at randomly sampled coordinates. `loss` must
// be a deterministic function of the parameter values.
GradCheckReport finite_diff_check(const std::function<double()>& loss,
                                  std::span<Parameter* const> params,
                                  const GradCheckOptions& opts = {});

bool all_finite(const Matrix& m);

}  // namespace gnolr::tensor
