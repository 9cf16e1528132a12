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

#include "gnolr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnolr/errors.hpp"

namespace gnolr::tensor {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Matrix matmul_forward(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul shape mismatch: " + shape(a) + " * " + shape(b));
  }
  return a * b;
}

MatmulGrads matmul_backward(const Matrix& upstream, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows() || upstream.rows() != a.rows() || upstream.cols() != b.cols()) {
    throw DimensionError("matmul backward shape mismatch: upstream " + shape(upstream) +
                         ", a " + shape(a) + ", b " + shape(b));
  }
  return {upstream * b.transpose(), a.transpose() * upstream};
}

Matrix leaky_relu(const Matrix& x, double slope) {
  return x.unaryExpr([slope](double v) { return leaky_relu(v, slope); });
}

Matrix leaky_relu_backward(const Matrix& upstream, const Matrix& pre_activation,
                           double slope) {
  if (upstream.rows() != pre_activation.rows() || upstream.cols() != pre_activation.cols()) {
    throw DimensionError("leaky_relu backward shape mismatch");
  }
  return upstream.cwiseProduct(
      pre_activation.unaryExpr([slope](double v) { return leaky_relu_grad(v, slope); }));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Normalized l2_normalize(std::span<const double> v) {
  Normalized out;
  out.norm = std::sqrt(dot(v, v));
  out.degenerate = out.norm <= kNormEpsilon;
  const double denom = std::max(out.norm, kNormEpsilon);
  out.unit.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.unit[i] = v[i] / denom;
  return out;
}

std::vector<double> l2_normalize_backward(std::span<const double> upstream,
                                          std::span<const double> input) {
  if (upstream.size() != input.size()) throw DimensionError("l2_normalize backward size mismatch");
  const Normalized fwd = l2_normalize(input);
  std::vector<double> dx(input.size());
  if (fwd.norm <= kNormEpsilon) {
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = upstream[i] / kNormEpsilon;
    return dx;
  }
  const double proj = dot(fwd.unit, upstream);
  for (std::size_t i = 0; i < dx.size(); ++i) {
    dx[i] = (upstream[i] - fwd.unit[i] * proj) / fwd.norm;
  }
  return dx;
}

NormalizedRows normalize_rows(const Matrix& x) {
  NormalizedRows out;
  out.norms = x.rowwise().norm();
  out.unit.resize(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double n = out.norms(r);
    if (n <= kNormEpsilon) ++out.degenerate_rows;
    out.unit.row(r) = x.row(r) / std::max(n, kNormEpsilon);
  }
  return out;
}

Matrix normalize_rows_backward(const Matrix& upstream, const NormalizedRows& fwd) {
  Matrix dx(upstream.rows(), upstream.cols());
  for (Eigen::Index r = 0; r < upstream.rows(); ++r) {
    const double n = fwd.norms(r);
    if (n <= kNormEpsilon) {
      dx.row(r) = upstream.row(r) / kNormEpsilon;
      continue;
    }
    const double proj = fwd.unit.row(r).dot(upstream.row(r));
    dx.row(r) = (upstream.row(r) - fwd.unit.row(r) * proj) / n;
  }
  return dx;
}

double cosine_kernel(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine kernel size mismatch");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na <= kNormEpsilon || nb <= kNormEpsilon) {
    throw KernelError("cosine kernel of a degenerate (zero-norm) vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

CosineGrads cosine_kernel_backward(std::span<const double> a, std::span<const double> b,
                                   double upstream) {
  if (a.size() != b.size()) throw DimensionError("cosine kernel size mismatch");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na <= kNormEpsilon || nb <= kNormEpsilon) {
    throw KernelError("cosine kernel of a degenerate (zero-norm) vector");
  }
  const double c = dot(a, b) / (na * nb);
  CosineGrads g{std::vector<double>(a.size()), std::vector<double>(b.size())};
  for (std::size_t i = 0; i < a.size(); ++i) {
    g.a[i] = upstream * (b[i] / (na * nb) - c * a[i] / (na * na));
    g.b[i] = upstream * (a[i] / (na * nb) - c * b[i] / (nb * nb));
  }
  return g;
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in (0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

Parameter::Parameter(std::string n, Matrix init)
    : name(std::move(n)),
      value(std::move(init)),
      grad(Matrix::Zero(value.rows(), value.cols())),
      adam_m(Matrix::Zero(value.rows(), value.cols())),
      adam_v(Matrix::Zero(value.rows(), value.cols())) {}

void adam_step(Parameter& param, const AdamConfig& cfg) {
  if (!all_finite(param.grad)) {
    throw OptimizerError("non-finite gradient in parameter '" + param.name + "'");
  }
  ++param.step_count;
  const double t = static_cast<double>(param.step_count);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (Eigen::Index r = 0; r < param.value.rows(); ++r) {
    auto g = param.grad.row(r);
    if ((g.array() == 0.0).all()) continue;
    auto m = param.adam_m.row(r);
    auto v = param.adam_v.row(r);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    for (Eigen::Index c = 0; c < param.value.cols(); ++c) {
      const double mhat = m(c) / bc1;
      const double vhat = v(c) / bc2;
      param.value(r, c) -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
  param.grad.setZero();
}

Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform(fan_in, fan_out, -limit, limit, rng);
}

Matrix uniform(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

GradCheckReport finite_diff_check(const std::function<double()>& loss,
                                  std::span<Parameter* const> params,
                                  const GradCheckOptions& opts) {
  GradCheckReport report;
  Eigen::Index total = 0;
  for (const Parameter* p : params) total += p->size();
  if (total == 0 || opts.samples <= 0) return report;

  Rng rng(opts.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, total - 1);
  for (int s = 0; s < opts.samples; ++s) {
    Eigen::Index flat = pick(rng);
    Parameter* target = nullptr;
    for (Parameter* p : params) {
      if (flat < p->size()) {
        target = p;
        break;
      }
      flat -= p->size();
    }
    double& x = target->value.data()[flat];
    const double saved = x;
    x = saved + opts.step;
    const double up = loss();
    x = saved - opts.step;
    const double down = loss();
    x = saved;
    const double numeric = (up - down) / (2.0 * opts.step);
    const double analytic = target->grad.data()[flat];
    const double denom = std::max({std::abs(numeric), std::abs(analytic), opts.denom_floor});
    const double rel = std::abs(numeric - analytic) / denom;
    ++report.coordinates_checked;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_parameter = target->name;
      report.worst_index = flat;
    }
  }
  report.passed = report.max_rel_error < opts.tolerance;
  return report;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace gnolr::tensor
