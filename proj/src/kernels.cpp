/*
 * Copyright 2026 The ulsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ulsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace ulsim::kernels {
namespace {

using Index = std::int64_t;

Index as_index(std::size_t n) { return static_cast<Index>(n); }

}  // namespace

namespace serial {

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void sub(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
}

void weighted_sum(std::span<const std::span<const double>> inputs,
                  std::span<const double> weights, std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) acc += weights[i] * inputs[i][j];
    out[j] = acc;
  }
}

void dense_forward(std::span<const double> weights, std::span<const double> bias,
                   std::span<const double> in, std::size_t rows,
                   std::size_t in_dim, std::size_t out_dim,
                   std::span<double> out) {
  for (std::size_t s = 0; s < rows; ++s) {
    const double* x = in.data() + s * in_dim;
    for (std::size_t j = 0; j < out_dim; ++j) {
      const double* w = weights.data() + j * in_dim;
      double acc = bias[j];
      for (std::size_t k = 0; k < in_dim; ++k) acc += w[k] * x[k];
      out[s * out_dim + j] = acc;
    }
  }
}

void dense_backward_params(std::span<const double> dout,
                           std::span<const double> in, std::size_t rows,
                           std::size_t in_dim, std::size_t out_dim,
                           std::span<double> grad_w, std::span<double> grad_b) {
  for (std::size_t j = 0; j < out_dim; ++j) {
    double* gw = grad_w.data() + j * in_dim;
    for (std::size_t s = 0; s < rows; ++s) {
      const double d = dout[s * out_dim + j];
      const double* x = in.data() + s * in_dim;
      for (std::size_t k = 0; k < in_dim; ++k) gw[k] += d * x[k];
      grad_b[j] += d;
    }
  }
}

void dense_backward_input(std::span<const double> dout,
                          std::span<const double> weights, std::size_t rows,
                          std::size_t in_dim, std::size_t out_dim,
                          std::span<double> din) {
  for (std::size_t s = 0; s < rows; ++s) {
    double* dx = din.data() + s * in_dim;
    std::fill(dx, dx + in_dim, 0.0);
    for (std::size_t j = 0; j < out_dim; ++j) {
      const double d = dout[s * out_dim + j];
      const double* w = weights.data() + j * in_dim;
      for (std::size_t k = 0; k < in_dim; ++k) dx[k] += d * w[k];
    }
  }
}

}  // namespace serial

namespace parallel {

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const Index n = as_index(y.size());
#pragma omp parallel for if (y.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) y[i] += a * x[i];
}

void sub(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  const Index n = as_index(out.size());
#pragma omp parallel for if (out.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void weighted_sum(std::span<const std::span<const double>> inputs,
                  std::span<const double> weights, std::span<double> out) {
  const Index n = as_index(out.size());
#pragma omp parallel for if (out.size() >= kParallelThreshold)
  for (Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) acc += weights[i] * inputs[i][j];
    out[j] = acc;
  }
}

void dense_forward(std::span<const double> weights, std::span<const double> bias,
                   std::span<const double> in, std::size_t rows,
                   std::size_t in_dim, std::size_t out_dim,
                   std::span<double> out) {
  const Index n = as_index(rows);
#pragma omp parallel for if (rows * out_dim * in_dim >= kParallelThreshold * 64)
  for (Index s = 0; s < n; ++s) {
    const double* x = in.data() + s * in_dim;
    for (std::size_t j = 0; j < out_dim; ++j) {
      const double* w = weights.data() + j * in_dim;
      double acc = bias[j];
      for (std::size_t k = 0; k < in_dim; ++k) acc += w[k] * x[k];
      out[s * out_dim + j] = acc;
    }
  }
}

void dense_backward_params(std::span<const double> dout,
                           std::span<const double> in, std::size_t rows,
                           std::size_t in_dim, std::size_t out_dim,
                           std::span<double> grad_w, std::span<double> grad_b) {
  const Index n = as_index(out_dim);
#pragma omp parallel for if (rows * out_dim * in_dim >= kParallelThreshold * 64)
  for (Index j = 0; j < n; ++j) {
    double* gw = grad_w.data() + j * in_dim;
    for (std::size_t s = 0; s < rows; ++s) {
      const double d = dout[s * out_dim + j];
      const double* x = in.data() + s * in_dim;
      for (std::size_t k = 0; k < in_dim; ++k) gw[k] += d * x[k];
      grad_b[j] += d;
    }
  }
}

void dense_backward_input(std::span<const double> dout,
                          std::span<const double> weights, std::size_t rows,
                          std::size_t in_dim, std::size_t out_dim,
                          std::span<double> din) {
  const Index n = as_index(rows);
#pragma omp parallel for if (rows * out_dim * in_dim >= kParallelThreshold * 64)
  for (Index s = 0; s < n; ++s) {
    double* dx = din.data() + s * in_dim;
    std::fill(dx, dx + in_dim, 0.0);
    for (std::size_t j = 0; j < out_dim; ++j) {
      const double d = dout[s * out_dim + j];
      const double* w = weights.data() + j * in_dim;
      for (std::size_t k = 0; k < in_dim; ++k) dx[k] += d * w[k];
    }
  }
}

}  // namespace parallel

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace ulsim::kernels
