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

#ifndef ULSIM_KERNELS_HPP_
#define ULSIM_KERNELS_HPP_

// Dense numeric kernels used by the model and by aggregation.
//
// Every kernel exists twice: `serial` is the reference implementation and
// `parallel` distributes independent output elements over OpenMP threads.
// Each output element is accumulated in the same order in both variants, so
// the two produce bit-identical results for any thread count.

#include <cstddef>
#include <span>

namespace ulsim::kernels {

// Minimum number of independent work items before a parallel region opens.
inline constexpr std::size_t kParallelThreshold = 2048;

namespace serial {

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

// out = a - b
void sub(std::span<const double> a, std::span<const double> b,
         std::span<double> out);

// out = sum_i weights[i] * inputs[i]
void weighted_sum(std::span<const std::span<const double>> inputs,
                  std::span<const double> weights, std::span<double> out);

// out[s, j] = bias[j] + sum_k weights[j, k] * in[s, k]; matrices row-major.
void dense_forward(std::span<const double> weights, std::span<const double> bias,
                   std::span<const double> in, std::size_t rows,
                   std::size_t in_dim, std::size_t out_dim,
                   std::span<double> out);

// grad_w[j, k] += sum_s dout[s, j] * in[s, k];  grad_b[j] += sum_s dout[s, j]
void dense_backward_params(std::span<const double> dout,
                           std::span<const double> in, std::size_t rows,
                           std::size_t in_dim, std::size_t out_dim,
                           std::span<double> grad_w, std::span<double> grad_b);

// din[s, k] = sum_j dout[s, j] * weights[j, k]
void dense_backward_input(std::span<const double> dout,
                          std::span<const double> weights, std::size_t rows,
                          std::size_t in_dim, std::size_t out_dim,
                          std::span<double> din);

}  // namespace serial

namespace parallel {

void axpy(double a, std::span<const double> x, std::span<double> y);
void sub(std::span<const double> a, std::span<const double> b,
         std::span<double> out);
void weighted_sum(std::span<const std::span<const double>> inputs,
                  std::span<const double> weights, std::span<double> out);
void dense_forward(std::span<const double> weights, std::span<const double> bias,
                   std::span<const double> in, std::size_t rows,
                   std::size_t in_dim, std::size_t out_dim,
                   std::span<double> out);
void dense_backward_params(std::span<const double> dout,
                           std::span<const double> in, std::size_t rows,
                           std::size_t in_dim, std::size_t out_dim,
                           std::span<double> grad_w, std::span<double> grad_b);
void dense_backward_input(std::span<const double> dout,
                          std::span<const double> weights, std::size_t rows,
                          std::size_t in_dim, std::size_t out_dim,
                          std::span<double> din);

}  // namespace parallel

// Reductions stay serial so their summation order never depends on threads.
double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace ulsim::kernels

#endif  // ULSIM_KERNELS_HPP_
