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

#include "ulsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ulsim/errors.hpp"
#include "ulsim/kernels.hpp"
#include "ulsim/rng.hpp"

namespace ulsim {

LayerLayout::LayerLayout(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  std::size_t offset = 0;
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    Layer layer{dims_[i], dims_[i + 1], offset, offset + dims_[i] * dims_[i + 1]};
    offset = layer.bias_offset + layer.out_dim;
    layers_.push_back(layer);
  }
  total_ = offset;
  const Layer& out = layers_.back();
  class_slices_.resize(out.out_dim);
  for (std::size_t l = 0; l < out.out_dim; ++l) {
    auto& slice = class_slices_[l];
    slice.reserve(out.in_dim + 1);
    for (std::size_t k = 0; k < out.in_dim; ++k)
      slice.push_back(out.weight_offset + l * out.in_dim + k);
    slice.push_back(out.bias_offset + l);
  }
}

std::shared_ptr<const LayerLayout> LayerLayout::make(std::vector<std::size_t> dims) {
  if (dims.size() < 2) throw ConfigError("layer layout needs input and output dims");
  for (std::size_t d : dims)
    if (d == 0) throw ConfigError("layer dims must be positive");
  if (dims.back() < 2) throw ConfigError("need at least two classes");
  return std::shared_ptr<const LayerLayout>(new LayerLayout(std::move(dims)));
}

const std::vector<std::size_t>& LayerLayout::class_slice(std::size_t l) const {
  if (l >= class_slices_.size())
    throw InputError("class id " + std::to_string(l) + " out of range");
  return class_slices_[l];
}

ParamVector::ParamVector(LayoutPtr layout)
    : layout_(std::move(layout)), values_(layout_->total(), 0.0) {}

ParamVector::ParamVector(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_->total())
    throw ConfigError("parameter count " + std::to_string(values_.size()) +
                      " does not match layout total " +
                      std::to_string(layout_->total()));
}

bool ParamVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

bool same_layout(const ParamVector& a, const ParamVector& b) {
  return a.layout_ptr() && b.layout_ptr() && a.layout() == b.layout();
}

void require_same_layout(const ParamVector& a, const ParamVector& b) {
  if (!same_layout(a, b)) throw ConfigError("parameter layouts differ");
}

ParamVector init_params(const LayoutPtr& layout, std::uint64_t seed) {
  Rng rng = make_rng({seed, 0x1a17});
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  std::vector<double> v(layout->total());
  for (double& x : v) x = dist(rng);
  return ParamVector(layout, std::move(v));
}

namespace {

void check_inputs(const LayerLayout& layout, const Matrix& inputs) {
  if (inputs.rows == 0) throw InputError("empty batch");
  if (inputs.cols != layout.input_dim())
    throw ConfigError("feature dim " + std::to_string(inputs.cols) +
                      " does not match model input dim " +
                      std::to_string(layout.input_dim()));
}

// Activations per layer: acts[0] = inputs, acts[i] = tanh layer outputs,
// acts.back() = output logits.
std::vector<Matrix> forward_logits(const ParamVector& params, const Matrix& inputs,
                                   Exec exec) {
  const LayerLayout& layout = params.layout();
  std::span<const double> p = params.values();
  std::vector<Matrix> acts;
  acts.reserve(layout.layers().size() + 1);
  acts.push_back(inputs);
  for (std::size_t i = 0; i < layout.layers().size(); ++i) {
    const auto& layer = layout.layers()[i];
    Matrix out(inputs.rows, layer.out_dim);
    auto w = p.subspan(layer.weight_offset, layer.in_dim * layer.out_dim);
    auto b = p.subspan(layer.bias_offset, layer.out_dim);
    if (exec == Exec::kParallel)
      kernels::parallel::dense_forward(w, b, acts.back().data, inputs.rows,
                                       layer.in_dim, layer.out_dim, out.data);
    else
      kernels::serial::dense_forward(w, b, acts.back().data, inputs.rows,
                                     layer.in_dim, layer.out_dim, out.data);
    if (i + 1 < layout.layers().size())
      for (double& x : out.data) x = std::tanh(x);
    acts.push_back(std::move(out));
  }
  return acts;
}

// In-place softmax of each row; returns log-sum-exp per row.
std::vector<double> softmax_rows(Matrix& logits) {
  std::vector<double> lse(logits.rows);
  for (std::size_t s = 0; s < logits.rows; ++s) {
    auto row = logits.row(s);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& x : row) {
      x = std::exp(x - m);
      sum += x;
    }
    for (double& x : row) x /= sum;
    lse[s] = m + std::log(sum);
  }
  return lse;
}

}  // namespace

Matrix forward(const ParamVector& params, const Matrix& inputs, Exec exec) {
  check_inputs(params.layout(), inputs);
  auto acts = forward_logits(params, inputs, exec);
  Matrix probs = std::move(acts.back());
  softmax_rows(probs);
  return probs;
}

LossAndGrad loss_and_grad(const ParamVector& params, const Batch& batch, Exec exec) {
  const LayerLayout& layout = params.layout();
  check_inputs(layout, batch.inputs);
  if (batch.labels.size() != batch.inputs.rows)
    throw InputError("label count does not match batch rows");
  const std::size_t n = batch.inputs.rows;
  const std::size_t num_classes = layout.num_classes();
  for (int y : batch.labels)
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
      throw InputError("label " + std::to_string(y) + " outside 0.." +
                       std::to_string(num_classes - 1));

  auto acts = forward_logits(params, batch.inputs, exec);
  Matrix delta = acts.back();
  const std::vector<double> lse = softmax_rows(delta);

  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const auto y = static_cast<std::size_t>(batch.labels[s]);
    total += lse[s] - acts.back()(s, y);
    delta.data[s * num_classes + y] -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& x : delta.data) x *= inv_n;

  ParamVector grad(params.layout_ptr());
  std::span<double> g = grad.values();
  std::span<const double> p = params.values();
  for (std::size_t i = layout.layers().size(); i-- > 0;) {
    const auto& layer = layout.layers()[i];
    const Matrix& in = acts[i];
    auto gw = g.subspan(layer.weight_offset, layer.in_dim * layer.out_dim);
    auto gb = g.subspan(layer.bias_offset, layer.out_dim);
    if (exec == Exec::kParallel)
      kernels::parallel::dense_backward_params(delta.data, in.data, n, layer.in_dim,
                                               layer.out_dim, gw, gb);
    else
      kernels::serial::dense_backward_params(delta.data, in.data, n, layer.in_dim,
                                             layer.out_dim, gw, gb);
    if (i == 0) break;
    Matrix din(n, layer.in_dim);
    auto w = p.subspan(layer.weight_offset, layer.in_dim * layer.out_dim);
    if (exec == Exec::kParallel)
      kernels::parallel::dense_backward_input(delta.data, w, n, layer.in_dim,
                                              layer.out_dim, din.data);
    else
      kernels::serial::dense_backward_input(delta.data, w, n, layer.in_dim,
                                            layer.out_dim, din.data);
    // tanh'(z) = 1 - tanh(z)^2
    for (std::size_t k = 0; k < din.data.size(); ++k)
      din.data[k] *= 1.0 - in.data[k] * in.data[k];
    delta = std::move(din);
  }
  return {total * inv_n, std::move(grad)};
}

double loss(const ParamVector& params, const Batch& batch) {
  return loss_and_grad(params, batch).loss;
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad, double eta) {
  require_same_layout(params, grad);
  if (!(eta > 0.0)) throw InputError("learning rate must be positive");
  ParamVector out = params;
  kernels::parallel::axpy(-eta, grad.values(), out.values());
  return out;
}

std::vector<double> class_slice_values(const ParamVector& v, std::size_t label) {
  const auto& slice = v.layout().class_slice(label);
  std::vector<double> out;
  out.reserve(slice.size());
  for (std::size_t i : slice) out.push_back(v[i]);
  return out;
}

std::vector<int> predict(const ParamVector& params, const Matrix& inputs) {
  Matrix probs = forward(params, inputs);
  std::vector<int> out(probs.rows);
  for (std::size_t s = 0; s < probs.rows; ++s) {
    auto row = probs.row(s);
    out[s] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace ulsim
