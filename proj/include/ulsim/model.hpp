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

#ifndef ULSIM_MODEL_HPP_
#define ULSIM_MODEL_HPP_

// Multilayer perceptron (tanh hidden layers, softmax cross-entropy output)
// over a flat parameter vector.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace ulsim {

enum class Exec { kSerial, kParallel };

// Index map from layers and classes into the flat parameter sequence.
// Layer i stores its weight matrix (out x in, row-major) followed by its bias.
class LayerLayout {
 public:
  struct Layer {
    std::size_t in_dim;
    std::size_t out_dim;
    std::size_t weight_offset;
    std::size_t bias_offset;
  };

  // dims = {input, hidden..., num_classes}; needs at least two entries.
  static std::shared_ptr<const LayerLayout> make(std::vector<std::size_t> dims);

  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t total() const { return total_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t num_classes() const { return dims_.back(); }

  // Output-layer weight row of class l followed by its bias entry.
  const std::vector<std::size_t>& class_slice(std::size_t l) const;
  std::size_t output_begin() const { return layers_.back().weight_offset; }
  std::size_t output_end() const { return total_; }

  bool operator==(const LayerLayout& other) const { return dims_ == other.dims_; }

 private:
  explicit LayerLayout(std::vector<std::size_t> dims);

  std::vector<std::size_t> dims_;
  std::vector<Layer> layers_;
  std::vector<std::vector<std::size_t>> class_slices_;
  std::size_t total_ = 0;
};

using LayoutPtr = std::shared_ptr<const LayerLayout>;

class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(LayoutPtr layout);  // zeros
  ParamVector(LayoutPtr layout, std::vector<double> values);

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& raw() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  const LayerLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  bool all_finite() const;

  bool operator==(const ParamVector& other) const {
    return *layout_ == *other.layout_ && values_ == other.values_;
  }

 private:
  LayoutPtr layout_;
  std::vector<double> values_;
};

bool same_layout(const ParamVector& a, const ParamVector& b);
void require_same_layout(const ParamVector& a, const ParamVector& b);

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct Batch {
  Matrix inputs;
  std::vector<int> labels;
};

struct LossAndGrad {
  double loss = 0.0;
  ParamVector grad;
};

// Uniform [-0.1, 0.1] initialisation.
ParamVector init_params(const LayoutPtr& layout, std::uint64_t seed);

// Softmax class probabilities, one row per input row.
Matrix forward(const ParamVector& params, const Matrix& inputs,
               Exec exec = Exec::kParallel);

// Mean softmax cross-entropy over the batch and its analytic gradient.
LossAndGrad loss_and_grad(const ParamVector& params, const Batch& batch,
                          Exec exec = Exec::kParallel);

double loss(const ParamVector& params, const Batch& batch);

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad, double eta);

std::vector<double> class_slice_values(const ParamVector& v, std::size_t label);

std::vector<int> predict(const ParamVector& params, const Matrix& inputs);

}  // namespace ulsim

#endif  // ULSIM_MODEL_HPP_
