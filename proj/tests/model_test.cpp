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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "test_util.hpp"
#include "ulsim/errors.hpp"

namespace ulsim {
namespace {

using testing::random_batch;
using testing::random_params;

LayoutPtr default_layout() { return LayerLayout::make({20, 32, 10}); }

TEST(LayerLayout, TotalCountIsSumOverLayers) {
  const auto l = LayerLayout::make({20, 32, 16, 10});
  EXPECT_EQ(l->total(), 20u * 32 + 32 + 32 * 16 + 16 + 16 * 10 + 10);
  EXPECT_EQ(l->layers().size(), 3u);
  EXPECT_EQ(l->layers()[1].weight_offset, 20u * 32 + 32);
  EXPECT_EQ(l->layers()[1].bias_offset, 20u * 32 + 32 + 32 * 16);
}

TEST(LayerLayout, ClassSlicesPartitionOutputLayer) {
  const auto l = default_layout();
  std::set<std::size_t> seen;
  for (std::size_t c = 0; c < 10; ++c) {
    const auto& s = l->class_slice(c);
    EXPECT_EQ(s.size(), 33u);
    for (std::size_t i : s) {
      EXPECT_GE(i, l->output_begin());
      EXPECT_LT(i, l->output_end());
      EXPECT_TRUE(seen.insert(i).second) << "index in two slices: " << i;
    }
  }
  EXPECT_EQ(seen.size(), l->output_end() - l->output_begin());
}

TEST(LayerLayout, RejectsBadDims) {
  EXPECT_THROW(LayerLayout::make({10}), ConfigError);
  EXPECT_THROW(LayerLayout::make({10, 0, 3}), ConfigError);
  EXPECT_THROW(LayerLayout::make({10, 1}), ConfigError);
  EXPECT_THROW(default_layout()->class_slice(10), InputError);
}

TEST(ParamVector, RejectsWrongLength) {
  EXPECT_THROW(ParamVector(default_layout(), std::vector<double>(5)), ConfigError);
}

TEST(Forward, ZeroParamsGiveUniform) {
  const auto l = default_layout();
  const Batch b = random_batch(6, 20, 10, 3);
  const Matrix p = forward(ParamVector(l), b.inputs);
  for (double v : p.data) EXPECT_NEAR(v, 0.1, 1e-15);
}

TEST(Forward, TwoClassesZeroLogitsGiveHalf) {
  const auto l = LayerLayout::make({3, 2});
  Matrix x(1, 3);
  x.data = {1.0, -2.0, 0.5};
  const Matrix p = forward(ParamVector(l), x);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p(0, 1), 0.5);
}

TEST(Forward, RowsAreDistributions) {
  const auto l = default_layout();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Batch b = random_batch(40, 20, 10, seed);
    const Matrix p = forward(random_params(l, seed + 100, 2.0), b.inputs);
    for (std::size_t i = 0; i < p.rows; ++i) {
      double sum = 0.0;
      for (double v : p.row(i)) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(Forward, DimensionMismatchIsConfigError) {
  const Batch b = random_batch(2, 5, 10, 1);
  EXPECT_THROW(forward(ParamVector(default_layout()), b.inputs), ConfigError);
}

TEST(LossAndGrad, ZeroParamsLossIsLogC) {
  const Batch b = random_batch(1, 20, 10, 9);
  const auto lg = loss_and_grad(ParamVector(default_layout()), b);
  EXPECT_NEAR(lg.loss, std::log(10.0), 1e-12);
  EXPECT_NEAR(lg.loss, 2.302585, 1e-6);
}

TEST(LossAndGrad, DuplicatedBatchIsInvariant) {
  const auto l = default_layout();
  const auto p = random_params(l, 5);
  const Batch b = random_batch(7, 20, 10, 6);
  Batch twice = b;
  twice.inputs = Matrix(14, 20);
  std::copy(b.inputs.data.begin(), b.inputs.data.end(), twice.inputs.data.begin());
  std::copy(b.inputs.data.begin(), b.inputs.data.end(), twice.inputs.data.begin() + 140);
  twice.labels.insert(twice.labels.end(), b.labels.begin(), b.labels.end());
  const auto a = loss_and_grad(p, b);
  const auto d = loss_and_grad(p, twice);
  EXPECT_NEAR(a.loss, d.loss, 1e-14);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(a.grad[i], d.grad[i], 1e-14);
}

TEST(LossAndGrad, LabelOutOfRangeIsInputError) {
  Batch b = random_batch(3, 20, 10, 1);
  b.labels[1] = 10;
  EXPECT_THROW(loss_and_grad(ParamVector(default_layout()), b), InputError);
}

TEST(LossAndGrad, SerialAndParallelAreBitIdentical) {
  const auto l = default_layout();
  const auto p = random_params(l, 11);
  const Batch b = random_batch(3000, 20, 10, 12);
  const auto s = loss_and_grad(p, b, Exec::kSerial);
  const auto q = loss_and_grad(p, b, Exec::kParallel);
  EXPECT_EQ(s.loss, q.loss);
  EXPECT_EQ(s.grad, q.grad);
}

// Central differences, step 1e-6, on 10 coordinates per layer (weights and
// biases drawn from the layer's range).
TEST(LossAndGrad, MatchesFiniteDifferences) {
  for (std::uint64_t c = 0; c < 20; ++c) {
    const auto l = LayerLayout::make({20, 32, 10});
    const auto p = random_params(l, 1000 + c);
    const Batch b = random_batch(16, 20, 10, 2000 + c);
    const auto lg = loss_and_grad(p, b, Exec::kSerial);
    EXPECT_GE(lg.loss, 0.0);
    std::mt19937_64 gen(c);
    for (const auto& layer : l->layers()) {
      const std::size_t begin = layer.weight_offset;
      const std::size_t end = layer.bias_offset + layer.out_dim;
      std::uniform_int_distribution<std::size_t> pick(begin, end - 1);
      for (int s = 0; s < 10; ++s) {
        const std::size_t i = pick(gen);
        ParamVector hi = p, lo = p;
        hi[i] += 1e-6;
        lo[i] -= 1e-6;
        const double fd = (loss(hi, b) - loss(lo, b)) / 2e-6;
        const double denom = std::max(std::abs(fd), std::abs(lg.grad[i]));
        if (denom < 1e-9) continue;
        EXPECT_LE(std::abs(fd - lg.grad[i]) / denom, 1e-5) << "case " << c << " index " << i;
      }
    }
  }
}

TEST(SgdStep, Examples) {
  const auto l = LayerLayout::make({1, 2});  // 4 parameters
  const ParamVector p(l, {1.0, 2.0, 0.0, 0.0});
  EXPECT_EQ(sgd_step(p, ParamVector(l), 0.1), p);
  const ParamVector out = sgd_step(p, ParamVector(l, {1.0, 1.0, 0.0, 0.0}), 0.5);
  EXPECT_EQ(out[0], 0.5);
  EXPECT_EQ(out[1], 1.5);
  EXPECT_THROW(sgd_step(p, p, 0.0), InputError);
  EXPECT_THROW(sgd_step(p, ParamVector(default_layout()), 0.1), ConfigError);
}

TEST(SgdStep, ComposedStepsAreLinear) {
  const auto l = default_layout();
  const auto p = random_params(l, 1);
  const auto g = random_params(l, 2);
  ParamVector q = p;
  for (int k = 0; k < 5; ++k) q = sgd_step(q, g, 0.01);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(q[i], p[i] - 5 * 0.01 * g[i], 1e-12);

  const auto g2 = random_params(l, 3);
  ParamVector mix(l);
  for (std::size_t i = 0; i < p.size(); ++i) mix[i] = 0.3 * g[i] - 1.7 * g2[i];
  const ParamVector r = sgd_step(p, mix, 1.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    EXPECT_NEAR(r[i], p[i] - 0.3 * g[i] + 1.7 * g2[i], 1e-12);
}

TEST(ClassSlice, AllOnes) {
  const auto l = default_layout();
  const ParamVector v(l, std::vector<double>(l->total(), 1.0));
  for (std::size_t c = 0; c < 10; ++c)
    EXPECT_EQ(class_slice_values(v, c), std::vector<double>(33, 1.0));
  EXPECT_THROW(class_slice_values(v, 10), InputError);
}

TEST(ClassSlice, MarkerAtBiasAppearsOnlyInItsClass) {
  const auto l = default_layout();
  ParamVector v(l);
  v[l->layers().back().bias_offset + 3] = 42.0;
  for (std::size_t c = 0; c < 10; ++c) {
    const auto s = class_slice_values(v, c);
    const bool has = std::find(s.begin(), s.end(), 42.0) != s.end();
    EXPECT_EQ(has, c == 3);
  }
  EXPECT_EQ(class_slice_values(v, 3).back(), 42.0);
}

TEST(InitParams, DeterministicAndBounded) {
  const auto l = default_layout();
  const auto a = init_params(l, 7);
  EXPECT_EQ(a, init_params(l, 7));
  EXPECT_NE(a, init_params(l, 8));
  for (double x : a.values()) EXPECT_LE(std::abs(x), 0.1);
}

}  // namespace
}  // namespace ulsim
