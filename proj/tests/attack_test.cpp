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

#include "ulsim/attack.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "test_util.hpp"
#include "ulsim/errors.hpp"
#include "ulsim/kernels.hpp"

namespace ulsim {
namespace {

using testing::random_params;

LayoutPtr small_layout() { return LayerLayout::make({3, 4, 5}); }

double rel_l2(const ParamVector& got, const std::vector<double>& want) {
  std::vector<double> d(want.size());
  for (std::size_t i = 0; i < want.size(); ++i) d[i] = got[i] - want[i];
  return kernels::l2_norm(d) / kernels::l2_norm(want);
}

// History with one client whose round steps are given as multiples of a unit
// vector: the global moves by g[r], the target's local by l[r].
FederationHistory scripted_history(const std::vector<double>& g, const std::vector<double>& l) {
  const auto layout = small_layout();
  FederationHistory h;
  h.initial = ParamVector(layout);
  ParamVector cur = h.initial;
  for (std::size_t r = 0; r < g.size(); ++r) {
    RoundRecord rec;
    rec.round = r;
    rec.global_before = cur;
    ParamVector local = cur, other = cur;
    local[0] += l[r];
    rec.locals = {local, other};
    rec.global_after = cur;
    rec.global_after[0] += g[r];
    rec.weights = {0.5, 0.5};
    cur = rec.global_after;
    h.rounds.push_back(rec);
  }
  return h;
}

TEST(ParamDeltas, Examples) {
  const auto layout = small_layout();
  AttackInput in;
  in.local_before = random_params(layout, 1);
  in.global_before = random_params(layout, 2);
  in.local_after = in.local_before;
  in.global_after = in.global_before;
  auto [dl0, dg0] = param_deltas(in);
  for (double x : dl0.values()) EXPECT_EQ(x, 0.0);
  for (double x : dg0.values()) EXPECT_EQ(x, 0.0);

  const ParamVector v = random_params(layout, 3);
  for (std::size_t i = 0; i < v.size(); ++i) in.local_after[i] = in.local_before[i] + v[i];
  in.global_after = random_params(layout, 4);
  auto [dl, dg] = param_deltas(in);
  for (std::size_t i = 0; i < v.size(); ++i)
    EXPECT_EQ(dl[i], in.local_after[i] - in.local_before[i]);

  AttackInput swapped = in;
  std::swap(swapped.local_before, swapped.local_after);
  std::swap(swapped.global_before, swapped.global_after);
  auto [sl, sg] = param_deltas(swapped);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(sl[i], -dl[i]);
    EXPECT_EQ(sg[i], -dg[i]);
  }
  in.global_after = ParamVector(LayerLayout::make({3, 5}));
  EXPECT_THROW(param_deltas(in), ConfigError);
}

TEST(EstimateLearningRate, SingleClientGivesOne) {
  const Dataset d = gen_synthetic({3, 10, 3, 1.0}, 1);
  FLConfig c;
  c.num_clients = 1;
  c.rounds = 4;
  const std::vector<std::size_t> hidden{4};
  const FederationHistory h = run_fl(d, partition_iid(d.size(), 1, 1), c, hidden);
  EXPECT_NEAR(estimate_learning_rate(h, 0), 1.0, 1e-12);
}

TEST(EstimateLearningRate, MeanOfRatios) {
  const FederationHistory h = scripted_history({2.0, 1.0}, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(estimate_learning_rate(h, 0), 0.75);
  EXPECT_DOUBLE_EQ(estimate_learning_rate(h, 0, 1), 1.0);  // last round only
  EXPECT_THROW(estimate_learning_rate(h, 0, 3), ConfigError);
  EXPECT_THROW(estimate_learning_rate(h, 5), InputError);
}

TEST(EstimateLearningRate, SkipsStillRoundsAndFailsWhenAllStill) {
  const FederationHistory h = scripted_history({2.0, 0.0, 1.0}, {1.0, 3.0, 1.0});
  EXPECT_DOUBLE_EQ(estimate_learning_rate(h, 0), 0.75);
  const FederationHistory still = scripted_history({0.0, 0.0}, {1.0, 1.0});
  EXPECT_THROW(estimate_learning_rate(still, 0), DegenerateHistoryError);
}

TEST(EstimateLearningRate, PositiveOnRandomRuns) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = gen_synthetic({4, 20, 5, 1.0}, seed);
    FLConfig c;
    c.num_clients = 4;
    c.rounds = 3;
    c.seed = seed;
    const std::vector<std::size_t> hidden{6};
    const FederationHistory h =
        run_fl(d, partition_dirichlet(d, 4, 0.5, seed), c, hidden);
    for (std::size_t k = 0; k < 4; ++k) {
      const double eta = estimate_learning_rate(h, k);
      EXPECT_GT(eta, 0.0);
      EXPECT_TRUE(std::isfinite(eta));
    }
  }
}

TEST(DeriveGradDiff, Examples) {
  const auto layout = small_layout();
  const ParamVector dl = random_params(layout, 1);
  const ParamVector zero = derive_grad_diff(dl, dl, 0.1, 0.01);
  for (double x : zero.values()) EXPECT_EQ(x, 0.0);

  ParamVector dg = dl;
  dg[7] += 0.009;
  EXPECT_NEAR(derive_grad_diff(dl, dg, 0.1, 0.01)[7], 1.0, 1e-12);
  EXPECT_THROW(derive_grad_diff(dl, dg, 1.0, 0.01), SingularityError);
  EXPECT_THROW(derive_grad_diff(dl, dg, 1.0 - 1e-10, 0.01), SingularityError);
  EXPECT_NO_THROW(derive_grad_diff(dl, dg, 0.99, 0.01));
}

// One FedAvg round with full-batch local steps, repeated after replacing the
// target's data with other samples of the same count. Both sides of the
// gradient-difference identity are then available in closed form.
struct OneRound {
  AttackInput input;
  std::vector<double> true_change;  // g'_K - g_K
  double eta;
};

OneRound one_round(std::uint64_t seed) {
  const Dataset d = gen_synthetic({5, 40, 6, 1.0}, seed);
  const std::size_t n = 4, k = 2;
  Partition before = partition_iid(d.size(), n, seed);
  Partition after = before;
  // K's data is swapped for the same number of samples of client 0.
  after.clients[k] = std::vector<std::size_t>(before.clients[0].begin(),
                                              before.clients[0].begin() + 20);
  before.clients[k].resize(20);

  FLConfig c;
  c.num_clients = n;
  c.rounds = 1;
  c.batch_size = 1000;
  c.learning_rate = 0.05;
  c.seed = seed;
  const std::vector<std::size_t> hidden{7};
  const ParamVector init = init_params(make_layout(d, hidden), seed);
  static FederationHistory h;
  h = run_fl(d, before, c, init);
  const std::vector<double> w = client_weights(before);

  std::vector<ParamVector> locals = h.rounds[0].locals;
  Rng rng = make_rng({seed});
  locals[k] = local_update(init, d, after.clients[k], c, rng);

  OneRound o;
  o.eta = c.learning_rate;
  o.input.history = &h;
  o.input.target_client = k;
  o.input.w_k = w[k];
  o.input.local_before = h.rounds[0].locals[k];
  o.input.global_before = h.rounds[0].global_after;
  o.input.local_after = locals[k];
  o.input.global_after = aggregate(locals, w);

  const auto g_before = loss_and_grad(init, gather(d, before.clients[k]), Exec::kSerial).grad;
  const auto g_after = loss_and_grad(init, gather(d, after.clients[k]), Exec::kSerial).grad;
  for (std::size_t i = 0; i < init.size(); ++i)
    o.true_change.push_back(g_after[i] - g_before[i]);
  return o;
}

TEST(DeriveGradDiff, SingleRoundOracleIsExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const OneRound o = one_round(seed);
    auto [dl, dg] = param_deltas(o.input);
    for (std::size_t i = 0; i < dl.size(); ++i)
      EXPECT_NEAR(dg[i] - dl[i], (o.input.w_k - 1.0) * dl[i], 1e-9);
    const ParamVector gd = derive_grad_diff(dl, dg, o.input.w_k, o.eta);
    EXPECT_LE(rel_l2(gd, o.true_change), 1e-9) << seed;
  }
}

TEST(PerClassAgd, Examples) {
  const auto layout = LayerLayout::make({3, 4, 6});
  EXPECT_EQ(per_class_agd(ParamVector(layout)), std::vector<double>(6, 0.0));
  ParamVector g(layout);
  for (std::size_t i : layout->class_slice(3)) g[i] = 1.0;
  EXPECT_EQ(per_class_agd(g), (std::vector<double>{0, 0, 0, 1, 0, 0}));

  const ParamVector r = random_params(layout, 5);
  ParamVector neg = r;
  for (double& x : neg.values()) x = -x;
  EXPECT_EQ(per_class_agd(r), per_class_agd(neg));
  const auto agd = per_class_agd(r);
  for (std::size_t c = 0; c < 6; ++c) {
    double sum = 0.0;
    for (std::size_t i : layout->class_slice(c)) sum += std::abs(r[i]);
    EXPECT_NEAR(agd[c], sum / 5.0, 1e-15);
  }
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

TEST(ZScores, Examples) {
  EXPECT_EQ(zscores({0.3, 0.3, 0.3}), std::vector<double>(3, 0.0));
  const auto z = zscores({0.0, 0.0, 0.0, 0.25});
  EXPECT_NEAR(z[3], std::sqrt(3.0), 1e-9);
  EXPECT_EQ(std::max_element(z.begin(), z.end()) - z.begin(), 3);
}

TEST(ZScores, StandardizedAndAffineInvariant) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto agd = testing::random_vector(10, seed);
    for (double& x : agd) x = std::abs(x);
    const auto z = zscores(agd);
    EXPECT_NEAR(mean(z), 0.0, 1e-9);
    EXPECT_NEAR(pop_std(z), 1.0, 1e-9);
    std::vector<double> scaled = agd;
    for (double& x : scaled) x = 3.7 * x + 0.2;
    const auto zs = zscores(scaled);
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(zs[i], z[i], 1e-9);
  }
}

// With C scores of mean 0 and unit population std, sum z^2 = C; two scores
// above 2 would force the rest to carry more than C - 8 of it.
TEST(ZScores, AtMostOneAboveTwoForTenClasses) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    auto agd = testing::random_vector(10, seed);
    for (double& x : agd) x = std::exp(3.0 * x);
    EXPECT_LE(select_candidates(zscores(agd), AttackMode::threshold(2.0)).size(), 1u);
  }
}

TEST(SelectCandidates, Examples) {
  EXPECT_TRUE(select_candidates(std::vector<double>(5, 0.0), AttackMode::threshold()).empty());
  EXPECT_EQ(select_candidates({0.1, 2.5, -0.3, 0.0}, AttackMode::threshold()),
            (std::vector<int>{1}));
  EXPECT_EQ(select_candidates({2.0, 2.5}, AttackMode::threshold(2.0)), (std::vector<int>{1}));
  EXPECT_EQ(select_candidates({3.0, 2.9, 0.1, -1.0}, AttackMode::known_count(2)),
            (std::vector<int>{0, 1}));
  EXPECT_EQ(select_candidates({0.5, 1.0, 1.0, 1.0}, AttackMode::known_count(2)),
            (std::vector<int>{1, 2}));
  EXPECT_EQ(select_candidates({0.0, 0.0, 0.0}, AttackMode::known_count(1)),
            (std::vector<int>{0}));
}

TEST(SelectCandidates, KnownCountReturnsExactlyK) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto z = testing::random_vector(10, seed);
    for (std::size_t k = 1; k <= 10; ++k)
      EXPECT_EQ(select_candidates(z, AttackMode::known_count(k)).size(), k);
  }
}

TEST(AttackMode, Validation) {
  EXPECT_THROW(AttackMode::known_count(0).validate(10), ConfigError);
  EXPECT_THROW(AttackMode::known_count(11).validate(10), ConfigError);
  EXPECT_NO_THROW(AttackMode::known_count(10).validate(10));
  EXPECT_THROW(AttackMode::threshold(NAN).validate(10), ConfigError);
  EXPECT_EQ(parse_mode_kind("known_count"), AttackMode::Kind::kKnownCount);
  EXPECT_EQ(parse_mode_kind("threshold"), AttackMode::Kind::kThreshold);
  EXPECT_THROW(parse_mode_kind("top"), ConfigError);
}

TEST(RunAttack, ZeroChangeHasNoCandidates) {
  OneRound o = one_round(3);
  o.input.local_after = o.input.local_before;
  o.input.global_after = o.input.global_before;
  const AttackReport r = run_attack(o.input, AttackMode::threshold());
  ASSERT_TRUE(r.ok());
  for (double x : r.grad_diff.values()) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(r.zscores, std::vector<double>(5, 0.0));
  EXPECT_TRUE(r.candidates.empty());
}

TEST(RunAttack, StructuredFailures) {
  OneRound o = one_round(3);
  o.input.w_k = 1.0;
  const AttackReport r = run_attack(o.input, AttackMode::threshold());
  EXPECT_EQ(r.status, AttackStatus::kSingularity);
  EXPECT_FALSE(r.error.empty());
  EXPECT_NE(to_json(r).find("\"eta_approx\":null"), std::string::npos);

  const FederationHistory still = scripted_history({0.0}, {1.0});
  AttackInput in;
  in.history = &still;
  in.local_before = in.local_after = in.global_before = in.global_after = still.initial;
  in.w_k = 0.5;
  EXPECT_EQ(run_attack(in, AttackMode::threshold()).status, AttackStatus::kDegenerateHistory);
}

TEST(RunAttack, ConsistentScaleFreeAndDeterministic) {
  const OneRound o = one_round(4);
  const AttackReport r = run_attack(o.input, AttackMode::known_count(2));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.candidates.size(), 2u);
  // Recomputing from the stored deltas reproduces the report.
  const ParamVector gd = derive_grad_diff(r.delta_local, r.delta_global, r.w_k, r.eta_approx);
  EXPECT_EQ(gd, r.grad_diff);
  EXPECT_EQ(select_candidates(zscores(per_class_agd(gd)), r.mode), r.candidates);
  // A different learning-rate estimate rescales grad_diff but not Z.
  const ParamVector gd2 = derive_grad_diff(r.delta_local, r.delta_global, r.w_k, 7.0);
  const auto z2 = zscores(per_class_agd(gd2));
  for (std::size_t i = 0; i < z2.size(); ++i) EXPECT_NEAR(z2[i], r.zscores[i], 1e-9);
  EXPECT_EQ(to_json(r), to_json(run_attack(o.input, AttackMode::known_count(2))));
}

TEST(RunAttack, JsonKeyOrder) {
  const AttackReport r = run_attack(one_round(2).input, AttackMode::threshold());
  const std::string j = to_json(r);
  std::size_t last = 0;
  for (const char* key : {"\"status\"", "\"error\"", "\"mode\"", "\"window\"",
                          "\"target_client\"", "\"w_k\"", "\"eta_approx\"", "\"candidates\"",
                          "\"agd\"", "\"zscores\"", "\"delta_local\"", "\"delta_global\"",
                          "\"grad_diff\""}) {
    const std::size_t at = j.find(key);
    ASSERT_NE(at, std::string::npos) << key;
    EXPECT_GT(at, last) << key;
    last = at;
  }
  EXPECT_EQ(j.back(), '\n');
}

}  // namespace
}  // namespace ulsim
