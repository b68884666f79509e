#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "fixtures.hpp"
#include "specdec/simulator.hpp"
#include "specdec/specdec_math.hpp"

using namespace specdec;
using namespace specdec::testing;

namespace {

SimConfig make_cfg(std::int64_t batch, std::int64_t s0, std::int64_t gen_len, int gamma, double alpha,
                   std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.batch = batch;
  cfg.initial_context = s0;
  cfg.gen_len = gen_len;
  cfg.gamma = gamma;
  cfg.alpha = alpha;
  cfg.draft = self_static(512);
  return cfg;
}

double chi_square_p(int gamma, double alpha, int draws, std::uint64_t seed) {
  SequenceRng rng(seed, 0);
  std::vector<double> counts(static_cast<std::size_t>(gamma) + 1, 0.0);
  for (int i = 0; i < draws; ++i) counts[static_cast<std::size_t>(draw_accepted_count(rng, gamma, alpha))] += 1;
  double stat = 0.0;
  for (int k = 0; k <= gamma; ++k) {
    const double p = k < gamma ? std::pow(alpha, k) * (1 - alpha) : std::pow(alpha, gamma);
    const double expected = p * draws;
    stat += (counts[static_cast<std::size_t>(k)] - expected) * (counts[static_cast<std::size_t>(k)] - expected) /
            expected;
  }
  boost::math::chi_squared dist(gamma);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST(DrawAcceptedCount, DegenerateRates) {
  SequenceRng rng(42, 0);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(draw_accepted_count(rng, 5, 0.0), 0);
    EXPECT_EQ(draw_accepted_count(rng, 5, 1.0), 5);
  }
}

TEST(DrawAcceptedCount, TruncatedGeometricPmf) {
  EXPECT_GT(chi_square_p(3, 0.8, 1'000'000, 9), 0.001);
}

TEST(SequenceRng, DeterministicPerSeedAndStream) {
  SequenceRng a(5, 3), b(5, 3), c(5, 4), d(6, 3);
  bool differs_stream = false;
  bool differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differs_stream = differs_stream || x != c.uniform();
    differs_seed = differs_seed || x != d.uniform();
  }
  EXPECT_TRUE(differs_stream);
  EXPECT_TRUE(differs_seed);
}

TEST(SimulateSd, PerfectAcceptanceIsLockstep) {
  const auto hw = load_hw("a100x8");
  for (std::int64_t gen : {1, 4, 95, 96, 97}) {
    const auto r = simulate_sd(hw, llama3_8b(), make_cfg(16, 8192, gen, 3, 1.0));
    EXPECT_EQ(r.total_steps, (gen + 3) / 4);
    EXPECT_EQ(r.misaligned_steps, 0);
    for (const auto t : r.per_seq_tokens) EXPECT_EQ(t, gen);
  }
  EXPECT_EQ(simulate_sd(hw, llama3_8b(), make_cfg(16, 8192, 96, 3, 1.0)).empirical_omega, 4.0);
}

TEST(SimulateSd, ZeroAcceptanceIsOneTokenPerStepAndSlower) {
  const auto hw = load_hw("a100x8");
  const auto cfg = make_cfg(32, 8192, 50, 3, 0.0);
  const auto sd = simulate_sd(hw, llama3_8b(), cfg);
  const auto ar = simulate_ar(hw, llama3_8b(), cfg);
  EXPECT_EQ(sd.total_steps, 50);
  EXPECT_EQ(sd.empirical_omega, 1.0);
  EXPECT_GT(sd.model_time_s / sd.total_steps, ar.model_time_s / ar.total_steps);
  EXPECT_LT(sd.empirical_speedup, 1.0);
}

TEST(SimulateSd, OmegaConvergesToClosedForm) {
  const auto hw = load_hw("a100x8");
  const auto r = simulate_sd(hw, llama3_8b(), make_cfg(64, 1024, 600, 3, 0.8));
  ASSERT_GE(r.uncapped_steps * 64, 10'000);
  EXPECT_NEAR(r.empirical_omega, 2.952, 0.01 * 2.952);
}

TEST(SimulateSd, OmegaWithinThreeSigmaAcrossSeeds) {
  const auto hw = unit_hw();
  const int gamma = 4;
  const double alpha = 0.6;
  const double omega = expected_gen_len(gamma, alpha);
  double second = 0.0;
  for (int k = 0; k <= gamma; ++k) {
    const double p = k < gamma ? std::pow(alpha, k) * (1 - alpha) : std::pow(alpha, gamma);
    second += p * (k + 1) * (k + 1);
  }
  const double var = second - omega * omega;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cfg = make_cfg(8, 1024, 3000, gamma, alpha, seed);
    const auto r = simulate_sd(hw, llama3_8b(), cfg);
    const double se = std::sqrt(var / static_cast<double>(r.uncapped_steps * cfg.batch));
    EXPECT_LT(std::abs(r.empirical_omega - omega), 3 * se) << seed;
  }
}

TEST(SimulateSd, ConservationAndBounds) {
  const auto hw = load_hw("h100x8");
  for (double alpha : {0.2, 0.5, 0.9}) {
    const auto cfg = make_cfg(33, 4000, 96, 5, alpha);
    const auto r = simulate_sd(hw, llama3_8b(), cfg);
    std::int64_t sum = 0;
    for (const auto t : r.per_seq_tokens) sum += t;
    EXPECT_EQ(sum, r.total_tokens);
    EXPECT_EQ(r.total_tokens, 33 * 96);
    EXPECT_GE(r.empirical_omega, 1.0);
    EXPECT_LE(r.empirical_omega, 6.0);
    EXPECT_LE(r.uncapped_steps, r.total_steps);
  }
}

TEST(SimulateSd, BitIdenticalForSameSeed) {
  const auto hw = load_hw("a100x8");
  const auto cfg = make_cfg(64, 32000, 96, 3, 0.8, 77);
  const auto a = simulate_sd(hw, llama3_8b(), cfg);
  const auto b = simulate_sd(hw, llama3_8b(), cfg);
  EXPECT_EQ(a.model_time_s, b.model_time_s);
  EXPECT_EQ(a.total_steps, b.total_steps);
  EXPECT_EQ(a.empirical_omega, b.empirical_omega);
  EXPECT_EQ(a.per_seq_tokens, b.per_seq_tokens);
  auto other = cfg;
  other.seed = 78;
  EXPECT_NE(simulate_sd(hw, llama3_8b(), other).model_time_s, a.model_time_s);
}

TEST(SimulateSd, BatchesBecomeMisaligned) {
  const auto r = simulate_sd(load_hw("a100x8"), llama3_8b(), make_cfg(8, 1024, 500, 3, 0.7));
  EXPECT_GT(r.misaligned_steps, r.total_steps / 2);
}

TEST(SimulateSd, BudgetLargerThanContextIsClamped) {
  auto cfg = make_cfg(4, 10, 20, 3, 0.8);
  EXPECT_NO_THROW(simulate_sd(load_hw("a100x8"), llama3_8b(), cfg));
}

TEST(SimulateAr, StepsAndMonotoneTime) {
  const auto hw = load_hw("a100x8");
  double prev = 0.0;
  for (std::int64_t s0 : {0, 1000, 8000, 64000}) {
    const auto r = simulate_ar(hw, llama3_8b(), make_cfg(32, s0, 96, 3, 0.8));
    EXPECT_EQ(r.total_steps, 96);
    EXPECT_EQ(r.empirical_omega, 1.0);
    EXPECT_GE(r.model_time_s, prev);
    prev = r.model_time_s;
  }
}

TEST(SimConfig, Validation) {
  auto cfg = make_cfg(0, 10, 10, 3, 0.5);
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = make_cfg(1, 10, 0, 3, 0.5);
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = make_cfg(1, 10, 10, 3, 1.5);
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
