#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "specdec/config_io.hpp"
#include "specdec/drafting.hpp"
#include "specdec/error.hpp"

using namespace specdec;
using namespace specdec::testing;

namespace {

AcceptanceTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_acceptance_table(in, "mem.csv");
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

ExternalDraft external(const ModelArch& arch, KvPolicy policy = FullKv{}) {
  return ExternalDraft{arch, policy, "ext"};
}

}  // namespace

TEST(SelectCost, TopKOracleHandArithmetic) {
  SearchCostModel topk{SearchPreset::TopKOracle, 0.0, 0.0};
  const double expected = 64.0 * 32000 * 32 * (8 * 128 * 2) / 1e12;
  EXPECT_DOUBLE_EQ(select_cost(topk, unit_hw(), llama3_8b(), 64, 32000), expected);
  EXPECT_NEAR(expected, 0.1342, 1e-4);
}

TEST(SelectCost, PqCacheScansSixteenTimesFewerBytes) {
  SearchCostModel topk{SearchPreset::TopKOracle, 0.0, 0.0};
  SearchCostModel pq{SearchPreset::PQCache, 0.0, 0.0};
  const auto arch = llama3_8b();
  ASSERT_EQ(arch.head_dim * arch.dtype_bytes, 256);
  EXPECT_EQ(scanned_bytes_per_token(topk, arch), 16 * scanned_bytes_per_token(pq, arch));
}

TEST(SelectCost, CustomPresetUsesConfiguredBytesAndFixedCost) {
  SearchCostModel custom{SearchPreset::Custom, 1e-3, 100.0};
  EXPECT_DOUBLE_EQ(select_cost(custom, unit_hw(), llama3_8b(), 2, 1000), 1e-3 + 2.0 * 1000 * 32 * 100 / 1e12);
}

TEST(DraftStepTime, StaticMethodsHaveNoSelection) {
  const auto hw = load_hw("a100x8");
  for (std::int64_t b : {1, 64, 256}) {
    for (std::int64_t s : {512, 8192, 100000}) {
      EXPECT_EQ(draft_step_time(hw, llama3_8b(), self_static(512), b, s).t_select_s, 0.0);
      EXPECT_EQ(draft_step_time(hw, llama3_8b(), DraftSpec{external(llama3_8b())}, b, s).t_select_s, 0.0);
    }
  }
}

TEST(DraftStepTime, DynamicSelectionStrictlyIncreasing) {
  const auto hw = load_hw("a100x8");
  for (auto preset : {SearchPreset::PQCache, SearchPreset::TopKOracle}) {
    const auto d = self_dynamic(512, preset);
    double prev = 0.0;
    for (std::int64_t b = 1; b <= 512; b *= 2) {
      const double t = draft_step_time(hw, llama3_8b(), d, b, 16000).t_select_s;
      EXPECT_GT(t, prev);
      prev = t;
    }
    prev = 0.0;
    for (std::int64_t s = 512; s <= 1'000'000; s *= 2) {
      const double t = draft_step_time(hw, llama3_8b(), d, 8, s).t_select_s;
      EXPECT_GT(t, prev);
      prev = t;
    }
  }
}

TEST(DraftStepTime, FullBudgetSelfSpecEqualsTargetStep) {
  const auto hw = load_hw("h100x8");
  for (auto mode : {CostMode::Additive, CostMode::RooflineMax}) {
    for (std::int64_t s : {1, 1000, 65536}) {
      const double td = draft_step_time(hw, llama3_8b(), self_static(s), 32, s, mode).t_draft_s;
      const double tt = decode_step_time(hw, llama3_8b(), 32, s, 1, mode).total_s;
      EXPECT_EQ(td / tt, 1.0);
    }
  }
}

TEST(DraftStepTime, FixedBudgetRatioVanishesWithContext) {
  const auto hw = load_hw("a100x8");
  const auto d = self_static(512);
  const double t0 = draft_step_time(hw, llama3_8b(), d, 64, 512).t_draft_s;
  double prev_ratio = 2.0;
  for (std::int64_t s = 512; s <= 10'000'000; s *= 4) {
    const double td = draft_step_time(hw, llama3_8b(), d, 64, s).t_draft_s;
    EXPECT_EQ(td, t0);
    const double ratio = td / decode_step_time(hw, llama3_8b(), 64, s, 1).total_s;
    EXPECT_LT(ratio, prev_ratio);
    prev_ratio = ratio;
  }
  EXPECT_LT(prev_ratio, 0.01);
}

TEST(DraftStepTime, ExternalFullKvApproachesKvByteRatio) {
  const auto hw = load_hw("a100x8");
  const auto draft = DraftSpec{external(llama3_8b())};
  const double kv_ratio = 131072.0 / 327680.0;
  const double r = draft_step_time(hw, llama3_70b(), draft, 256, 1'000'000, CostMode::RooflineMax).t_draft_s /
                   decode_step_time(hw, llama3_70b(), 256, 1'000'000, 1, CostMode::RooflineMax).total_s;
  EXPECT_NEAR(r, kv_ratio, 0.01 * kv_ratio);

  // Additive mode also charges attention FLOPs, which shrink by a different ratio.
  double prev_gap = 1.0;
  for (std::int64_t s = 1000; s <= 1'000'000; s *= 10) {
    const double ra = draft_step_time(hw, llama3_70b(), draft, 256, s).t_draft_s /
                      decode_step_time(hw, llama3_70b(), 256, s, 1).total_s;
    EXPECT_LT(std::abs(ra - kv_ratio), prev_gap);
    prev_gap = std::abs(ra - kv_ratio);
  }
  EXPECT_LT(prev_gap, 0.05 * kv_ratio);
}

TEST(DraftStepTime, ExternalStaticBudgetUsesBudgetContext) {
  const auto hw = load_hw("a100x8");
  const auto small = load_arch("llama3.2-1b");
  const auto d = DraftSpec{external(small, StaticBudget{512})};
  EXPECT_EQ(draft_step_time(hw, llama3_8b(), d, 16, 50000).t_draft_s,
            decode_step_time(hw, small, 16, 512, 1).total_s);
}

TEST(DraftStepTime, BudgetAboveContextRejected) {
  EXPECT_THROW(draft_step_time(unit_hw(), llama3_8b(), self_static(512), 1, 100), std::invalid_argument);
  const auto eff = effective_draft(self_static(512), 100);
  EXPECT_EQ(eff.kv_budget(), 100);
  EXPECT_EQ(eff.method_tag(), "static");
  EXPECT_NO_THROW(draft_step_time(unit_hw(), llama3_8b(), eff, 1, 100));
  EXPECT_EQ(effective_draft(self_static(512), 4096).kv_budget(), 512);
}

TEST(DraftSpec, BudgetAccessors) {
  EXPECT_EQ(self_static(256).kv_budget(), 256);
  EXPECT_EQ(self_static(256).with_budget(1024).kv_budget(), 1024);
  const DraftSpec full{external(llama3_8b())};
  EXPECT_FALSE(full.kv_budget());
  EXPECT_FALSE(full.with_budget(64).kv_budget());
  EXPECT_TRUE(self_dynamic(64, SearchPreset::PQCache).has_search());
  EXPECT_FALSE(self_static(64).has_search());
  EXPECT_THROW(self_static(0).validate(), std::invalid_argument);
}

TEST(AcceptanceTable, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse("method,task,kv_budget,alpha\n").empty());
}

TEST(AcceptanceTable, EchoesRow) {
  const auto t = parse("method,task,kv_budget,alpha\nsnapkv,pg19,512,0.83\n");
  ASSERT_EQ(t.rows().size(), 1u);
  EXPECT_EQ(t.rows()[0].method_tag, "snapkv");
  EXPECT_EQ(t.rows()[0].task, "pg19");
  EXPECT_EQ(t.rows()[0].kv_budget, 512);
  EXPECT_EQ(t.rows()[0].alpha, 0.83);
}

TEST(AcceptanceTable, RejectsBadRowsWithLineNumbers) {
  EXPECT_NE(config_error("method,task,kv_budget,alpha\nsnapkv,pg19,256,0.5\nsnapkv,pg19,512,1.2\n").find("mem.csv:3:"),
            std::string::npos);
  EXPECT_NE(config_error("method,task,kv_budget,alpha\nsnapkv,pg19,0,0.5\n").find("mem.csv:2:"), std::string::npos);
  EXPECT_NE(config_error("method,task,kv_budget,alpha\nsnapkv,pg19,12x,0.5\n").find("mem.csv:2:"),
            std::string::npos);
  EXPECT_NE(config_error("method,task,kv_budget,alpha\nsnapkv,pg19,512\n").find("expected 4 fields"),
            std::string::npos);
  EXPECT_NE(config_error("method,task,kv_budget,alpha\na,b,1,0.5\na,b,1,0.6\n").find("duplicate"), std::string::npos);
  EXPECT_NE(config_error("m,t,k,a\n").find("expected header"), std::string::npos);
  EXPECT_NE(config_error("").find("missing header"), std::string::npos);
}

TEST(AcceptanceTable, LookupExactInterpolatedClamped) {
  const auto t = parse("method,task,kv_budget,alpha\nm,t,512,0.9\nm,t,256,0.7\n");
  EXPECT_EQ(lookup_alpha(t, "m", "t", 256), 0.7);
  EXPECT_EQ(lookup_alpha(t, "m", "t", 512), 0.9);
  EXPECT_NEAR(lookup_alpha(t, "m", "t", 384), 0.8, 1e-15);
  EXPECT_EQ(lookup_alpha(t, "m", "t", 1024), 0.9);
  EXPECT_EQ(lookup_alpha(t, "m", "t", 16), 0.7);
}

TEST(AcceptanceTable, UnknownGroupListsAvailable) {
  const auto t = parse("method,task,kv_budget,alpha\nm,t,512,0.9\nq,t,256,0.7\n");
  try {
    lookup_alpha(t, "m", "other", 256);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("m/t"), std::string::npos);
    EXPECT_NE(msg.find("q/t"), std::string::npos);
  }
}

TEST(AcceptanceTable, ShippedTableLoads) {
  const auto t = load_acceptance_table(data_dir() / "acceptance" / "illustrative.csv");
  EXPECT_TRUE(t.has_group("snapkv", "pg19"));
  EXPECT_TRUE(t.has_group("streamingllm", "pg19"));
}

TEST(DraftJson, ShippedDraftsLoadAndRoundTrip) {
  for (const auto& entry : std::filesystem::directory_iterator(data_dir() / "drafts")) {
    const auto d = load_draft(entry.path());
    EXPECT_NO_THROW(d.validate()) << entry.path();
    const auto again = draft_from_json(to_json(d));
    EXPECT_EQ(to_json(again), to_json(d)) << entry.path();
  }
}

TEST(DraftJson, ExternalModelPathResolvesAgainstDraftFile) {
  const auto d = load_draft(data_dir() / "drafts" / "llama3.2-1b_streaming_512.json");
  const auto* ext = std::get_if<ExternalDraft>(&d.variant);
  ASSERT_NE(ext, nullptr);
  EXPECT_EQ(ext->arch.num_layers, load_arch("llama3.2-1b").num_layers);
  EXPECT_EQ(d.kv_budget(), 512);
}

TEST(DraftJson, RejectsUnknownKeysAndTypes) {
  using nlohmann::json;
  EXPECT_THROW(draft_from_json(json{{"type", "self_static"}, {"kv_budget", 512}, {"method", "m"}, {"extra", 1}}),
               ConfigError);
  EXPECT_THROW(draft_from_json(json{{"type", "weird"}}), ConfigError);
  EXPECT_THROW(draft_from_json(json{{"type", "self_static"}, {"kv_budget", "512"}, {"method", "m"}}), ConfigError);
  EXPECT_THROW(draft_from_json(json{{"type", "self_dynamic"},
                                    {"kv_budget", 512},
                                    {"method", "m"},
                                    {"search", {{"preset", "nope"}}}}),
               ConfigError);
}

TEST(ConfigJson, HardwareAndModelRejectUnknownKeys) {
  auto hw = to_json(unit_hw());
  EXPECT_NO_THROW(hardware_from_json(hw));
  hw["turbo"] = true;
  EXPECT_THROW(hardware_from_json(hw), ConfigError);
  auto m = to_json(llama3_8b());
  EXPECT_EQ(model_from_json(m).kv_dim(), llama3_8b().kv_dim());
  m.erase("vocab_size");
  EXPECT_THROW(model_from_json(m), ConfigError);
}
