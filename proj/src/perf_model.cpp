#include "specdec/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specdec {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::int64_t input_embedding_params(const ModelArch& arch) {
  return arch.vocab_size * arch.hidden_dim;
}

}  // namespace

const char* to_string(CostMode mode) {
  return mode == CostMode::Additive ? "additive" : "roofline";
}

CostMode parse_cost_mode(const std::string& text) {
  if (text == "additive") return CostMode::Additive;
  if (text == "roofline" || text == "roofline-max") return CostMode::RooflineMax;
  throw std::invalid_argument("unknown cost mode '" + text + "' (expected additive|roofline)");
}

void HardwareSpec::validate() const {
  require(std::isfinite(peak_flops) && peak_flops > 0, "hardware '" + name + "': peak_flops must be > 0");
  require(std::isfinite(mem_bandwidth) && mem_bandwidth > 0,
          "hardware '" + name + "': mem_bandwidth must be > 0");
  require(std::isfinite(device_mem) && device_mem > 0, "hardware '" + name + "': device_mem must be > 0");
  require(num_devices >= 1, "hardware '" + name + "': num_devices must be >= 1");
  require(tp_efficiency > 0 && tp_efficiency <= 1,
          "hardware '" + name + "': tp_efficiency must be in (0, 1]");
}

void ModelArch::validate() const {
  const std::string who = "model '" + name + "': ";
  require(num_layers >= 1 && hidden_dim >= 1 && num_heads >= 1 && num_kv_heads >= 1 &&
              head_dim >= 1 && intermediate_dim >= 1 && vocab_size >= 1 && dtype_bytes >= 1,
          who + "all dimensions must be >= 1");
  require(num_heads % num_kv_heads == 0, who + "num_heads must be a multiple of num_kv_heads");
  require(hidden_dim == num_heads * head_dim, who + "hidden_dim must equal num_heads * head_dim");
}

void Workload::validate() const {
  require(batch_size >= 1, "batch_size must be >= 1");
  require(context_len >= 0, "context_len must be >= 0");
  require(gen_len >= 1, "gen_len must be >= 1");
}

std::int64_t kv_bytes_per_token(const ModelArch& arch) {
  return 2 * arch.num_layers * arch.num_kv_heads * arch.head_dim * arch.dtype_bytes;
}

std::int64_t param_count(const ModelArch& arch) {
  const std::int64_t h = arch.hidden_dim;
  const std::int64_t attn = h * (arch.num_heads * arch.head_dim)  // Q
                            + 2 * h * arch.kv_dim()               // K, V
                            + h * h;                              // O
  const std::int64_t mlp = 3 * h * arch.intermediate_dim;
  return arch.num_layers * (attn + mlp) + 2 * arch.vocab_size * h;
}

double memory_footprint(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len) {
  if (batch < 0 || seq_len < 0) throw std::invalid_argument("memory_footprint: negative batch or seq_len");
  return static_cast<double>(param_count(arch) * arch.dtype_bytes) +
         static_cast<double>(batch) * static_cast<double>(seq_len) *
             static_cast<double>(kv_bytes_per_token(arch));
}

double step_flops(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len,
                  std::int64_t n_tokens) {
  const double tokens = static_cast<double>(batch) * static_cast<double>(n_tokens);
  const double matmul_params = static_cast<double>(param_count(arch) - input_embedding_params(arch));
  // QK^T and PV at full query-head width; GQA shares KV bytes, not FLOPs.
  const double attention = 4.0 * tokens * static_cast<double>(arch.num_layers) *
                           static_cast<double>(arch.hidden_dim) * static_cast<double>(seq_len);
  return 2.0 * tokens * matmul_params + attention;
}

namespace {

struct StepBytes {
  double params;
  double kv;
  double act;
};

StepBytes step_bytes_split(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len,
                           std::int64_t n_tokens, double act_traffic) {
  const double b = static_cast<double>(batch);
  return {
      static_cast<double>(param_count(arch)) * static_cast<double>(arch.dtype_bytes),
      b * static_cast<double>(seq_len) * static_cast<double>(kv_bytes_per_token(arch)),
      act_traffic * b * static_cast<double>(n_tokens) * static_cast<double>(arch.num_layers) *
          static_cast<double>(arch.hidden_dim) * static_cast<double>(arch.dtype_bytes),
  };
}

}  // namespace

double step_bytes(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len,
                  std::int64_t n_tokens, double act_traffic) {
  const auto split = step_bytes_split(arch, batch, seq_len, n_tokens, act_traffic);
  return split.params + split.kv + split.act;
}

CostBreakdown decode_step_time(const HardwareSpec& hw, const ModelArch& arch,
                               std::int64_t batch, std::int64_t seq_len,
                               std::int64_t n_tokens, const CostOptions& opts) {
  if (batch < 1) throw std::invalid_argument("decode_step_time: batch must be >= 1");
  if (n_tokens < 1) throw std::invalid_argument("decode_step_time: n_tokens must be >= 1");
  if (seq_len < 0) throw std::invalid_argument("decode_step_time: seq_len must be >= 0");

  const double bw = hw.aggregate_bandwidth();
  const auto bytes = step_bytes_split(arch, batch, seq_len, n_tokens, opts.act_traffic);

  CostBreakdown out;
  out.mode = opts.mode;
  out.param_load_s = bytes.params / bw;
  out.kv_load_s = bytes.kv / bw;
  out.act_load_s = bytes.act / bw;
  out.compute_s = step_flops(arch, batch, seq_len, n_tokens) / hw.aggregate_flops();
  if (opts.mode == CostMode::Additive) {
    out.total_s = out.param_load_s + out.kv_load_s + out.act_load_s + out.compute_s;
  } else {
    out.total_s = std::max(out.compute_s, out.param_load_s + out.kv_load_s + out.act_load_s);
  }
  return out;
}

double arithmetic_intensity(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len,
                            std::int64_t n_tokens, double act_traffic) {
  const double bytes = step_bytes(arch, batch, seq_len, n_tokens, act_traffic);
  if (!(bytes > 0)) throw std::invalid_argument("arithmetic_intensity: no bytes moved");
  return step_flops(arch, batch, seq_len, n_tokens) / bytes;
}

}  // namespace specdec
