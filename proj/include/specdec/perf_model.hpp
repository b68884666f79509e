#pragma once

// Roofline-style latency model for one batched decoding step of a
// transformer: parameter, KV-cache and activation traffic plus compute.

#include <cstdint>
#include <string>

namespace specdec {

/// How the per-step components are combined into a total.
enum class CostMode {
  Additive,     // total = loads + compute (stacked breakdown)
  RooflineMax,  // total = max(compute, loads)
};

const char* to_string(CostMode mode);
CostMode parse_cost_mode(const std::string& text);

inline constexpr double kDefaultActTraffic = 20.0;

/// Cost-model knobs shared by every step-time evaluation.
struct CostOptions {
  CostMode mode = CostMode::Additive;
  /// Activation scalars moved per token, per layer, per hidden unit.
  double act_traffic = kDefaultActTraffic;

  CostOptions() = default;
  CostOptions(CostMode m) : mode(m) {}  // NOLINT(google-explicit-constructor)
  CostOptions(CostMode m, double act) : mode(m), act_traffic(act) {}
};

struct HardwareSpec {
  std::string name;
  double peak_flops = 0.0;     // FLOP/s per device
  double mem_bandwidth = 0.0;  // bytes/s per device
  double device_mem = 0.0;     // bytes per device
  int num_devices = 1;
  double tp_efficiency = 1.0;  // (0, 1], applied to aggregate compute and bandwidth

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  double flops_to_bandwidth() const { return peak_flops / mem_bandwidth; }
  double aggregate_flops() const { return peak_flops * num_devices * tp_efficiency; }
  double aggregate_bandwidth() const { return mem_bandwidth * num_devices * tp_efficiency; }
};

struct ModelArch {
  std::string name;
  std::int64_t num_layers = 0;
  std::int64_t hidden_dim = 0;
  std::int64_t num_heads = 0;
  std::int64_t num_kv_heads = 0;
  std::int64_t head_dim = 0;
  std::int64_t intermediate_dim = 0;
  std::int64_t vocab_size = 0;
  std::int64_t dtype_bytes = 2;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  std::int64_t kv_dim() const { return num_kv_heads * head_dim; }
};

struct Workload {
  std::int64_t batch_size = 1;
  std::int64_t context_len = 0;
  std::int64_t gen_len = 1;

  void validate() const;
};

struct CostBreakdown {
  double param_load_s = 0.0;
  double kv_load_s = 0.0;
  double act_load_s = 0.0;
  double compute_s = 0.0;
  double total_s = 0.0;
  CostMode mode = CostMode::Additive;

  double memory_s() const { return param_load_s + kv_load_s + act_load_s; }
};

/// K and V bytes stored per context token across all layers.
std::int64_t kv_bytes_per_token(const ModelArch& arch);

/// Attention + gated MLP weights per layer, plus untied embedding and output head.
/// Normalization parameters are omitted.
std::int64_t param_count(const ModelArch& arch);

/// Weights plus a B x S token KV cache, in bytes.
double memory_footprint(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len);

/// FLOPs of one forward step over `n_tokens` new tokens per sequence.
double step_flops(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len,
                  std::int64_t n_tokens);

/// Bytes moved by one forward step (weights + KV + activations).
double step_bytes(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len,
                  std::int64_t n_tokens, double act_traffic = kDefaultActTraffic);

/// Latency decomposition of one forward step processing `n_tokens` per sequence
/// against a `seq_len` token context. n_tokens = 1 is plain decoding; n_tokens =
/// gamma + 1 is verification of a gamma-token draft.
CostBreakdown decode_step_time(const HardwareSpec& hw, const ModelArch& arch,
                               std::int64_t batch, std::int64_t seq_len,
                               std::int64_t n_tokens, const CostOptions& opts = {});

/// FLOP per byte for the same step.
double arithmetic_intensity(const ModelArch& arch, std::int64_t batch, std::int64_t seq_len,
                            std::int64_t n_tokens, double act_traffic = kDefaultActTraffic);

}  // namespace specdec
