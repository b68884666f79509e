#pragma once

#include <filesystem>
#include <string>

#include "specdec/config_io.hpp"
#include "specdec/drafting.hpp"
#include "specdec/perf_model.hpp"

namespace specdec::testing {

inline std::filesystem::path data_dir() { return SPECDEC_DATA_DIR; }

inline HardwareSpec load_hw(const std::string& name) {
  return load_hardware(data_dir() / "hardware" / (name + ".json"));
}

inline ModelArch load_arch(const std::string& name) {
  return load_model(data_dir() / "models" / (name + ".json"));
}

/// 1 TFLOP/s and 1 TB/s on a single device.
inline HardwareSpec unit_hw() {
  HardwareSpec hw;
  hw.name = "synthetic";
  hw.peak_flops = 1e12;
  hw.mem_bandwidth = 1e12;
  hw.device_mem = 80e9;
  hw.num_devices = 1;
  hw.tp_efficiency = 1.0;
  return hw;
}

inline ModelArch make_arch(std::int64_t layers, std::int64_t hidden, std::int64_t heads, std::int64_t kv_heads,
                           std::int64_t head_dim, std::int64_t inter, std::int64_t vocab, std::int64_t dtype = 2) {
  ModelArch a;
  a.name = "arch";
  a.num_layers = layers;
  a.hidden_dim = hidden;
  a.num_heads = heads;
  a.num_kv_heads = kv_heads;
  a.head_dim = head_dim;
  a.intermediate_dim = inter;
  a.vocab_size = vocab;
  a.dtype_bytes = dtype;
  return a;
}

inline ModelArch llama3_8b() { return make_arch(32, 4096, 32, 8, 128, 14336, 128256); }
inline ModelArch llama3_70b() { return make_arch(80, 8192, 64, 8, 128, 28672, 128256); }
inline ModelArch llama2_7b() { return make_arch(32, 4096, 32, 32, 128, 11008, 32000); }
inline ModelArch llama2_70b() { return make_arch(80, 8192, 64, 8, 128, 28672, 32000); }

inline DraftSpec self_static(std::int64_t k, std::string tag = "static") {
  return DraftSpec{SelfSpecStatic{k, std::move(tag)}};
}

inline DraftSpec self_dynamic(std::int64_t k, SearchPreset preset, std::string tag = "dynamic") {
  SearchCostModel search;
  search.preset = preset;
  return DraftSpec{SelfSpecDynamic{k, search, std::move(tag)}};
}

}  // namespace specdec::testing
