#pragma once

// JSON config files for hardware, models and drafting strategies.
//
// Hardware: {"name", "peak_flops", "mem_bandwidth_bytes", "device_mem_bytes",
//            "num_devices", "tp_efficiency"}
// Model:    {"name", "num_layers", "hidden_dim", "num_heads", "num_kv_heads",
//            "head_dim", "intermediate_dim", "vocab_size", "dtype_bytes"}
// Draft:    {"type": "self_static",  "kv_budget": K, "method": tag}
//           {"type": "self_dynamic", "kv_budget": K, "method": tag,
//            "search": {"preset": "pqcache"|"topk_oracle"|"custom",
//                       "fixed_s": s, "bytes_per_token_scanned": b}}
//           {"type": "external", "model": <model object or path>,
//            ["kv_budget": K], ["method": tag]}
// Unknown keys are rejected.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "specdec/drafting.hpp"
#include "specdec/perf_model.hpp"

namespace specdec {

HardwareSpec hardware_from_json(const nlohmann::json& j, const std::string& source = "<json>");
ModelArch model_from_json(const nlohmann::json& j, const std::string& source = "<json>");
/// Relative model paths inside an external draft resolve against `base_dir`.
DraftSpec draft_from_json(const nlohmann::json& j, const std::string& source = "<json>",
                          const std::filesystem::path& base_dir = {});

HardwareSpec load_hardware(const std::filesystem::path& path);
ModelArch load_model(const std::filesystem::path& path);
DraftSpec load_draft(const std::filesystem::path& path);

nlohmann::json to_json(const HardwareSpec& hw);
nlohmann::json to_json(const ModelArch& arch);
nlohmann::json to_json(const DraftSpec& draft);

}  // namespace specdec
