#include "specdec/config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include "specdec/error.hpp"

namespace specdec {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& source, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(source + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError(source + ": unknown key '" + key + "'");
  }
}

const json& field(const json& j, const std::string& source, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(source + ": missing key '" + std::string(key) + "'");
  return *it;
}

double number(const json& j, const std::string& source, const char* key) {
  const auto& v = field(j, source, key);
  if (!v.is_number()) throw ConfigError(source + ": '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& j, const std::string& source, const char* key) {
  const auto& v = field(j, source, key);
  if (!v.is_number_integer()) throw ConfigError(source + ": '" + std::string(key) + "' must be an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& j, const std::string& source, const char* key) {
  const auto& v = field(j, source, key);
  if (!v.is_string()) throw ConfigError(source + ": '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

template <class F>
auto validated(const std::string& source, F&& make) {
  try {
    auto v = make();
    v.validate();
    return v;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

SearchPreset parse_preset(const std::string& name, const std::string& source) {
  if (name == "pqcache") return SearchPreset::PQCache;
  if (name == "topk_oracle") return SearchPreset::TopKOracle;
  if (name == "custom") return SearchPreset::Custom;
  throw ConfigError(source + ": unknown search preset '" + name + "'");
}

}  // namespace

HardwareSpec hardware_from_json(const json& j, const std::string& source) {
  check_keys(j, source,
             {"name", "peak_flops", "mem_bandwidth_bytes", "device_mem_bytes", "num_devices", "tp_efficiency"});
  return validated(source, [&] {
    HardwareSpec hw;
    hw.name = text(j, source, "name");
    hw.peak_flops = number(j, source, "peak_flops");
    hw.mem_bandwidth = number(j, source, "mem_bandwidth_bytes");
    hw.device_mem = number(j, source, "device_mem_bytes");
    hw.num_devices = static_cast<int>(integer(j, source, "num_devices"));
    hw.tp_efficiency = number(j, source, "tp_efficiency");
    return hw;
  });
}

ModelArch model_from_json(const json& j, const std::string& source) {
  check_keys(j, source,
             {"name", "num_layers", "hidden_dim", "num_heads", "num_kv_heads", "head_dim", "intermediate_dim",
              "vocab_size", "dtype_bytes"});
  return validated(source, [&] {
    ModelArch a;
    a.name = text(j, source, "name");
    a.num_layers = integer(j, source, "num_layers");
    a.hidden_dim = integer(j, source, "hidden_dim");
    a.num_heads = integer(j, source, "num_heads");
    a.num_kv_heads = integer(j, source, "num_kv_heads");
    a.head_dim = integer(j, source, "head_dim");
    a.intermediate_dim = integer(j, source, "intermediate_dim");
    a.vocab_size = integer(j, source, "vocab_size");
    a.dtype_bytes = integer(j, source, "dtype_bytes");
    return a;
  });
}

DraftSpec draft_from_json(const json& j, const std::string& source, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError(source + ": expected a JSON object");
  const std::string type = text(j, source, "type");
  DraftSpec draft;
  if (type == "self_static") {
    check_keys(j, source, {"type", "kv_budget", "method"});
    draft.variant = SelfSpecStatic{integer(j, source, "kv_budget"), text(j, source, "method")};
  } else if (type == "self_dynamic") {
    check_keys(j, source, {"type", "kv_budget", "method", "search"});
    const auto& sj = field(j, source, "search");
    const std::string ssrc = source + ": search";
    check_keys(sj, ssrc, {"preset", "fixed_s", "bytes_per_token_scanned"});
    SearchCostModel search;
    search.preset = parse_preset(text(sj, ssrc, "preset"), ssrc);
    if (sj.contains("fixed_s")) search.fixed_s = number(sj, ssrc, "fixed_s");
    if (sj.contains("bytes_per_token_scanned")) {
      search.bytes_per_token_scanned = number(sj, ssrc, "bytes_per_token_scanned");
    } else if (search.preset == SearchPreset::Custom) {
      throw ConfigError(ssrc + ": custom preset needs 'bytes_per_token_scanned'");
    }
    draft.variant = SelfSpecDynamic{integer(j, source, "kv_budget"), search, text(j, source, "method")};
  } else if (type == "external") {
    check_keys(j, source, {"type", "model", "kv_budget", "method"});
    const auto& mj = field(j, source, "model");
    ExternalDraft ext;
    if (mj.is_string()) {
      std::filesystem::path p = mj.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      ext.arch = load_model(p);
    } else {
      ext.arch = model_from_json(mj, source + ": model");
    }
    if (j.contains("kv_budget")) ext.kv_policy = StaticBudget{integer(j, source, "kv_budget")};
    ext.method_tag = j.contains("method") ? text(j, source, "method") : ext.arch.name;
    draft.variant = std::move(ext);
  } else {
    throw ConfigError(source + ": unknown draft type '" + type + "' (expected self_static|self_dynamic|external)");
  }
  return validated(source, [&] { return draft; });
}

HardwareSpec load_hardware(const std::filesystem::path& path) {
  return hardware_from_json(read_json(path), path.string());
}

ModelArch load_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path), path.string());
}

DraftSpec load_draft(const std::filesystem::path& path) {
  return draft_from_json(read_json(path), path.string(), path.parent_path());
}

json to_json(const HardwareSpec& hw) {
  return {{"name", hw.name},
          {"peak_flops", hw.peak_flops},
          {"mem_bandwidth_bytes", hw.mem_bandwidth},
          {"device_mem_bytes", hw.device_mem},
          {"num_devices", hw.num_devices},
          {"tp_efficiency", hw.tp_efficiency}};
}

json to_json(const ModelArch& a) {
  return {{"name", a.name},
          {"num_layers", a.num_layers},
          {"hidden_dim", a.hidden_dim},
          {"num_heads", a.num_heads},
          {"num_kv_heads", a.num_kv_heads},
          {"head_dim", a.head_dim},
          {"intermediate_dim", a.intermediate_dim},
          {"vocab_size", a.vocab_size},
          {"dtype_bytes", a.dtype_bytes}};
}

json to_json(const DraftSpec& draft) {
  if (const auto* d = std::get_if<SelfSpecStatic>(&draft.variant)) {
    return {{"type", "self_static"}, {"kv_budget", d->kv_budget}, {"method", d->method_tag}};
  }
  if (const auto* d = std::get_if<SelfSpecDynamic>(&draft.variant)) {
    json search = {{"preset", to_string(d->search.preset)}, {"fixed_s", d->search.fixed_s}};
    if (d->search.preset == SearchPreset::Custom) {
      search["bytes_per_token_scanned"] = d->search.bytes_per_token_scanned;
    }
    return {{"type", "self_dynamic"}, {"kv_budget", d->kv_budget}, {"method", d->method_tag}, {"search", search}};
  }
  const auto& e = std::get<ExternalDraft>(draft.variant);
  json out = {{"type", "external"}, {"model", to_json(e.arch)}, {"method", e.method_tag}};
  if (const auto* b = std::get_if<StaticBudget>(&e.kv_policy)) out["kv_budget"] = b->kv_budget;
  return out;
}

}  // namespace specdec
