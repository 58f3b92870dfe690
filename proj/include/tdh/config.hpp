#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "tdh/circuit.hpp"
#include "tdh/link_budget.hpp"
#include "tdh/signature.hpp"

namespace tdh::config {

// Fully resolved run description.  Defaults < config file < command-line
// flags; the hash of the resolved state is stamped into every output so a
// rerun can be checked byte-for-byte.
struct RunConfig {
    std::string board = "board1";  // preset name or "custom"
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    circuit::OscillatorCircuit circuit;  // preset, then overridden field-wise
    signature::SweepConfig sweep;
    linkbudget::ReverseLinkParams reverse_link;
    linkbudget::ForwardLinkParams forward_link;

    double simulate_duration_s = 0.0;  // 0 = derive from sweep.trace_samples
    double rbw_hz = 0.0;               // 0 = native bin width
};

// Parse a config file.  ".json" is parsed as JSON; anything else as the
// documented TOML subset ([section] headers; key = string|number|bool|array;
// '#' comments).  Unknown sections or keys are errors, with file/line
// diagnostics.
RunConfig load_config(const std::string& path);

// Apply a parsed JSON document (same schema as the file) onto a config.
void apply_json(RunConfig& cfg, const nlohmann::json& doc, const std::string& source_name);

// Canonical serialization of the resolved config (stable key order).
nlohmann::json to_json(const RunConfig& cfg);

// FNV-1a 64 over the canonical serialization, as 16 hex chars.
std::string config_hash(const RunConfig& cfg);

// Validate invariants (bias range etc.); throws ConfigError naming the field.
void validate(const RunConfig& cfg);

// TOML-subset -> JSON translation (exposed for tests).
nlohmann::json toml_subset_to_json(const std::string& text, const std::string& source_name);

}  // namespace tdh::config
