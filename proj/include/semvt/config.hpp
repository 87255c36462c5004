#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "semvt/codec.hpp"
#include "semvt/transport.hpp"

namespace semvt {

// Minimal TOML subset shared by experiment and model config files:
// [table] headers, bare keys, strings, integers, floats, booleans, and
// flat arrays of numbers/strings. Comments start with '#'.
class TomlTable {
public:
    using Value = std::variant<std::string, std::int64_t, double, bool,
                               std::vector<double>, std::vector<std::string>>;

    static TomlTable parse_file(const std::string& path);
    static TomlTable parse(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           std::string fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_double_array(const std::string& section, const std::string& key,
                                         std::vector<double> fallback) const;

private:
    const Value* find(const std::string& section, const std::string& key) const;
    std::map<std::string, std::map<std::string, Value>> tables_;
    std::string origin_;
};

enum class ChannelMode { rate, ser };

// Everything a reproducible experiment needs, loaded from one TOML file and
// validated before any work starts. Defaults mirror the reference setup:
// 49-byte stack overhead, GOP size 4, loss grid [0, 0.3, 0.6, 0.9].
struct ExperimentConfig {
    // [run]
    std::string frames_dir;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int trials = 1;          // channel realizations averaged per grid point
    std::size_t gop_limit = 0; // 0 = use all frames
    bool recovery = true;
    bool interleave_enabled = true;
    bool feature_split = true;
    bool dump_frames = true;

    // [model]
    ModelConfig model = ModelConfig::preset("mid");

    // [stack]
    StackConfig stack;

    // [channel]
    ChannelMode mode = ChannelMode::rate;
    std::vector<double> loss_grid{0.0, 0.3, 0.6, 0.9};
    std::vector<double> ser_grid;
    unsigned m_bits = 2;
    std::uint64_t n_p = 64;

    // [sweep] (analyze)
    double ps_min = 1e-5, ps_max = 1e-2;
    int ps_steps = 50;
    bool ps_log = true;
    std::uint64_t np_min = 1, np_max = 2048;
    int np_steps = 50;
    std::uint64_t sweep_l_origin = 155520;
    std::string curve_file;               // optional measured curve
    std::optional<double> threshold;      // metric (with curve) or P_L ceiling

    // [curve]
    std::string curve_out = "curve.csv";

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from_toml(const TomlTable& t);
    void validate_common() const;
    void validate_frames() const; // simulate/curve need a readable corpus
};

// Optional CLI overrides applied after the file is parsed.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> threshold;
    bool no_recovery = false;
    bool no_interleave = false;
    bool no_feature_split = false;
};

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& ov);

// Model presets plus field-level overrides from a [model] table.
ModelConfig model_from_toml(const TomlTable& t, const std::string& section = "model");

} // namespace semvt
