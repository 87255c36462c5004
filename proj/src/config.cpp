#include "semvt/config.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>

#include "semvt/error.hpp"
#include "semvt/io.hpp"

namespace semvt {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// strips a trailing comment that is not inside a string literal
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool parse_number(const std::string& tok, std::int64_t& iv, double& dv, bool& is_int) {
    char* end = nullptr;
    errno = 0;
    if (tok.find_first_of(".eE") == std::string::npos ||
        (tok.size() > 1 && (tok[0] == '0') && (tok[1] == 'x' || tok[1] == 'X'))) {
        iv = std::strtoll(tok.c_str(), &end, 0);
        if (end && *end == '\0' && errno == 0) {
            is_int = true;
            dv = static_cast<double>(iv);
            return true;
        }
    }
    errno = 0;
    end = nullptr;
    dv = std::strtod(tok.c_str(), &end);
    if (end && *end == '\0' && errno == 0) {
        is_int = false;
        return true;
    }
    return false;
}

} // namespace

TomlTable TomlTable::parse_file(const std::string& path) {
    return parse(read_text_file(path), path);
}

TomlTable TomlTable::parse(const std::string& text, const std::string& origin) {
    TomlTable t;
    t.origin_ = origin;
    std::string section;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);

        if (line.front() == '[') {
            require(line.back() == ']', ErrorCode::config, where + ": unterminated table header");
            section = trim(line.substr(1, line.size() - 2));
            require(!section.empty(), ErrorCode::config, where + ": empty table name");
            continue;
        }
        const std::size_t eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::config, where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        require(!key.empty() && !val.empty(), ErrorCode::config, where + ": empty key or value");

        Value out;
        if (val.front() == '"') {
            require(val.size() >= 2 && val.back() == '"', ErrorCode::config,
                    where + ": unterminated string");
            out = val.substr(1, val.size() - 2);
        } else if (val == "true" || val == "false") {
            out = (val == "true");
        } else if (val.front() == '[') {
            require(val.back() == ']', ErrorCode::config, where + ": unterminated array");
            std::string body = trim(val.substr(1, val.size() - 2));
            std::vector<double> nums;
            std::vector<std::string> strs;
            bool string_array = false;
            std::size_t p = 0;
            while (p < body.size()) {
                std::size_t comma = body.find(',', p);
                std::string item = trim(body.substr(p, comma == std::string::npos
                                                           ? std::string::npos
                                                           : comma - p));
                p = comma == std::string::npos ? body.size() : comma + 1;
                if (item.empty()) continue;
                if (item.front() == '"') {
                    require(item.size() >= 2 && item.back() == '"', ErrorCode::config,
                            where + ": bad string array item");
                    strs.push_back(item.substr(1, item.size() - 2));
                    string_array = true;
                } else {
                    std::int64_t iv;
                    double dv;
                    bool is_int;
                    require(parse_number(item, iv, dv, is_int), ErrorCode::config,
                            where + ": bad array item '" + item + "'");
                    nums.push_back(dv);
                }
            }
            if (string_array) {
                require(nums.empty(), ErrorCode::config, where + ": mixed array types");
                out = std::move(strs);
            } else {
                out = std::move(nums);
            }
        } else {
            std::int64_t iv;
            double dv;
            bool is_int;
            require(parse_number(val, iv, dv, is_int), ErrorCode::config,
                    where + ": bad value '" + val + "'");
            if (is_int)
                out = iv;
            else
                out = dv;
        }
        t.tables_[section][key] = std::move(out);
    }
    return t;
}

const TomlTable::Value* TomlTable::find(const std::string& section, const std::string& key) const {
    const auto sit = tables_.find(section);
    if (sit == tables_.end()) return nullptr;
    const auto kit = sit->second.find(key);
    return kit == sit->second.end() ? nullptr : &kit->second;
}

bool TomlTable::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string TomlTable::get_string(const std::string& section, const std::string& key,
                                  std::string fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    require(std::holds_alternative<std::string>(*v), ErrorCode::config,
            origin_ + ": [" + section + "] " + key + " must be a string");
    return std::get<std::string>(*v);
}

std::int64_t TomlTable::get_int(const std::string& section, const std::string& key,
                                std::int64_t fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    require(std::holds_alternative<std::int64_t>(*v), ErrorCode::config,
            origin_ + ": [" + section + "] " + key + " must be an integer");
    return std::get<std::int64_t>(*v);
}

double TomlTable::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    if (std::holds_alternative<std::int64_t>(*v))
        return static_cast<double>(std::get<std::int64_t>(*v));
    require(std::holds_alternative<double>(*v), ErrorCode::config,
            origin_ + ": [" + section + "] " + key + " must be a number");
    return std::get<double>(*v);
}

bool TomlTable::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    require(std::holds_alternative<bool>(*v), ErrorCode::config,
            origin_ + ": [" + section + "] " + key + " must be true or false");
    return std::get<bool>(*v);
}

std::vector<double> TomlTable::get_double_array(const std::string& section, const std::string& key,
                                                std::vector<double> fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    require(std::holds_alternative<std::vector<double>>(*v), ErrorCode::config,
            origin_ + ": [" + section + "] " + key + " must be a numeric array");
    return std::get<std::vector<double>>(*v);
}

ModelConfig model_from_toml(const TomlTable& t, const std::string& section) {
    ModelConfig m = ModelConfig::preset(t.get_string(section, "preset", "mid"));
    auto widths = t.get_double_array(section, "widths", {});
    if (!widths.empty()) {
        require(widths.size() == 6, ErrorCode::config, "[model] widths must have 6 entries");
        for (std::size_t i = 0; i < 6; ++i) m.widths[i] = static_cast<int>(widths[i]);
    }
    auto depths = t.get_double_array(section, "depths", {});
    if (!depths.empty()) {
        require(depths.size() == 6, ErrorCode::config, "[model] depths must have 6 entries");
        for (std::size_t i = 0; i < 6; ++i) m.depths[i] = static_cast<int>(depths[i]);
    }
    m.out_channels = static_cast<int>(t.get_int(section, "out_channels", m.out_channels));
    m.gop_size = static_cast<int>(t.get_int(section, "gop", m.gop_size));
    m.individual_factor =
        static_cast<int>(t.get_int(section, "individual_factor", m.individual_factor));
    m.common_range = t.get_double(section, "common_range", m.common_range);
    m.individual_range = t.get_double(section, "individual_range", m.individual_range);
    m.st_range = t.get_double(section, "st_range", m.st_range);
    m.validate();
    return m;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    return from_toml(TomlTable::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_toml(const TomlTable& t) {
    ExperimentConfig c;
    c.frames_dir = t.get_string("run", "frames", c.frames_dir);
    c.out_dir = t.get_string("run", "out", c.out_dir);
    c.seed = static_cast<std::uint64_t>(t.get_int("run", "seed", static_cast<std::int64_t>(c.seed)));
    c.trials = static_cast<int>(t.get_int("run", "trials", c.trials));
    c.gop_limit = static_cast<std::size_t>(t.get_int("run", "gops", 0));
    c.recovery = t.get_bool("run", "recovery", c.recovery);
    c.interleave_enabled = t.get_bool("run", "interleave", c.interleave_enabled);
    c.feature_split = t.get_bool("run", "feature_split", c.feature_split);
    c.dump_frames = t.get_bool("run", "dump_frames", c.dump_frames);

    c.model = model_from_toml(t);

    c.stack.ah_bytes = static_cast<std::uint32_t>(t.get_int("stack", "ah_bytes", 3));
    c.stack.transport_bytes = static_cast<std::uint32_t>(t.get_int("stack", "transport_bytes", 8));
    c.stack.network_bytes = static_cast<std::uint32_t>(t.get_int("stack", "network_bytes", 20));
    c.stack.link_bytes = static_cast<std::uint32_t>(t.get_int("stack", "link_bytes", 18));

    const std::string mode = t.get_string("channel", "mode", "rate");
    if (mode == "rate")
        c.mode = ChannelMode::rate;
    else if (mode == "ser")
        c.mode = ChannelMode::ser;
    else
        fail(ErrorCode::config, "[channel] mode must be \"rate\" or \"ser\"");
    c.loss_grid = t.get_double_array("channel", "loss_grid", c.loss_grid);
    c.ser_grid = t.get_double_array("channel", "ser_grid", c.ser_grid);
    c.m_bits = static_cast<unsigned>(t.get_int("channel", "m_bits", c.m_bits));
    c.n_p = static_cast<std::uint64_t>(t.get_int("channel", "n_p", static_cast<std::int64_t>(c.n_p)));

    c.ps_min = t.get_double("sweep", "ps_min", c.ps_min);
    c.ps_max = t.get_double("sweep", "ps_max", c.ps_max);
    c.ps_steps = static_cast<int>(t.get_int("sweep", "ps_steps", c.ps_steps));
    c.ps_log = t.get_bool("sweep", "ps_log", c.ps_log);
    c.np_min = static_cast<std::uint64_t>(t.get_int("sweep", "np_min", static_cast<std::int64_t>(c.np_min)));
    c.np_max = static_cast<std::uint64_t>(t.get_int("sweep", "np_max", static_cast<std::int64_t>(c.np_max)));
    c.np_steps = static_cast<int>(t.get_int("sweep", "np_steps", c.np_steps));
    c.sweep_l_origin =
        static_cast<std::uint64_t>(t.get_int("sweep", "l_origin", static_cast<std::int64_t>(c.sweep_l_origin)));
    c.curve_file = t.get_string("sweep", "curve", c.curve_file);
    if (t.has("sweep", "threshold")) c.threshold = t.get_double("sweep", "threshold", 0.0);

    c.curve_out = t.get_string("curve", "out", c.curve_out);

    c.validate_common();
    return c;
}

void ExperimentConfig::validate_common() const {
    model.validate();
    require(trials >= 1, ErrorCode::config, "[run] trials must be >= 1");
    require(m_bits >= 1, ErrorCode::config, "[channel] m_bits must be >= 1");
    require(n_p >= 1 && n_p <= 65536, ErrorCode::config, "[channel] n_p must be in [1, 65536]");
    for (double p : loss_grid)
        require(p >= 0.0 && p <= 1.0, ErrorCode::config, "[channel] loss_grid values in [0,1]");
    for (double p : ser_grid)
        require(p >= 0.0 && p <= 1.0, ErrorCode::config, "[channel] ser_grid values in [0,1]");
    if (mode == ChannelMode::rate)
        require(!loss_grid.empty(), ErrorCode::config, "[channel] loss_grid must be non-empty");
    else
        require(!ser_grid.empty(), ErrorCode::config, "[channel] ser_grid must be non-empty");
    require(ps_min > 0 && ps_max >= ps_min && ps_max <= 1.0, ErrorCode::config,
            "[sweep] need 0 < ps_min <= ps_max <= 1");
    require(ps_steps >= 1 && np_steps >= 1, ErrorCode::config, "[sweep] steps must be >= 1");
    require(np_min >= 1 && np_max >= np_min, ErrorCode::config, "[sweep] need 1 <= np_min <= np_max");
    require(sweep_l_origin >= 1, ErrorCode::config, "[sweep] l_origin must be >= 1");
    if (!curve_file.empty())
        require(std::filesystem::exists(curve_file), ErrorCode::config,
                "[sweep] curve file not found: " + curve_file);
}

void ExperimentConfig::validate_frames() const {
    require(!frames_dir.empty(), ErrorCode::config, "[run] frames directory is required");
    require(std::filesystem::is_directory(frames_dir), ErrorCode::config,
            "[run] frames directory not found: " + frames_dir);
}

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& ov) {
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.threshold) cfg.threshold = *ov.threshold;
    if (ov.no_recovery) cfg.recovery = false;
    if (ov.no_interleave) cfg.interleave_enabled = false;
    if (ov.no_feature_split) cfg.feature_split = false;
}

} // namespace semvt
