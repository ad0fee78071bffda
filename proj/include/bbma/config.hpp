#pragma once

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bbma/experiments.hpp"

namespace bbma {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct TomlValue {
    enum class Kind { boolean, integer, floating, string, array } kind;
    int line = 0;
    bool bool_v = false;
    long long int_v = 0;
    double float_v = 0.0;
    std::string str_v;
    std::vector<double> array_v;
    bool array_integral = true;

    const char* kind_name() const {
        switch (kind) {
            case Kind::boolean: return "boolean";
            case Kind::integer: return "integer";
            case Kind::floating: return "float";
            case Kind::string: return "string";
            case Kind::array: return "array";
        }
        return "?";
    }
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool parse_integer(std::string_view s, long long& out) {
    if (s.empty()) return false;
    if (s.find_first_of(".eExX") != std::string_view::npos) return false;
    const std::string tmp(s);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(tmp.c_str(), &end, 10);
    if (errno != 0 || end != tmp.c_str() + tmp.size()) return false;
    out = v;
    return true;
}

inline bool parse_float(std::string_view s, double& out) {
    if (s.empty()) return false;
    const std::string tmp(s);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tmp.c_str(), &end);
    if (errno != 0 || end != tmp.c_str() + tmp.size()) return false;
    out = v;
    return true;
}

inline TomlValue parse_value(std::string_view raw, int line) {
    TomlValue v;
    v.line = line;
    raw = trim(raw);
    if (raw.empty()) throw ConfigError("missing value (line " + std::to_string(line) + ")");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"')
            throw ConfigError("unterminated string (line " + std::to_string(line) + ")");
        v.kind = TomlValue::Kind::string;
        v.str_v = std::string(raw.substr(1, raw.size() - 2));
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.bool_v = raw == "true";
        return v;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']')
            throw ConfigError("unterminated array (line " + std::to_string(line) + ")");
        v.kind = TomlValue::Kind::array;
        std::string_view body = trim(raw.substr(1, raw.size() - 2));
        while (!body.empty()) {
            const auto comma = body.find(',');
            std::string_view elem =
                comma == std::string_view::npos ? body : body.substr(0, comma);
            elem = trim(elem);
            long long i;
            double d;
            if (parse_integer(elem, i)) {
                v.array_v.push_back(static_cast<double>(i));
            } else if (parse_float(elem, d)) {
                v.array_v.push_back(d);
                v.array_integral = false;
            } else {
                throw ConfigError("bad array element '" + std::string(elem) + "' (line " +
                                  std::to_string(line) + ")");
            }
            if (comma == std::string_view::npos) break;
            body = trim(body.substr(comma + 1));
            if (body.empty())
                throw ConfigError("trailing comma in array (line " + std::to_string(line) + ")");
        }
        return v;
    }
    long long i;
    if (parse_integer(raw, i)) {
        v.kind = TomlValue::Kind::integer;
        v.int_v = i;
        return v;
    }
    double d;
    if (parse_float(raw, d)) {
        v.kind = TomlValue::Kind::floating;
        v.float_v = d;
        return v;
    }
    throw ConfigError("cannot parse value '" + std::string(raw) + "' (line " +
                      std::to_string(line) + ")");
}

/// Strip a trailing comment, respecting quoted strings.
inline std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

/// Flat "section.key" -> value table for the supported TOML subset: sections,
/// scalar values (string, bool, integer, float) and single-line numeric arrays.
inline std::map<std::string, TomlValue> parse_toml(std::string_view text) {
    std::map<std::string, TomlValue> table;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError("bad section header (line " + std::to_string(line_no) + ")");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected key = value (line " + std::to_string(line_no) + ")");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty())
            throw ConfigError("empty key (line " + std::to_string(line_no) + ")");
        for (char c : key)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                throw ConfigError("bad key '" + key + "' (line " + std::to_string(line_no) + ")");
        const std::string full = section.empty() ? key : section + "." + key;
        if (table.count(full))
            throw ConfigError("duplicate key '" + full + "' (line " + std::to_string(line_no) +
                              ")");
        table.emplace(full, parse_value(line.substr(eq + 1), line_no));
    }
    return table;
}

/// Typed access over the parsed table; tracks consumption so leftovers can be
/// reported as unknown keys.
class ConfigReader {
public:
    explicit ConfigReader(std::map<std::string, TomlValue> table) : table_(std::move(table)) {}

    bool has(const std::string& key) const { return table_.count(key) != 0; }

    void read_double(const std::string& key, double& target) {
        if (const TomlValue* v = take(key)) {
            if (v->kind == TomlValue::Kind::floating) target = v->float_v;
            else if (v->kind == TomlValue::Kind::integer) target = static_cast<double>(v->int_v);
            else type_error(key, *v, "number");
        }
    }

    void read_int(const std::string& key, int& target) {
        if (const TomlValue* v = take(key)) {
            if (v->kind != TomlValue::Kind::integer) type_error(key, *v, "integer");
            target = static_cast<int>(v->int_v);
        }
    }

    void read_u64(const std::string& key, std::uint64_t& target) {
        if (const TomlValue* v = take(key)) {
            if (v->kind != TomlValue::Kind::integer || v->int_v < 0)
                type_error(key, *v, "non-negative integer");
            target = static_cast<std::uint64_t>(v->int_v);
        }
    }

    void read_bool(const std::string& key, bool& target) {
        if (const TomlValue* v = take(key)) {
            if (v->kind != TomlValue::Kind::boolean) type_error(key, *v, "boolean");
            target = v->bool_v;
        }
    }

    void read_string(const std::string& key, std::string& target) {
        if (const TomlValue* v = take(key)) {
            if (v->kind != TomlValue::Kind::string) type_error(key, *v, "string");
            target = v->str_v;
        }
    }

    void read_int_list(const std::string& key, std::vector<int>& target) {
        if (const TomlValue* v = take(key)) {
            if (v->kind != TomlValue::Kind::array || !v->array_integral)
                type_error(key, *v, "array of integers");
            target.clear();
            for (double d : v->array_v) target.push_back(static_cast<int>(d));
        }
    }

    std::optional<std::string> peek_string(const std::string& key) const {
        auto it = table_.find(key);
        if (it == table_.end()) return std::nullopt;
        if (it->second.kind != TomlValue::Kind::string) type_error(key, it->second, "string");
        return it->second.str_v;
    }

    void mark_consumed(const std::string& key) { consumed_.insert(key); }

    void fail_on_unknown() const {
        for (const auto& [key, v] : table_)
            if (!consumed_.count(key))
                throw ConfigError("unknown key '" + key + "' (line " + std::to_string(v.line) +
                                  ")");
    }

private:
    const TomlValue* take(const std::string& key) {
        auto it = table_.find(key);
        if (it == table_.end()) return nullptr;
        consumed_.insert(key);
        return &it->second;
    }

    [[noreturn]] static void type_error(const std::string& key, const TomlValue& v,
                                        const char* wanted) {
        throw ConfigError("key '" + key + "': expected " + wanted + ", got " + v.kind_name() +
                          " (line " + std::to_string(v.line) + ")");
    }

    std::map<std::string, TomlValue> table_;
    std::set<std::string> consumed_;
};

} // namespace detail

/// Builds the experiment configuration from TOML-syntax text. Missing keys
/// fall back to the documented defaults; unknown keys are errors. An explicit
/// profile (the CLI flag) takes precedence over the file's run.profile; the
/// profile's array dimensions are applied before explicit [array] keys so a
/// config can still override them.
inline ExperimentConfig parse_experiment_config(std::string_view text,
                                                const std::optional<std::string>& profile_flag =
                                                    std::nullopt) {
    detail::ConfigReader reader(detail::parse_toml(text));
    ExperimentConfig cfg;

    std::string profile = "paper";
    if (const auto file_profile = reader.peek_string("run.profile")) profile = *file_profile;
    reader.mark_consumed("run.profile");
    if (profile_flag) profile = *profile_flag;
    apply_profile(cfg, profile);

    reader.read_u64("run.master_seed", cfg.master_seed);
    reader.read_int("run.threads", cfg.threads);
    reader.read_string("run.out_dir", cfg.out_dir);
    reader.read_bool("run.raw", cfg.raw);

    reader.read_double("cell.side_m", cfg.cell.side_m);
    reader.read_double("cell.carrier_hz", cfg.cell.carrier_hz);
    reader.read_double("cell.bandwidth_hz", cfg.cell.bandwidth_hz);
    reader.read_double("cell.pathloss_ref_db", cfg.cell.pathloss_ref_db);
    reader.read_double("cell.pathloss_exponent", cfg.cell.pathloss_exponent);
    reader.read_double("cell.shadowing_sigma_db", cfg.cell.shadowing_sigma_db);
    reader.read_double("cell.noise_figure_db", cfg.cell.noise_figure_db);
    reader.read_double("cell.target_sinr_db", cfg.cell.target_sinr_db);
    reader.read_double("cell.min_distance_m", cfg.cell.min_distance_m);
    reader.read_double("cell.ap_height_m", cfg.cell.ap_height_m);
    double p_max_dbm = 43.0;
    reader.read_double("cell.p_max_dbm", p_max_dbm);
    cfg.fig3.p_max_w = cfg.fig4.p_max_w = dbm_to_watts(p_max_dbm);

    reader.read_int("array.nx", cfg.array.nx);
    reader.read_int("array.ny", cfg.array.ny);
    reader.read_double("array.spacing_wavelengths", cfg.array.spacing_wavelengths);

    std::string solver_kind = to_string(cfg.solver.kind);
    reader.read_string("solver.kind", solver_kind);
    if (solver_kind == "explicit_inverse") cfg.solver.kind = SolverKind::explicit_inverse;
    else if (solver_kind == "orthogonal_factorization")
        cfg.solver.kind = SolverKind::orthogonal_factorization;
    else
        throw ConfigError("key 'solver.kind': expected explicit_inverse or "
                          "orthogonal_factorization, got '" + solver_kind + "'");
    reader.read_double("solver.condition_ceiling", cfg.solver.condition_ceiling);
    reader.read_bool("solver.refine", cfg.solver.refine);

    reader.read_int_list("fig3.n_values", cfg.fig3.n_values);
    reader.read_int("fig3.trials", cfg.fig3.trials);
    std::string basis = cfg.fig3.alloc_gains == GainBasis::path_loss ? "path_loss" : "shadowed";
    reader.read_string("fig3.alloc_gains", basis);
    if (basis == "path_loss") cfg.fig3.alloc_gains = GainBasis::path_loss;
    else if (basis == "shadowed") cfg.fig3.alloc_gains = GainBasis::shadowed;
    else
        throw ConfigError("key 'fig3.alloc_gains': expected path_loss or shadowed, got '" +
                          basis + "'");

    reader.read_int_list("fig4.n_values", cfg.fig4.n_values);
    reader.read_int("fig4.trials", cfg.fig4.trials);
    std::string drops = cfg.fig4.drops == DropStyle::clustered ? "clustered" : "uniform";
    reader.read_string("fig4.drops", drops);
    if (drops == "clustered") cfg.fig4.drops = DropStyle::clustered;
    else if (drops == "uniform") cfg.fig4.drops = DropStyle::uniform;
    else
        throw ConfigError("key 'fig4.drops': expected clustered or uniform, got '" + drops + "'");
    reader.read_double("fig4.cluster_radius_m", cfg.fig4.cluster_radius_m);
    reader.read_double("fig4.cluster_min_separation_m", cfg.fig4.cluster_min_separation_m);
    reader.read_int("fig4.clusters_min", cfg.fig4.clusters_min);
    reader.read_int("fig4.clusters_max", cfg.fig4.clusters_max);
    reader.read_double("fig4.condition_ceiling", cfg.fig4.condition_ceiling);

    reader.read_int_list("fig5.n_bits_values", cfg.fig5.n_bits_values);
    std::uint64_t min_bits = cfg.fig5.min_bits_per_point;
    reader.read_u64("fig5.min_bits_per_point", min_bits);
    cfg.fig5.min_bits_per_point = min_bits;
    reader.read_double("fig5.es_joules", cfg.fig5.es_joules);
    reader.read_double("fig5.es_over_n0", cfg.fig5.es_over_n0);
    reader.read_int("fig5.tx_nx", cfg.fig5.tx_nx);
    reader.read_int("fig5.tx_ny", cfg.fig5.tx_ny);
    reader.read_double("fig5.rx_range_m", cfg.fig5.rx_range_m);

    reader.fail_on_unknown();

    if (cfg.fig4.clusters_min < 1 || cfg.fig4.clusters_max < cfg.fig4.clusters_min)
        throw ConfigError("fig4.clusters_min/clusters_max must satisfy 1 <= min <= max");
    if (cfg.fig4.cluster_radius_m <= 0.0)
        throw ConfigError("fig4.cluster_radius_m must be > 0");
    if (cfg.fig5.es_joules <= 0.0) throw ConfigError("fig5.es_joules must be > 0");
    if (cfg.fig5.es_over_n0 <= 0.0) throw ConfigError("fig5.es_over_n0 must be > 0");
    if (cfg.fig5.rx_range_m <= 0.0) throw ConfigError("fig5.rx_range_m must be > 0");
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                               const std::optional<std::string>& profile_flag =
                                                   std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str(), profile_flag);
}

} // namespace bbma
