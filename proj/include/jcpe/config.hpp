#ifndef JCPE_CONFIG_HPP
#define JCPE_CONFIG_HPP

#include <algorithm>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jcpe/runner.hpp"

namespace jcpe {

inline SweepSpec spec_from_json(const nlohmann::json& j) {
    SweepSpec s;
    if (j.contains("modulations")) s.modulations = j["modulations"].get<std::vector<int>>();
    if (j.contains("cores")) s.cores = j["cores"].get<std::vector<int>>();
    if (j.contains("block_length")) s.block_length = j["block_length"].get<int>();
    if (j.contains("oh_pilot")) s.oh_pilot = j["oh_pilot"].get<std::vector<double>>();
    const std::string mode = j.value("mode", std::string(j.contains("ebn0_db") ? "ber" : "required-snr"));
    if (mode == "required-snr") {
        s.required_snr_mode = true;
        if (j.contains("target_ber")) s.target_ber = j["target_ber"].get<double>();
        if (j.contains("bracket_lo_db")) s.bracket_lo_db = j["bracket_lo_db"].get<double>();
        if (j.contains("bracket_hi_db")) s.bracket_hi_db = j["bracket_hi_db"].get<double>();
        if (j.contains("tol_db")) s.tol_db = j["tol_db"].get<double>();
    } else if (mode == "ber") {
        if (j.contains("ebn0_db")) s.ebn0_db = j["ebn0_db"].get<std::vector<double>>();
    } else {
        throw std::invalid_argument("config: unknown mode '" + mode + "'");
    }
    if (j.contains("dnu_ts")) s.dnu_ts = j["dnu_ts"].get<std::vector<double>>();
    if (j.contains("dnu_hz")) s.dnu_hz = j["dnu_hz"].get<std::vector<double>>();
    if (j.contains("symbol_rate_baud")) s.symbol_rate_baud = j["symbol_rate_baud"].get<double>();
    if (j.contains("ratio_c")) s.ratio_c = j["ratio_c"].get<double>();
    if (j.contains("ratio_p")) s.ratio_p = j["ratio_p"].get<double>();
    if (j.contains("correlation_ratio"))
        s.correlation_ratio = j["correlation_ratio"].get<std::vector<double>>();
    if (j.contains("correlation_total")) s.correlation_total = j["correlation_total"].get<double>();
    if (j.contains("strategies")) {
        s.strategies.clear();
        for (const auto& name : j["strategies"]) s.strategies.push_back(strategy_from_name(name.get<std::string>()));
    }
    if (j.contains("iterations")) s.iterations = j["iterations"].get<int>();
    if (j.contains("seed")) s.master_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("error_target")) s.error_target = j["error_target"].get<std::uint64_t>();
    if (j.contains("max_frames")) s.max_frames = j["max_frames"].get<std::uint64_t>();
    if (j.contains("compute_air")) s.compute_air = j["compute_air"].get<bool>();
    if (j.contains("bps_test_phases")) s.bps_test_phases = j["bps_test_phases"].get<int>();
    if (j.contains("bps_half_window")) s.bps_half_window = j["bps_half_window"].get<int>();
    if (j.contains("vv_half_window")) s.vv_half_window = j["vv_half_window"].get<int>();
    return s;
}

namespace detail_config {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace detail_config

/// Plain-text config grammar: one `key = value` pair per line, `#` starts a
/// comment, lists are comma-separated. Keys are the same as in the JSON form.
inline SweepSpec spec_from_text(std::istream& in) {
    nlohmann::json j;
    std::string line;
    int lineno = 0;
    const std::vector<std::string> list_keys = {"modulations", "cores", "oh_pilot", "ebn0_db",
                                                "dnu_ts", "dnu_hz", "correlation_ratio",
                                                "strategies"};
    const std::vector<std::string> string_keys = {"mode"};
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail_config::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = detail_config::trim(line.substr(0, eq));
        const std::string value = detail_config::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");

        const bool is_list =
            std::find(list_keys.begin(), list_keys.end(), key) != list_keys.end();
        const bool is_string =
            std::find(string_keys.begin(), string_keys.end(), key) != string_keys.end() ||
            key == "strategies";
        auto parse_scalar = [&](const std::string& v) -> nlohmann::json {
            if (is_string || key == "strategies") return v;
            if (v == "true") return true;
            if (v == "false") return false;
            try {
                std::size_t pos = 0;
                const double d = std::stod(v, &pos);
                if (pos != v.size()) throw std::invalid_argument(v);
                if (d == static_cast<double>(static_cast<long long>(d)) && v.find_first_of(".eE") == std::string::npos)
                    return static_cast<long long>(d);
                return d;
            } catch (...) {
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": cannot parse value '" + v + "'");
            }
        };
        if (is_list) {
            nlohmann::json arr = nlohmann::json::array();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ','))
                arr.push_back(parse_scalar(detail_config::trim(item)));
            j[key] = arr;
        } else {
            j[key] = parse_scalar(value);
        }
    }
    return spec_from_json(j);
}

} // namespace jcpe

#endif
