#pragma once

// JSON and file formats: matrix JSON, combination-spec JSON, Pareto-front
// and selection documents, and the run-log CSV writer. Doubles are written
// in their shortest round-trip decimal form.

#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtmc/core_select.hpp"
#include "mtmc/error.hpp"
#include "mtmc/evaluation.hpp"

namespace mtmc {

using json = nlohmann::json;

inline std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
    return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

inline json parse_json_text(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string(what) + ": " + e.what());
    }
}

namespace detail {

inline Hyperparameters hyperparameters_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorKind::parse, where + ": hyperparameters must be an object");
    Hyperparameters hp;
    for (const auto& [name, value] : j.items()) {
        if (value.is_string()) hp.emplace(name, value.get<std::string>());
        else if (value.is_number() || value.is_boolean()) hp.emplace(name, value.dump());
        else throw Error(ErrorKind::parse, where + ": hyperparameter '" + name + "' must be a string or number");
    }
    return hp;
}

inline CriteriaVector numbers_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw Error(ErrorKind::parse, where + " must be an array of numbers");
    CriteriaVector out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw Error(ErrorKind::parse, where + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline std::vector<std::string> strings_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw Error(ErrorKind::parse, where + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw Error(ErrorKind::parse, where + " must contain only strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorKind::parse, where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

} // namespace detail

// ---- matrix -----------------------------------------------------------------

inline json to_json(const EvaluationMatrix& m) {
    json combos = json::array();
    for (const auto& c : m.combinations) {
        json per_task = json::object();
        for (const auto& [task, values] : c.per_task) per_task[task] = values;
        combos.push_back({{"id", c.id},
                          {"hyperparameters", c.hyperparameters},
                          {"per_task", std::move(per_task)},
                          {"aggregated", c.aggregated}});
    }
    return {{"criteria_names", m.criteria_names}, {"tasks", m.tasks}, {"combinations", std::move(combos)}};
}

inline std::string serialize_matrix(const EvaluationMatrix& m) { return to_json(m).dump(); }

/// Parses and validates a matrix document.
inline EvaluationMatrix matrix_from_json(const json& j) {
    const std::string where = "matrix";
    if (!j.is_object()) throw Error(ErrorKind::parse, "matrix document must be an object");
    EvaluationMatrix m;
    m.criteria_names = detail::strings_from_json(detail::require(j, "criteria_names", where), "criteria_names");
    m.tasks = detail::strings_from_json(detail::require(j, "tasks", where), "tasks");
    const json& combos = detail::require(j, "combinations", where);
    if (!combos.is_array()) throw Error(ErrorKind::parse, "combinations must be an array");
    for (std::size_t i = 0; i < combos.size(); ++i) {
        const json& cj = combos[i];
        const std::string cw = "combinations[" + std::to_string(i) + "]";
        Combination c;
        const json& id = detail::require(cj, "id", cw);
        if (!id.is_string()) throw Error(ErrorKind::parse, cw + ".id must be a string");
        c.id = id.get<std::string>();
        if (cj.contains("hyperparameters")) c.hyperparameters = detail::hyperparameters_from_json(cj.at("hyperparameters"), cw);
        const json& per_task = detail::require(cj, "per_task", cw);
        if (!per_task.is_object()) throw Error(ErrorKind::parse, cw + ".per_task must be an object");
        for (const auto& [task, values] : per_task.items()) {
            c.per_task.emplace(task, detail::numbers_from_json(values, cw + ".per_task." + task));
        }
        c.aggregated = detail::numbers_from_json(detail::require(cj, "aggregated", cw), cw + ".aggregated");
        m.combinations.push_back(std::move(c));
    }
    if (m.combinations.empty()) throw Error(ErrorKind::empty_input, "matrix has no combinations");
    m.validate();
    return m;
}

inline EvaluationMatrix parse_matrix(std::string_view text) {
    return matrix_from_json(parse_json_text(text, "matrix JSON"));
}

inline EvaluationMatrix load_matrix(const std::string& path) {
    try {
        return parse_matrix(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::io) throw;
        throw Error(e.kind(), "'" + path + "': " + e.what(), e.index(), e.offenders());
    }
}

// ---- combination specs ------------------------------------------------------

inline json to_json(const std::vector<CombinationSpec>& specs) {
    json out = json::array();
    for (const auto& s : specs) {
        out.push_back({{"combination_id", s.combination_id}, {"hyperparameters", s.hyperparameters}});
    }
    return out;
}

inline std::vector<CombinationSpec> parse_combination_specs(std::string_view text) {
    const json j = parse_json_text(text, "combination spec JSON");
    if (!j.is_array()) throw Error(ErrorKind::parse, "combination spec document must be an array");
    std::vector<CombinationSpec> specs;
    specs.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "specs[" + std::to_string(i) + "]";
        const json& id = detail::require(j[i], "combination_id", where);
        if (!id.is_string()) throw Error(ErrorKind::parse, where + ".combination_id must be a string");
        CombinationSpec s;
        s.combination_id = id.get<std::string>();
        if (j[i].contains("hyperparameters")) {
            s.hyperparameters = detail::hyperparameters_from_json(j[i].at("hyperparameters"), where);
        }
        specs.push_back(std::move(s));
    }
    return specs;
}

// ---- run log ----------------------------------------------------------------

inline std::string format_run_log(std::span<const RunRecord> records) {
    std::string out;
    out.reserve(32 * (records.size() + 1));
    out.append(run_log_header);
    out.push_back('\n');
    for (const auto& r : records) {
        out.append(r.combination_id).push_back(',');
        out.append(r.task_id).push_back(',');
        out.append(r.fold_id).push_back(',');
        out.append(std::to_string(r.epoch)).push_back(',');
        out.append(format_double(r.accuracy)).push_back('\n');
    }
    return out;
}

// ---- front and selection documents -------------------------------------------

inline json front_to_json(const EvaluationMatrix& m, const ParetoFront& front) {
    json members = json::array();
    for (std::size_t i = 0; i < front.size(); ++i) {
        const auto& c = m.combinations.at(front.member_indices[i]);
        members.push_back({{"combination_id", c.id},
                           {"index", front.member_indices[i]},
                           {"hyperparameters", c.hyperparameters},
                           {"raw", front.raw[i]},
                           {"scaled", front.scaled[i]}});
    }
    return {{"criteria_names", m.criteria_names}, {"members", std::move(members)}};
}

inline json selection_to_json(const EvaluationMatrix& m, const SelectionResult& r, bool phi_substituted) {
    json projections = json::array();
    json member_ids = json::array();
    for (std::size_t i = 0; i < r.member_indices.size(); ++i) {
        const auto& id = m.combinations.at(r.member_indices[i]).id;
        projections.push_back({{"combination_id", id}, {"score", r.projections[i]}});
        member_ids.push_back(id);
    }
    return {{"selected_id", r.selected_id},
            {"selected_index", r.selected_index},
            {"hyperparameters", r.hyperparameters},
            {"resolved_phi", r.resolved_weights.components},
            {"phi_substituted", phi_substituted},
            {"projections", std::move(projections)},
            {"front_member_ids", std::move(member_ids)}};
}

} // namespace mtmc
