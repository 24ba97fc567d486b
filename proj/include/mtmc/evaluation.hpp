#pragma once

// Run-log ingestion and construction of the evaluation matrix.
//
// A run log holds one accuracy per (combination, task, fold, epoch). Each
// fold is reduced to its best accuracy and the earliest epoch reaching it;
// the folds of a (combination, task) then yield four criteria:
//   error_mean, error_var, epoch_mean, epoch_var
// with error = 1 - best accuracy and sample variances over folds (n - 1).
// The aggregated row of a combination is the unweighted mean over tasks.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <iterator>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "mtmc/core_select.hpp"
#include "mtmc/error.hpp"

namespace mtmc {

inline const std::vector<std::string>& criteria_names() {
    static const std::vector<std::string> names{"error_mean", "error_var", "epoch_mean", "epoch_var"};
    return names;
}

inline constexpr std::string_view run_log_header = "combination_id,task_id,fold_id,epoch,accuracy";

struct RunRecord {
    std::string combination_id;
    std::string task_id;
    std::string fold_id;
    long epoch = 1;
    double accuracy = 0.0;

    bool operator==(const RunRecord&) const = default;
};

struct CombinationSpec {
    std::string combination_id;
    Hyperparameters hyperparameters;

    bool operator==(const CombinationSpec&) const = default;
};

struct EpochAccuracy {
    long epoch = 1;
    double accuracy = 0.0;
};

struct FoldSummary {
    double max_accuracy = 0.0;
    long convergence_epoch = 1;

    bool operator==(const FoldSummary&) const = default;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline bool parse_double(std::string_view text, double& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

inline bool parse_long(std::string_view text, long& out) {
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

} // namespace detail

/// Parses a run-log CSV. LF and CRLF line endings are accepted and blank
/// lines are skipped. Errors carry the 1-based line number in Error::index().
inline std::vector<RunRecord> parse_run_log(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<RunRecord> records;
    std::set<std::tuple<std::string, std::string, std::string, long>> seen;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    auto fail = [&](const std::string& what) -> Error {
        return Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + what, line_no);
    };

    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        if (!have_header) {
            if (line != run_log_header) {
                throw fail("expected header '" + std::string(run_log_header) + "'");
            }
            have_header = true;
            continue;
        }

        const auto fields = detail::split_fields(line);
        if (fields.size() != 5) {
            throw fail("expected 5 columns, found " + std::to_string(fields.size()));
        }
        RunRecord r;
        r.combination_id = std::string(fields[0]);
        r.task_id = std::string(fields[1]);
        r.fold_id = std::string(fields[2]);
        if (r.combination_id.empty() || r.task_id.empty() || r.fold_id.empty()) {
            throw fail("empty identifier");
        }
        if (!detail::parse_long(fields[3], r.epoch)) throw fail("epoch '" + std::string(fields[3]) + "' is not an integer");
        if (r.epoch < 1) throw fail("epoch must be >= 1");
        if (!detail::parse_double(fields[4], r.accuracy)) {
            throw fail("accuracy '" + std::string(fields[4]) + "' is not a finite number");
        }
        if (r.accuracy < 0.0 || r.accuracy > 1.0) throw fail("accuracy " + std::string(fields[4]) + " outside [0, 1]");
        if (!seen.emplace(r.combination_id, r.task_id, r.fold_id, r.epoch).second) {
            throw fail("duplicate (combination, task, fold, epoch) " + r.combination_id + "/" + r.task_id + "/" +
                       r.fold_id + "/" + std::to_string(r.epoch));
        }
        records.push_back(std::move(r));
    }
    if (!have_header) throw Error(ErrorKind::parse, "line 1: missing header", 1);
    return records;
}

inline std::vector<RunRecord> parse_run_log(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_run_log(std::string_view(text));
}

/// Best accuracy of a fold and the earliest epoch that reaches it.
inline FoldSummary summarize_fold(std::span<const EpochAccuracy> epochs) {
    if (epochs.empty()) throw Error(ErrorKind::empty_input, "fold has no epochs");
    FoldSummary s{epochs.front().accuracy, epochs.front().epoch};
    for (const auto& e : epochs.subspan(1)) {
        if (e.accuracy > s.max_accuracy || (e.accuracy == s.max_accuracy && e.epoch < s.convergence_epoch)) {
            s = {e.accuracy, e.epoch};
        }
    }
    return s;
}

/// (error_mean, error_var, epoch_mean, epoch_var) over at least two folds.
/// Mean and variance are accumulated with Welford's recurrence.
inline CriteriaVector compute_task_criteria(std::span<const FoldSummary> folds, std::string_view context = {}) {
    if (folds.size() < 2) {
        std::string where = context.empty() ? std::string() : " for " + std::string(context);
        throw Error(ErrorKind::insufficient_folds,
                    "need at least 2 folds" + where + ", got " + std::to_string(folds.size()), std::nullopt,
                    {std::string(context)});
    }
    double error_mean = 0.0, error_m2 = 0.0;
    double epoch_mean = 0.0, epoch_m2 = 0.0;
    double n = 0.0;
    for (const auto& f : folds) {
        n += 1.0;
        const double error = 1.0 - f.max_accuracy;
        const double d_err = error - error_mean;
        error_mean += d_err / n;
        error_m2 += d_err * (error - error_mean);

        const auto epoch = static_cast<double>(f.convergence_epoch);
        const double d_ep = epoch - epoch_mean;
        epoch_mean += d_ep / n;
        epoch_m2 += d_ep * (epoch - epoch_mean);
    }
    return {error_mean, error_m2 / (n - 1.0), epoch_mean, epoch_m2 / (n - 1.0)};
}

/// Groups records by key and builds the matrix. Combination order follows
/// `specs`; task order is lexicographic. Each failure category reports every
/// offender through Error::offenders().
inline EvaluationMatrix build_matrix(std::span<const RunRecord> records, std::span<const CombinationSpec> specs) {
    {
        std::vector<std::string> bad;
        std::set<std::string> ids;
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const auto& s = specs[i];
            if (s.combination_id.empty()) bad.push_back("spec " + std::to_string(i) + " has an empty combination_id");
            else if (!ids.insert(s.combination_id).second) bad.push_back("duplicate combination_id '" + s.combination_id + "'");
            for (const auto& [name, value] : s.hyperparameters) {
                if (name.empty()) bad.push_back("combination '" + s.combination_id + "' has an empty hyperparameter name");
            }
        }
        if (!bad.empty()) throw Error(ErrorKind::config, bad.front(), std::nullopt, bad);
    }
    if (records.empty()) throw Error(ErrorKind::empty_input, "run log contains no records");

    // combination -> task -> fold -> epochs
    using Folds = std::map<std::string, std::vector<EpochAccuracy>>;
    std::map<std::string, std::map<std::string, Folds>> grouped;
    std::set<std::string> known;
    for (const auto& s : specs) known.insert(s.combination_id);

    std::set<std::string> unknown;
    std::set<std::string> all_tasks;
    std::set<std::tuple<std::string, std::string, std::string, long>> seen;
    for (const auto& r : records) {
        if (!known.count(r.combination_id)) {
            unknown.insert(r.combination_id);
            continue;
        }
        if (!seen.emplace(r.combination_id, r.task_id, r.fold_id, r.epoch).second) {
            throw Error(ErrorKind::parse, "duplicate record " + r.combination_id + "/" + r.task_id + "/" + r.fold_id +
                                              "/" + std::to_string(r.epoch));
        }
        all_tasks.insert(r.task_id);
        grouped[r.combination_id][r.task_id][r.fold_id].push_back({r.epoch, r.accuracy});
    }
    if (!unknown.empty()) {
        std::vector<std::string> list(unknown.begin(), unknown.end());
        throw Error(ErrorKind::unknown_combination, std::to_string(list.size()) + " unknown combination id(s), first '" +
                                                        list.front() + "'",
                    std::nullopt, list);
    }

    {
        std::vector<std::string> ragged;
        for (const auto& s : specs) {
            const auto it = grouped.find(s.combination_id);
            for (const auto& task : all_tasks) {
                if (it == grouped.end() || !it->second.count(task)) {
                    ragged.push_back(s.combination_id + "/" + task);
                }
            }
        }
        if (!ragged.empty()) {
            throw Error(ErrorKind::ragged_tasks,
                        std::to_string(ragged.size()) + " missing (combination, task) pair(s), first " + ragged.front(),
                        std::nullopt, ragged);
        }
    }
    {
        std::vector<std::string> thin;
        for (const auto& [combo, tasks] : grouped) {
            for (const auto& [task, folds] : tasks) {
                if (folds.size() < 2) thin.push_back(combo + "/" + task);
            }
        }
        if (!thin.empty()) {
            throw Error(ErrorKind::insufficient_folds,
                        std::to_string(thin.size()) + " (combination, task) pair(s) with fewer than 2 folds, first " +
                            thin.front(),
                        std::nullopt, thin);
        }
    }

    EvaluationMatrix matrix;
    matrix.criteria_names = criteria_names();
    matrix.tasks.assign(all_tasks.begin(), all_tasks.end());
    matrix.combinations.reserve(specs.size());
    for (const auto& s : specs) {
        Combination c;
        c.id = s.combination_id;
        c.hyperparameters = s.hyperparameters;
        for (const auto& [task, folds] : grouped.at(s.combination_id)) {
            std::vector<FoldSummary> summaries;
            summaries.reserve(folds.size());
            for (const auto& [fold, epochs] : folds) summaries.push_back(summarize_fold(epochs));
            c.per_task.emplace(task, compute_task_criteria(summaries, s.combination_id + "/" + task));
        }
        c.aggregated = aggregate_tasks(c.per_task);
        matrix.combinations.push_back(std::move(c));
    }
    return matrix;
}

} // namespace mtmc
