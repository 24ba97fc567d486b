#pragma once

// Selection of a hyperparameter combination from an evaluation matrix:
// Pareto front in criteria space, per-criterion min-max scaling of the
// front, projection of the scaled rows onto a criteria-significance vector
// and argmin over the projections. Every criterion is minimized.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mtmc/error.hpp"

namespace mtmc {

using CriteriaVector = std::vector<double>;
using Hyperparameters = std::map<std::string, std::string>;

struct Combination {
    std::string id;
    Hyperparameters hyperparameters;
    std::map<std::string, CriteriaVector> per_task;
    CriteriaVector aggregated;

    bool operator==(const Combination&) const = default;
};

/// Elementwise arithmetic mean of the per-task vectors, in task-id order.
inline CriteriaVector aggregate_tasks(const std::map<std::string, CriteriaVector>& per_task) {
    if (per_task.empty()) {
        throw Error(ErrorKind::empty_input, "cannot aggregate over zero tasks");
    }
    CriteriaVector sum(per_task.begin()->second.size(), 0.0);
    for (const auto& [task, values] : per_task) {
        if (values.size() != sum.size()) {
            throw Error(ErrorKind::dimension, "task '" + task + "' has " + std::to_string(values.size()) +
                                                  " criteria, expected " + std::to_string(sum.size()));
        }
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += values[j];
    }
    const auto n = static_cast<double>(per_task.size());
    for (auto& v : sum) v /= n;
    return sum;
}

struct EvaluationMatrix {
    std::vector<std::string> criteria_names;
    std::vector<std::string> tasks;
    std::vector<Combination> combinations;

    std::size_t n_criteria() const noexcept { return criteria_names.size(); }
    std::size_t size() const noexcept { return combinations.size(); }
    bool empty() const noexcept { return combinations.empty(); }

    std::vector<CriteriaVector> aggregated_rows() const {
        std::vector<CriteriaVector> rows;
        rows.reserve(combinations.size());
        for (const auto& c : combinations) rows.push_back(c.aggregated);
        return rows;
    }

    /// Throws ErrorKind::invalid_matrix listing every violated invariant.
    void validate() const;

    bool operator==(const EvaluationMatrix&) const = default;
};

inline void EvaluationMatrix::validate() const {
    std::vector<std::string> problems;
    const std::size_t k = n_criteria();
    if (k == 0) problems.push_back("criteria_names is empty");
    if (tasks.empty()) problems.push_back("tasks is empty");

    const std::set<std::string> task_set(tasks.begin(), tasks.end());
    if (task_set.size() != tasks.size()) problems.push_back("task ids are not unique");

    auto check_vector = [&](const CriteriaVector& v, const std::string& where) {
        if (v.size() != k) {
            problems.push_back(where + " has " + std::to_string(v.size()) + " values, expected " + std::to_string(k));
            return false;
        }
        for (double x : v) {
            if (!std::isfinite(x)) {
                problems.push_back(where + " contains a non-finite value");
                return false;
            }
        }
        return true;
    };

    std::set<std::string> ids;
    for (std::size_t i = 0; i < combinations.size(); ++i) {
        const auto& c = combinations[i];
        const std::string label = "combination " + std::to_string(i) + " ('" + c.id + "')";
        if (c.id.empty()) problems.push_back(label + " has an empty id");
        if (!ids.insert(c.id).second) problems.push_back(label + " duplicates an earlier id");
        for (const auto& [name, value] : c.hyperparameters) {
            if (name.empty()) problems.push_back(label + " has an empty hyperparameter name");
        }
        std::set<std::string> covered;
        bool shapes_ok = check_vector(c.aggregated, label + " aggregated");
        for (const auto& [task, values] : c.per_task) {
            covered.insert(task);
            shapes_ok = check_vector(values, label + " task '" + task + "'") && shapes_ok;
        }
        if (covered != task_set) {
            problems.push_back(label + " does not cover exactly the declared task set");
            continue;
        }
        if (!shapes_ok) continue;
        const CriteriaVector mean = aggregate_tasks(c.per_task);
        for (std::size_t j = 0; j < k; ++j) {
            const double scale = std::max({1.0, std::abs(mean[j]), std::abs(c.aggregated[j])});
            if (std::abs(mean[j] - c.aggregated[j]) > 1e-12 * scale) {
                problems.push_back(label + " aggregated[" + std::to_string(j) + "] is not the mean over tasks");
            }
        }
    }
    if (!problems.empty()) {
        std::string message = std::to_string(problems.size()) + " problem(s): " + problems.front();
        throw Error(ErrorKind::invalid_matrix, message, std::nullopt, std::move(problems));
    }
}

struct ParetoFront {
    std::vector<std::size_t> member_indices;
    std::vector<CriteriaVector> raw;
    std::vector<CriteriaVector> scaled;

    std::size_t size() const noexcept { return member_indices.size(); }
    bool operator==(const ParetoFront&) const = default;
};

struct WeightVector {
    std::vector<double> components;

    double norm() const {
        double sq = 0.0;
        for (double w : components) sq += w * w;
        return std::sqrt(sq);
    }
    bool operator==(const WeightVector&) const = default;
};

struct SelectionResult {
    std::size_t selected_index = 0;
    std::string selected_id;
    Hyperparameters hyperparameters;
    std::vector<std::size_t> member_indices;
    std::vector<double> projections;
    WeightVector resolved_weights;

    bool operator==(const SelectionResult&) const = default;
};

/// True iff `a` is no worse than `b` everywhere and strictly better somewhere.
inline bool dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::dimension, "cannot compare vectors of length " + std::to_string(a.size()) + " and " +
                                              std::to_string(b.size()));
    }
    bool strictly_better = false;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] > b[j]) return false;
        if (a[j] < b[j]) strictly_better = true;
    }
    return strictly_better;
}

namespace detail {

inline void check_rows(std::span<const CriteriaVector> rows) {
    if (rows.empty()) throw Error(ErrorKind::empty_input, "no rows");
    const std::size_t k = rows.front().size();
    if (k == 0) throw Error(ErrorKind::dimension, "rows have zero criteria");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != k) {
            throw Error(ErrorKind::dimension, "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                                  " values, expected " + std::to_string(k),
                        i);
        }
    }
}

} // namespace detail

/// Min-max scaling per criterion over the given rows. A criterion that is
/// constant over the rows scales to 0 everywhere.
inline std::vector<CriteriaVector> scale_front(std::span<const CriteriaVector> rows) {
    detail::check_rows(rows);
    const std::size_t k = rows.front().size();
    CriteriaVector lo = rows.front();
    CriteriaVector hi = rows.front();
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < k; ++j) {
            lo[j] = std::min(lo[j], row[j]);
            hi[j] = std::max(hi[j], row[j]);
        }
    }
    std::vector<CriteriaVector> scaled(rows.size(), CriteriaVector(k, 0.0));
    for (std::size_t j = 0; j < k; ++j) {
        const double span = hi[j] - lo[j];
        if (!(span > 0.0)) continue;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            scaled[i][j] = (rows[i][j] - lo[j]) / span;
        }
    }
    return scaled;
}

/// Non-dominated rows, all duplicates retained, indices ascending.
///
/// Rows are visited in lexicographic order. A dominator always precedes what
/// it dominates in that order, and dominance is transitive, so each row only
/// needs checking against the members accepted so far.
inline ParetoFront pareto_front(std::span<const CriteriaVector> rows) {
    detail::check_rows(rows);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a] < rows[b]; });

    std::vector<std::size_t> members;
    for (std::size_t idx : order) {
        const bool dominated = std::any_of(members.begin(), members.end(),
                                           [&](std::size_t m) { return dominates(rows[m], rows[idx]); });
        if (!dominated) members.push_back(idx);
    }
    std::sort(members.begin(), members.end());

    ParetoFront front;
    front.member_indices = std::move(members);
    front.raw.reserve(front.member_indices.size());
    for (std::size_t idx : front.member_indices) front.raw.push_back(rows[idx]);
    front.scaled = scale_front(front.raw);
    return front;
}

inline ParetoFront pareto_front(const EvaluationMatrix& matrix) {
    if (matrix.empty()) throw Error(ErrorKind::empty_input, "evaluation matrix has no combinations");
    const auto rows = matrix.aggregated_rows();
    return pareto_front(rows);
}

inline bool is_all_zero(std::span<const double> phi) {
    return std::all_of(phi.begin(), phi.end(), [](double w) { return w == 0.0; });
}

/// Validates phi against [0, 1] and substitutes (0.5, ..., 0.5) when every
/// component is zero. Range errors carry the offending component index.
inline WeightVector resolve_weights(std::span<const double> phi, std::size_t n_criteria) {
    if (phi.size() != n_criteria) {
        throw Error(ErrorKind::dimension,
                    "phi has " + std::to_string(phi.size()) + " components, expected " + std::to_string(n_criteria));
    }
    if (n_criteria == 0) throw Error(ErrorKind::dimension, "phi must have at least one component");
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!(phi[i] >= 0.0 && phi[i] <= 1.0)) {
            throw Error(ErrorKind::range, "phi component " + std::to_string(i) + " is outside [0, 1]", i);
        }
    }
    if (is_all_zero(phi)) return WeightVector{std::vector<double>(n_criteria, 0.5)};
    return WeightVector{std::vector<double>(phi.begin(), phi.end())};
}

/// dot(row, phi) / |phi| for every scaled row.
inline std::vector<double> project(std::span<const CriteriaVector> scaled, const WeightVector& phi) {
    const double norm = phi.norm();
    if (!(norm > 0.0)) throw Error(ErrorKind::range, "cannot project onto a zero weight vector");
    std::vector<double> out;
    out.reserve(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const auto& row = scaled[i];
        if (row.size() != phi.components.size()) {
            throw Error(ErrorKind::dimension, "scaled row " + std::to_string(i) + " has " +
                                                  std::to_string(row.size()) + " values, phi has " +
                                                  std::to_string(phi.components.size()),
                        i);
        }
        double dot = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) dot += row[j] * phi.components[j];
        out.push_back(dot / norm);
    }
    return out;
}

/// Position of the first minimum.
inline std::size_t argmin(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::empty_input, "argmin of an empty sequence");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[best]) best = i;
    }
    return best;
}

/// Selection against a precomputed front of `matrix`.
inline SelectionResult select(const EvaluationMatrix& matrix, const ParetoFront& front, std::span<const double> phi) {
    SelectionResult result;
    result.resolved_weights = resolve_weights(phi, matrix.n_criteria());
    result.projections = project(front.scaled, result.resolved_weights);
    result.member_indices = front.member_indices;
    const std::size_t best = argmin(result.projections);
    result.selected_index = front.member_indices[best];
    const auto& chosen = matrix.combinations.at(result.selected_index);
    result.selected_id = chosen.id;
    result.hyperparameters = chosen.hyperparameters;
    return result;
}

inline SelectionResult select(const EvaluationMatrix& matrix, std::span<const double> phi) {
    resolve_weights(phi, matrix.n_criteria());
    return select(matrix, pareto_front(matrix), phi);
}

struct SweepRow {
    std::vector<double> phi;
    SelectionResult result;

    bool operator==(const SweepRow&) const = default;
};

/// One selection per phi, in input order. Every phi is validated before any
/// selection runs; the first invalid one aborts the sweep and its row index
/// is reported through Error::index().
inline std::vector<SweepRow> sweep(const EvaluationMatrix& matrix, const std::vector<std::vector<double>>& phi_list) {
    for (std::size_t row = 0; row < phi_list.size(); ++row) {
        try {
            resolve_weights(phi_list[row], matrix.n_criteria());
        } catch (const Error& e) {
            throw Error(e.kind(), "phi row " + std::to_string(row) + ": " + e.what(), row);
        }
    }
    std::vector<SweepRow> rows;
    if (phi_list.empty()) return rows;
    const ParetoFront front = pareto_front(matrix);
    rows.reserve(phi_list.size());
    for (const auto& phi : phi_list) rows.push_back({phi, select(matrix, front, phi)});
    return rows;
}

} // namespace mtmc
