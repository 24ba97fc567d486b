#pragma once

// `mtmc` command line: criteria, pareto, select, sweep, synth, serve.
// Exit codes: 0 success, 1 data or validation error, 2 usage error.

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "mtmc/core_select.hpp"
#include "mtmc/evaluation.hpp"
#include "mtmc/json_io.hpp"
#include "mtmc/log.hpp"
#include "mtmc/service.hpp"
#include "mtmc/synth.hpp"

namespace mtmc {

/// The seventeen significance vectors of the reference sweep table.
inline const std::vector<std::vector<double>>& reference_phi_rows() {
    static const std::vector<std::vector<double>> rows{
        {0.5, 0.5, 0.5, 0.5}, {0.0, 0.5, 0.5, 0.5}, {1.0, 0.5, 0.5, 0.5}, {0.5, 0.0, 0.5, 0.5},
        {0.5, 1.0, 0.5, 0.5}, {0.5, 0.5, 0.0, 0.5}, {0.5, 0.5, 1.0, 0.5}, {0.5, 0.5, 0.5, 0.0},
        {0.5, 0.5, 0.5, 1.0}, {0.0, 0.0, 0.5, 0.5}, {1.0, 1.0, 0.5, 0.5}, {0.5, 0.5, 0.0, 0.0},
        {0.5, 0.5, 1.0, 1.0}, {1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0},
        {0.0, 0.0, 0.0, 1.0},
    };
    return rows;
}

/// Comma-separated weights. Errors name the offending component.
inline std::vector<double> parse_phi_list(std::string_view text) {
    std::vector<double> phi;
    if (text.empty()) return phi;
    const auto fields = detail::split_fields(text);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        std::string_view f = fields[i];
        while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.remove_suffix(1);
        double v = 0.0;
        if (!detail::parse_double(f, v)) {
            throw Error(ErrorKind::parse, "phi component " + std::to_string(i) + " ('" + std::string(f) +
                                              "') is not a finite number",
                        i);
        }
        phi.push_back(v);
    }
    return phi;
}

/// One weight vector per non-blank line. A first line that does not parse as
/// numbers is taken as a header and skipped.
inline std::vector<std::vector<double>> parse_phi_csv(std::string_view text) {
    std::vector<std::vector<double>> rows;
    bool first = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        try {
            rows.push_back(parse_phi_list(line));
        } catch (const Error& e) {
            if (first) {
                first = false;
                continue;
            }
            throw Error(ErrorKind::parse, "phi row " + std::to_string(rows.size()) + ": " + e.what(), rows.size());
        }
        first = false;
    }
    return rows;
}

namespace cli_detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::vector<std::string> hyperparameter_columns(const EvaluationMatrix& m) {
    std::set<std::string> names;
    for (const auto& c : m.combinations) {
        for (const auto& [name, value] : c.hyperparameters) names.insert(name);
    }
    return {names.begin(), names.end()};
}

inline std::string join_numbers(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

inline void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    }
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += "  ";
            line += row[i] + std::string(widths[i] - row[i].size(), ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
}

inline std::string short_number(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

struct Options {
    std::string runs, combos, out, matrix, format = "table", phi, phi_file, out_runs, out_combos, static_dir;
    bool json_output = false;
    SynthConfig synth;
    int port = 8080;
};

inline int cmd_criteria(const Options& o, std::ostream& out) {
    const auto records = parse_run_log(read_file(o.runs));
    const auto specs = parse_combination_specs(read_file(o.combos));
    const EvaluationMatrix m = build_matrix(records, specs);
    write_file(o.out, serialize_matrix(m) + "\n");
    out << "combinations: " << m.size() << '\n' << "tasks: " << m.tasks.size() << '\n'
        << "criteria: " << m.n_criteria() << '\n';
    return 0;
}

inline int cmd_pareto(const Options& o, std::ostream& out) {
    const EvaluationMatrix m = load_matrix(o.matrix);
    const ParetoFront front = pareto_front(m);
    if (o.format == "json") {
        out << front_to_json(m, front).dump(2) << '\n';
        return 0;
    }
    const auto hp = hyperparameter_columns(m);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"combination_id"};
    header.insert(header.end(), hp.begin(), hp.end());
    for (const auto& name : m.criteria_names) header.push_back(name);
    for (const auto& name : m.criteria_names) header.push_back("scaled_" + name);
    rows.push_back(header);
    for (std::size_t i = 0; i < front.size(); ++i) {
        const auto& c = m.combinations[front.member_indices[i]];
        std::vector<std::string> row{c.id};
        for (const auto& name : hp) {
            const auto it = c.hyperparameters.find(name);
            row.push_back(it == c.hyperparameters.end() ? "-" : it->second);
        }
        for (double v : front.raw[i]) row.push_back(short_number(v));
        for (double v : front.scaled[i]) row.push_back(short_number(v));
        rows.push_back(std::move(row));
    }
    print_table(out, rows);
    out << "\nPareto-optimal combinations: " << front.size() << " of " << m.size() << '\n';
    return 0;
}

inline int cmd_select(const Options& o, std::ostream& out) {
    const EvaluationMatrix m = load_matrix(o.matrix);
    const auto phi = parse_phi_list(o.phi);
    const SelectionResult r = mtmc::select(m, phi);
    const bool substituted = is_all_zero(phi);
    if (substituted) log::info("all-zero phi replaced by (0.5, ..., 0.5)");
    if (o.json_output) {
        out << selection_to_json(m, r, substituted).dump(2) << '\n';
        return 0;
    }
    out << "selected: " << r.selected_id << '\n';
    for (const auto& [name, value] : r.hyperparameters) out << "  " << name << " = " << value << '\n';
    out << "resolved phi: (" << join_numbers(r.resolved_weights.components) << ")";
    if (substituted) out << "  [all-zero phi replaced]";
    out << "\n\n";
    std::vector<std::vector<std::string>> rows{{"combination_id", "projection", ""}};
    for (std::size_t i = 0; i < r.member_indices.size(); ++i) {
        const auto idx = r.member_indices[i];
        rows.push_back({m.combinations[idx].id, format_double(r.projections[i]), idx == r.selected_index ? "*" : ""});
    }
    print_table(out, rows);
    return 0;
}

inline int cmd_sweep(const Options& o, std::ostream& out) {
    const EvaluationMatrix m = load_matrix(o.matrix);
    const auto phi_rows = o.phi_file.empty() ? reference_phi_rows() : parse_phi_csv(read_file(o.phi_file));
    const auto results = sweep(m, phi_rows);
    const auto hp = hyperparameter_columns(m);

    std::ostringstream csv;
    for (std::size_t j = 0; j < m.n_criteria(); ++j) csv << "phi_" << j << ',';
    csv << "selected_id";
    for (const auto& name : hp) csv << ',' << csv_field(name);
    csv << '\n';
    for (const auto& row : results) {
        for (double w : row.phi) csv << format_double(w) << ',';
        csv << csv_field(row.result.selected_id);
        for (const auto& name : hp) {
            const auto it = row.result.hyperparameters.find(name);
            csv << ',' << (it == row.result.hyperparameters.end() ? "" : csv_field(it->second));
        }
        csv << '\n';
    }
    if (o.out.empty()) out << csv.str();
    else write_file(o.out, csv.str());
    return 0;
}

inline int cmd_synth(const Options& o, std::ostream& out) {
    const SynthData data = generate(o.synth);
    write_file(o.out_runs, format_run_log(data.records));
    write_file(o.out_combos, to_json(data.specs).dump(2) + "\n");
    out << "records: " << data.records.size() << '\n' << "combinations: " << data.specs.size() << '\n';
    return 0;
}

inline int cmd_serve(const Options& o, std::ostream& err) {
    const Service service(load_matrix(o.matrix));
    httplib::Server server;
    // httplib's default adds SO_REUSEPORT, which would let a second server
    // share an occupied port.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    if (!service.mount(server, o.static_dir.empty() ? std::nullopt : std::optional<std::string>(o.static_dir))) {
        throw Error(ErrorKind::io, "cannot serve static assets from '" + o.static_dir + "'");
    }
    int port = o.port;
    if (port == 0) {
        port = server.bind_to_any_port("127.0.0.1");
        if (port < 0) throw Error(ErrorKind::io, "cannot bind to any port on 127.0.0.1");
    } else if (!server.bind_to_port("127.0.0.1", port)) {
        throw Error(ErrorKind::io, "cannot bind to 127.0.0.1:" + std::to_string(port));
    }
    err << "mtmc: serving " << service.matrix().size() << " combinations on http://127.0.0.1:" << port << std::endl;
    return server.listen_after_bind() ? 0 : 1;
}

} // namespace cli_detail

/// Runs the command line with `args` (excluding the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    CLI::App app{"Multi-task multi-criteria hyperparameter selection", "mtmc"};
    app.require_subcommand(1);
    Options o;

    auto* criteria = app.add_subcommand("criteria", "Build the evaluation matrix from a run log");
    criteria->add_option("--runs", o.runs, "Run-log CSV")->required();
    criteria->add_option("--combos", o.combos, "Combination spec JSON")->required();
    criteria->add_option("--out", o.out, "Matrix JSON to write")->required();

    auto* pareto = app.add_subcommand("pareto", "List the Pareto-optimal combinations");
    pareto->add_option("--matrix", o.matrix, "Matrix JSON")->required();
    pareto->add_option("--format", o.format, "table or json")->check(CLI::IsMember({"table", "json"}));

    auto* select = app.add_subcommand("select", "Select a combination for one significance vector");
    select->add_option("--matrix", o.matrix, "Matrix JSON")->required();
    select->add_option("--phi", o.phi, "Comma-separated weights in [0, 1]")->required();
    select->add_flag("--json", o.json_output, "Emit JSON");

    auto* sweep_cmd = app.add_subcommand("sweep", "Select for every row of a weight file");
    sweep_cmd->add_option("--matrix", o.matrix, "Matrix JSON")->required();
    sweep_cmd->add_option("--phi-file", o.phi_file, "CSV of weight vectors (default: reference 17-row table)");
    sweep_cmd->add_option("--out", o.out, "CSV to write (default: standard output)");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic run log");
    synth->add_option("--combinations", o.synth.n_combinations, "Number of combinations")->capture_default_str();
    synth->add_option("--folds", o.synth.n_folds, "Folds per task")->capture_default_str();
    synth->add_option("--epochs", o.synth.n_epochs, "Epochs per fold")->capture_default_str();
    synth->add_option("--tasks", o.synth.n_tasks, "Number of tasks")->capture_default_str();
    synth->add_option("--seed", o.synth.seed, "Random seed")->capture_default_str();
    synth->add_option("--out-runs", o.out_runs, "Run-log CSV to write")->required();
    synth->add_option("--out-combos", o.out_combos, "Combination spec JSON to write")->required();

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API for a matrix");
    serve->add_option("--matrix", o.matrix, "Matrix JSON")->required();
    serve->add_option("--port", o.port, "TCP port on 127.0.0.1 (0 picks a free one)")
        ->capture_default_str()
        ->check(CLI::Range(0, 65535));
    serve->add_option("--static", o.static_dir, "Directory of static assets served under /");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "mtmc: " << e.what() << '\n';
        if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
            err << "run 'mtmc " << sub->get_name() << " --help' for usage\n";
        }
        return 2;
    }

    try {
        if (criteria->parsed()) return cmd_criteria(o, out);
        if (pareto->parsed()) return cmd_pareto(o, out);
        if (select->parsed()) return cmd_select(o, out);
        if (sweep_cmd->parsed()) return cmd_sweep(o, out);
        if (synth->parsed()) return cmd_synth(o, out);
        if (serve->parsed()) return cmd_serve(o, err);
    } catch (const Error& e) {
        log::error(e.what(), err);
        const auto& offenders = e.offenders();
        for (std::size_t i = 0; i < offenders.size() && i < 20; ++i) err << "  " << offenders[i] << '\n';
        if (offenders.size() > 20) err << "  ... " << offenders.size() - 20 << " more\n";
        return 1;
    } catch (const std::exception& e) {
        log::error(e.what(), err);
        return 1;
    }
    return 2;
}

} // namespace mtmc
