#pragma once

// JSON-over-HTTP front end for a loaded evaluation matrix.
//
//   GET  /api/health   {"status":"ok","combinations":N,"criteria":K}
//   GET  /api/matrix   matrix JSON (ETag, If-None-Match honoured)
//   GET  /api/pareto   {"criteria_names":[...],"members":[...]}
//   POST /api/select   {"phi":[...]} -> selection document | 400 {"error":...}
//
// The matrix, its front and the three GET bodies are fixed at construction.
// Handlers only read shared state. No authentication: bind to localhost or a
// trusted network.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>

#include "mtmc/core_select.hpp"
#include "mtmc/json_io.hpp"
#include "mtmc/log.hpp"

namespace mtmc {

struct HttpReply {
    int status = 200;
    std::string body;
};

class Service {
public:
    explicit Service(EvaluationMatrix matrix)
        : matrix_(std::move(matrix)),
          front_(pareto_front(matrix_)),
          health_body_(json{{"status", "ok"}, {"combinations", matrix_.size()}, {"criteria", matrix_.n_criteria()}}
                           .dump()),
          matrix_body_(serialize_matrix(matrix_)),
          pareto_body_(front_to_json(matrix_, front_).dump()),
          etag_(make_etag(matrix_body_)) {}

    const EvaluationMatrix& matrix() const noexcept { return matrix_; }
    const ParetoFront& front() const noexcept { return front_; }
    const std::string& etag() const noexcept { return etag_; }

    HttpReply health() const { return {200, health_body_}; }
    HttpReply matrix_json() const { return {200, matrix_body_}; }
    HttpReply pareto() const { return {200, pareto_body_}; }

    HttpReply select(std::string_view body) const {
        json request;
        try {
            request = json::parse(body);
        } catch (const json::parse_error& e) {
            return bad_request({{"error", std::string("malformed JSON: ") + e.what()}});
        }
        if (!request.is_object() || !request.contains("phi")) {
            return bad_request({{"error", "request must be an object with a 'phi' array"}});
        }
        const json& phi_json = request.at("phi");
        if (!phi_json.is_array()) return bad_request({{"error", "'phi' must be an array of numbers"}});

        std::vector<double> phi;
        phi.reserve(phi_json.size());
        for (std::size_t i = 0; i < phi_json.size(); ++i) {
            if (!phi_json[i].is_number()) {
                return bad_request({{"error", "phi component " + std::to_string(i) + " is not a number"},
                                    {"component", i}});
            }
            phi.push_back(phi_json[i].get<double>());
        }
        try {
            const SelectionResult result = mtmc::select(matrix_, front_, phi);
            if (is_all_zero(phi)) log::info("all-zero phi replaced by (0.5, ..., 0.5)");
            return {200, selection_to_json(matrix_, result, is_all_zero(phi)).dump()};
        } catch (const Error& e) {
            json err{{"error", e.what()}};
            if (e.kind() == ErrorKind::range && e.index()) err["component"] = *e.index();
            if (e.kind() == ErrorKind::dimension) err["expected"] = matrix_.n_criteria();
            return bad_request(std::move(err));
        }
    }

    /// Registers the API routes (and optional static assets under "/") on
    /// `server`. Returns false if `static_dir` cannot be mounted.
    bool mount(httplib::Server& server, const std::optional<std::string>& static_dir = std::nullopt) const {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
        server.Get("/api/matrix", [this](const httplib::Request& req, httplib::Response& res) {
            res.set_header("ETag", etag_);
            if (req.get_header_value("If-None-Match") == etag_) {
                res.status = 304;
                return;
            }
            reply(res, matrix_json());
        });
        server.Get("/api/pareto", [this](const httplib::Request&, httplib::Response& res) { reply(res, pareto()); });
        server.Post("/api/select",
                    [this](const httplib::Request& req, httplib::Response& res) { reply(res, select(req.body)); });
        server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                if (ep) std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            log::error(what);
            res.status = 500;
            res.set_content(json{{"error", what}}.dump(), "application/json");
        });
        if (static_dir && !server.set_mount_point("/", *static_dir)) return false;
        return true;
    }

private:
    static HttpReply bad_request(json body) { return {400, body.dump()}; }

    static void reply(httplib::Response& res, const HttpReply& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
    }

    static std::string make_etag(std::string_view body) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char ch : body) {
            h ^= ch;
            h *= 0x100000001b3ull;
        }
        char buf[24];
        std::snprintf(buf, sizeof buf, "\"%016llx\"", static_cast<unsigned long long>(h));
        return buf;
    }

    EvaluationMatrix matrix_;
    ParetoFront front_;
    std::string health_body_;
    std::string matrix_body_;
    std::string pareto_body_;
    std::string etag_;
};

} // namespace mtmc
