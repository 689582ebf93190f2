#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>
#include <scratchkit.h>

using nlohmann::json;

namespace {

#ifndef SCRATCHKIT_DATA_DIR
#define SCRATCHKIT_DATA_DIR "data"
#endif

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value != nullptr && *value != '\0' ? value : fallback;
}

std::string default_catalog() {
    return env_or("SCRATCHKIT_CATALOG", std::string(SCRATCHKIT_DATA_DIR) + "/catalog.tsv");
}

std::string default_corpus() {
    return env_or("SCRATCHKIT_CORPUS", std::string(SCRATCHKIT_DATA_DIR) + "/corpus.json");
}

struct Context {
    sk_context* ptr = sk_context_new();
    Context() = default;
    Context(const Context&) = delete;
    Context& operator=(const Context&) = delete;
    ~Context() { sk_context_free(ptr); }
    operator sk_context*() const { return ptr; }
};

struct ProjectHandle {
    sk_project* ptr = nullptr;
    ProjectHandle() = default;
    ProjectHandle(const ProjectHandle&) = delete;
    ProjectHandle& operator=(const ProjectHandle&) = delete;
    ~ProjectHandle() { sk_project_free(ptr); }
};

struct OwnedText {
    char* ptr = nullptr;
    OwnedText() = default;
    OwnedText(const OwnedText&) = delete;
    OwnedText& operator=(const OwnedText&) = delete;
    ~OwnedText() { sk_string_free(ptr); }
    std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

// Errors detected while reading configuration or input files; everything
// else falls into the subcommand's own exit bucket.
bool is_parse_status(sk_status status) {
    switch (status) {
    case SK_ERR_MALFORMED_ARCHIVE:
    case SK_ERR_MALFORMED_JSON:
    case SK_ERR_GRAPH_INCONSISTENCY:
    case SK_ERR_DUPLICATE_OPCODE:
    case SK_ERR_MISSING_FIELD:
    case SK_ERR_EMPTY_CATALOG:
    case SK_ERR_EMPTY_CORPUS:
    case SK_ERR_IO:
    case SK_ERR_INVALID_ARGUMENT:
        return true;
    default:
        return false;
    }
}

int fail(sk_context* ctx, sk_status status, int domain_exit) {
    std::cerr << sk_status_name(status) << ": " << sk_last_error(ctx) << "\n";
    return is_parse_status(status) ? 2 : domain_exit;
}

// foo/bar.sb3 -> foo/bar<suffix>.sb3 (never overwrites the input).
std::string sibling_path(const std::string& input, const char* suffix) {
    std::filesystem::path path(input);
    return (path.parent_path() / (path.stem().string() + suffix + ".sb3")).string();
}

int run_score(const std::string& project_path, bool as_json) {
    Context ctx;
    ProjectHandle project;
    sk_status status = sk_project_open_file(ctx, project_path.c_str(), &project.ptr);
    if (status != SK_OK) return fail(ctx, status, 2);
    OwnedText report;
    status = sk_score(ctx, project.ptr, &report.ptr);
    if (status != SK_OK) return fail(ctx, status, 2);
    if (as_json) {
        std::cout << report.str() << "\n";
        return 0;
    }
    json doc = json::parse(report.str());
    static const char* dims[] = {"abstraction",   "parallelism",   "logic",
                                 "synchronization", "flow control", "interactivity",
                                 "data representation"};
    for (const char* dim : dims)
        std::printf("%-20s %d\n", dim, doc.at(dim).get<int>());
    std::printf("%-20s %d (%s)\n", "total", doc.at("total").get<int>(),
                doc.at("label").get<std::string>().c_str());
    return 0;
}

int run_metrics(const std::string& template_path, const std::string& final_path,
                const std::string& mode) {
    Context ctx;
    sk_status status = sk_context_set(ctx, "metrics-mode", mode.c_str());
    if (status != SK_OK) return fail(ctx, status, 3);
    ProjectHandle template_project;
    status = sk_project_open_file(ctx, template_path.c_str(), &template_project.ptr);
    if (status != SK_OK) return fail(ctx, status, 3);
    ProjectHandle final_project;
    status = sk_project_open_file(ctx, final_path.c_str(), &final_project.ptr);
    if (status != SK_OK) return fail(ctx, status, 3);
    OwnedText report;
    status = sk_metrics(ctx, template_project.ptr, final_project.ptr, &report.ptr);
    if (status != SK_OK) return fail(ctx, status, 3);
    std::cout << report.str() << "\n";
    return 0;
}

int run_match(const std::string& text, const std::string& catalog_path, double threshold) {
    Context ctx;
    sk_status status = sk_context_set(ctx, "threshold", std::to_string(threshold).c_str());
    if (status != SK_OK) return fail(ctx, status, 4);
    status = sk_context_load_catalog(ctx, catalog_path.c_str());
    if (status != SK_OK) return fail(ctx, status, 4);
    OwnedText report;
    status = sk_match(ctx, text.c_str(), &report.ptr);
    if (status != SK_OK) return fail(ctx, status, 4);
    std::cout << report.str() << "\n";
    return 0;
}

int run_generate(const std::string& blocks_path, const std::string& catalog_path,
                 const std::string& into, const std::string& sprite, const std::string& out_path,
                 double threshold) {
    Context ctx;
    sk_status status = sk_context_set(ctx, "threshold", std::to_string(threshold).c_str());
    if (status != SK_OK) return fail(ctx, status, 4);
    status = sk_context_load_catalog(ctx, catalog_path.c_str());
    if (status != SK_OK) return fail(ctx, status, 4);
    if (!sprite.empty()) {
        status = sk_context_set(ctx, "sprite", sprite.c_str());
        if (status != SK_OK) return fail(ctx, status, 4);
    }
    std::ifstream in(blocks_path, std::ios::binary);
    if (!in) {
        std::cerr << "IoError: cannot open " << blocks_path << "\n";
        return 2;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    ProjectHandle project;
    if (!into.empty()) {
        status = sk_project_open_file(ctx, into.c_str(), &project.ptr);
        if (status != SK_OK) return fail(ctx, status, 4);
    }
    OwnedText report;
    status = sk_generate(ctx, buffer.str().c_str(), project.ptr, &report.ptr);
    if (status != SK_OK) return fail(ctx, status, 4);
    if (!into.empty()) {
        std::string destination = out_path.empty() ? sibling_path(into, "-generated") : out_path;
        status = sk_project_save_file(ctx, project.ptr, destination.c_str());
        if (status != SK_OK) return fail(ctx, status, 4);
        std::cerr << "wrote: " << destination << "\n";
    }
    std::cout << report.str() << "\n";
    return 0;
}

int run_assist(const std::string& question, const std::string& catalog_path,
               const std::string& corpus_path, const std::string& fixture, const std::string& into,
               const std::string& sprite, const std::string& out_path, int shots, double threshold,
               bool corpus_order) {
    Context ctx;
    sk_status status = sk_context_set(ctx, "threshold", std::to_string(threshold).c_str());
    if (status != SK_OK) return fail(ctx, status, 4);
    status = sk_context_set(ctx, "shots", std::to_string(shots).c_str());
    if (status != SK_OK) return fail(ctx, status, 4);
    if (corpus_order) {
        status = sk_context_set(ctx, "ranked-shots", "0");
        if (status != SK_OK) return fail(ctx, status, 4);
    }
    status = sk_context_load_catalog(ctx, catalog_path.c_str());
    if (status != SK_OK) return fail(ctx, status, 4);
    status = sk_context_load_corpus(ctx, corpus_path.c_str());
    if (status != SK_OK) return fail(ctx, status, 4);
    if (!fixture.empty()) {
        status = sk_context_load_fixture(ctx, fixture.c_str());
        if (status != SK_OK) return fail(ctx, status, 4);
    }
    if (!sprite.empty()) {
        status = sk_context_set(ctx, "sprite", sprite.c_str());
        if (status != SK_OK) return fail(ctx, status, 4);
    }
    ProjectHandle project;
    if (!into.empty()) {
        status = sk_project_open_file(ctx, into.c_str(), &project.ptr);
        if (status != SK_OK) return fail(ctx, status, 4);
    }
    OwnedText report;
    status = sk_assist(ctx, question.c_str(), project.ptr, &report.ptr);
    if (status != SK_OK) return fail(ctx, status, 4);
    if (!into.empty()) {
        std::string destination = out_path.empty() ? sibling_path(into, "-assisted") : out_path;
        status = sk_project_save_file(ctx, project.ptr, destination.c_str());
        if (status != SK_OK) return fail(ctx, status, 4);
        std::cerr << "wrote: " << destination << "\n";
    }
    std::cout << report.str() << "\n";
    return 0;
}

// ---- service ----

int http_status_for(sk_status status) {
    switch (status) {
    case SK_OK:
        return 200;
    case SK_ERR_TRANSPORT_FAILURE:
        return 502;
    case SK_ERR_MALFORMED_ARCHIVE:
    case SK_ERR_MALFORMED_JSON:
    case SK_ERR_GRAPH_INCONSISTENCY:
    case SK_ERR_MISSING_FIELD:
    case SK_ERR_EMPTY_QUESTION:
    case SK_ERR_IO:
    case SK_ERR_INVALID_ARGUMENT:
        return 400;
    case SK_ERR_NO_MATCH:
    case SK_ERR_NO_BLOCK_ARRAY:
    case SK_ERR_EMPTY_BLOCK_ARRAY:
    case SK_ERR_ARITY_MISMATCH:
    case SK_ERR_DANGLING_END:
    case SK_ERR_UNKNOWN_TARGET:
    case SK_ERR_ID_COLLISION:
    case SK_ERR_VALIDATION_FAILURE:
    case SK_ERR_EMPTY_TEMPLATE:
    case SK_ERR_EMPTY_FINAL:
    case SK_ERR_OUT_OF_RANGE:
    case SK_ERR_PROMPT_TOO_LONG:
        return 422;
    default:
        return 500;
    }
}

void set_error(httplib::Response& res, sk_status status, const std::string& message) {
    json body = {{"error", {{"code", sk_status_name(status)}, {"message", message}}}};
    res.status = http_status_for(status);
    res.set_content(body.dump(), "application/json");
}

void set_error(httplib::Response& res, sk_context* ctx, sk_status status) {
    set_error(res, status, sk_last_error(ctx));
}

std::string timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    std::tm parts{};
    gmtime_r(&seconds, &parts);
    char text[32];
    std::strftime(text, sizeof(text), "%Y-%m-%dT%H:%M:%SZ", &parts);
    return text;
}

struct ServeConfig {
    std::string catalog;
    std::string corpus;
    std::string fixture; // empty = live transport from the environment
};

// Each request gets a fresh context, so handlers share nothing mutable.
bool prepare(Context& ctx, const ServeConfig& config, bool with_corpus, httplib::Response& res) {
    sk_status status = sk_context_load_catalog(ctx, config.catalog.c_str());
    if (status != SK_OK) {
        set_error(res, ctx, status);
        return false;
    }
    if (with_corpus) {
        status = sk_context_load_corpus(ctx, config.corpus.c_str());
        if (status != SK_OK) {
            set_error(res, ctx, status);
            return false;
        }
        if (!config.fixture.empty()) {
            status = sk_context_load_fixture(ctx, config.fixture.c_str());
            if (status != SK_OK) {
                set_error(res, ctx, status);
                return false;
            }
        }
    }
    return true;
}

int run_serve(const std::string& bind, const ServeConfig& config) {
    // Fail fast on unusable configuration before accepting traffic.
    {
        Context probe;
        sk_status status = sk_context_load_catalog(probe, config.catalog.c_str());
        if (status == SK_OK) status = sk_context_load_corpus(probe, config.corpus.c_str());
        if (status == SK_OK && !config.fixture.empty())
            status = sk_context_load_fixture(probe, config.fixture.c_str());
        if (status != SK_OK) return fail(probe, status, 2);
    }

    auto colon = bind.rfind(':');
    if (colon == std::string::npos) {
        std::cerr << "InvalidArgument: --bind expects host:port, got " << bind << "\n";
        return 2;
    }
    std::string host = bind.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
        std::cerr << "InvalidArgument: bad port in " << bind << "\n";
        return 2;
    }

    httplib::Server server;

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });

    server.Post("/score", [config](const httplib::Request& req, httplib::Response& res) {
        Context ctx;
        if (!prepare(ctx, config, false, res)) return;
        ProjectHandle project;
        sk_status status =
            sk_project_open(ctx, reinterpret_cast<const uint8_t*>(req.body.data()),
                            req.body.size(), &project.ptr);
        if (status != SK_OK) return set_error(res, ctx, status);
        OwnedText report;
        status = sk_score(ctx, project.ptr, &report.ptr);
        if (status != SK_OK) return set_error(res, ctx, status);
        res.set_content(report.str(), "application/json");
    });

    server.Post("/metrics", [config](const httplib::Request& req, httplib::Response& res) {
        Context ctx;
        if (!prepare(ctx, config, false, res)) return;
        if (!req.has_file("template"))
            return set_error(res, SK_ERR_MISSING_FIELD, "multipart part 'template' required");
        if (!req.has_file("final"))
            return set_error(res, SK_ERR_MISSING_FIELD, "multipart part 'final' required");
        if (req.has_file("mode")) {
            sk_status status =
                sk_context_set(ctx, "metrics-mode", req.get_file_value("mode").content.c_str());
            if (status != SK_OK) return set_error(res, ctx, status);
        }
        auto open_part = [&](const char* part, ProjectHandle& project, sk_status& status) {
            const auto& file = req.get_file_value(part);
            status = sk_project_open(ctx, reinterpret_cast<const uint8_t*>(file.content.data()),
                                     file.content.size(), &project.ptr);
            return status == SK_OK;
        };
        sk_status status = SK_OK;
        ProjectHandle template_project;
        if (!open_part("template", template_project, status)) return set_error(res, ctx, status);
        ProjectHandle final_project;
        if (!open_part("final", final_project, status)) return set_error(res, ctx, status);
        OwnedText report;
        status = sk_metrics(ctx, template_project.ptr, final_project.ptr, &report.ptr);
        if (status != SK_OK) return set_error(res, ctx, status);
        res.set_content(report.str(), "application/json");
    });

    server.Post("/assist", [config](const httplib::Request& req, httplib::Response& res) {
        Context ctx;
        if (!prepare(ctx, config, true, res)) return;
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object())
            return set_error(res, SK_ERR_MALFORMED_JSON, "body must be a JSON object");
        if (!body.contains("question") || !body["question"].is_string())
            return set_error(res, SK_ERR_MISSING_FIELD, "string field 'question' required");
        if (body.contains("sprite") && body["sprite"].is_string()) {
            sk_status status =
                sk_context_set(ctx, "sprite", body["sprite"].get<std::string>().c_str());
            if (status != SK_OK) return set_error(res, ctx, status);
        }
        OwnedText report;
        sk_status status =
            sk_assist(ctx, body["question"].get<std::string>().c_str(), nullptr, &report.ptr);
        if (status != SK_OK) return set_error(res, ctx, status);
        res.set_content(report.str(), "application/json");
    });

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string message = "internal error";
            try {
                if (ep) std::rethrow_exception(ep);
            } catch (const std::exception& err) {
                message = err.what();
            } catch (...) {
            }
            json body = {{"error", {{"code", "Unknown"}, {"message", message}}}};
            res.status = 500;
            res.set_content(body.dump(), "application/json");
        });

    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        json line = {{"time", timestamp_utc()},   {"event", "request"},
                     {"method", req.method},      {"path", req.path},
                     {"status", res.status},      {"remote", req.remote_addr},
                     {"bytes_in", req.body.size()}, {"bytes_out", res.body.size()}};
        std::cerr << line.dump() << "\n";
    });

    json banner = {{"time", timestamp_utc()}, {"event", "listening"}, {"bind", bind}};
    std::cerr << banner.dump() << "\n";
    if (!server.listen(host, port)) {
        std::cerr << "IoError: cannot bind " << bind << "\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scratch 3.0 project analysis and code assistance"};
    app.require_subcommand(1);
    int rc = 0;

    // score <project> [--json]
    auto* score = app.add_subcommand("score", "Skill-rubric report for a project");
    std::string score_project;
    bool score_json = false;
    score->add_option("project", score_project, "Project file (.sb3 or project.json)")->required();
    score->add_flag("--json", score_json, "Print the JSON report instead of a table");
    score->callback([&] { rc = run_score(score_project, score_json); });

    // metrics --template a --final b [--mode m]
    auto* metrics = app.add_subcommand("metrics", "Block adoption between template and final");
    std::string metrics_template, metrics_final, metrics_mode = "opcode";
    metrics->add_option("--template", metrics_template, "Template project")->required();
    metrics->add_option("--final", metrics_final, "Finished project")->required();
    metrics->add_option("--mode", metrics_mode, "Block identity: opcode or strict")
        ->check(CLI::IsMember({"opcode", "strict"}));
    metrics->callback([&] { rc = run_metrics(metrics_template, metrics_final, metrics_mode); });

    // match <text>
    auto* match = app.add_subcommand("match", "Resolve a block description to an opcode");
    std::string match_text, match_catalog = default_catalog();
    double match_threshold = 0.25;
    match->add_option("text", match_text, "Block description")->required();
    match->add_option("--catalog", match_catalog, "Block catalog TSV");
    match->add_option("--threshold", match_threshold, "Normalized distance cutoff");
    match->callback([&] { rc = run_match(match_text, match_catalog, match_threshold); });

    // generate --blocks file [--into sb3] [--sprite name] [--out path]
    auto* generate = app.add_subcommand("generate", "Build a script from block descriptions");
    std::string gen_blocks, gen_into, gen_sprite, gen_out, gen_catalog = default_catalog();
    double gen_threshold = 0.25;
    generate->add_option("--blocks", gen_blocks, "File holding a JSON array of block descriptions")
        ->required();
    generate->add_option("--into", gen_into, "Project to inject the script into");
    generate->add_option("--sprite", gen_sprite, "Target sprite (default: first sprite)");
    generate->add_option("--out", gen_out, "Output path (default: <input>-generated.sb3)");
    generate->add_option("--catalog", gen_catalog, "Block catalog TSV");
    generate->add_option("--threshold", gen_threshold, "Normalized distance cutoff");
    generate->callback([&] {
        rc = run_generate(gen_blocks, gen_catalog, gen_into, gen_sprite, gen_out, gen_threshold);
    });

    // assist --question q [--fixture f] [--into sb3] [--sprite name]
    auto* assist = app.add_subcommand("assist", "Answer a how-to question with a code patch");
    std::string as_question, as_fixture, as_into, as_sprite, as_out;
    std::string as_catalog = default_catalog(), as_corpus = default_corpus();
    int as_shots = 10;
    double as_threshold = 0.25;
    bool as_corpus_order = false;
    assist->add_option("--question", as_question, "How-to question")->required();
    assist->add_option("--fixture", as_fixture, "Recorded answers (offline transport)");
    assist->add_option("--into", as_into, "Project to inject the patch into");
    assist->add_option("--sprite", as_sprite, "Target sprite (default: first sprite)");
    assist->add_option("--out", as_out, "Output path (default: <input>-assisted.sb3)");
    assist->add_option("--catalog", as_catalog, "Block catalog TSV");
    assist->add_option("--corpus", as_corpus, "Few-shot example corpus");
    assist->add_option("--shots", as_shots, "Few-shot count");
    assist->add_option("--threshold", as_threshold, "Normalized distance cutoff");
    assist->add_flag("--corpus-order", as_corpus_order,
                     "Take shots in corpus order instead of ranking by similarity");
    assist->callback([&] {
        rc = run_assist(as_question, as_catalog, as_corpus, as_fixture, as_into, as_sprite,
                        as_out, as_shots, as_threshold, as_corpus_order);
    });

    // serve [--bind host:port]
    auto* serve = app.add_subcommand("serve", "Stateless HTTP analysis service");
    std::string sv_bind = "127.0.0.1:8080";
    ServeConfig sv_config{default_catalog(), default_corpus(), ""};
    serve->add_option("--bind", sv_bind, "host:port to listen on");
    serve->add_option("--catalog", sv_config.catalog, "Block catalog TSV");
    serve->add_option("--corpus", sv_config.corpus, "Few-shot example corpus");
    serve->add_option("--fixture", sv_config.fixture, "Recorded answers (offline transport)");
    serve->callback([&] { rc = run_serve(sv_bind, sv_config); });

    CLI11_PARSE(app, argc, argv);
    return rc;
}
