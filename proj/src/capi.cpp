#include "scratchkit.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "assistant.hpp"
#include "catalog.hpp"
#include "codegen.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "rubric.hpp"
#include "sb3.hpp"

using nlohmann::json;
using namespace scratchkit;

struct sk_context {
    catalog::Catalog catalog;
    std::optional<assistant::ExampleCorpus> corpus;
    std::optional<assistant::FixtureTransport> fixture;
    assistant::TransportConfig transport = assistant::transport_config_from_env();
    double threshold = 0.25;
    int shots = 10;
    double token_budget = 8196;
    bool ranked_shots = true;
    metrics::Mode mode = metrics::Mode::Opcode;
    rubric::LabelThresholds thresholds;
    std::string sprite;
    std::string last_error;
};

struct sk_project {
    sb3::ProjectModel model;
};

namespace {

sk_status status_from(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedArchive: return SK_ERR_MALFORMED_ARCHIVE;
    case ErrorCode::MalformedJson: return SK_ERR_MALFORMED_JSON;
    case ErrorCode::GraphInconsistency: return SK_ERR_GRAPH_INCONSISTENCY;
    case ErrorCode::ValidationFailure: return SK_ERR_VALIDATION_FAILURE;
    case ErrorCode::DuplicateOpcode: return SK_ERR_DUPLICATE_OPCODE;
    case ErrorCode::MissingField: return SK_ERR_MISSING_FIELD;
    case ErrorCode::NoMatch: return SK_ERR_NO_MATCH;
    case ErrorCode::EmptyCatalog: return SK_ERR_EMPTY_CATALOG;
    case ErrorCode::EmptyTemplate: return SK_ERR_EMPTY_TEMPLATE;
    case ErrorCode::EmptyFinal: return SK_ERR_EMPTY_FINAL;
    case ErrorCode::OutOfRange: return SK_ERR_OUT_OF_RANGE;
    case ErrorCode::ArityMismatch: return SK_ERR_ARITY_MISMATCH;
    case ErrorCode::DanglingEnd: return SK_ERR_DANGLING_END;
    case ErrorCode::UnknownTarget: return SK_ERR_UNKNOWN_TARGET;
    case ErrorCode::IdCollision: return SK_ERR_ID_COLLISION;
    case ErrorCode::EmptyCorpus: return SK_ERR_EMPTY_CORPUS;
    case ErrorCode::EmptyQuestion: return SK_ERR_EMPTY_QUESTION;
    case ErrorCode::NoBlockArray: return SK_ERR_NO_BLOCK_ARRAY;
    case ErrorCode::EmptyBlockArray: return SK_ERR_EMPTY_BLOCK_ARRAY;
    case ErrorCode::TransportFailure: return SK_ERR_TRANSPORT_FAILURE;
    case ErrorCode::PromptTooLong: return SK_ERR_PROMPT_TOO_LONG;
    case ErrorCode::IoError: return SK_ERR_IO;
    }
    return SK_ERR_UNKNOWN;
}

char* copy_string(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out != nullptr) std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

template <typename Fn>
sk_status guarded(sk_context* ctx, Fn&& fn) {
    if (ctx == nullptr) return SK_ERR_INVALID_ARGUMENT;
    ctx->last_error.clear();
    try {
        return fn();
    } catch (const Error& err) {
        ctx->last_error = err.what();
        return status_from(err.code());
    } catch (const std::exception& err) {
        ctx->last_error = err.what();
        return SK_ERR_UNKNOWN;
    }
}

sk_status bad_argument(sk_context* ctx, const char* what) {
    ctx->last_error = std::string(what) + " must not be null";
    return SK_ERR_INVALID_ARGUMENT;
}

double parse_real(const char* name, const std::string& text) {
    try {
        std::size_t used = 0;
        double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        raise(ErrorCode::OutOfRange, std::string(name) + ": not a number: " + text);
    }
}

int parse_int(const char* name, const std::string& text) {
    try {
        std::size_t used = 0;
        int value = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        raise(ErrorCode::OutOfRange, std::string(name) + ": not an integer: " + text);
    }
}

bool parse_flag(const char* name, const std::string& text) {
    if (text == "1" || text == "true") return true;
    if (text == "0" || text == "false") return false;
    raise(ErrorCode::OutOfRange, std::string(name) + ": expected 0/1, got " + text);
}

sb3::Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    sb3::Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) raise(ErrorCode::IoError, "cannot read " + path);
    return bytes;
}

void collect_opcodes(const codegen::PlannedBlock& node, std::vector<std::string>& out) {
    if (node.entry != nullptr) out.push_back(node.entry->opcode);
    for (const auto& condition : node.conditions) collect_opcodes(condition, out);
    for (const auto& child : node.children) collect_opcodes(child, out);
    for (const auto& child : node.else_children) collect_opcodes(child, out);
}

std::unique_ptr<assistant::CompletionTransport> make_transport(sk_context* ctx) {
    if (ctx->fixture) return std::make_unique<assistant::FixtureTransport>(*ctx->fixture);
    return std::make_unique<assistant::HttpTransport>(ctx->transport);
}

} // namespace

extern "C" {

const char* sk_status_name(sk_status status) {
    switch (status) {
    case SK_OK: return "Ok";
    case SK_ERR_MALFORMED_ARCHIVE: return "MalformedArchive";
    case SK_ERR_MALFORMED_JSON: return "MalformedJson";
    case SK_ERR_GRAPH_INCONSISTENCY: return "GraphInconsistency";
    case SK_ERR_VALIDATION_FAILURE: return "ValidationFailure";
    case SK_ERR_DUPLICATE_OPCODE: return "DuplicateOpcode";
    case SK_ERR_MISSING_FIELD: return "MissingField";
    case SK_ERR_NO_MATCH: return "NoMatch";
    case SK_ERR_EMPTY_CATALOG: return "EmptyCatalog";
    case SK_ERR_EMPTY_TEMPLATE: return "EmptyTemplate";
    case SK_ERR_EMPTY_FINAL: return "EmptyFinal";
    case SK_ERR_OUT_OF_RANGE: return "OutOfRange";
    case SK_ERR_ARITY_MISMATCH: return "ArityMismatch";
    case SK_ERR_DANGLING_END: return "DanglingEnd";
    case SK_ERR_UNKNOWN_TARGET: return "UnknownTarget";
    case SK_ERR_ID_COLLISION: return "IdCollision";
    case SK_ERR_EMPTY_CORPUS: return "EmptyCorpus";
    case SK_ERR_EMPTY_QUESTION: return "EmptyQuestion";
    case SK_ERR_NO_BLOCK_ARRAY: return "NoBlockArray";
    case SK_ERR_EMPTY_BLOCK_ARRAY: return "EmptyBlockArray";
    case SK_ERR_TRANSPORT_FAILURE: return "TransportFailure";
    case SK_ERR_PROMPT_TOO_LONG: return "PromptTooLong";
    case SK_ERR_IO: return "IoError";
    case SK_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case SK_ERR_UNKNOWN: return "Unknown";
    }
    return "Unknown";
}

sk_context* sk_context_new(void) {
    try {
        return new sk_context();
    } catch (...) {
        return nullptr;
    }
}

void sk_context_free(sk_context* ctx) { delete ctx; }

const char* sk_last_error(const sk_context* ctx) {
    return ctx == nullptr ? "" : ctx->last_error.c_str();
}

sk_status sk_context_load_catalog(sk_context* ctx, const char* path) {
    return guarded(ctx, [&]() -> sk_status {
        if (path == nullptr) return bad_argument(ctx, "path");
        ctx->catalog = catalog::Catalog::load_file(path);
        return SK_OK;
    });
}

sk_status sk_context_load_corpus(sk_context* ctx, const char* path) {
    return guarded(ctx, [&]() -> sk_status {
        if (path == nullptr) return bad_argument(ctx, "path");
        ctx->corpus =
            assistant::ExampleCorpus::load_file(path, ctx->catalog, ctx->threshold);
        return SK_OK;
    });
}

sk_status sk_context_load_fixture(sk_context* ctx, const char* path) {
    return guarded(ctx, [&]() -> sk_status {
        if (path == nullptr) return bad_argument(ctx, "path");
        ctx->fixture = assistant::FixtureTransport::load_file(path);
        return SK_OK;
    });
}

sk_status sk_context_set(sk_context* ctx, const char* name, const char* value) {
    return guarded(ctx, [&]() -> sk_status {
        if (name == nullptr) return bad_argument(ctx, "name");
        if (value == nullptr) return bad_argument(ctx, "value");
        const std::string key = name;
        const std::string text = value;
        if (key == "threshold") {
            double v = parse_real(name, text);
            if (!(v > 0.0 && v <= 1.0))
                raise(ErrorCode::OutOfRange, "threshold must be in (0,1]: " + text);
            ctx->threshold = v;
        } else if (key == "shots") {
            int v = parse_int(name, text);
            if (v < 1) raise(ErrorCode::OutOfRange, "shots must be >= 1: " + text);
            ctx->shots = v;
        } else if (key == "token-budget") {
            double v = parse_real(name, text);
            if (v <= 0) raise(ErrorCode::OutOfRange, "token-budget must be positive: " + text);
            ctx->token_budget = v;
        } else if (key == "ranked-shots") {
            ctx->ranked_shots = parse_flag(name, text);
        } else if (key == "metrics-mode") {
            ctx->mode = metrics::mode_from_name(text);
        } else if (key == "basic-max") {
            int v = parse_int(name, text);
            if (v < 0) raise(ErrorCode::OutOfRange, "basic-max must be >= 0: " + text);
            ctx->thresholds.basic_max = v;
        } else if (key == "developing-max") {
            int v = parse_int(name, text);
            if (v < 0) raise(ErrorCode::OutOfRange, "developing-max must be >= 0: " + text);
            ctx->thresholds.developing_max = v;
        } else if (key == "sprite") {
            ctx->sprite = text;
        } else if (key == "endpoint") {
            ctx->transport.endpoint = text;
        } else if (key == "api-key") {
            ctx->transport.credential = text;
        } else if (key == "model") {
            ctx->transport.model = text;
        } else if (key == "timeout") {
            int v = parse_int(name, text);
            if (v < 1) raise(ErrorCode::OutOfRange, "timeout must be >= 1: " + text);
            ctx->transport.timeout_seconds = v;
        } else {
            ctx->last_error = "unknown option: " + key;
            return SK_ERR_INVALID_ARGUMENT;
        }
        return SK_OK;
    });
}

sk_status sk_project_open(sk_context* ctx, const uint8_t* bytes, size_t len, sk_project** out) {
    return guarded(ctx, [&]() -> sk_status {
        if (bytes == nullptr && len != 0) return bad_argument(ctx, "bytes");
        if (out == nullptr) return bad_argument(ctx, "out");
        sb3::Bytes data(bytes, bytes + len);
        auto project = std::make_unique<sk_project>();
        project->model = sb3::load_project_auto(data);
        *out = project.release();
        return SK_OK;
    });
}

sk_status sk_project_open_file(sk_context* ctx, const char* path, sk_project** out) {
    return guarded(ctx, [&]() -> sk_status {
        if (path == nullptr) return bad_argument(ctx, "path");
        if (out == nullptr) return bad_argument(ctx, "out");
        auto data = read_file(path);
        auto project = std::make_unique<sk_project>();
        project->model = sb3::load_project_auto(data);
        *out = project.release();
        return SK_OK;
    });
}

sk_status sk_project_save_file(sk_context* ctx, const sk_project* project, const char* path) {
    return guarded(ctx, [&]() -> sk_status {
        if (project == nullptr) return bad_argument(ctx, "project");
        if (path == nullptr) return bad_argument(ctx, "path");
        auto bytes = sb3::save_project(project->model, sb3::Kind::Archive);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::IoError, "cannot open " + std::string(path));
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) raise(ErrorCode::IoError, "cannot write " + std::string(path));
        return SK_OK;
    });
}

void sk_project_free(sk_project* project) { delete project; }

sk_status sk_project_json(sk_context* ctx, const sk_project* project, char** out_json) {
    return guarded(ctx, [&]() -> sk_status {
        if (project == nullptr) return bad_argument(ctx, "project");
        if (out_json == nullptr) return bad_argument(ctx, "out_json");
        *out_json = copy_string(sb3::project_to_json(project->model).dump());
        return SK_OK;
    });
}

sk_status sk_validate(sk_context* ctx, const sk_project* project, char** out_json) {
    return guarded(ctx, [&]() -> sk_status {
        if (project == nullptr) return bad_argument(ctx, "project");
        if (out_json == nullptr) return bad_argument(ctx, "out_json");
        json report = json::array();
        for (const auto& v : sb3::validate(project->model)) {
            report.push_back({{"rule", v.rule},
                              {"target", v.target},
                              {"block", v.block},
                              {"detail", v.detail}});
        }
        *out_json = copy_string(report.dump());
        return SK_OK;
    });
}

sk_status sk_score(sk_context* ctx, const sk_project* project, char** out_json) {
    return guarded(ctx, [&]() -> sk_status {
        if (project == nullptr) return bad_argument(ctx, "project");
        if (out_json == nullptr) return bad_argument(ctx, "out_json");
        auto score = rubric::score_project(project->model);
        *out_json = copy_string(rubric::report_json(score, ctx->thresholds).dump());
        return SK_OK;
    });
}

sk_status sk_metrics(sk_context* ctx, const sk_project* template_project,
                     const sk_project* final_project, char** out_json) {
    return guarded(ctx, [&]() -> sk_status {
        if (template_project == nullptr) return bad_argument(ctx, "template_project");
        if (final_project == nullptr) return bad_argument(ctx, "final_project");
        if (out_json == nullptr) return bad_argument(ctx, "out_json");
        auto x = metrics::snippet_multiset(template_project->model, ctx->mode);
        auto y = metrics::snippet_multiset(final_project->model, ctx->mode);
        auto report = metrics::compare(x, y, ctx->mode);
        *out_json = copy_string(metrics::report_json(report).dump());
        return SK_OK;
    });
}

sk_status sk_visual_elements(sk_context* ctx, const sk_project* project, size_t* out_count) {
    return guarded(ctx, [&]() -> sk_status {
        if (project == nullptr) return bad_argument(ctx, "project");
        if (out_count == nullptr) return bad_argument(ctx, "out_count");
        *out_count = metrics::visual_element_count(project->model);
        return SK_OK;
    });
}

sk_status sk_match(sk_context* ctx, const char* text, char** out_json) {
    return guarded(ctx, [&]() -> sk_status {
        if (text == nullptr) return bad_argument(ctx, "text");
        if (out_json == nullptr) return bad_argument(ctx, "out_json");
        auto result = catalog::match_block(text, ctx->catalog, ctx->threshold);
        json report = {{"opcode", result.opcode},
                       {"distance", result.distance},
                       {"normalized_distance", result.normalized_distance},
                       {"ambiguous", result.ambiguous}};
        *out_json = copy_string(report.dump());
        return SK_OK;
    });
}

sk_status sk_generate(sk_context* ctx, const char* blocks_json, sk_project* project,
                      char** out_json) {
    return guarded(ctx, [&]() -> sk_status {
        if (blocks_json == nullptr) return bad_argument(ctx, "blocks_json");
        if (out_json == nullptr) return bad_argument(ctx, "out_json");
        json doc = json::parse(blocks_json, nullptr, false);
        if (doc.is_discarded() || !doc.is_array())
            raise(ErrorCode::MalformedJson, "blocks must be a JSON array of strings");
        std::vector<std::string> texts;
        for (const auto& item : doc) {
            if (!item.is_string())
                raise(ErrorCode::MalformedJson, "blocks must be a JSON array of strings");
            texts.push_back(item.get<std::string>());
        }
        auto plan = codegen::parse_block_list(texts, ctx->catalog, ctx->threshold);
        auto patch = codegen::emit_script(plan);
        patch.target_name = ctx->sprite;
        std::vector<std::string> opcodes;
        for (const auto& node : plan.chain) collect_opcodes(node, opcodes);
        if (project != nullptr) project->model = codegen::inject(project->model, patch);
        json report = {{"blocks", texts}, {"opcodes", opcodes}, {"patch", patch.to_json()}};
        *out_json = copy_string(report.dump());
        return SK_OK;
    });
}

sk_status sk_assist(sk_context* ctx, const char* question, sk_project* project, char** out_json) {
    return guarded(ctx, [&]() -> sk_status {
        if (question == nullptr) return bad_argument(ctx, "question");
        if (out_json == nullptr) return bad_argument(ctx, "out_json");
        if (!ctx->corpus)
            raise(ErrorCode::EmptyCorpus, "no example corpus loaded");
        assistant::AssistOptions options;
        options.k = ctx->shots;
        options.threshold = ctx->threshold;
        options.token_budget = ctx->token_budget;
        options.ranked_shots = ctx->ranked_shots;
        options.sprite = ctx->sprite;
        auto transport = make_transport(ctx);
        auto result = assistant::assist(question, *transport, *ctx->corpus, ctx->catalog,
                                        options, project ? &project->model : nullptr);
        if (project != nullptr && result.injected)
            project->model = std::move(*result.injected);
        *out_json = copy_string(assistant::result_json(result).dump());
        return SK_OK;
    });
}

void sk_string_free(char* text) { std::free(text); }

} // extern "C"
