#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "codegen.hpp"
#include "sb3.hpp"

namespace scratchkit::assistant {

using json = nlohmann::json;

// Instruction sent ahead of the examples; lists the eight palette categories.
extern const char* const kCotInstruction;

// Appended to the prompt for the single retry after an unparsable answer.
extern const char* const kCorrectiveInstruction;

struct Example {
    std::string question;
    std::string rationale; // everything before the block array, "First, ... Second, ..."
    std::vector<std::string> blocks;
    std::string source; // provenance tag, e.g. "starter" or "scratch-cards"
};

class ExampleCorpus {
  public:
    // doc: JSON list of {question, rationale, blocks, source}. Every example's
    // blocks must compile against the catalog at the given threshold.
    static ExampleCorpus parse(const json& doc, const catalog::Catalog& catalog,
                               double threshold = 0.25);
    static ExampleCorpus load_file(const std::string& path, const catalog::Catalog& catalog,
                                   double threshold = 0.25);

    const std::vector<Example>& examples() const { return examples_; }
    bool empty() const { return examples_.empty(); }
    std::size_t size() const { return examples_.size(); }

  private:
    std::vector<Example> examples_;
};

struct PromptBundle {
    std::string cot_instruction;
    std::vector<Example> shots;
    std::string question;
    int k = 0;
};

// Shots ranked by word-set Jaccard similarity to the question (descending,
// ties by corpus order); `ranked` false keeps plain corpus order.
std::vector<Example> select_examples(const std::string& question, const ExampleCorpus& corpus,
                                     int k, bool ranked = true);

PromptBundle build_prompt(const std::string& question, const ExampleCorpus& corpus, int k,
                          bool ranked = true);

std::string render_blocks(const std::vector<std::string>& blocks);
std::string render_prompt(const PromptBundle& bundle);

// Crude context-size proxy: whitespace-separated words x 1.4.
double token_estimate(const std::string& text);

struct AssistantAnswer {
    std::string rationale;
    std::vector<std::string> blocks;
    std::string raw;
};

// Pulls the first bracketed array of double-quoted strings out of a model
// answer, tolerating unescaped quotes inside elements; the rationale is the
// text from "First," up to the array.
AssistantAnswer parse_answer(const std::string& raw);

// Category names found in the rationale (word-boundary, case-sensitive),
// reported in palette order.
std::vector<std::string> extract_categories(const std::string& rationale);

class CompletionTransport {
  public:
    virtual ~CompletionTransport() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

// Offline transport: answers from a recorded {question, answer} list, matched
// against the prompt's final "Question:" line.
class FixtureTransport final : public CompletionTransport {
  public:
    static FixtureTransport parse(const json& doc);
    static FixtureTransport load_file(const std::string& path);

    std::string complete(const std::string& prompt) override;

  private:
    std::vector<std::pair<std::string, std::string>> pairs_;
};

struct TransportConfig {
    std::string endpoint;   // chat-completion style HTTP endpoint
    std::string credential; // bearer token
    std::string model;
    int timeout_seconds = 30;
};

// SCRATCHKIT_ENDPOINT / SCRATCHKIT_API_KEY / SCRATCHKIT_MODEL / SCRATCHKIT_TIMEOUT
TransportConfig transport_config_from_env();

class HttpTransport final : public CompletionTransport {
  public:
    explicit HttpTransport(TransportConfig config) : config_(std::move(config)) {}

    std::string complete(const std::string& prompt) override;

  private:
    TransportConfig config_;
};

struct AssistOptions {
    int k = 10;
    double threshold = 0.25;
    double token_budget = 8196;
    bool ranked_shots = true;
    std::string sprite; // patch target, "" = first sprite
};

struct AssistResult {
    AssistantAnswer answer;
    std::vector<std::string> categories;
    std::vector<std::string> opcodes; // resolved plan, depth-first
    codegen::TemplatePatch patch;
    std::optional<sb3::ProjectModel> injected;
};

// Full pipeline: prompt -> transport -> parse -> plan -> patch (-> inject
// when a project is supplied). Retries the transport once if the answer has
// no parsable block array.
AssistResult assist(const std::string& question, CompletionTransport& transport,
                    const ExampleCorpus& corpus, const catalog::Catalog& catalog,
                    const AssistOptions& options = {}, const sb3::ProjectModel* project = nullptr);

// {rationale, blocks, categories, opcodes, patch}
json result_json(const AssistResult& result);

} // namespace scratchkit::assistant
