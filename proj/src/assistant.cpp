#include "assistant.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>

#include "error.hpp"

namespace scratchkit::assistant {

const char* const kCotInstruction =
    "Solve a question-answering task with interleaving Thought. First, please select the answer "
    "from the Scratch 3.0 categories below Motion, Looks, Sound, Events, Control, Sensing, "
    "Operators, and Variables. Second, please provide your answer based on the Scratch Wiki "
    "Blocks.";

const char* const kCorrectiveInstruction =
    "Your previous answer could not be parsed. Answer again, ending with a single bracketed "
    "list of double-quoted Scratch block texts.";

namespace {

constexpr const char* kQuestionPrefix = "Question: ";

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::set<std::string> word_set(const std::string& text) {
    std::set<std::string> words;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            words.insert(current);
            current.clear();
        }
    }
    if (!current.empty()) words.insert(current);
    return words;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& w : a) shared += b.count(w);
    return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

// Array of double-quoted strings starting at raw[open] == '['. A closing
// quote is only terminal when the next non-space char is ',' or ']', which
// lets unescaped quotes live inside an element.
std::optional<std::pair<std::vector<std::string>, std::size_t>> try_array(const std::string& raw,
                                                                          std::size_t open) {
    std::vector<std::string> elements;
    std::size_t i = open + 1;
    auto skip_ws = [&] {
        while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    };
    while (true) {
        skip_ws();
        if (i >= raw.size()) return std::nullopt;
        if (raw[i] == ']') return std::make_pair(std::move(elements), i);
        if (raw[i] != '"') return std::nullopt;
        std::string element;
        ++i;
        while (true) {
            if (i >= raw.size()) return std::nullopt;
            char c = raw[i];
            if (c == '\\' && i + 1 < raw.size() && (raw[i + 1] == '"' || raw[i + 1] == '\\')) {
                element.push_back(raw[i + 1]);
                i += 2;
                continue;
            }
            if (c == '"') {
                std::size_t after = i + 1;
                while (after < raw.size() && std::isspace(static_cast<unsigned char>(raw[after])))
                    ++after;
                if (after < raw.size() && (raw[after] == ',' || raw[after] == ']')) {
                    elements.push_back(std::move(element));
                    i = after;
                    break;
                }
                element.push_back('"'); // interior quote, keep going
                ++i;
                continue;
            }
            element.push_back(c);
            ++i;
        }
        if (raw[i] == ']') return std::make_pair(std::move(elements), i);
        ++i; // past the comma
    }
}

void collect_opcodes(const std::vector<codegen::PlannedBlock>& nodes,
                     std::vector<std::string>& out) {
    for (const auto& node : nodes) {
        if (!node.entry) continue;
        out.push_back(node.entry->opcode);
        collect_opcodes(node.conditions, out);
        collect_opcodes(node.children, out);
        collect_opcodes(node.else_children, out);
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

ExampleCorpus ExampleCorpus::parse(const json& doc, const catalog::Catalog& catalog,
                                   double threshold) {
    if (!doc.is_array()) raise(ErrorCode::MalformedJson, "corpus must be a JSON list");
    ExampleCorpus corpus;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& item = doc[i];
        std::string where = "corpus example " + std::to_string(i + 1);
        if (!item.is_object() || !item.contains("question") || !item.contains("rationale") ||
            !item.contains("blocks") || !item["blocks"].is_array())
            raise(ErrorCode::MalformedJson, where + " needs question, rationale and blocks");
        Example example;
        example.question = item["question"].get<std::string>();
        example.rationale = item["rationale"].get<std::string>();
        for (const auto& b : item["blocks"]) example.blocks.push_back(b.get<std::string>());
        if (item.contains("source")) example.source = item["source"].get<std::string>();
        if (example.question.empty() || example.blocks.empty())
            raise(ErrorCode::MalformedJson, where + " is missing its question or blocks");
        try {
            codegen::parse_block_list(example.blocks, catalog, threshold);
        } catch (const Error& e) {
            raise(e.code(), where + ": " + e.what());
        }
        corpus.examples_.push_back(std::move(example));
    }
    if (corpus.examples_.empty()) raise(ErrorCode::EmptyCorpus, "corpus has no examples");
    return corpus;
}

ExampleCorpus ExampleCorpus::load_file(const std::string& path, const catalog::Catalog& catalog,
                                       double threshold) {
    json doc;
    try {
        doc = json::parse(slurp(path));
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedJson, path + ": " + e.what());
    }
    return parse(doc, catalog, threshold);
}

std::vector<Example> select_examples(const std::string& question, const ExampleCorpus& corpus,
                                     int k, bool ranked) {
    if (corpus.empty()) raise(ErrorCode::EmptyCorpus, "cannot select shots from an empty corpus");
    if (k < 1 || static_cast<std::size_t>(k) > corpus.size())
        raise(ErrorCode::OutOfRange, "k = " + std::to_string(k) + " outside 1.." +
                                         std::to_string(corpus.size()));

    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (ranked) {
        auto target = word_set(question);
        std::vector<double> score(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i)
            score[i] = jaccard(target, word_set(corpus.examples()[i].question));
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    }
    std::vector<Example> shots;
    for (int i = 0; i < k; ++i) shots.push_back(corpus.examples()[order[static_cast<std::size_t>(i)]]);
    return shots;
}

PromptBundle build_prompt(const std::string& question, const ExampleCorpus& corpus, int k,
                          bool ranked) {
    if (trim(question).empty()) raise(ErrorCode::EmptyQuestion, "question must not be empty");
    PromptBundle bundle;
    bundle.cot_instruction = kCotInstruction;
    bundle.shots = select_examples(question, corpus, k, ranked);
    bundle.question = trim(question);
    bundle.k = k;
    return bundle;
}

std::string render_blocks(const std::vector<std::string>& blocks) {
    std::string out = "[";
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += ", ";
        out += '"' + blocks[i] + '"';
    }
    out += ']';
    return out;
}

std::string render_prompt(const PromptBundle& bundle) {
    std::string out = bundle.cot_instruction;
    out += "\nHere are some examples.";
    for (const auto& shot : bundle.shots) {
        out += "\n";
        out += kQuestionPrefix + shot.question;
        out += "\nAnswer: " + shot.rationale + " " + render_blocks(shot.blocks);
    }
    out += "\n";
    out += kQuestionPrefix + bundle.question;
    return out;
}

double token_estimate(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    std::size_t words = 0;
    while (in >> word) ++words;
    return static_cast<double>(words) * 1.4;
}

AssistantAnswer parse_answer(const std::string& raw) {
    for (std::size_t pos = raw.find('['); pos != std::string::npos; pos = raw.find('[', pos + 1)) {
        auto parsed = try_array(raw, pos);
        if (!parsed) continue;
        if (parsed->first.empty())
            raise(ErrorCode::EmptyBlockArray, "the answer's block array is empty");
        AssistantAnswer answer;
        answer.raw = raw;
        answer.blocks = std::move(parsed->first);
        std::size_t start = raw.find("First,");
        if (start == std::string::npos || start > pos) start = 0;
        answer.rationale = trim(raw.substr(start, pos - start));
        return answer;
    }
    raise(ErrorCode::NoBlockArray, "no block array found in the answer");
}

std::vector<std::string> extract_categories(const std::string& rationale) {
    static const char* kNames[] = {"Motion",  "Looks",   "Sound",     "Events",
                                   "Control", "Sensing", "Operators", "Variables"};
    std::vector<std::string> found;
    for (const char* name : kNames) {
        std::string needle = name;
        for (std::size_t pos = rationale.find(needle); pos != std::string::npos;
             pos = rationale.find(needle, pos + 1)) {
            bool left_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(rationale[pos - 1]));
            std::size_t end = pos + needle.size();
            bool right_ok =
                end >= rationale.size() || !std::isalpha(static_cast<unsigned char>(rationale[end]));
            if (left_ok && right_ok) {
                found.push_back(needle);
                break;
            }
        }
    }
    return found;
}

FixtureTransport FixtureTransport::parse(const json& doc) {
    if (!doc.is_array()) raise(ErrorCode::MalformedJson, "fixture must be a JSON list");
    FixtureTransport transport;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("question") || !item.contains("answer"))
            raise(ErrorCode::MalformedJson, "fixture entries need question and answer");
        transport.pairs_.emplace_back(item["question"].get<std::string>(),
                                      item["answer"].get<std::string>());
    }
    return transport;
}

FixtureTransport FixtureTransport::load_file(const std::string& path) {
    try {
        return parse(json::parse(slurp(path)));
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedJson, path + ": " + e.what());
    }
}

std::string FixtureTransport::complete(const std::string& prompt) {
    std::size_t last = prompt.rfind(kQuestionPrefix);
    std::string tail =
        last == std::string::npos ? prompt : prompt.substr(last + std::strlen(kQuestionPrefix));
    tail = trim(tail);

    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [question, answer] : pairs_) {
        if (tail.rfind(question, 0) == 0 && question.size() >= best_len) {
            best = &answer;
            best_len = question.size();
        }
    }
    if (!best)
        raise(ErrorCode::TransportFailure, "fixture has no answer for the prompt's question");
    return *best;
}

TransportConfig transport_config_from_env() {
    TransportConfig config;
    if (const char* v = std::getenv("SCRATCHKIT_ENDPOINT")) config.endpoint = v;
    if (const char* v = std::getenv("SCRATCHKIT_API_KEY")) config.credential = v;
    if (const char* v = std::getenv("SCRATCHKIT_MODEL")) config.model = v;
    if (const char* v = std::getenv("SCRATCHKIT_TIMEOUT")) config.timeout_seconds = std::atoi(v);
    if (config.timeout_seconds <= 0) config.timeout_seconds = 30;
    return config;
}

std::string HttpTransport::complete(const std::string& prompt) {
    if (config_.endpoint.empty() || config_.credential.empty())
        raise(ErrorCode::TransportFailure,
              "live transport needs SCRATCHKIT_ENDPOINT and SCRATCHKIT_API_KEY");

    // split "scheme://host[:port]/path"
    std::size_t scheme = config_.endpoint.find("://");
    std::size_t path_start = scheme == std::string::npos
                                 ? config_.endpoint.find('/')
                                 : config_.endpoint.find('/', scheme + 3);
    std::string base = path_start == std::string::npos ? config_.endpoint
                                                       : config_.endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_bearer_token_auth(config_.credential);

    json body = {
        {"model", config_.model},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
    };
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res)
        raise(ErrorCode::TransportFailure,
              "no response from " + base + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
        raise(ErrorCode::TransportFailure,
              "endpoint returned HTTP " + std::to_string(res->status));
    try {
        json payload = json::parse(res->body);
        return payload.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        raise(ErrorCode::TransportFailure, "malformed completion payload");
    }
}

AssistResult assist(const std::string& question, CompletionTransport& transport,
                    const ExampleCorpus& corpus, const catalog::Catalog& catalog,
                    const AssistOptions& options, const sb3::ProjectModel* project) {
    PromptBundle bundle = build_prompt(question, corpus, options.k, options.ranked_shots);
    std::string prompt = render_prompt(bundle);
    double estimate = token_estimate(prompt);
    if (estimate > options.token_budget)
        raise(ErrorCode::PromptTooLong, "prompt estimate " + std::to_string(estimate) +
                                            " exceeds the budget of " +
                                            std::to_string(options.token_budget));

    AssistResult result;
    try {
        result.answer = parse_answer(transport.complete(prompt));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoBlockArray && e.code() != ErrorCode::EmptyBlockArray) throw;
        std::string retry = prompt + "\n" + kCorrectiveInstruction;
        result.answer = parse_answer(transport.complete(retry));
    }

    result.categories = extract_categories(result.answer.rationale);
    codegen::BlockPlan plan = codegen::parse_block_list(result.answer.blocks, catalog,
                                                        options.threshold);
    collect_opcodes(plan.chain, result.opcodes);
    result.patch = codegen::emit_script(plan);
    result.patch.target_name = options.sprite;
    if (project) result.injected = codegen::inject(*project, result.patch);
    return result;
}

json result_json(const AssistResult& result) {
    return {
        {"rationale", result.answer.rationale},
        {"blocks", result.answer.blocks},
        {"categories", result.categories},
        {"opcodes", result.opcodes},
        {"patch", result.patch.to_json()},
    };
}

} // namespace scratchkit::assistant
