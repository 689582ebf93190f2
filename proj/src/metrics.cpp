#include "metrics.hpp"

#include <algorithm>

#include "error.hpp"

namespace scratchkit::metrics {

Mode mode_from_name(const std::string& name) {
    if (name == "opcode") return Mode::Opcode;
    if (name == "strict") return Mode::Strict;
    raise(ErrorCode::OutOfRange, "unknown snippet mode \"" + name + "\"");
}

const char* mode_name(Mode mode) {
    return mode == Mode::Opcode ? "opcode" : "strict";
}

std::size_t multiset_size(const SnippetSet& set) {
    std::size_t n = 0;
    for (const auto& [key, count] : set) n += count;
    return n;
}

namespace {

// Strict identity folds the field *values* in, not the persistence ids that
// ride along with variable/broadcast fields.
std::string identity(const sb3::Block& block, Mode mode) {
    if (mode == Mode::Opcode) return block.opcode;
    std::string key = block.opcode;
    if (block.fields.is_object()) {
        for (const auto& [name, field] : block.fields.items()) {
            key += '\x1f';
            key += name;
            key += '=';
            if (field.is_array() && !field.empty())
                key += field[0].is_string() ? field[0].get<std::string>() : field[0].dump();
        }
    }
    return key;
}

std::size_t intersection_size(const SnippetSet& x, const SnippetSet& y) {
    std::size_t shared = 0;
    for (const auto& [key, count] : x) {
        auto it = y.find(key);
        if (it != y.end()) shared += std::min(count, it->second);
    }
    return shared;
}

} // namespace

SnippetSet snippet_multiset(const sb3::ProjectModel& model, Mode mode) {
    SnippetSet set;
    for (const auto& target : model.targets)
        for (const auto& [id, block] : target.blocks)
            if (!block.shadow) ++set[identity(block, mode)];
    return set;
}

double retention(const SnippetSet& x, const SnippetSet& y) {
    std::size_t x_size = multiset_size(x);
    if (x_size == 0) raise(ErrorCode::EmptyTemplate, "retention undefined for an empty template set");
    return static_cast<double>(intersection_size(x, y)) / static_cast<double>(x_size);
}

double expansion(const SnippetSet& x, const SnippetSet& y) {
    std::size_t y_size = multiset_size(y);
    if (y_size == 0) raise(ErrorCode::EmptyFinal, "expansion undefined for an empty final set");
    return static_cast<double>(y_size - intersection_size(x, y)) / static_cast<double>(y_size);
}

AdoptionReport compare(const SnippetSet& x, const SnippetSet& y, Mode mode) {
    AdoptionReport report;
    report.retention = retention(x, y);
    report.expansion = expansion(x, y);
    report.intersection_size = intersection_size(x, y);
    report.x_size = multiset_size(x);
    report.y_size = multiset_size(y);
    report.mode = mode;
    return report;
}

json report_json(const AdoptionReport& report) {
    return {
        {"retention", report.retention},
        {"expansion", report.expansion},
        {"intersection_size", report.intersection_size},
        {"x_size", report.x_size},
        {"y_size", report.y_size},
        {"mode", mode_name(report.mode)},
    };
}

std::size_t visual_element_count(const sb3::ProjectModel& model) {
    std::size_t backdrops = model.stage() ? model.stage()->costume_count() : 0;
    return model.sprite_count() + backdrops;
}

} // namespace scratchkit::metrics
