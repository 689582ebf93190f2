#pragma once

#include <cstddef>
#include <map>
#include <string>

#include <json.hpp>

#include "sb3.hpp"

namespace scratchkit::metrics {

using json = nlohmann::json;

// Block identity used for the adoption multisets. Opcode mode treats blocks
// with edited parameters as the same block; strict mode also keys on the
// block's field selections (menu choices, variable names).
enum class Mode { Opcode, Strict };

Mode mode_from_name(const std::string& name); // "opcode" | "strict"
const char* mode_name(Mode mode);

// block identity -> multiplicity
using SnippetSet = std::map<std::string, std::size_t>;

std::size_t multiset_size(const SnippetSet& set);

// All non-shadow blocks of all targets.
SnippetSet snippet_multiset(const sb3::ProjectModel& model, Mode mode = Mode::Opcode);

// How much of template x survives in final project y, and how much of y is new.
struct AdoptionReport {
    double retention = 0.0;
    double expansion = 0.0;
    std::size_t intersection_size = 0;
    std::size_t x_size = 0;
    std::size_t y_size = 0;
    Mode mode = Mode::Opcode;
};

double retention(const SnippetSet& x, const SnippetSet& y);
double expansion(const SnippetSet& x, const SnippetSet& y);

AdoptionReport compare(const SnippetSet& x, const SnippetSet& y, Mode mode);
json report_json(const AdoptionReport& report);

// Sprites plus backdrops.
std::size_t visual_element_count(const sb3::ProjectModel& model);

} // namespace scratchkit::metrics
