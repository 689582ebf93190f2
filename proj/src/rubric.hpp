#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sb3.hpp"

namespace scratchkit::rubric {

using json = nlohmann::json;

// Where a dimension's awarded level comes from. `block` is empty for
// structural evidence (sprite count, script count).
struct Evidence {
    std::string target;
    std::string block;
    std::string rule;
};

struct DimensionScore {
    int level = 0;
    std::vector<Evidence> evidence;
};

// Computational-thinking score: seven dimensions, levels 0..3 each.
struct RubricScore {
    DimensionScore abstraction;
    DimensionScore parallelism;
    DimensionScore logic;
    DimensionScore synchronization;
    DimensionScore flow_control;
    DimensionScore interactivity;
    DimensionScore data_representation;

    int total() const;
};

// Boundaries for the coarse mastery label: total <= basic_max is "basic",
// <= developing_max is "developing", anything above is "master".
struct LabelThresholds {
    int basic_max = 7;
    int developing_max = 14;
};

RubricScore score_project(const sb3::ProjectModel& project);

std::string mastery_label(int total, const LabelThresholds& thresholds = {});

// Flat report: one key per dimension, plus total, label and per-dimension
// evidence lists.
json report_json(const RubricScore& score, const LabelThresholds& thresholds = {});

} // namespace scratchkit::rubric
