#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "sb3.hpp"

namespace scratchkit::codegen {

using json = nlohmann::json;

// One resolved block of a plan. `literals` lines up with the entry's
// value-taking slots ("" = use the catalog default); `conditions` lines up
// with its condition slots, a null `entry` meaning the slot stays empty.
struct PlannedBlock {
    const catalog::CatalogEntry* entry = nullptr;
    std::string source;
    std::vector<std::string> literals;
    std::vector<PlannedBlock> conditions;
    std::vector<PlannedBlock> children;      // SUBSTACK
    std::vector<PlannedBlock> else_children; // SUBSTACK2
};

struct BlockPlan {
    std::vector<PlannedBlock> chain; // top-level script, hat first
};

// Fresh blocks ready to drop into a target. `anchor` is the workspace
// position of the script's hat; unset means "let inject place it".
struct TemplatePatch {
    std::string target_name;
    std::optional<std::pair<int, int>> anchor;
    std::vector<sb3::Block> blocks; // creation order, ids "t1", "t2", ...

    json to_json() const;
};

// Resolve an ordered list of block descriptions (the shape of model answers)
// into a single script. A c-block absorbs everything after it until the list
// ends or an "end" sentinel; "else" switches an open if/else to its second
// mouth; quoted segments compile as condition sub-plans; a non-hat first
// block gets an event_whenflagclicked prepended.
BlockPlan parse_block_list(const std::vector<std::string>& texts, const catalog::Catalog& catalog,
                           double threshold = 0.25);

TemplatePatch emit_script(const BlockPlan& plan, std::optional<std::pair<int, int>> anchor = {});

// Copy of `model` with the patch's script added to the named target ("" =
// first sprite). Ids are freshened if they collide; missing broadcasts,
// variables and lists referenced by the script are declared on the stage.
sb3::ProjectModel inject(const sb3::ProjectModel& model, const TemplatePatch& patch);

} // namespace scratchkit::codegen
