#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zip.hpp"

namespace scratchkit::sb3 {

using json = nlohmann::json;
using Bytes = std::vector<std::uint8_t>;

// One block of a target's block graph. `inputs` and `fields` keep the on-disk
// JSON encoding (see save_project for the supported input forms); keys the
// loader does not interpret (mutation, comment, ...) are preserved in `extra`.
struct Block {
    std::string id;
    std::string opcode;
    std::optional<std::string> next;
    std::optional<std::string> parent;
    json inputs = json::object();
    json fields = json::object();
    bool shadow = false;
    bool top_level = false;
    std::optional<int> x;
    std::optional<int> y;
    json extra = json::object();
};

struct Target {
    bool is_stage = false;
    std::string name;
    std::map<std::string, Block> blocks;
    json costumes = json::array();
    // Free-floating variable/list reporters are stored by the editor as bare
    // arrays inside the blocks map; kept verbatim, invisible to analysis.
    json loose_primitives = json::object();
    // variables, lists, broadcasts, sounds and any other target-level payloads.
    json extra = json::object();

    std::size_t costume_count() const { return costumes.is_array() ? costumes.size() : 0; }
};

struct Meta {
    std::string semver = "3.0.0";
    std::string agent;
    json extra = json::object();
};

struct ProjectModel {
    std::vector<Target> targets;
    Meta meta;
    json monitors = json::array();
    json extensions = json::array();
    json extra = json::object();
    std::vector<zip::Member> assets; // archive members other than project.json

    const Target* find_target(const std::string& name) const;
    const Target* stage() const;
    std::size_t sprite_count() const; // non-stage targets
};

struct Script {
    std::string root;
    std::vector<std::string> body; // depth-first, includes nested substacks
};

struct Violation {
    std::string rule;
    std::string target;
    std::string block;  // empty when the violation is target-level
    std::string detail;
};

enum class Kind { Archive, BareJson };

ProjectModel load_project(const Bytes& source, Kind kind, std::vector<std::string>* warnings = nullptr);

// Sniffs the zip magic to pick the kind.
ProjectModel load_project_auto(const Bytes& source, std::vector<std::string>* warnings = nullptr);

Bytes save_project(const ProjectModel& model, Kind kind);

// Canonical project.json value (sorted keys once dumped); save_project uses it.
json project_to_json(const ProjectModel& model);

// On-disk JSON object for one block (normalized keys first, then `extra`).
json block_to_json(const Block& block);

std::vector<Violation> validate(const ProjectModel& model);

std::vector<Script> scripts_of(const Target& target);

// Block ids referenced by one input value, i.e. its direct string elements.
std::vector<std::string> input_block_refs(const json& input);

// Ignores monitors and asset bytes; compares target order, block maps and
// costume counts.
bool graph_equal(const ProjectModel& a, const ProjectModel& b);

} // namespace scratchkit::sb3
