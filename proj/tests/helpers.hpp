#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "../src/sb3.hpp"

namespace testutil {

using nlohmann::json;
namespace sb3 = scratchkit::sb3;

// Minimal valid targets: named, one costume, empty block map.
sb3::Target make_stage();
sb3::Target make_sprite(const std::string& name);

// Stage plus `sprites` sprites named Sprite1, Sprite2, ...
sb3::ProjectModel make_project(int sprites = 1);

struct BlockSpec {
    std::string opcode;
    json fields = json::object();
    json inputs = json::object();
};

// Appends a vertical chain of stack blocks; the first one is top-level at
// (x, y). Returns the generated ids in order.
std::vector<std::string> add_chain(sb3::Target& target, const std::vector<BlockSpec>& specs,
                                   int x = 16, int y = 16);

// Wires a fresh block into `slot` of `parent_id` as a [2, id] input (the
// encoding used for conditions and substacks). Returns the new id.
std::string add_input_block(sb3::Target& target, const std::string& parent_id, const char* slot,
                            const BlockSpec& spec, bool shadow = false);

// A scored example project: expected levels follow the report order
// abstraction, parallelism, logic, synchronization, flow control,
// interactivity, data representation.
struct Golden {
    std::string name;
    sb3::ProjectModel model;
    std::array<int, 7> expected;
};

// 7 dimensions x levels 0..3, each with the entailed side scores filled in.
const std::vector<Golden>& rubric_goldens();

} // namespace testutil
