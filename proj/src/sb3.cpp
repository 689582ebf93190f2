#include "sb3.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "error.hpp"

namespace scratchkit::sb3 {

json block_to_json(const Block& b) {
    json out = b.extra;
    out["opcode"] = b.opcode;
    out["next"] = b.next ? json(*b.next) : json(nullptr);
    out["parent"] = b.parent ? json(*b.parent) : json(nullptr);
    out["inputs"] = b.inputs;
    out["fields"] = b.fields;
    out["shadow"] = b.shadow;
    out["topLevel"] = b.top_level;
    if (b.x) out["x"] = *b.x;
    if (b.y) out["y"] = *b.y;
    return out;
}

namespace {

constexpr const char* kProjectJsonName = "project.json";

Block block_from_json(const std::string& id, json data) {
    Block b;
    b.id = id;
    if (!data.contains("opcode") || !data["opcode"].is_string())
        raise(ErrorCode::MalformedJson, "block " + id + " has no opcode");
    b.opcode = data["opcode"].get<std::string>();
    if (data.contains("next") && data["next"].is_string()) b.next = data["next"].get<std::string>();
    if (data.contains("parent") && data["parent"].is_string()) b.parent = data["parent"].get<std::string>();
    if (data.contains("inputs")) {
        if (!data["inputs"].is_object()) raise(ErrorCode::MalformedJson, "block " + id + ": inputs is not an object");
        b.inputs = data["inputs"];
    }
    if (data.contains("fields")) {
        if (!data["fields"].is_object()) raise(ErrorCode::MalformedJson, "block " + id + ": fields is not an object");
        b.fields = data["fields"];
    }
    if (data.contains("shadow")) b.shadow = data["shadow"].is_boolean() && data["shadow"].get<bool>();
    if (data.contains("topLevel")) b.top_level = data["topLevel"].is_boolean() && data["topLevel"].get<bool>();
    else b.top_level = !b.parent;
    if (data.contains("x") && data["x"].is_number()) b.x = static_cast<int>(std::llround(data["x"].get<double>()));
    if (data.contains("y") && data["y"].is_number()) b.y = static_cast<int>(std::llround(data["y"].get<double>()));
    for (const char* key : {"opcode", "next", "parent", "inputs", "fields", "shadow", "topLevel", "x", "y"})
        data.erase(key);
    b.extra = std::move(data);
    return b;
}

Target target_from_json(json data) {
    Target t;
    if (data.contains("isStage")) t.is_stage = data["isStage"].is_boolean() && data["isStage"].get<bool>();
    if (data.contains("name") && data["name"].is_string()) t.name = data["name"].get<std::string>();
    if (data.contains("costumes")) t.costumes = data["costumes"];
    if (data.contains("blocks")) {
        if (!data["blocks"].is_object())
            raise(ErrorCode::MalformedJson, "target " + t.name + ": blocks is not an object");
        for (auto& [id, value] : data["blocks"].items()) {
            if (value.is_array()) {
                t.loose_primitives[id] = value;
            } else if (value.is_object()) {
                t.blocks.emplace(id, block_from_json(id, value));
            } else {
                raise(ErrorCode::MalformedJson, "block " + id + " is neither object nor array");
            }
        }
    }
    for (const char* key : {"isStage", "name", "costumes", "blocks"}) data.erase(key);
    t.extra = std::move(data);
    return t;
}

json target_to_json(const Target& t) {
    json out = t.extra;
    out["isStage"] = t.is_stage;
    out["name"] = t.name;
    out["costumes"] = t.costumes;
    json blocks = t.loose_primitives;
    for (const auto& [id, b] : t.blocks) blocks[id] = block_to_json(b);
    out["blocks"] = std::move(blocks);
    return out;
}

// Graph checks shared by load (as hard errors) and validate (as a report).
void collect_violations(const ProjectModel& model, std::vector<Violation>& out) {
    auto add = [&](std::string rule, const std::string& target, const std::string& block, std::string detail) {
        out.push_back({std::move(rule), target, block, std::move(detail)});
    };

    std::size_t stages = 0;
    for (const auto& t : model.targets)
        if (t.is_stage) ++stages;
    if (stages == 0) add("MissingStage", "", "", "no target has the stage flag");
    if (stages > 1) add("MultipleStage", "", "", "more than one target has the stage flag");
    if (!model.targets.empty() && stages >= 1) {
        if (!model.targets.front().is_stage)
            add("StageNotFirst", model.targets.front().name, "", "first target is not the stage");
        else if (model.targets.front().name != "Stage")
            add("StageName", model.targets.front().name, "", "stage target must be named \"Stage\"");
    }

    for (const auto& t : model.targets) {
        if (t.costume_count() == 0) add("EmptyCostumes", t.name, "", "target has no costumes");

        for (const auto& [id, b] : t.blocks) {
            if (b.next && !t.blocks.count(*b.next))
                add("GraphInconsistency", t.name, *b.next, "block " + id + " has dangling next \"" + *b.next + "\"");
            if (b.parent && !t.blocks.count(*b.parent))
                add("GraphInconsistency", t.name, *b.parent,
                    "block " + id + " has dangling parent \"" + *b.parent + "\"");
            for (const auto& [slot, value] : b.inputs.items()) {
                for (const auto& ref : input_block_refs(value))
                    if (!t.blocks.count(ref))
                        add("GraphInconsistency", t.name, ref,
                            "block " + id + " input " + slot + " references missing \"" + ref + "\"");
            }
            if (b.next && t.blocks.count(*b.next)) {
                const Block& c = t.blocks.at(*b.next);
                if (!c.parent || *c.parent != id)
                    add("NextParentMismatch", t.name, c.id,
                        "block " + id + " has next " + c.id + " but " + c.id + " does not point back");
            }
            if (!b.parent != b.top_level)
                add("TopLevelFlagMismatch", t.name, id,
                    b.parent ? "parented block is flagged top-level" : "parentless block lacks the top-level flag");
            if (b.shadow && b.top_level) add("ShadowTopLevel", t.name, id, "shadow block is flagged top-level");
            if (b.top_level && !b.shadow && (!b.x || !b.y))
                add("MissingCoordinates", t.name, id, "top-level block has no x/y");
        }

        // Every block must hang off exactly one top-level root.
        std::set<std::string> seen;
        for (const auto& [id, b] : t.blocks) {
            if (!b.top_level) continue;
            std::vector<std::string> stack{id};
            while (!stack.empty()) {
                std::string cur = stack.back();
                stack.pop_back();
                if (!seen.insert(cur).second) continue;
                auto it = t.blocks.find(cur);
                if (it == t.blocks.end()) continue;
                for (const auto& [slot, value] : it->second.inputs.items())
                    for (const auto& ref : input_block_refs(value)) stack.push_back(ref);
                if (it->second.next) stack.push_back(*it->second.next);
            }
        }
        for (const auto& [id, b] : t.blocks)
            if (!seen.count(id)) add("UnreachableBlock", t.name, id, "block is not reachable from any top-level root");
    }
}

} // namespace

const Target* ProjectModel::find_target(const std::string& name) const {
    for (const auto& t : targets)
        if (t.name == name) return &t;
    return nullptr;
}

const Target* ProjectModel::stage() const {
    for (const auto& t : targets)
        if (t.is_stage) return &t;
    return nullptr;
}

std::size_t ProjectModel::sprite_count() const {
    std::size_t n = 0;
    for (const auto& t : targets)
        if (!t.is_stage) ++n;
    return n;
}

std::vector<std::string> input_block_refs(const json& input) {
    std::vector<std::string> refs;
    if (!input.is_array()) return refs;
    for (std::size_t i = 1; i < input.size(); ++i)
        if (input[i].is_string()) refs.push_back(input[i].get<std::string>());
    return refs;
}

ProjectModel load_project(const Bytes& source, Kind kind, std::vector<std::string>* warnings) {
    json doc;
    std::vector<zip::Member> assets;
    if (kind == Kind::Archive) {
        auto members = zip::read_archive(source);
        const zip::Member* project = nullptr;
        for (auto& m : members) {
            if (m.name == kProjectJsonName) project = &m;
            else assets.push_back(std::move(m));
        }
        if (!project) raise(ErrorCode::MalformedArchive, "archive has no project.json");
        try {
            doc = json::parse(project->data.begin(), project->data.end());
        } catch (const json::exception& e) {
            raise(ErrorCode::MalformedJson, std::string("project.json: ") + e.what());
        }
    } else {
        try {
            doc = json::parse(source.begin(), source.end());
        } catch (const json::exception& e) {
            raise(ErrorCode::MalformedJson, e.what());
        }
    }
    if (!doc.is_object() || !doc.contains("targets") || !doc["targets"].is_array())
        raise(ErrorCode::MalformedJson, "project document has no targets array");

    ProjectModel model;
    model.assets = std::move(assets);
    for (auto& t : doc["targets"]) model.targets.push_back(target_from_json(std::move(t)));
    if (doc.contains("monitors")) model.monitors = doc["monitors"];
    if (doc.contains("extensions")) model.extensions = doc["extensions"];
    if (doc.contains("meta") && doc["meta"].is_object()) {
        json meta = doc["meta"];
        if (meta.contains("semver") && meta["semver"].is_string()) model.meta.semver = meta["semver"];
        if (meta.contains("agent") && meta["agent"].is_string()) model.meta.agent = meta["agent"];
        meta.erase("semver");
        meta.erase("agent");
        model.meta.extra = std::move(meta);
    }
    for (const char* key : {"targets", "monitors", "extensions", "meta"}) doc.erase(key);
    model.extra = std::move(doc);

    // Some exporters omit coordinates on top-level blocks; repair to (0,0).
    for (auto& t : model.targets) {
        for (auto& [id, b] : t.blocks) {
            if (b.top_level && !b.shadow && (!b.x || !b.y)) {
                b.x = b.x.value_or(0);
                b.y = b.y.value_or(0);
                if (warnings) warnings->push_back("block " + id + " in " + t.name + ": missing x/y repaired to (0,0)");
            }
        }
    }

    std::vector<Violation> violations;
    collect_violations(model, violations);
    if (!violations.empty()) {
        const Violation& v = violations.front();
        raise(ErrorCode::GraphInconsistency,
              v.rule + (v.block.empty() ? "" : " (" + v.block + ")") + ": " + v.detail);
    }
    return model;
}

ProjectModel load_project_auto(const Bytes& source, std::vector<std::string>* warnings) {
    bool looks_zipped = source.size() >= 4 && source[0] == 'P' && source[1] == 'K';
    return load_project(source, looks_zipped ? Kind::Archive : Kind::BareJson, warnings);
}

json project_to_json(const ProjectModel& model) {
    json out = model.extra;
    json targets = json::array();
    for (const auto& t : model.targets) targets.push_back(target_to_json(t));
    out["targets"] = std::move(targets);
    out["monitors"] = model.monitors;
    out["extensions"] = model.extensions;
    json meta = model.meta.extra;
    meta["semver"] = model.meta.semver;
    meta["agent"] = model.meta.agent;
    out["meta"] = std::move(meta);
    return out;
}

Bytes save_project(const ProjectModel& model, Kind kind) {
    auto violations = validate(model);
    if (!violations.empty()) {
        const Violation& v = violations.front();
        raise(ErrorCode::ValidationFailure, v.rule + ": " + v.detail +
                                                (violations.size() > 1
                                                     ? " (+" + std::to_string(violations.size() - 1) + " more)"
                                                     : ""));
    }
    std::string text = project_to_json(model).dump();
    Bytes json_bytes(text.begin(), text.end());
    if (kind == Kind::BareJson) return json_bytes;

    std::vector<zip::Member> members;
    members.push_back({kProjectJsonName, std::move(json_bytes)});
    std::vector<zip::Member> assets = model.assets;
    std::sort(assets.begin(), assets.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    for (auto& a : assets) members.push_back(std::move(a));
    return zip::write_archive(members);
}

std::vector<Violation> validate(const ProjectModel& model) {
    std::vector<Violation> out;
    collect_violations(model, out);
    return out;
}

std::vector<Script> scripts_of(const Target& target) {
    std::vector<const Block*> roots;
    for (const auto& [id, b] : target.blocks)
        if (b.top_level && !b.shadow) roots.push_back(&b);
    std::sort(roots.begin(), roots.end(), [](const Block* a, const Block* b) {
        int ay = a->y.value_or(0), by = b->y.value_or(0);
        int ax = a->x.value_or(0), bx = b->x.value_or(0);
        return std::tie(ay, ax, a->id) < std::tie(by, bx, b->id);
    });

    std::vector<Script> scripts;
    for (const Block* root : roots) {
        Script s;
        s.root = root->id;
        // Depth-first: the block, then its input subtrees, then its successor.
        auto walk = [&](auto&& self, const std::string& id) -> void {
            auto it = target.blocks.find(id);
            if (it == target.blocks.end()) return;
            const Block& b = it->second;
            if (!b.shadow) s.body.push_back(b.id);
            for (const auto& [slot, value] : b.inputs.items())
                for (const auto& ref : input_block_refs(value)) self(self, ref);
            if (b.next) self(self, *b.next);
        };
        walk(walk, root->id);
        scripts.push_back(std::move(s));
    }
    return scripts;
}

bool graph_equal(const ProjectModel& a, const ProjectModel& b) {
    if (a.targets.size() != b.targets.size()) return false;
    for (std::size_t i = 0; i < a.targets.size(); ++i) {
        const Target& ta = a.targets[i];
        const Target& tb = b.targets[i];
        if (ta.name != tb.name || ta.is_stage != tb.is_stage) return false;
        if (ta.costume_count() != tb.costume_count()) return false;
        if (ta.blocks.size() != tb.blocks.size()) return false;
        for (const auto& [id, ba] : ta.blocks) {
            auto it = tb.blocks.find(id);
            if (it == tb.blocks.end()) return false;
            const Block& bb = it->second;
            if (ba.opcode != bb.opcode || ba.next != bb.next || ba.parent != bb.parent ||
                ba.shadow != bb.shadow || ba.top_level != bb.top_level || ba.x != bb.x || ba.y != bb.y ||
                ba.inputs != bb.inputs || ba.fields != bb.fields || ba.extra != bb.extra)
                return false;
        }
    }
    return true;
}

} // namespace scratchkit::sb3
