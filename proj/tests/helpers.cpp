#include "helpers.hpp"

namespace testutil {
namespace {

json costume(const std::string& name) {
    return {{"name", name},
            {"dataFormat", "svg"},
            {"assetId", "0000000000000000000000000000dead"},
            {"md5ext", "0000000000000000000000000000dead.svg"},
            {"rotationCenterX", 0},
            {"rotationCenterY", 0}};
}

std::string fresh_id(const sb3::Target& target) {
    return "b" + std::to_string(target.blocks.size() + 1);
}

} // namespace

sb3::Target make_stage() {
    sb3::Target stage;
    stage.is_stage = true;
    stage.name = "Stage";
    stage.costumes.push_back(costume("backdrop1"));
    stage.extra = {{"variables", json::object()},
                   {"lists", json::object()},
                   {"broadcasts", json::object()}};
    return stage;
}

sb3::Target make_sprite(const std::string& name) {
    sb3::Target sprite;
    sprite.name = name;
    sprite.costumes.push_back(costume("costume1"));
    return sprite;
}

sb3::ProjectModel make_project(int sprites) {
    sb3::ProjectModel model;
    model.targets.push_back(make_stage());
    for (int i = 1; i <= sprites; ++i)
        model.targets.push_back(make_sprite("Sprite" + std::to_string(i)));
    return model;
}

std::vector<std::string> add_chain(sb3::Target& target, const std::vector<BlockSpec>& specs,
                                   int x, int y) {
    std::vector<std::string> ids;
    for (const auto& spec : specs) {
        sb3::Block block;
        block.id = fresh_id(target);
        block.opcode = spec.opcode;
        block.fields = spec.fields;
        block.inputs = spec.inputs;
        if (ids.empty()) {
            block.top_level = true;
            block.x = x;
            block.y = y;
        } else {
            block.parent = ids.back();
            target.blocks.at(ids.back()).next = block.id;
        }
        ids.push_back(block.id);
        target.blocks.emplace(block.id, std::move(block));
    }
    return ids;
}

std::string add_input_block(sb3::Target& target, const std::string& parent_id, const char* slot,
                            const BlockSpec& spec, bool shadow) {
    sb3::Block block;
    block.id = fresh_id(target);
    block.opcode = spec.opcode;
    block.fields = spec.fields;
    block.inputs = spec.inputs;
    block.parent = parent_id;
    block.shadow = shadow;
    target.blocks.at(parent_id).inputs[slot] = json::array({shadow ? 1 : 2, block.id});
    std::string id = block.id;
    target.blocks.emplace(id, std::move(block));
    return id;
}

const std::vector<Golden>& rubric_goldens() {
    static const std::vector<Golden> goldens = [] {
        std::vector<Golden> all;
        auto add = [&](std::string name, sb3::ProjectModel model, std::array<int, 7> expected) {
            all.push_back({std::move(name), std::move(model), expected});
        };

        // ---- abstraction ----
        {
            // no blocks at all
            add("abstraction-0", make_project(), {0, 0, 0, 0, 0, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"looks_say"}}, 16, 16);
            add_chain(model.targets[1], {{"looks_say"}}, 16, 200);
            add("abstraction-1", std::move(model), {1, 0, 0, 0, 0, 0, 0});
        }
        {
            auto model = make_project();
            auto ids = add_chain(model.targets[1], {{"procedures_definition"}});
            auto proto = add_input_block(model.targets[1], ids[0], "custom_block",
                                         {"procedures_prototype"}, true);
            model.targets[1].blocks.at(proto).extra["mutation"] = {
                {"tagName", "mutation"}, {"children", json::array()},
                {"proccode", "helper"},  {"argumentids", "[]"},
                {"argumentnames", "[]"}, {"argumentdefaults", "[]"},
                {"warp", "false"}};
            add("abstraction-2", std::move(model), {2, 0, 0, 0, 0, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"control_start_as_clone"}});
            add("abstraction-3", std::move(model), {3, 0, 0, 0, 0, 0, 0});
        }

        // ---- parallelism ----
        {
            // a hat with nothing running alongside it
            auto model = make_project();
            add_chain(model.targets[1], {{"event_whenflagclicked"}});
            add("parallelism-0", std::move(model), {0, 0, 0, 0, 0, 1, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"event_whenflagclicked"}}, 16, 16);
            add_chain(model.targets[1], {{"event_whenflagclicked"}}, 16, 200);
            add("parallelism-1", std::move(model), {1, 1, 0, 0, 0, 1, 0});
        }
        {
            auto model = make_project();
            json key = {{"KEY_OPTION", json::array({"space", nullptr})}};
            add_chain(model.targets[1], {{"event_whenkeypressed", key}}, 16, 16);
            add_chain(model.targets[1], {{"event_whenkeypressed", key}}, 16, 200);
            add("parallelism-2", std::move(model), {1, 2, 0, 0, 0, 2, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"control_start_as_clone"}}, 16, 16);
            add_chain(model.targets[1], {{"control_start_as_clone"}}, 16, 200);
            add("parallelism-3", std::move(model), {3, 3, 0, 0, 0, 0, 0});
        }

        // ---- logic ----
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"looks_say"}, {"looks_say"}});
            add("logic-0", std::move(model), {0, 0, 0, 0, 1, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"control_if"}});
            add("logic-1", std::move(model), {0, 0, 1, 0, 0, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"control_if_else"}});
            add("logic-2", std::move(model), {0, 0, 2, 0, 0, 0, 0});
        }
        {
            auto model = make_project();
            auto ids = add_chain(model.targets[1], {{"control_if"}});
            add_input_block(model.targets[1], ids[0], "CONDITION", {"operator_not"});
            add("logic-3", std::move(model), {0, 0, 3, 0, 0, 0, 0});
        }

        // ---- synchronization ----
        {
            // hiding is instant; nothing waits on anything
            auto model = make_project();
            add_chain(model.targets[1], {{"looks_hide"}});
            add("synchronization-0", std::move(model), {0, 0, 0, 0, 0, 0, 1});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"control_wait"}});
            add("synchronization-1", std::move(model), {0, 0, 0, 1, 0, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"event_broadcast"}}, 16, 16);
            json msg = {{"BROADCAST_OPTION", json::array({"go", "bc1"})}};
            add_chain(model.targets[1], {{"event_whenbroadcastreceived", msg}}, 16, 200);
            add("synchronization-2", std::move(model), {1, 0, 0, 2, 0, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"control_wait_until"}});
            add("synchronization-3", std::move(model), {0, 0, 0, 3, 0, 0, 0});
        }

        // ---- flow control ----
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"looks_say"}});
            add("flow-control-0", std::move(model), {0, 0, 0, 0, 0, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"looks_say"}, {"looks_think"}});
            add("flow-control-1", std::move(model), {0, 0, 0, 0, 1, 0, 0});
        }
        {
            auto model = make_project();
            auto ids = add_chain(model.targets[1], {{"control_forever"}});
            add_input_block(model.targets[1], ids[0], "SUBSTACK", {"looks_say"});
            add("flow-control-2", std::move(model), {0, 0, 0, 0, 2, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"control_repeat_until"}});
            add("flow-control-3", std::move(model), {0, 0, 0, 0, 3, 0, 0});
        }

        // ---- interactivity ----
        {
            // a broadcast with no receiver reacts to nothing
            auto model = make_project();
            add_chain(model.targets[1], {{"event_broadcast"}});
            add("interactivity-0", std::move(model), {0, 0, 0, 0, 0, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"event_whenflagclicked"}});
            add("interactivity-1", std::move(model), {0, 0, 0, 0, 0, 1, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"event_whenthisspriteclicked"}});
            add("interactivity-2", std::move(model), {0, 0, 0, 0, 0, 2, 0});
        }
        {
            auto model = make_project();
            json menu = {{"WHENGREATERTHANMENU", json::array({"LOUDNESS", nullptr})}};
            add_chain(model.targets[1], {{"event_whengreaterthan", menu}});
            add("interactivity-3", std::move(model), {0, 0, 0, 0, 0, 3, 0});
        }

        // ---- data representation ----
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"sound_playuntildone"}});
            add("data-representation-0", std::move(model), {0, 0, 0, 0, 0, 0, 0});
        }
        {
            auto model = make_project();
            add_chain(model.targets[1], {{"motion_movesteps"}});
            add("data-representation-1", std::move(model), {0, 0, 0, 0, 0, 0, 1});
        }
        {
            auto model = make_project();
            model.targets[0].extra["variables"]["v1"] = json::array({"score", 0});
            json var = {{"VARIABLE", json::array({"score", "v1"})}};
            add_chain(model.targets[1], {{"data_setvariableto", var}});
            add("data-representation-2", std::move(model), {0, 0, 0, 0, 0, 0, 2});
        }
        {
            auto model = make_project();
            model.targets[0].extra["lists"]["l1"] = json::array({"items", json::array()});
            json list = {{"LIST", json::array({"items", "l1"})}};
            add_chain(model.targets[1], {{"data_addtolist", list}});
            add("data-representation-3", std::move(model), {0, 0, 0, 0, 0, 0, 3});
        }

        return all;
    }();
    return goldens;
}

} // namespace testutil
