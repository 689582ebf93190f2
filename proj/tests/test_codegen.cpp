#include <doctest.h>

#include <string>
#include <vector>

#include "../src/catalog.hpp"
#include "../src/codegen.hpp"
#include "../src/error.hpp"
#include "helpers.hpp"

using namespace scratchkit;
using nlohmann::json;

namespace {

const catalog::Catalog& shipped() {
    static const catalog::Catalog cat =
        catalog::Catalog::load_file(std::string(SCRATCHKIT_DATA_DIR) + "/catalog.tsv");
    return cat;
}

codegen::BlockPlan plan_of(const std::vector<std::string>& texts) {
    return codegen::parse_block_list(texts, shipped());
}

const sb3::Block* by_opcode(const codegen::TemplatePatch& patch, const std::string& opcode) {
    for (const auto& b : patch.blocks)
        if (b.opcode == opcode) return &b;
    return nullptr;
}

const sb3::Block* by_id(const codegen::TemplatePatch& patch, const std::string& id) {
    for (const auto& b : patch.blocks)
        if (b.id == id) return &b;
    return nullptr;
}

} // namespace

TEST_CASE("click-and-run answer resolves to a nested two-block plan") {
    auto plan = plan_of({"when sprite clicked", "forever", "move [10] steps"});
    REQUIRE(plan.chain.size() == 2);
    CHECK(plan.chain[0].entry->opcode == "event_whenthisspriteclicked");
    CHECK(plan.chain[1].entry->opcode == "control_forever");
    REQUIRE(plan.chain[1].children.size() == 1);
    const auto& move = plan.chain[1].children[0];
    CHECK(move.entry->opcode == "motion_movesteps");
    REQUIRE(move.literals.size() == 1);
    CHECK(move.literals[0] == "10");
}

TEST_CASE("collision-hide answer compiles its quoted condition") {
    auto plan = plan_of(
        {"when green flag clicked", "forever", "if \"touching [car]\" then", "hide"});
    REQUIRE(plan.chain.size() == 2);
    CHECK(plan.chain[0].entry->opcode == "event_whenflagclicked");
    REQUIRE(plan.chain[1].children.size() == 1);
    const auto& branch = plan.chain[1].children[0];
    CHECK(branch.entry->opcode == "control_if");
    REQUIRE(branch.conditions.size() == 1);
    CHECK(branch.conditions[0].entry->opcode == "sensing_touchingobject");
    REQUIRE(branch.conditions[0].literals.size() == 1);
    CHECK(branch.conditions[0].literals[0] == "car");
    REQUIRE(branch.children.size() == 1);
    CHECK(branch.children[0].entry->opcode == "looks_hide");
}

TEST_CASE("end closes the innermost mouth and the chain continues outside") {
    auto plan = plan_of({"when green flag clicked", "repeat [3]", "say [hi]", "end",
                         "think [done]"});
    REQUIRE(plan.chain.size() == 3);
    CHECK(plan.chain[1].entry->opcode == "control_repeat");
    REQUIRE(plan.chain[1].children.size() == 1);
    CHECK(plan.chain[1].children[0].entry->opcode == "looks_say");
    CHECK(plan.chain[2].entry->opcode == "looks_think");

    auto nested = plan_of({"forever", "if \"touching [car]\" then", "say [a]", "end",
                           "say [b]"});
    // non-hat opener earns a flag hat in front
    REQUIRE(nested.chain.size() == 2);
    CHECK(nested.chain[0].entry->opcode == "event_whenflagclicked");
    const auto& loop = nested.chain[1];
    REQUIRE(loop.children.size() == 2);
    CHECK(loop.children[0].entry->opcode == "control_if");
    CHECK(loop.children[0].children.size() == 1);
    CHECK(loop.children[1].entry->opcode == "looks_say");
}

TEST_CASE("else switches an open if/else to its second mouth") {
    auto plan = plan_of({"when green flag clicked", "if \"touching [car]\" then else",
                         "say [yes]", "else", "say [no]", "end", "say [after]"});
    REQUIRE(plan.chain.size() == 3);
    const auto& both = plan.chain[1];
    CHECK(both.entry->opcode == "control_if_else");
    REQUIRE(both.children.size() == 1);
    CHECK(both.children[0].literals[0] == "yes");
    REQUIRE(both.else_children.size() == 1);
    CHECK(both.else_children[0].literals[0] == "no");
    CHECK(plan.chain[2].literals[0] == "after");
}

TEST_CASE("else without a two-mouth block is a dangling end") {
    try {
        plan_of({"when green flag clicked", "if \"touching [car]\" then", "say [x]", "else"});
        FAIL("expected an error for else after a plain if");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::DanglingEnd);
        CHECK(std::string(err.what()).find("block 4") != std::string::npos);
    }
    try {
        plan_of({"end"});
        FAIL("expected an error for a bare end");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::DanglingEnd);
        CHECK(std::string(err.what()).find("block 1") != std::string::npos);
    }
}

TEST_CASE("an empty description list is rejected") {
    CHECK_THROWS_AS(plan_of({}), Error);
    try {
        plan_of({});
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::EmptyBlockArray);
    }
}

TEST_CASE("surplus values are an arity error naming the block position") {
    try {
        plan_of({"move [10] [20] steps"});
        FAIL("expected an error for a surplus value");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::ArityMismatch);
        CHECK(std::string(err.what()).find("block 1") != std::string::npos);
    }
}

TEST_CASE("missing values fall back to the slot defaults") {
    auto patch = codegen::emit_script(plan_of({"move steps", "say []"}));
    const auto* move = by_opcode(patch, "motion_movesteps");
    REQUIRE(move != nullptr);
    CHECK(move->inputs.at("STEPS") == json::array({1, json::array({4, "10"})}));
    const auto* say = by_opcode(patch, "looks_say");
    REQUIRE(say != nullptr);
    CHECK(say->inputs.at("MESSAGE") == json::array({1, json::array({10, "Hello!"})}));
}

TEST_CASE("a condition slot stays empty when no condition is given") {
    auto patch = codegen::emit_script(plan_of({"repeat until"}));
    const auto* loop = by_opcode(patch, "control_repeat_until");
    REQUIRE(loop != nullptr);
    CHECK_FALSE(loop->inputs.contains("CONDITION"));
}

TEST_CASE("condition text must name a boolean or reporter") {
    try {
        plan_of({"if \"say [hi]\" then", "hide"});
        FAIL("expected no stack block to match in condition position");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NoMatch);
        CHECK(std::string(err.what()).find("block 1") != std::string::npos);
    }
}

TEST_CASE("emitted blocks use the workspace input and field encodings") {
    auto patch = codegen::emit_script(
        plan_of({"when green flag clicked", "broadcast [game over]", "set [score] to [5]",
                 "play sound [Meow] until done", "add [bounced] to [inventory]",
                 "repeat until \"touching [car]\"", "turn right [15] degrees"}));
    REQUIRE(patch.blocks.size() == 10); // 8 planned + 2 menu shadows

    const auto* hat = by_id(patch, "t1");
    REQUIRE(hat != nullptr);
    CHECK(hat->opcode == "event_whenflagclicked");
    CHECK(hat->top_level);
    CHECK(*hat->next == "t2");

    const auto* shout = by_opcode(patch, "event_broadcast");
    CHECK(shout->inputs.at("BROADCAST_INPUT") ==
          json::array({1, json::array({11, "game over", "bc-game over"})}));

    const auto* set = by_opcode(patch, "data_setvariableto");
    CHECK(set->fields.at("VARIABLE") == json::array({"score", "var-score"}));
    CHECK(set->inputs.at("VALUE") == json::array({1, json::array({10, "5"})}));

    const auto* play = by_opcode(patch, "sound_playuntildone");
    const auto* sound_menu = by_opcode(patch, "sound_sounds_menu");
    REQUIRE(sound_menu != nullptr);
    CHECK(play->inputs.at("SOUND_MENU") == json::array({1, sound_menu->id}));
    CHECK(sound_menu->shadow);
    CHECK(*sound_menu->parent == play->id);
    CHECK(sound_menu->fields.at("SOUND_MENU") == json::array({"Meow", nullptr}));

    const auto* push = by_opcode(patch, "data_addtolist");
    CHECK(push->inputs.at("ITEM") == json::array({1, json::array({10, "bounced"})}));
    CHECK(push->fields.at("LIST") == json::array({"inventory", "list-inventory"}));

    const auto* loop = by_opcode(patch, "control_repeat_until");
    const auto* touch = by_opcode(patch, "sensing_touchingobject");
    const auto* turn = by_opcode(patch, "motion_turnright");
    CHECK(loop->inputs.at("CONDITION") == json::array({2, touch->id}));
    CHECK(loop->inputs.at("SUBSTACK") == json::array({2, turn->id}));
    CHECK_FALSE(loop->next.has_value());
    CHECK(*turn->parent == loop->id);

    const auto* touch_menu = by_opcode(patch, "sensing_touchingobjectmenu");
    REQUIRE(touch_menu != nullptr);
    CHECK(touch->inputs.at("TOUCHINGOBJECTMENU") == json::array({1, touch_menu->id}));
    CHECK(touch_menu->fields.at("TOUCHINGOBJECTMENU") == json::array({"car", nullptr}));

    // the push links past the non-stack shadow to the loop
    CHECK(*push->next == loop->id);

    auto doc = patch.to_json();
    CHECK(doc.size() == 3);
    CHECK(doc.at("blocks").size() == 10);
    CHECK(doc.at("anchor").is_null());
}

TEST_CASE("an explicit anchor positions the hat and survives injection") {
    auto patch = codegen::emit_script(plan_of({"say [hi]"}), {{40, 80}});
    const auto* hat = by_id(patch, "t1");
    CHECK(*hat->x == 40);
    CHECK(*hat->y == 80);

    auto model = testutil::make_project(1);
    auto out = codegen::inject(model, patch);
    const auto* sprite = out.find_target("Sprite1");
    CHECK(*sprite->blocks.at("t1").x == 40);
    CHECK(*sprite->blocks.at("t1").y == 80);
}

TEST_CASE("without an anchor the script lands right of existing scripts") {
    auto patch = codegen::emit_script(plan_of({"say [hi]"}));
    auto model = testutil::make_project(1);
    testutil::add_chain(model.targets[1], {{"looks_hide"}}, 100, 60);

    auto out = codegen::inject(model, patch);
    const auto* sprite = out.find_target("Sprite1");
    CHECK(*sprite->blocks.at("t1").x == 400);
    CHECK(*sprite->blocks.at("t1").y == 0);

    auto blank = codegen::inject(testutil::make_project(1), patch);
    CHECK(*blank.find_target("Sprite1")->blocks.at("t1").x == 0);
}

TEST_CASE("injection freshens colliding ids, references included") {
    auto patch = codegen::emit_script(
        plan_of({"when green flag clicked", "repeat [2]", "play sound [Meow] until done"}));

    auto model = testutil::make_project(1);
    auto once = codegen::inject(model, patch);
    auto twice = codegen::inject(once, patch);
    auto thrice = codegen::inject(twice, patch);

    CHECK(model.targets[1].blocks.empty()); // the source model is never touched

    const auto& blocks = thrice.find_target("Sprite1")->blocks;
    for (const char* id : {"t1", "t1-2", "t1-3"}) CHECK(blocks.count(id) == 1);

    const auto& loop = blocks.at("t2-2");
    CHECK(loop.inputs.at("SUBSTACK") == json::array({2, "t3-2"}));
    const auto& play = blocks.at("t3-2");
    CHECK(play.inputs.at("SOUND_MENU") == json::array({1, "t4-2"}));
    CHECK(blocks.at("t4-2").shadow);
    CHECK(*blocks.at("t1-2").next == "t2-2");
}

TEST_CASE("injection targets the named sprite or fails loudly") {
    auto patch = codegen::emit_script(plan_of({"say [hi]"}));

    patch.target_name = "Nessie";
    try {
        codegen::inject(testutil::make_project(1), patch);
        FAIL("expected an unknown-target error");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::UnknownTarget);
        CHECK(std::string(err.what()).find("Nessie") != std::string::npos);
    }

    patch.target_name.clear();
    try {
        codegen::inject(testutil::make_project(0), patch); // stage only
        FAIL("expected an unknown-target error for a sprite-less project");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::UnknownTarget);
    }
}

TEST_CASE("injection declares referenced broadcasts, variables and lists on the stage") {
    auto patch = codegen::emit_script(
        plan_of({"when green flag clicked", "broadcast [game over]", "set [score] to [5]",
                 "add [bounced] to [inventory]"}));
    auto out = codegen::inject(testutil::make_project(1), patch);

    const auto& stage = out.targets[0];
    CHECK(stage.extra.at("broadcasts").at("bc-game over") == "game over");
    CHECK(stage.extra.at("variables").at("var-score") == json::array({"score", 0}));
    CHECK(stage.extra.at("lists").at("list-inventory") ==
          json::array({"inventory", json::array()}));
    CHECK(sb3::validate(out).empty());
}
