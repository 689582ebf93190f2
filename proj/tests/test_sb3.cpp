#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../src/error.hpp"
#include "../src/sb3.hpp"
#include "../src/zip.hpp"
#include "helpers.hpp"

using namespace scratchkit;
using testutil::add_chain;
using testutil::make_project;
using nlohmann::json;

namespace {

sb3::Bytes read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    return sb3::Bytes(text.begin(), text.end());
}

sb3::ProjectModel load_fixture(const char* name) {
    return sb3::load_project(read_bytes(std::string(SCRATCHKIT_DATA_DIR) + "/projects/" + name),
                             sb3::Kind::BareJson);
}

// Every shipped project plus every synthetic scoring example.
std::vector<sb3::ProjectModel> roundtrip_corpus() {
    std::vector<sb3::ProjectModel> corpus;
    corpus.push_back(load_fixture("default_project.json"));
    corpus.push_back(load_fixture("rabbit_click_run.json"));
    corpus.push_back(load_fixture("cat_platformer.json"));
    for (const auto& golden : testutil::rubric_goldens()) corpus.push_back(golden.model);
    return corpus;
}

std::vector<std::string> violation_rules(const sb3::ProjectModel& model) {
    std::vector<std::string> rules;
    for (const auto& v : sb3::validate(model)) rules.push_back(v.rule);
    return rules;
}

bool has_rule(const sb3::ProjectModel& model, const std::string& rule) {
    for (const auto& r : violation_rules(model))
        if (r == rule) return true;
    return false;
}

} // namespace

TEST_CASE("shipped projects parse and validate cleanly") {
    for (const char* name :
         {"default_project.json", "rabbit_click_run.json", "cat_platformer.json"}) {
        CAPTURE(name);
        auto model = load_fixture(name);
        CHECK(sb3::validate(model).empty());
        CHECK(model.targets.size() >= 2);
        CHECK(model.stage() != nullptr);
        CHECK(model.targets.front().is_stage);
    }
}

TEST_CASE("archive round trip preserves the graph for the whole corpus") {
    auto corpus = roundtrip_corpus();
    CHECK(corpus.size() >= 20);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CAPTURE(i);
        auto bytes = sb3::save_project(corpus[i], sb3::Kind::Archive);
        auto reloaded = sb3::load_project(bytes, sb3::Kind::Archive);
        CHECK(sb3::graph_equal(corpus[i], reloaded));
        auto again = sb3::save_project(reloaded, sb3::Kind::Archive);
        CHECK(bytes == again); // canonical form is byte-stable
    }
}

TEST_CASE("bare json round trip is byte-deterministic") {
    for (const auto& model : roundtrip_corpus()) {
        auto text = sb3::project_to_json(model).dump();
        auto reloaded = sb3::load_project(sb3::Bytes(text.begin(), text.end()), sb3::Kind::BareJson);
        CHECK(sb3::project_to_json(reloaded).dump() == text);
    }
}

TEST_CASE("two saves of the same model agree byte for byte") {
    auto model = load_fixture("cat_platformer.json");
    CHECK(sb3::save_project(model, sb3::Kind::Archive) ==
          sb3::save_project(model, sb3::Kind::Archive));
}

TEST_CASE("auto loading sniffs archives and bare json") {
    auto model = load_fixture("default_project.json");
    auto archive = sb3::save_project(model, sb3::Kind::Archive);
    auto bare = sb3::save_project(model, sb3::Kind::BareJson);
    CHECK(sb3::graph_equal(sb3::load_project_auto(archive), model));
    CHECK(sb3::graph_equal(sb3::load_project_auto(bare), model));
}

TEST_CASE("project json keeps unknown payloads byte-faithfully") {
    auto model = load_fixture("cat_platformer.json");
    auto doc = sb3::project_to_json(model);
    CHECK(doc["extensions"] == json::array({"pen"}));
    CHECK(doc["monitors"].size() == 1);
    CHECK(doc["meta"]["agent"] == "Mozilla/5.0 (Windows NT 10.0; Win64; x64)");
    // target-level payloads the loader does not interpret
    const auto& stage = doc["targets"][0];
    CHECK(stage["variables"].contains("varScore"));
    CHECK(stage["lists"].contains("listInventory"));
    CHECK(stage["broadcasts"]["bcGameOver"] == "game over");
    // editor comments and block mutations survive
    const auto& cat = doc["targets"][1];
    CHECK(cat["comments"].contains("cm1"));
    CHECK(cat["blocks"]["blkProto"]["mutation"]["proccode"] == "bounce %s");
}

TEST_CASE("loose top-level reporters stay verbatim and invisible to scripts") {
    auto model = load_fixture("cat_platformer.json");
    const auto* stage = model.stage();
    REQUIRE(stage != nullptr);
    CHECK(stage->loose_primitives.contains("looseScore"));
    CHECK(stage->loose_primitives["looseScore"][0] == 12);
    for (const auto& script : sb3::scripts_of(*stage)) CHECK(script.root != "looseScore");
    auto bytes = sb3::save_project(model, sb3::Kind::BareJson);
    auto reloaded = sb3::load_project(bytes, sb3::Kind::BareJson);
    CHECK(reloaded.stage()->loose_primitives == stage->loose_primitives);
}

TEST_CASE("unknown extension opcodes parse as opaque blocks") {
    auto model = load_fixture("cat_platformer.json");
    const auto* cat = model.find_target("Señor Gato 🐱");
    REQUIRE(cat != nullptr);
    CHECK(cat->blocks.at("blkPen").opcode == "pen_clear");
    CHECK(sb3::validate(model).empty()); // nothing flags the foreign opcode
}

TEST_CASE("script extraction orders roots by workspace position") {
    auto model = load_fixture("cat_platformer.json");
    const auto* cat = model.find_target("Señor Gato 🐱");
    REQUIRE(cat != nullptr);
    auto scripts = sb3::scripts_of(*cat);
    REQUIRE(scripts.size() == 5);
    CHECK(scripts[0].root == "blkFlag"); // y -6, x 43
    CHECK(scripts[1].root == "blkKey");  // y -6, x 400
    CHECK(scripts[2].root == "blkRecv"); // y -6, x 800
    CHECK(scripts[3].root == "blkDef");  // y 500
    CHECK(scripts[4].root == "blkCloneHat");
    // depth-first body: condition subtree before the substack
    const auto& flag_script = scripts[0];
    CHECK(flag_script.body.front() == "blkFlag");
    CHECK(flag_script.body.size() == 8); // shadows excluded
}

TEST_CASE("input reference extraction understands all encodings") {
    CHECK(sb3::input_block_refs(json::parse(R"([1,[4,"10"]])")).empty());
    CHECK(sb3::input_block_refs(json::parse(R"([2,"child"])")) ==
          std::vector<std::string>{"child"});
    CHECK(sb3::input_block_refs(json::parse(R"([3,"cover",[4,"10"]])")) ==
          std::vector<std::string>{"cover"});
    CHECK(sb3::input_block_refs(json::parse(R"([1,"shadow"])")) ==
          std::vector<std::string>{"shadow"});
    CHECK(sb3::input_block_refs(json::parse(R"([1,[11,"msg","bc1"]])")).empty());
    CHECK(sb3::input_block_refs(json::parse(R"([3,[12,"var","v1"],[10,""]])")).empty());
}

TEST_CASE("malformed archives and json are rejected with the right codes") {
    auto expect_code = [](const sb3::Bytes& bytes, sb3::Kind kind, ErrorCode code) {
        try {
            sb3::load_project(bytes, kind);
            FAIL("expected an error");
        } catch (const Error& err) {
            CHECK(err.code() == code);
        }
    };
    expect_code({'P', 'K', 1, 2, 3}, sb3::Kind::Archive, ErrorCode::MalformedArchive);
    expect_code({'{', 'b', 'a', 'd'}, sb3::Kind::BareJson, ErrorCode::MalformedJson);
    std::string no_targets = R"({"meta":{}})";
    expect_code(sb3::Bytes(no_targets.begin(), no_targets.end()), sb3::Kind::BareJson,
                ErrorCode::MalformedJson);
    std::string bad_blocks = R"({"targets":[{"isStage":true,"name":"Stage","blocks":7}]})";
    expect_code(sb3::Bytes(bad_blocks.begin(), bad_blocks.end()), sb3::Kind::BareJson,
                ErrorCode::MalformedJson);
    // archive without a project.json member
    auto orphan = zip::write_archive({{"readme.txt", {'h', 'i'}}});
    expect_code(orphan, sb3::Kind::Archive, ErrorCode::MalformedArchive);
}

TEST_CASE("validation flags each structural rule") {
    SUBCASE("missing stage") {
        sb3::ProjectModel model;
        model.targets.push_back(testutil::make_sprite("Solo"));
        CHECK(has_rule(model, "MissingStage"));
    }
    SUBCASE("stage not first") {
        auto model = make_project();
        std::swap(model.targets[0], model.targets[1]);
        CHECK(has_rule(model, "StageNotFirst"));
    }
    SUBCASE("stage name") {
        auto model = make_project();
        model.targets[0].name = "Backdrop";
        CHECK(has_rule(model, "StageName"));
    }
    SUBCASE("empty costumes") {
        auto model = make_project();
        model.targets[1].costumes = json::array();
        CHECK(has_rule(model, "EmptyCostumes"));
    }
    SUBCASE("dangling next") {
        auto model = make_project();
        auto ids = add_chain(model.targets[1], {{"looks_say"}});
        model.targets[1].blocks.at(ids[0]).next = "ghost";
        CHECK(has_rule(model, "GraphInconsistency"));
    }
    SUBCASE("dangling input reference") {
        auto model = make_project();
        auto ids = add_chain(model.targets[1], {{"control_if"}});
        model.targets[1].blocks.at(ids[0]).inputs["CONDITION"] = json::array({2, "ghost"});
        CHECK(has_rule(model, "GraphInconsistency"));
    }
    SUBCASE("next without matching parent") {
        auto model = make_project();
        auto ids = add_chain(model.targets[1], {{"looks_say"}, {"looks_say"}});
        model.targets[1].blocks.at(ids[1]).parent = ids[1]; // self, not ids[0]
        CHECK(has_rule(model, "NextParentMismatch"));
    }
    SUBCASE("top-level flag inconsistent with parent") {
        auto model = make_project();
        auto ids = add_chain(model.targets[1], {{"looks_say"}});
        model.targets[1].blocks.at(ids[0]).top_level = false;
        CHECK(has_rule(model, "TopLevelFlagMismatch"));
    }
    SUBCASE("shadow at top level") {
        auto model = make_project();
        sb3::Block shadow;
        shadow.id = "sh1";
        shadow.opcode = "looks_backdrops";
        shadow.shadow = true;
        shadow.top_level = true;
        shadow.x = 0;
        shadow.y = 0;
        model.targets[1].blocks.emplace("sh1", std::move(shadow));
        CHECK(has_rule(model, "ShadowTopLevel"));
    }
    SUBCASE("top-level block without coordinates") {
        auto model = make_project();
        auto ids = add_chain(model.targets[1], {{"looks_say"}});
        model.targets[1].blocks.at(ids[0]).y.reset();
        CHECK(has_rule(model, "MissingCoordinates"));
    }
    SUBCASE("unreachable block") {
        auto model = make_project();
        auto ids = add_chain(model.targets[1], {{"looks_say"}});
        sb3::Block stray;
        stray.id = "stray";
        stray.opcode = "looks_hide";
        stray.parent = ids[0]; // claims a parent but nothing references it
        model.targets[1].blocks.emplace("stray", std::move(stray));
        CHECK(has_rule(model, "UnreachableBlock"));
    }
    SUBCASE("clean project has no violations") {
        CHECK(sb3::validate(make_project()).empty());
    }
}

TEST_CASE("graph equality notices opcode and wiring changes") {
    auto a = load_fixture("rabbit_click_run.json");
    auto b = load_fixture("rabbit_click_run.json");
    CHECK(sb3::graph_equal(a, b));
    auto& blocks = b.targets[1].blocks;
    blocks.begin()->second.opcode = "looks_hide";
    CHECK(!sb3::graph_equal(a, b));
}

TEST_CASE("archive layout is canonical") {
    auto model = load_fixture("default_project.json");
    model.assets.push_back({"zz_last.svg", {1, 2, 3}});
    model.assets.push_back({"aa_first.svg", {4, 5}});
    auto members = zip::read_archive(sb3::save_project(model, sb3::Kind::Archive));
    REQUIRE(members.size() == 3);
    CHECK(members[0].name == "project.json");
    CHECK(members[1].name == "aa_first.svg");
    CHECK(members[2].name == "zz_last.svg");
    CHECK(members[1].data == sb3::Bytes{4, 5});
}

TEST_CASE("zip layer round trips arbitrary payloads") {
    std::vector<zip::Member> members;
    members.push_back({"a.txt", {}});
    sb3::Bytes big;
    for (int i = 0; i < 70000; ++i) big.push_back(static_cast<std::uint8_t>(i * 31 % 251));
    members.push_back({"b.bin", big});
    members.push_back({"c.json", {'{', '}'}});
    auto archive = zip::write_archive(members);
    auto back = zip::read_archive(archive);
    REQUIRE(back.size() == members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        CHECK(back[i].name == members[i].name);
        CHECK(back[i].data == members[i].data);
    }
    CHECK(zip::write_archive(back) == archive);
}

TEST_CASE("corrupt zip payload is rejected") {
    auto archive = zip::write_archive({{"x.bin", {9, 9, 9, 9}}});
    archive[archive.size() / 2] ^= 0xff;
    CHECK_THROWS_AS(zip::read_archive(archive), Error);
}
