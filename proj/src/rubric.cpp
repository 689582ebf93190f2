#include "rubric.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <string_view>

#include "error.hpp"

namespace scratchkit::rubric {
namespace {

bool in_set(const std::string& opcode, std::initializer_list<std::string_view> set) {
    return std::find(set.begin(), set.end(), opcode) != set.end();
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// First field value of `name`, or "" when absent.
std::string field_value(const sb3::Block& block, const char* name) {
    if (!block.fields.is_object() || !block.fields.contains(name)) return {};
    const auto& f = block.fields.at(name);
    if (f.is_array() && !f.empty() && f[0].is_string()) return f[0].get<std::string>();
    return {};
}

// Dimension means "highest level with support"; candidates are collected per
// level while walking the project, then the top non-empty level wins.
struct Levels {
    std::array<std::vector<Evidence>, 4> at; // at[0] unused

    void add(int level, const std::string& target, const std::string& block, const char* rule) {
        at[static_cast<std::size_t>(level)].push_back({target, block, rule});
    }

    DimensionScore resolve() const {
        for (int level = 3; level >= 1; --level) {
            const auto& ev = at[static_cast<std::size_t>(level)];
            if (!ev.empty()) return {level, ev};
        }
        return {};
    }
};

// Scripts running off the same trigger run concurrently; the trigger class
// decides how advanced that is.
struct HatClass {
    std::string key;
    int level = 0;
};

HatClass classify_hat(const sb3::Target& target, const sb3::Block& block) {
    const std::string& op = block.opcode;
    if (op == "event_whenflagclicked") return {"flag", 1};
    if (op == "event_whenkeypressed") return {"key:" + field_value(block, "KEY_OPTION"), 2};
    if (op == "event_whenthisspriteclicked") return {"click:" + target.name, 2};
    if (op == "event_whenstageclicked") return {"click:" + target.name, 2};
    if (op == "event_whenbroadcastreceived")
        return {"bcast:" + field_value(block, "BROADCAST_OPTION"), 3};
    if (op == "event_whenbackdropswitchesto")
        return {"backdrop:" + field_value(block, "BACKDROP"), 3};
    if (op == "event_whengreaterthan")
        return {"greater:" + field_value(block, "WHENGREATERTHANMENU"), 3};
    if (op == "control_start_as_clone") return {"clone:" + target.name, 3};
    return {};
}

const std::initializer_list<std::string_view> kSpriteModifiers = {
    "motion_movesteps",      "motion_turnright",      "motion_turnleft",
    "motion_goto",           "motion_gotoxy",         "motion_glideto",
    "motion_glidesecstoxy",  "motion_pointindirection", "motion_pointtowards",
    "motion_changexby",      "motion_setx",           "motion_changeyby",
    "motion_sety",           "motion_ifonedgebounce", "motion_setrotationstyle",
    "looks_switchcostumeto", "looks_nextcostume",     "looks_switchbackdropto",
    "looks_nextbackdrop",    "looks_changesizeby",    "looks_setsizeto",
    "looks_changeeffectby",  "looks_seteffectto",     "looks_cleargraphiceffects",
    "looks_show",            "looks_hide",            "looks_gotofrontback",
    "looks_goforwardbackwardlayers",
};

const std::initializer_list<std::string_view> kListOps = {
    "data_addtolist",      "data_deleteoflist",      "data_deletealloflist",
    "data_insertatlist",   "data_replaceitemoflist", "data_itemoflist",
    "data_itemnumoflist",  "data_lengthoflist",      "data_showlist",
    "data_hidelist",       "data_containslistitem",
};

} // namespace

int RubricScore::total() const {
    return abstraction.level + parallelism.level + logic.level + synchronization.level +
           flow_control.level + interactivity.level + data_representation.level;
}

RubricScore score_project(const sb3::ProjectModel& project) {
    Levels abstraction, parallelism, logic, synchronization, flow, interactivity, data;

    // trigger class key -> hat blocks, across the whole project
    std::map<std::string, std::pair<int, std::vector<Evidence>>> hat_groups;

    std::size_t script_count = 0;
    std::vector<Evidence> script_roots;
    bool has_broadcast = false;
    bool has_receive = false;
    std::vector<Evidence> broadcast_pair;

    for (const auto& target : project.targets) {
        for (const auto& script : sb3::scripts_of(target)) {
            ++script_count;
            script_roots.push_back({target.name, script.root, "multiple-scripts"});
            const auto& root = target.blocks.at(script.root);
            auto hat = classify_hat(target, root);
            if (hat.level > 0) {
                auto& group = hat_groups[hat.key];
                group.first = hat.level;
                group.second.push_back({target.name, root.id, "same-trigger"});
            }
        }

        for (const auto& [id, block] : target.blocks) {
            if (block.shadow) continue;
            const std::string& op = block.opcode;

            if (op == "procedures_definition")
                abstraction.add(2, target.name, id, "custom-block");
            if (in_set(op, {"control_start_as_clone", "control_create_clone_of",
                            "control_delete_this_clone"}))
                abstraction.add(3, target.name, id, "clone");

            if (op == "control_if") logic.add(1, target.name, id, "if");
            if (op == "control_if_else") logic.add(2, target.name, id, "if-else");
            if (in_set(op, {"operator_and", "operator_or", "operator_not"}))
                logic.add(3, target.name, id, "boolean-op");

            if (op == "control_wait") synchronization.add(1, target.name, id, "wait");
            if (op == "event_broadcast" || op == "event_broadcastandwait") {
                has_broadcast = true;
                broadcast_pair.push_back({target.name, id, "broadcast-receive"});
            }
            if (op == "event_whenbroadcastreceived") {
                has_receive = true;
                broadcast_pair.push_back({target.name, id, "broadcast-receive"});
            }
            if (in_set(op, {"control_wait_until", "event_whenbackdropswitchesto",
                            "event_broadcastandwait"}))
                synchronization.add(3, target.name, id, "guarded-wait");

            if (block.next) flow.add(1, target.name, id, "sequence");
            if (op == "control_repeat" || op == "control_forever")
                flow.add(2, target.name, id, "loop");
            if (op == "control_repeat_until") flow.add(3, target.name, id, "conditional-loop");

            if (op == "event_whenflagclicked")
                interactivity.add(1, target.name, id, "green-flag");
            if (in_set(op, {"event_whenkeypressed", "event_whenthisspriteclicked",
                            "event_whenstageclicked", "sensing_askandwait",
                            "sensing_keypressed", "sensing_mousedown", "sensing_mousex",
                            "sensing_mousey"}))
                interactivity.add(2, target.name, id, "input-device");
            if (op.starts_with("videoSensing_"))
                interactivity.add(3, target.name, id, "camera");
            if (op == "sensing_loudness" ||
                (op == "event_whengreaterthan" &&
                 lower(field_value(block, "WHENGREATERTHANMENU")) == "loudness"))
                interactivity.add(3, target.name, id, "microphone");

            if (in_set(op, kSpriteModifiers)) data.add(1, target.name, id, "sprite-property");
            if (in_set(op, {"data_setvariableto", "data_changevariableby", "data_showvariable",
                            "data_hidevariable"}))
                data.add(2, target.name, id, "variable");
            if (in_set(op, kListOps)) data.add(3, target.name, id, "list");
        }
    }

    if (script_count > 1)
        for (auto& ev : script_roots) abstraction.at[1].push_back(ev);
    if (project.sprite_count() > 1)
        for (const auto& target : project.targets)
            if (!target.is_stage) abstraction.add(1, target.name, "", "multiple-sprites");

    for (const auto& [key, group] : hat_groups)
        if (group.second.size() > 1)
            for (const auto& ev : group.second)
                parallelism.at[static_cast<std::size_t>(group.first)].push_back(ev);

    if (has_broadcast && has_receive)
        for (const auto& ev : broadcast_pair) synchronization.at[2].push_back(ev);

    RubricScore score;
    score.abstraction = abstraction.resolve();
    score.parallelism = parallelism.resolve();
    score.logic = logic.resolve();
    score.synchronization = synchronization.resolve();
    score.flow_control = flow.resolve();
    score.interactivity = interactivity.resolve();
    score.data_representation = data.resolve();
    return score;
}

std::string mastery_label(int total, const LabelThresholds& thresholds) {
    if (total < 0 || total > 21)
        raise(ErrorCode::OutOfRange, "total " + std::to_string(total) + " outside 0..21");
    if (thresholds.basic_max < 0 || thresholds.basic_max >= thresholds.developing_max ||
        thresholds.developing_max > 21)
        raise(ErrorCode::OutOfRange, "label thresholds must satisfy 0 <= basic < developing <= 21");
    if (total <= thresholds.basic_max) return "basic";
    if (total <= thresholds.developing_max) return "developing";
    return "master";
}

json report_json(const RubricScore& score, const LabelThresholds& thresholds) {
    const std::pair<const char*, const DimensionScore*> dims[] = {
        {"abstraction", &score.abstraction},
        {"parallelism", &score.parallelism},
        {"logic", &score.logic},
        {"synchronization", &score.synchronization},
        {"flow control", &score.flow_control},
        {"interactivity", &score.interactivity},
        {"data representation", &score.data_representation},
    };

    json report = json::object();
    json evidence = json::object();
    for (const auto& [name, dim] : dims) {
        report[name] = dim->level;
        json items = json::array();
        for (const auto& ev : dim->evidence)
            items.push_back({{"target", ev.target}, {"block", ev.block}, {"rule", ev.rule}});
        evidence[name] = std::move(items);
    }
    report["total"] = score.total();
    report["label"] = mastery_label(score.total(), thresholds);
    report["evidence"] = std::move(evidence);
    return report;
}

} // namespace scratchkit::rubric
