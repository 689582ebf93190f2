#include "codegen.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>

#include "error.hpp"

namespace scratchkit::codegen {
namespace {

using catalog::Catalog;
using catalog::CatalogEntry;
using catalog::Slot;
using catalog::SlotKind;

// Stand-in for a quoted condition segment while the surrounding text is
// being tokenized; private-use, so it never appears in real queries.
constexpr char32_t kConditionMark = 0xE000;

const std::string kHoleMarker = "⟨⟩"; // ⟨⟩

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// "if "touching [car]" then" -> "if  then" + segments ["touching [car]"]
std::string strip_quoted(const std::string& text, std::vector<std::string>& segments) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] != '"') {
            out.push_back(text[pos++]);
            continue;
        }
        std::size_t close = text.find('"', pos + 1);
        if (close == std::string::npos) close = text.size();
        segments.push_back(text.substr(pos + 1, close - pos - 1));
        catalog::encode_utf8(kConditionMark, out);
        pos = close < text.size() ? close + 1 : close;
    }
    return out;
}

struct Hole {
    bool condition = false;
    std::string text;
};

// Replaces [..] / (..) / ⟨..⟩ segments and condition marks with empty hole
// markers, capturing their contents in order, then normalizes.
std::string tokenize(const std::string& text, const std::vector<std::string>& quoted,
                     std::vector<Hole>& holes) {
    std::u32string cps = catalog::decode_utf8(text);
    std::string out;
    std::size_t qi = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t c = cps[i];
        if (c == kConditionMark) {
            holes.push_back({true, qi < quoted.size() ? quoted[qi++] : std::string()});
            out += kHoleMarker;
            continue;
        }
        char32_t close = c == U'[' ? U']' : c == U'(' ? U')' : c == U'⟨' ? U'⟩' : 0;
        if (close == 0) {
            catalog::encode_utf8(c, out);
            continue;
        }
        std::size_t end = i + 1;
        while (end < cps.size() && cps[end] != close) ++end;
        std::string content;
        for (std::size_t j = i + 1; j < end; ++j) catalog::encode_utf8(cps[j], content);
        holes.push_back({false, trim(content)});
        out += kHoleMarker;
        i = end < cps.size() ? end : cps.size();
    }
    return catalog::normalize_text(out);
}

std::size_t count_markers(const std::string& s) {
    std::size_t n = 0;
    for (std::size_t pos = s.find(kHoleMarker); pos != std::string::npos;
         pos = s.find(kHoleMarker, pos + kHoleMarker.size()))
        ++n;
    return n;
}

struct ResolvedArgs {
    std::vector<std::string> literals;                      // per value-taking slot
    std::vector<std::optional<std::string>> condition_texts; // per condition slot
};

// Lines the query's hole contents up with the entry's slots by walking the
// display text's fixed segments through the query. Returns nothing when the
// segments don't all appear in order (typos); the caller then falls back to
// positional assignment.
std::optional<ResolvedArgs> align(const CatalogEntry& entry, const std::string& query,
                                  const std::vector<Hole>& holes) {
    std::string display = catalog::normalize_text(entry.display_text);
    std::vector<std::string> segments;
    std::size_t start = 0;
    for (std::size_t pos = display.find(kHoleMarker); pos != std::string::npos;
         pos = display.find(kHoleMarker, start)) {
        segments.push_back(display.substr(start, pos - start));
        start = pos + kHoleMarker.size();
    }
    segments.push_back(display.substr(start));
    std::size_t n_holes = segments.size() - 1;
    if (n_holes == 0) return ResolvedArgs{};

    std::vector<std::string> fillers;
    std::size_t pos = 0;
    if (!segments.front().empty()) {
        if (query.rfind(segments.front(), 0) != 0) return std::nullopt;
        pos = segments.front().size();
    }
    for (std::size_t i = 1; i <= n_holes; ++i) {
        const std::string& seg = segments[i];
        if (seg.empty()) {
            if (i != n_holes) return std::nullopt; // two adjacent holes
            fillers.push_back(trim(query.substr(pos)));
            pos = query.size();
        } else if (i == n_holes) {
            std::size_t found = query.rfind(seg);
            if (found == std::string::npos || found < pos ||
                found + seg.size() != query.size())
                return std::nullopt;
            fillers.push_back(trim(query.substr(pos, found - pos)));
            pos = query.size();
        } else {
            std::size_t found = query.find(seg, pos);
            if (found == std::string::npos) return std::nullopt;
            fillers.push_back(trim(query.substr(pos, found - pos)));
            pos = found + seg.size();
        }
    }

    ResolvedArgs args;
    std::size_t cursor = 0; // into holes
    std::size_t fi = 0;
    for (const auto& slot : entry.slots) {
        if (slot.kind == SlotKind::Substack) continue;
        const std::string& filler = fillers[fi++];
        std::size_t markers = count_markers(filler);
        if (slot.kind == SlotKind::Condition) {
            if (filler.empty()) {
                args.condition_texts.push_back(std::nullopt);
            } else if (filler == kHoleMarker) {
                args.condition_texts.push_back(holes[cursor++].text);
            } else {
                // re-expand embedded holes so the phrase parses on its own
                std::string text = filler;
                for (std::size_t k = 0; k < markers; ++k) {
                    const Hole& h = holes[cursor++];
                    std::string back = h.condition ? "\"" + h.text + "\"" : "[" + h.text + "]";
                    text.replace(text.find(kHoleMarker), kHoleMarker.size(), back);
                }
                args.condition_texts.push_back(text);
            }
        } else {
            if (filler.empty()) {
                args.literals.emplace_back();
            } else if (filler == kHoleMarker) {
                args.literals.push_back(holes[cursor++].text);
            } else if (markers == 0) {
                args.literals.push_back(filler);
            } else {
                return std::nullopt; // text mixed with holes; give up on alignment
            }
        }
    }
    if (cursor != holes.size())
        raise(ErrorCode::ArityMismatch,
              "\"" + entry.opcode + "\" takes " + std::to_string(fillers.size()) +
                  " value(s) but the text provides more");
    return args;
}

// Positional fallback: bracket contents feed value slots, quoted segments
// feed condition slots, both in order.
ResolvedArgs positional(const CatalogEntry& entry, const std::string& source,
                        const std::vector<Hole>& holes) {
    std::deque<std::string> literal_holes;
    std::deque<std::string> condition_holes;
    for (const auto& h : holes) (h.condition ? condition_holes : literal_holes).push_back(h.text);

    ResolvedArgs args;
    for (const auto& slot : entry.slots) {
        if (slot.kind == SlotKind::Substack) continue;
        if (slot.kind == SlotKind::Condition) {
            if (!condition_holes.empty()) {
                args.condition_texts.push_back(condition_holes.front());
                condition_holes.pop_front();
            } else if (!literal_holes.empty()) {
                args.condition_texts.push_back("[" + literal_holes.front() + "]");
                literal_holes.pop_front();
            } else {
                args.condition_texts.push_back(std::nullopt);
            }
        } else {
            if (!literal_holes.empty()) {
                args.literals.push_back(literal_holes.front());
                literal_holes.pop_front();
            } else {
                args.literals.emplace_back();
            }
        }
    }
    if (!literal_holes.empty() || !condition_holes.empty())
        raise(ErrorCode::ArityMismatch, "\"" + source + "\" carries more values than \"" +
                                            entry.opcode + "\" has slots");
    return args;
}

PlannedBlock compile_node(const std::string& text, const Catalog& cat, double threshold,
                          bool condition_position) {
    PlannedBlock node;
    node.source = trim(text);

    std::vector<std::string> quoted;
    std::string unquoted = strip_quoted(node.source, quoted);
    std::vector<Hole> holes;
    std::string query = tokenize(unquoted, quoted, holes);

    catalog::MatchResult match =
        condition_position
            ? catalog::match_block_filtered(query, cat, threshold,
                                            [](const CatalogEntry& e) { return e.is_boolean_or_reporter(); })
            : catalog::match_block(query, cat, threshold);
    node.entry = cat.find(match.opcode);

    auto args = align(*node.entry, query, holes);
    if (!args) args = positional(*node.entry, node.source, holes);
    node.literals = std::move(args->literals);
    for (auto& cond : args->condition_texts) {
        if (cond)
            node.conditions.push_back(compile_node(*cond, cat, threshold, true));
        else
            node.conditions.emplace_back(); // slot left empty
    }
    return node;
}

bool has_slot(const CatalogEntry& entry, const std::string& name) {
    return std::any_of(entry.slots.begin(), entry.slots.end(),
                       [&](const Slot& s) { return s.name == name; });
}

struct Emitter {
    TemplatePatch& patch;
    int counter = 0;

    std::string fresh() { return "t" + std::to_string(++counter); }

    std::string emit_node(const PlannedBlock& node, std::optional<std::string> parent, bool top) {
        const CatalogEntry& entry = *node.entry;
        std::string id = fresh();
        std::size_t at = patch.blocks.size();
        patch.blocks.emplace_back();

        sb3::Block b;
        b.id = id;
        b.opcode = entry.opcode;
        b.parent = std::move(parent);
        b.top_level = top;
        if (top) {
            b.x = patch.anchor ? patch.anchor->first : 0;
            b.y = patch.anchor ? patch.anchor->second : 0;
        }

        std::size_t vi = 0, ci = 0;
        for (const auto& slot : entry.slots) {
            switch (slot.kind) {
            case SlotKind::Number:
            case SlotKind::String: {
                std::string lit = vi < node.literals.size() && !node.literals[vi].empty()
                                      ? node.literals[vi]
                                      : slot.default_value;
                ++vi;
                int primitive = slot.kind == SlotKind::Number ? 4 : 10;
                b.inputs[slot.name] = json::array({1, json::array({primitive, lit})});
                break;
            }
            case SlotKind::Menu: {
                std::string lit = vi < node.literals.size() && !node.literals[vi].empty()
                                      ? node.literals[vi]
                                      : slot.default_value;
                ++vi;
                if (slot.name == "BROADCAST_INPUT") {
                    b.inputs[slot.name] = json::array({1, json::array({11, lit, "bc-" + lit})});
                } else if (!slot.menu_opcode.empty()) {
                    sb3::Block shadow;
                    shadow.id = fresh();
                    shadow.opcode = slot.menu_opcode;
                    shadow.parent = id;
                    shadow.shadow = true;
                    shadow.fields[slot.name] = json::array({lit, nullptr});
                    b.inputs[slot.name] = json::array({1, shadow.id});
                    patch.blocks.push_back(std::move(shadow));
                } else if (slot.name == "BROADCAST_OPTION") {
                    b.fields[slot.name] = json::array({lit, "bc-" + lit});
                } else if (slot.name == "VARIABLE") {
                    b.fields[slot.name] = json::array({lit, "var-" + lit});
                } else if (slot.name == "LIST") {
                    b.fields[slot.name] = json::array({lit, "list-" + lit});
                } else {
                    b.fields[slot.name] = json::array({lit, nullptr});
                }
                break;
            }
            case SlotKind::Condition: {
                const PlannedBlock* cond = ci < node.conditions.size() ? &node.conditions[ci] : nullptr;
                ++ci;
                if (cond && cond->entry)
                    b.inputs[slot.name] = json::array({2, emit_node(*cond, id, false)});
                break;
            }
            case SlotKind::Substack: {
                const auto& list = slot.name == "SUBSTACK2" ? node.else_children : node.children;
                if (!list.empty())
                    b.inputs[slot.name] = json::array({2, emit_chain(list, id, false)});
                break;
            }
            }
        }

        patch.blocks[at] = std::move(b);
        return id;
    }

    std::string emit_chain(const std::vector<PlannedBlock>& nodes, std::optional<std::string> parent,
                           bool top) {
        std::string first, prev;
        std::size_t prev_at = 0;
        for (const auto& node : nodes) {
            std::size_t at = patch.blocks.size();
            std::string id = emit_node(node, prev.empty() ? parent : std::optional<std::string>(prev),
                                       top && prev.empty());
            if (!prev.empty()) patch.blocks[prev_at].next = id;
            if (first.empty()) first = id;
            prev = id;
            prev_at = at;
        }
        return first;
    }
};

// References that may need declarations on the stage: broadcast inputs
// ([11, name, id] primitives) and broadcast/variable/list fields.
void declare_references(sb3::ProjectModel& model, const std::vector<sb3::Block>& blocks) {
    sb3::Target* stage = nullptr;
    for (auto& target : model.targets)
        if (target.is_stage) stage = &target;
    if (!stage) return;

    auto declare = [&](const char* section, const std::string& id, const json& value) {
        if (!stage->extra.contains(section)) stage->extra[section] = json::object();
        if (!stage->extra[section].contains(id)) stage->extra[section][id] = value;
    };

    for (const auto& block : blocks) {
        for (const auto& [name, field] : block.fields.items()) {
            if (!field.is_array() || field.size() < 2 || !field[0].is_string() ||
                !field[1].is_string())
                continue;
            std::string value = field[0].get<std::string>();
            std::string id = field[1].get<std::string>();
            if (name == "BROADCAST_OPTION")
                declare("broadcasts", id, value);
            else if (name == "VARIABLE")
                declare("variables", id, json::array({value, 0}));
            else if (name == "LIST")
                declare("lists", id, json::array({value, json::array()}));
        }
        for (const auto& [name, input] : block.inputs.items()) {
            if (!input.is_array()) continue;
            for (const auto& element : input) {
                if (element.is_array() && element.size() >= 3 && element[0].is_number() &&
                    element[0].get<int>() == 11 && element[1].is_string() && element[2].is_string())
                    declare("broadcasts", element[2].get<std::string>(),
                            element[1].get<std::string>());
            }
        }
    }
}

} // namespace

json TemplatePatch::to_json() const {
    json blocks = json::object();
    for (const auto& b : this->blocks) blocks[b.id] = sb3::block_to_json(b);
    return {
        {"target", target_name},
        {"anchor", anchor ? json::array({anchor->first, anchor->second}) : json(nullptr)},
        {"blocks", std::move(blocks)},
    };
}

BlockPlan parse_block_list(const std::vector<std::string>& texts, const Catalog& cat,
                           double threshold) {
    if (texts.empty()) raise(ErrorCode::EmptyBlockArray, "no block descriptions given");

    BlockPlan plan;
    struct Frame {
        PlannedBlock* node;
        bool in_else = false;
    };
    std::vector<Frame> open;

    auto sink = [&]() -> std::vector<PlannedBlock>& {
        if (open.empty()) return plan.chain;
        Frame& frame = open.back();
        return frame.in_else ? frame.node->else_children : frame.node->children;
    };

    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::string text = trim(texts[i]);
        std::string word = lower(text);
        if (word == "end") {
            if (open.empty())
                raise(ErrorCode::DanglingEnd,
                      "block " + std::to_string(i + 1) + ": \"end\" with nothing open");
            open.pop_back();
            continue;
        }
        if (word == "else") {
            if (open.empty() || !has_slot(*open.back().node->entry, "SUBSTACK2") ||
                open.back().in_else)
                raise(ErrorCode::DanglingEnd,
                      "block " + std::to_string(i + 1) + ": \"else\" without an open if/else");
            open.back().in_else = true;
            continue;
        }

        PlannedBlock node;
        try {
            node = compile_node(text, cat, threshold, false);
        } catch (const Error& e) {
            raise(e.code(), "block " + std::to_string(i + 1) + ": " + e.what());
        }

        if (plan.chain.empty() && open.empty() && !node.entry->is_hat()) {
            const CatalogEntry* flag = cat.find("event_whenflagclicked");
            if (flag) {
                PlannedBlock hat;
                hat.entry = flag;
                hat.source = flag->display_text;
                plan.chain.push_back(std::move(hat));
            }
        }

        bool opens = node.entry->is_c_block();
        auto& list = sink();
        list.push_back(std::move(node));
        if (opens) open.push_back({&list.back()});
    }
    return plan;
}

TemplatePatch emit_script(const BlockPlan& plan, std::optional<std::pair<int, int>> anchor) {
    TemplatePatch patch;
    patch.anchor = anchor;
    Emitter emitter{patch};
    emitter.emit_chain(plan.chain, std::nullopt, true);
    return patch;
}

sb3::ProjectModel inject(const sb3::ProjectModel& model, const TemplatePatch& patch) {
    sb3::ProjectModel out = model;

    sb3::Target* target = nullptr;
    if (patch.target_name.empty()) {
        for (auto& t : out.targets)
            if (!t.is_stage) {
                target = &t;
                break;
            }
        if (!target) raise(ErrorCode::UnknownTarget, "project has no sprite to receive the script");
    } else {
        for (auto& t : out.targets)
            if (t.name == patch.target_name) {
                target = &t;
                break;
            }
        if (!target)
            raise(ErrorCode::UnknownTarget, "no target named \"" + patch.target_name + "\"");
    }

    // Freshen ids under collision; block ids are scoped per target.
    std::map<std::string, std::string> rename;
    bool collides = std::any_of(patch.blocks.begin(), patch.blocks.end(),
                                [&](const sb3::Block& b) { return target->blocks.count(b.id) > 0; });
    if (collides) {
        for (int generation = 2;; ++generation) {
            rename.clear();
            bool clean = true;
            for (const auto& b : patch.blocks) {
                std::string fresh = b.id + "-" + std::to_string(generation);
                if (target->blocks.count(fresh)) {
                    clean = false;
                    break;
                }
                rename[b.id] = fresh;
            }
            if (clean) break;
        }
    }

    auto renamed = [&](const std::string& id) {
        auto it = rename.find(id);
        return it == rename.end() ? id : it->second;
    };

    std::vector<sb3::Block> blocks = patch.blocks;
    for (auto& b : blocks) {
        b.id = renamed(b.id);
        if (b.next) b.next = renamed(*b.next);
        if (b.parent) b.parent = renamed(*b.parent);
        for (auto& [name, input] : b.inputs.items()) {
            if (!input.is_array()) continue;
            for (std::size_t i = 1; i < input.size(); ++i)
                if (input[i].is_string()) input[i] = renamed(input[i].get<std::string>());
        }
    }

    if (!patch.anchor) {
        int right = 0;
        bool any = false;
        for (const auto& [id, b] : target->blocks)
            if (b.top_level && b.x) {
                right = any ? std::max(right, *b.x) : *b.x;
                any = true;
            }
        int x = any ? right + 300 : 0;
        for (auto& b : blocks)
            if (b.top_level) {
                b.x = x;
                b.y = 0;
            }
    }

    declare_references(out, blocks);

    for (auto& b : blocks) {
        if (target->blocks.count(b.id))
            raise(ErrorCode::IdCollision, "block id \"" + b.id + "\" already present");
        std::string id = b.id;
        target->blocks.emplace(id, std::move(b));
    }

    auto violations = sb3::validate(out);
    if (!violations.empty())
        raise(ErrorCode::ValidationFailure,
              "injected project fails validation: " + violations.front().rule + " (" +
                  violations.front().detail + ")");
    return out;
}

} // namespace scratchkit::codegen
