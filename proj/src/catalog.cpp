#include "catalog.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "error.hpp"

namespace scratchkit::catalog {

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

namespace {

constexpr char32_t kHoleOpen = U'⟨';
constexpr char32_t kHoleClose = U'⟩';

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

char32_t closer_for(char32_t open) {
    switch (open) {
    case U'[': return U']';
    case U'(': return U')';
    case kHoleOpen: return kHoleClose;
    default: return 0;
    }
}

Category parse_category(const std::string& name, int line) {
    static const std::map<std::string, Category> table = {
        {"Motion", Category::Motion},     {"Looks", Category::Looks},
        {"Sound", Category::Sound},       {"Events", Category::Events},
        {"Control", Category::Control},   {"Sensing", Category::Sensing},
        {"Operators", Category::Operators}, {"Variables", Category::Variables},
    };
    auto it = table.find(name);
    if (it == table.end())
        raise(ErrorCode::MissingField, "line " + std::to_string(line) + ": unknown category \"" + name + "\"");
    return it->second;
}

Shape parse_shape(const std::string& name, int line) {
    static const std::map<std::string, Shape> table = {
        {"hat", Shape::Hat},         {"stack", Shape::Stack}, {"c-block", Shape::CBlock},
        {"reporter", Shape::Reporter}, {"boolean", Shape::Boolean}, {"cap", Shape::Cap},
    };
    auto it = table.find(name);
    if (it == table.end())
        raise(ErrorCode::MissingField, "line " + std::to_string(line) + ": unknown shape \"" + name + "\"");
    return it->second;
}

SlotKind parse_slot_kind(const std::string& name, int line) {
    static const std::map<std::string, SlotKind> table = {
        {"number", SlotKind::Number},   {"string", SlotKind::String},   {"menu", SlotKind::Menu},
        {"condition", SlotKind::Condition}, {"substack", SlotKind::Substack},
    };
    auto it = table.find(name);
    if (it == table.end())
        raise(ErrorCode::MissingField, "line " + std::to_string(line) + ": unknown slot kind \"" + name + "\"");
    return it->second;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!text.empty() && text.back() == sep) out.push_back("");
    return out;
}

std::size_t hole_count(std::string_view display) {
    auto cps = decode_utf8(display);
    return static_cast<std::size_t>(std::count(cps.begin(), cps.end(), kHoleOpen));
}

} // namespace

const char* category_name(Category c) {
    switch (c) {
    case Category::Motion: return "Motion";
    case Category::Looks: return "Looks";
    case Category::Sound: return "Sound";
    case Category::Events: return "Events";
    case Category::Control: return "Control";
    case Category::Sensing: return "Sensing";
    case Category::Operators: return "Operators";
    case Category::Variables: return "Variables";
    }
    return "?";
}

const char* slot_kind_name(SlotKind k) {
    switch (k) {
    case SlotKind::Number: return "number";
    case SlotKind::String: return "string";
    case SlotKind::Menu: return "menu";
    case SlotKind::Condition: return "condition";
    case SlotKind::Substack: return "substack";
    }
    return "?";
}

const char* shape_name(Shape s) {
    switch (s) {
    case Shape::Hat: return "hat";
    case Shape::Stack: return "stack";
    case Shape::CBlock: return "c-block";
    case Shape::Reporter: return "reporter";
    case Shape::Boolean: return "boolean";
    case Shape::Cap: return "cap";
    }
    return "?";
}

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c & 0xE0) == 0xC0 && i + 1 < text.size()) {
            cp = static_cast<char32_t>(c & 0x1F) << 6 | (text[i + 1] & 0x3F);
            len = 2;
        } else if ((c & 0xF0) == 0xE0 && i + 2 < text.size()) {
            cp = static_cast<char32_t>(c & 0x0F) << 12 | (text[i + 1] & 0x3F) << 6 | (text[i + 2] & 0x3F);
            len = 3;
        } else if ((c & 0xF8) == 0xF0 && i + 3 < text.size()) {
            cp = static_cast<char32_t>(c & 0x07) << 18 | (text[i + 1] & 0x3F) << 12 | (text[i + 2] & 0x3F) << 6 |
                 (text[i + 3] & 0x3F);
            len = 4;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string normalize_text(std::string_view text) {
    std::u32string cps = decode_utf8(text);

    // Bracketed, parenthesized and angle-marked segments become empty holes.
    // An opener whose closer never arrives is dropped: keeping it would let a
    // second pass pair it with a hole made further right, breaking idempotence.
    std::u32string holed;
    for (std::size_t i = 0; i < cps.size();) {
        char32_t close = closer_for(cps[i]);
        if (close != 0) {
            auto end = std::find(cps.begin() + static_cast<std::ptrdiff_t>(i) + 1, cps.end(), close);
            if (end != cps.end()) {
                holed.push_back(kHoleOpen);
                holed.push_back(kHoleClose);
                i = static_cast<std::size_t>(end - cps.begin()) + 1;
            } else {
                ++i;
            }
            continue;
        }
        holed.push_back(cps[i]);
        ++i;
    }

    std::u32string collapsed;
    bool pending_space = false;
    for (char32_t c : holed) {
        if (is_space(c)) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) collapsed.push_back(U' ');
        pending_space = false;
        if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
        collapsed.push_back(c);
    }

    std::string out;
    for (char32_t c : collapsed) encode_utf8(c, out);
    return out;
}

int levenshtein(std::string_view a, std::string_view b) {
    std::u32string ua = decode_utf8(a);
    std::u32string ub = decode_utf8(b);
    const std::size_t n = ua.size(), m = ub.size();
    if (n == 0) return static_cast<int>(m);
    if (m == 0) return static_cast<int>(n);

    std::vector<int> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            int sub = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

Catalog Catalog::parse(std::string_view text) {
    Catalog cat;
    std::map<std::string, std::size_t> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cols = split(line, '\t');
        if (cols.size() < 4)
            raise(ErrorCode::MissingField, "line " + std::to_string(line_no) + ": expected at least 4 columns");
        CatalogEntry entry;
        entry.opcode = cols[0];
        entry.category = parse_category(cols[1], line_no);
        entry.shape = parse_shape(cols[2], line_no);
        entry.display_text = cols[3];
        if (entry.opcode.empty() || entry.display_text.empty())
            raise(ErrorCode::MissingField, "line " + std::to_string(line_no) + ": empty opcode or display text");
        if (cols.size() >= 5 && !cols[4].empty()) {
            for (const auto& item : split(cols[4], ';')) {
                if (item.empty()) continue;
                auto parts = split(item, ':');
                if (parts.size() < 2)
                    raise(ErrorCode::MissingField,
                          "line " + std::to_string(line_no) + ": slot \"" + item + "\" needs NAME:kind");
                Slot slot;
                slot.name = parts[0];
                slot.kind = parse_slot_kind(parts[1], line_no);
                if (parts.size() >= 3 && parts[2] != "-") slot.menu_opcode = parts[2];
                if (parts.size() >= 4) slot.default_value = parts[3];
                entry.slots.push_back(std::move(slot));
            }
        }
        std::size_t value_slots = 0;
        for (const auto& s : entry.slots)
            if (s.kind != SlotKind::Substack) ++value_slots;
        if (hole_count(entry.display_text) != value_slots)
            raise(ErrorCode::MissingField, "line " + std::to_string(line_no) + ": " + entry.opcode +
                                               " display holes do not match its non-substack slots");
        if (!seen.emplace(entry.opcode, cat.entries_.size()).second)
            raise(ErrorCode::DuplicateOpcode, "duplicate opcode \"" + entry.opcode + "\"");
        cat.entries_.push_back(std::move(entry));
    }
    return cat;
}

Catalog Catalog::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open catalog file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const CatalogEntry* Catalog::find(std::string_view opcode) const {
    for (const auto& e : entries_)
        if (e.opcode == opcode) return &e;
    return nullptr;
}

MatchResult match_block_filtered(const std::string& query, const Catalog& catalog, double threshold,
                                 const std::function<bool(const CatalogEntry&)>& keep) {
    if (catalog.empty()) raise(ErrorCode::EmptyCatalog, "cannot match against an empty catalog");
    std::string nq = normalize_text(query);
    std::size_t nq_len = decode_utf8(nq).size();

    const CatalogEntry* best = nullptr;
    int best_distance = 0;
    std::size_t best_len = 0;
    bool tie = false;
    for (const auto& entry : catalog.entries()) {
        if (keep && !keep(entry)) continue;
        std::string nd = normalize_text(entry.display_text);
        int d = levenshtein(nq, nd);
        if (!best || d < best_distance) {
            best = &entry;
            best_distance = d;
            best_len = decode_utf8(nd).size();
            tie = false;
        } else if (d == best_distance) {
            tie = true;
            // Earlier category, then lower opcode, wins the tie.
            if (std::tie(entry.category, entry.opcode) < std::tie(best->category, best->opcode)) {
                best = &entry;
                best_len = decode_utf8(nd).size();
            }
        }
    }
    if (!best) raise(ErrorCode::EmptyCatalog, "no catalog entry passes the candidate filter");

    std::size_t denom = std::max(nq_len, best_len);
    double normalized = denom == 0 ? 0.0 : static_cast<double>(best_distance) / static_cast<double>(denom);
    if (normalized > threshold)
        raise(ErrorCode::NoMatch, "no block matches \"" + query + "\" (closest: " + best->opcode + " at " +
                                      std::to_string(normalized) + ")");
    return {best->opcode, best_distance, normalized, tie};
}

MatchResult match_block(const std::string& query, const Catalog& catalog, double threshold) {
    return match_block_filtered(query, catalog, threshold, nullptr);
}

} // namespace scratchkit::catalog
