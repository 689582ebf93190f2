#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace scratchkit::catalog {

// The eight palette categories in chain-of-thought order; doubles as the
// deterministic tie-break order for equal match distances.
enum class Category { Motion, Looks, Sound, Events, Control, Sensing, Operators, Variables };

enum class SlotKind { Number, String, Menu, Condition, Substack };

enum class Shape { Hat, Stack, CBlock, Reporter, Boolean, Cap };

struct Slot {
    std::string name;
    SlotKind kind = SlotKind::String;
    // For Menu slots: opcode of the companion shadow menu block, or empty when
    // the value lives in a field on the block itself.
    std::string menu_opcode;
    std::string default_value;

    bool takes_value() const { return kind != SlotKind::Condition && kind != SlotKind::Substack; }
};

struct CatalogEntry {
    std::string opcode;
    std::string display_text; // with hole markers, e.g. "move ⟨⟩ steps"
    Category category;
    Shape shape = Shape::Stack;
    std::vector<Slot> slots;

    bool is_hat() const { return shape == Shape::Hat; }
    bool is_c_block() const { return shape == Shape::CBlock; }
    bool is_boolean_or_reporter() const { return shape == Shape::Boolean || shape == Shape::Reporter; }
};

struct MatchResult {
    std::string opcode;
    int distance = 0;
    double normalized_distance = 0.0;
    bool ambiguous = false;
};

const char* category_name(Category c);
const char* slot_kind_name(SlotKind k);
const char* shape_name(Shape s);

class Catalog {
  public:
    // One tab-separated record per entry:
    //   opcode <TAB> category <TAB> shape <TAB> display text <TAB> slots
    // slots = ';'-separated "NAME:kind[:menu-opcode-or--[:default]]".
    // Blank lines and '#' comments are skipped.
    static Catalog parse(std::string_view text);
    static Catalog load_file(const std::string& path);

    const std::vector<CatalogEntry>& entries() const { return entries_; }
    const CatalogEntry* find(std::string_view opcode) const;
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

  private:
    std::vector<CatalogEntry> entries_;
};

// Lowercases, collapses whitespace, and replaces [..] / (..) / ⟨..⟩ segments
// with the empty hole marker. Idempotent.
std::string normalize_text(std::string_view text);

// Edit distance over Unicode code points.
int levenshtein(std::string_view a, std::string_view b);

std::u32string decode_utf8(std::string_view text);
void encode_utf8(char32_t cp, std::string& out);

// Closest catalog entry to the query under the normalized edit distance.
// Ties break by category order then opcode and set `ambiguous`. Throws
// Error(NoMatch) when the best normalized distance exceeds the threshold.
MatchResult match_block(const std::string& query, const Catalog& catalog, double threshold = 0.25);

// Same, restricted to entries satisfying the predicate (used for condition
// phrases, which may only resolve to boolean/reporter blocks).
MatchResult match_block_filtered(const std::string& query, const Catalog& catalog, double threshold,
                                 const std::function<bool(const CatalogEntry&)>& keep);

} // namespace scratchkit::catalog
