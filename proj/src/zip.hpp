#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace scratchkit::zip {

using Bytes = std::vector<std::uint8_t>;

struct Member {
    std::string name;
    Bytes data;
};

// Parses a zip archive. Supports stored and deflate members; no zip64, no
// encryption. Throws Error(MalformedArchive) on anything unreadable.
std::vector<Member> read_archive(const Bytes& archive);

// Writes members in the given order with deflate compression and a fixed
// timestamp, so equal inputs produce identical bytes.
Bytes write_archive(const std::vector<Member>& members);

} // namespace scratchkit::zip
