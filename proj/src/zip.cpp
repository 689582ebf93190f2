#include "zip.hpp"

#include <cstring>
#include <zlib.h>

#include "error.hpp"

namespace scratchkit::zip {

namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSig = 0x02014b50;
constexpr std::uint32_t kEndOfCentralSig = 0x06054b50;

// DOS timestamp pinned to 1980-01-01 00:00:00 for deterministic output.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = 0x0021;

[[noreturn]] void malformed(const std::string& what) {
    raise(ErrorCode::MalformedArchive, "malformed archive: " + what);
}

std::uint16_t read_u16(const Bytes& b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(const Bytes& b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

Bytes inflate_raw(const std::uint8_t* data, std::size_t size, std::size_t expected) {
    Bytes out(expected);
    z_stream strm{};
    if (inflateInit2(&strm, -MAX_WBITS) != Z_OK) malformed("inflate init failed");
    strm.next_in = const_cast<Bytef*>(data);
    strm.avail_in = static_cast<uInt>(size);
    // zlib rejects a null next_out even when nothing will be written, so give
    // empty members a one-byte scratch target.
    std::uint8_t scratch = 0;
    strm.next_out = expected == 0 ? &scratch : out.data();
    strm.avail_out = expected == 0 ? 1 : static_cast<uInt>(out.size());
    int rc = inflate(&strm, Z_FINISH);
    inflateEnd(&strm);
    if (rc != Z_STREAM_END || strm.total_out != expected) malformed("deflate stream truncated or corrupt");
    return out;
}

Bytes deflate_raw(const Bytes& data) {
    z_stream strm{};
    if (deflateInit2(&strm, 6, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        raise(ErrorCode::IoError, "deflate init failed");
    Bytes out(deflateBound(&strm, static_cast<uLong>(data.size())));
    strm.next_in = const_cast<Bytef*>(data.data());
    strm.avail_in = static_cast<uInt>(data.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&strm, Z_FINISH);
    std::size_t written = strm.total_out;
    deflateEnd(&strm);
    if (rc != Z_STREAM_END) raise(ErrorCode::IoError, "deflate failed");
    out.resize(written);
    return out;
}

std::uint32_t crc_of(const Bytes& data) {
    return static_cast<std::uint32_t>(crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

} // namespace

std::vector<Member> read_archive(const Bytes& archive) {
    if (archive.size() < 22) malformed("too small");

    // End-of-central-directory record: scan backwards over the comment.
    std::size_t eocd = std::string::npos;
    std::size_t lo = archive.size() >= 22 + 0xffff ? archive.size() - 22 - 0xffff : 0;
    for (std::size_t i = archive.size() - 22 + 1; i-- > lo;) {
        if (read_u32(archive, i) == kEndOfCentralSig) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) malformed("no end-of-central-directory record");

    std::uint16_t count = read_u16(archive, eocd + 10);
    std::uint32_t cd_offset = read_u32(archive, eocd + 16);
    if (count == 0xffff || cd_offset == 0xffffffffu) malformed("zip64 archives are not supported");

    std::vector<Member> members;
    members.reserve(count);
    std::size_t pos = cd_offset;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (pos + 46 > archive.size() || read_u32(archive, pos) != kCentralHeaderSig)
            malformed("central directory entry out of place");
        std::uint16_t method = read_u16(archive, pos + 10);
        std::uint32_t crc = read_u32(archive, pos + 16);
        std::uint32_t csize = read_u32(archive, pos + 20);
        std::uint32_t usize = read_u32(archive, pos + 24);
        std::uint16_t name_len = read_u16(archive, pos + 28);
        std::uint16_t extra_len = read_u16(archive, pos + 30);
        std::uint16_t comment_len = read_u16(archive, pos + 32);
        std::uint32_t local_off = read_u32(archive, pos + 42);
        if (pos + 46 + name_len > archive.size()) malformed("truncated entry name");
        std::string name(reinterpret_cast<const char*>(archive.data() + pos + 46), name_len);
        pos += 46 + name_len + extra_len + comment_len;

        if (local_off + 30 > archive.size() || read_u32(archive, local_off) != kLocalHeaderSig)
            malformed("bad local header for " + name);
        std::uint16_t lname = read_u16(archive, local_off + 26);
        std::uint16_t lextra = read_u16(archive, local_off + 28);
        std::size_t data_off = local_off + 30 + lname + lextra;
        if (data_off + csize > archive.size()) malformed("truncated data for " + name);

        Bytes data;
        if (method == 0) {
            data.assign(archive.begin() + static_cast<std::ptrdiff_t>(data_off),
                        archive.begin() + static_cast<std::ptrdiff_t>(data_off + csize));
        } else if (method == 8) {
            data = inflate_raw(archive.data() + data_off, csize, usize);
        } else {
            malformed("unsupported compression method for " + name);
        }
        if (crc_of(data) != crc) malformed("crc mismatch for " + name);
        members.push_back({std::move(name), std::move(data)});
    }
    return members;
}

Bytes write_archive(const std::vector<Member>& members) {
    Bytes out;
    struct CdEntry {
        std::string name;
        std::uint32_t crc, csize, usize, offset;
    };
    std::vector<CdEntry> cd;
    cd.reserve(members.size());

    for (const auto& m : members) {
        Bytes packed = deflate_raw(m.data);
        CdEntry e{m.name, crc_of(m.data), static_cast<std::uint32_t>(packed.size()),
                  static_cast<std::uint32_t>(m.data.size()), static_cast<std::uint32_t>(out.size())};
        put_u32(out, kLocalHeaderSig);
        put_u16(out, 20);       // version needed
        put_u16(out, 0);        // flags
        put_u16(out, 8);        // deflate
        put_u16(out, kDosTime);
        put_u16(out, kDosDate);
        put_u32(out, e.crc);
        put_u32(out, e.csize);
        put_u32(out, e.usize);
        put_u16(out, static_cast<std::uint16_t>(m.name.size()));
        put_u16(out, 0);        // extra
        out.insert(out.end(), m.name.begin(), m.name.end());
        out.insert(out.end(), packed.begin(), packed.end());
        cd.push_back(std::move(e));
    }

    std::size_t cd_start = out.size();
    for (const auto& e : cd) {
        put_u32(out, kCentralHeaderSig);
        put_u16(out, 20); // version made by
        put_u16(out, 20); // version needed
        put_u16(out, 0);
        put_u16(out, 8);
        put_u16(out, kDosTime);
        put_u16(out, kDosDate);
        put_u32(out, e.crc);
        put_u32(out, e.csize);
        put_u32(out, e.usize);
        put_u16(out, static_cast<std::uint16_t>(e.name.size()));
        put_u16(out, 0); // extra
        put_u16(out, 0); // comment
        put_u16(out, 0); // disk
        put_u16(out, 0); // internal attrs
        put_u32(out, 0); // external attrs
        put_u32(out, e.offset);
        out.insert(out.end(), e.name.begin(), e.name.end());
    }
    std::size_t cd_size = out.size() - cd_start;

    put_u32(out, kEndOfCentralSig);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, static_cast<std::uint16_t>(cd.size()));
    put_u16(out, static_cast<std::uint16_t>(cd.size()));
    put_u32(out, static_cast<std::uint32_t>(cd_size));
    put_u32(out, static_cast<std::uint32_t>(cd_start));
    put_u16(out, 0); // comment length
    return out;
}

} // namespace scratchkit::zip
