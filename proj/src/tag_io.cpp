#include "franson/tag_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>

#include "franson/error.hpp"

namespace franson::tag_io {

namespace {

std::uint64_t hash_to_u64(const std::string& hex) {
    if (hex.empty()) return 0;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), out, 16);
    if (ec != std::errc{} || ptr != hex.data() + hex.size())
        throw_invalid("config hash '" + hex + "' is not hexadecimal");
    return out;
}

std::string u64_to_hash(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf, 16);
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace

void write_csv(const std::string& path, const TimeTagStream& stream) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot write tag file '" + path + "'");
    std::string text;
    text.reserve(32 * stream.tags_ps.size() / 2 + 64);
    text += "# config_hash=";
    text += stream.origin.config_hash.empty() ? u64_to_hash(0) : stream.origin.config_hash;
    text += " seed=";
    text += std::to_string(stream.origin.seed);
    text += "\nchannel,time_ps\n";
    const std::string prefix = std::to_string(stream.channel) + ",";
    for (const std::int64_t t : stream.tags_ps) {
        text += prefix;
        text += std::to_string(t);
        text += '\n';
    }
    out << text;
    if (!out) throw_io("failed while writing tag file '" + path + "'");
}

void write_binary(const std::string& path, const TimeTagStream& stream) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot write tag file '" + path + "'");
    std::string bytes;
    bytes.reserve(32 + 16 * stream.tags_ps.size());
    bytes.append(kMagic, sizeof(kMagic));
    put_u64(bytes, hash_to_u64(stream.origin.config_hash));
    put_u64(bytes, stream.origin.seed);
    put_u64(bytes, stream.tags_ps.size());
    for (const std::int64_t t : stream.tags_ps) {
        if (t < 0) throw_invalid("binary tag format requires timestamps >= 0");
        put_u64(bytes, static_cast<std::uint64_t>(t));
        bytes.push_back(static_cast<char>(stream.channel));
        bytes.append(7, '\0');
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw_io("failed while writing tag file '" + path + "'");
}

namespace {

TimeTagStream read_binary(const std::string& path, const std::string& bytes) {
    if (bytes.size() < 32) throw_io("tag file '" + path + "' is truncated");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    TimeTagStream stream;
    stream.origin.config_hash = u64_to_hash(get_u64(p + 8));
    stream.origin.seed = get_u64(p + 16);
    const std::uint64_t count = get_u64(p + 24);
    if (bytes.size() != 32 + 16 * count)
        throw_io("tag file '" + path + "' length does not match its record count");
    stream.tags_ps.reserve(count);
    int channel = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned char* rec = p + 32 + 16 * i;
        stream.tags_ps.push_back(static_cast<std::int64_t>(get_u64(rec)));
        channel = rec[8];
    }
    stream.channel = channel;
    return stream;
}

TimeTagStream read_csv(const std::string& path, const std::string& text) {
    TimeTagStream stream;
    std::size_t pos = 0;
    bool header_seen = false;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto hash_at = line.find("config_hash=");
            if (hash_at != std::string_view::npos)
                stream.origin.config_hash = std::string(line.substr(hash_at + 12, 16));
            const auto seed_at = line.find("seed=");
            if (seed_at != std::string_view::npos) {
                const std::string_view v = line.substr(seed_at + 5);
                std::from_chars(v.data(), v.data() + v.size(), stream.origin.seed);
            }
            continue;
        }
        if (!header_seen) {
            if (line != "channel,time_ps")
                throw_io("tag file '" + path + "' line " + std::to_string(line_no) +
                         ": expected header 'channel,time_ps'");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos)
            throw_io("tag file '" + path + "' line " + std::to_string(line_no) + ": malformed row");
        int channel = 0;
        std::int64_t t = 0;
        const auto cr1 = std::from_chars(line.data(), line.data() + comma, channel);
        const auto cr2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), t);
        if (cr1.ec != std::errc{} || cr2.ec != std::errc{} ||
            cr2.ptr != line.data() + line.size())
            throw_io("tag file '" + path + "' line " + std::to_string(line_no) + ": malformed row");
        stream.channel = channel;
        stream.tags_ps.push_back(t);
    }
    if (!header_seen) throw_io("tag file '" + path + "' has no header row");
    return stream;
}

} // namespace

TimeTagStream read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open tag file '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= sizeof(kMagic) && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0)
        return read_binary(path, bytes);
    return read_csv(path, bytes);
}

} // namespace franson::tag_io
