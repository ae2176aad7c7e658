#pragma once

#include <string>

#include "franson/event_sim.hpp"

namespace franson::tag_io {

// Time-tag file formats.
//
// CSV: one leading metadata comment, a header row, then one tag per row,
// sorted by time:
//     # config_hash=<16 hex> seed=<decimal>
//     channel,time_ps
//     1,12345
//
// Binary: little-endian throughout. A 32-byte header -- 8-byte magic
// "FRTAG001", u64 config hash, u64 seed, u64 record count -- followed by
// 16-byte records: u64 time_ps, u8 channel, 7 zero pad bytes.

inline constexpr char kMagic[8] = {'F', 'R', 'T', 'A', 'G', '0', '0', '1'};

void write_csv(const std::string& path, const TimeTagStream& stream);
void write_binary(const std::string& path, const TimeTagStream& stream);

// Autodetects the format by the binary magic.
TimeTagStream read_file(const std::string& path);

} // namespace franson::tag_io
