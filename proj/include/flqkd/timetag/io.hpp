#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "flqkd/error.hpp"
#include "flqkd/timetag/engine.hpp"

namespace flqkd::timetag {

struct TagRecord {
    std::uint64_t timestamp_ps = 0;
    std::uint8_t channel = 0;

    friend bool operator==(const TagRecord&, const TagRecord&) = default;
    friend bool operator<(const TagRecord& a, const TagRecord& b) noexcept {
        return a.timestamp_ps != b.timestamp_ps ? a.timestamp_ps < b.timestamp_ps : a.channel < b.channel;
    }
};

inline constexpr std::array<char, 8> kBinaryMagic{'F', 'L', 'Q', 'T', 'T', 'A', 'G', '1'};
inline constexpr std::size_t kBinaryHeaderSize = 16;
inline constexpr std::size_t kBinaryRecordSize = 16;

/// All events of the given streams in time order (ties broken by channel).
template <typename Streams>
std::vector<TagRecord> merge_streams(const Streams& streams) {
    std::vector<TagRecord> out;
    std::size_t total = 0;
    for (const TimeTagStream& s : streams) total += s.timestamps.size();
    out.reserve(total);
    for (const TimeTagStream& s : streams) {
        for (Picoseconds t : s.timestamps) {
            flqkd::detail::require<FormatError>(t >= 0, "merge_streams: negative timestamp");
            out.push_back({static_cast<std::uint64_t>(t), s.channel_id});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Splits records back into per-channel streams 0..n_channels-1.
inline std::vector<TimeTagStream> split_records(std::span<const TagRecord> records, double duration_s,
                                                std::size_t n_channels = kNumChannels) {
    std::vector<TimeTagStream> out(n_channels);
    for (std::size_t ch = 0; ch < n_channels; ++ch) {
        out[ch].channel_id = static_cast<std::uint8_t>(ch);
        out[ch].duration_s = duration_s;
    }
    for (const auto& r : records) {
        flqkd::detail::require<FormatError>(r.channel < n_channels, "split_records: channel id out of range");
        out[r.channel].timestamps.push_back(static_cast<Picoseconds>(r.timestamp_ps));
    }
    return out;
}

inline void write_csv(std::ostream& os, std::span<const TagRecord> records) {
    os << "channel,timestamp_ps\n";
    for (const auto& r : records) os << static_cast<unsigned>(r.channel) << ',' << r.timestamp_ps << '\n';
}

inline std::vector<TagRecord> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "channel,timestamp_ps") {
        throw FormatError("read_csv: missing 'channel,timestamp_ps' header");
    }
    std::vector<TagRecord> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw FormatError("read_csv: malformed row at line " + std::to_string(line_no));
        }
        const char* begin = line.data();
        const char* end = begin + line.size();
        unsigned ch = 0;
        std::uint64_t ts = 0;
        const auto [ch_end, ch_err] = std::from_chars(begin, begin + comma, ch);
        const auto [ts_end, ts_err] = std::from_chars(begin + comma + 1, end, ts);
        if (ch_err != std::errc{} || ch_end != begin + comma || ts_err != std::errc{} || ts_end != end || ch > 255) {
            throw FormatError("read_csv: malformed row at line " + std::to_string(line_no));
        }
        out.push_back({ts, static_cast<std::uint8_t>(ch)});
    }
    if (!std::is_sorted(out.begin(), out.end())) throw FormatError("read_csv: rows are not time-ordered");
    return out;
}

namespace detail {

inline void put_le(char* dst, std::uint64_t v, std::size_t bytes) {
    for (std::size_t i = 0; i < bytes; ++i) dst[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
}

inline std::uint64_t get_le(const char* src, std::size_t bytes) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(src[i])) << (8 * i);
    return v;
}

}  // namespace detail

/// 16-byte header ("FLQTTAG1", u32 record count, 4 zero bytes) followed by
/// 16-byte records (u64 timestamp_ps, u8 channel, 7 zero bytes); little endian.
inline void write_binary(std::ostream& os, std::span<const TagRecord> records) {
    flqkd::detail::require<FormatError>(records.size() <= 0xffffffffULL, "write_binary: too many records for u32 count");
    std::array<char, kBinaryHeaderSize> header{};
    std::memcpy(header.data(), kBinaryMagic.data(), kBinaryMagic.size());
    detail::put_le(header.data() + 8, records.size(), 4);
    os.write(header.data(), header.size());
    std::array<char, kBinaryRecordSize> rec{};
    for (const auto& r : records) {
        rec.fill(0);
        detail::put_le(rec.data(), r.timestamp_ps, 8);
        rec[8] = static_cast<char>(r.channel);
        os.write(rec.data(), rec.size());
    }
}

inline std::vector<TagRecord> read_binary(std::istream& is) {
    std::array<char, kBinaryHeaderSize> header{};
    if (!is.read(header.data(), header.size())) throw FormatError("read_binary: truncated header");
    if (!std::equal(kBinaryMagic.begin(), kBinaryMagic.end(), header.begin())) {
        throw FormatError("read_binary: bad magic");
    }
    if (detail::get_le(header.data() + 12, 4) != 0) throw FormatError("read_binary: nonzero header padding");
    const auto n = detail::get_le(header.data() + 8, 4);
    std::vector<TagRecord> out;
    out.reserve(n);
    std::array<char, kBinaryRecordSize> rec{};
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!is.read(rec.data(), rec.size())) throw FormatError("read_binary: truncated record");
        if (std::any_of(rec.begin() + 9, rec.end(), [](char c) { return c != 0; })) {
            throw FormatError("read_binary: nonzero record padding");
        }
        out.push_back({detail::get_le(rec.data(), 8), static_cast<std::uint8_t>(rec[8])});
    }
    return out;
}

}  // namespace flqkd::timetag
