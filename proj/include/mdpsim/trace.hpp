#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdpsim/error.hpp"

namespace mdpsim {

enum class OpKind : std::uint8_t { Load, Store, Branch, Other };

/// One dynamic instruction. `addr`/`size` are meaningful only for memory
/// ops, `taken` only for branches; the other fields stay zero.
struct TraceEvent
{
    std::uint64_t seq  = 0;
    std::uint64_t pc   = 0;
    OpKind kind        = OpKind::Other;
    std::uint64_t addr = 0;
    std::uint8_t size  = 0;
    bool taken         = false;

    bool isMem() const { return kind == OpKind::Load || kind == OpKind::Store; }
    bool isLoad() const { return kind == OpKind::Load; }
    bool isStore() const { return kind == OpKind::Store; }
    bool isBranch() const { return kind == OpKind::Branch; }

    /// Byte ranges [addr, addr+size) intersect.
    bool overlaps(const TraceEvent& other) const
    { return addr < other.addr + other.size && other.addr < addr + size; }

    bool operator==(const TraceEvent&) const = default;

    static TraceEvent load(std::uint64_t seq, std::uint64_t pc, std::uint64_t addr,
                           std::uint8_t size)
    { return {seq, pc, OpKind::Load, addr, size, false}; }

    static TraceEvent store(std::uint64_t seq, std::uint64_t pc, std::uint64_t addr,
                            std::uint8_t size)
    { return {seq, pc, OpKind::Store, addr, size, false}; }

    static TraceEvent branch(std::uint64_t seq, std::uint64_t pc, bool taken)
    { return {seq, pc, OpKind::Branch, 0, 0, taken}; }

    static TraceEvent other(std::uint64_t seq, std::uint64_t pc)
    { return {seq, pc, OpKind::Other, 0, 0, false}; }
};

struct Trace
{
    std::string name;
    std::vector<TraceEvent> events;

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }
    bool operator==(const Trace&) const = default;
};

inline bool validAccessSize(unsigned size)
{ return size == 1 || size == 2 || size == 4 || size == 8; }

inline char kindLetter(OpKind k)
{
    switch (k) {
      case OpKind::Load:   return 'L';
      case OpKind::Store:  return 'S';
      case OpKind::Branch: return 'B';
      case OpKind::Other:  return 'O';
    }
    return '?';
}

/// Checks per-event field presence and program-order sequence numbers.
/// Throws ArgumentError naming the first bad event.
inline void validateTrace(const Trace& t)
{
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const auto& e = t.events[i];
        if (i > 0 && e.seq <= t.events[i - 1].seq)
            throw ArgumentError("trace event " + std::to_string(i) + ": seq does not increase");
        if (e.isMem()) {
            if (!validAccessSize(e.size))
                throw ArgumentError("trace event " + std::to_string(i) + ": bad access size");
            if (e.taken)
                throw ArgumentError("trace event " + std::to_string(i) + ": taken on memory op");
        } else {
            if (e.addr != 0 || e.size != 0)
                throw ArgumentError("trace event " + std::to_string(i) + ": address on non-memory op");
            if (e.kind == OpKind::Other && e.taken)
                throw ArgumentError("trace event " + std::to_string(i) + ": taken on non-branch");
        }
    }
}

namespace detail {

inline void appendHex(std::string& out, std::uint64_t v)
{
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof buf, v, 16);
    out += "0x";
    out.append(buf, res.ptr);
}

inline void appendDec(std::string& out, std::uint64_t v)
{
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

inline bool parseHex(std::string_view s, std::uint64_t& v)
{
    if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
        return false;
    auto res = std::from_chars(s.data() + 2, s.data() + s.size(), v, 16);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool parseDec(std::string_view s, std::uint64_t& v)
{
    if (s.empty())
        return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

/// Splits on single spaces; empty tokens are kept so the caller can reject them.
inline std::vector<std::string_view> splitSpaces(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        auto pos = line.find(' ', start);
        if (pos == std::string_view::npos)
            pos = line.size();
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace detail

inline constexpr std::string_view kTraceHeader = "#mdp-trace v1 name=";

/// Canonical text encoding: header line, then one record per event.
inline std::string serializeTrace(const Trace& t)
{
    std::string out;
    out.reserve(32 + t.events.size() * 40);
    out += kTraceHeader;
    out += t.name;
    out += '\n';
    for (const auto& e : t.events) {
        out += kindLetter(e.kind);
        out += " pc=";
        detail::appendHex(out, e.pc);
        out += " seq=";
        detail::appendDec(out, e.seq);
        if (e.isMem()) {
            out += " addr=";
            detail::appendHex(out, e.addr);
            out += " size=";
            detail::appendDec(out, e.size);
        } else if (e.isBranch()) {
            out += e.taken ? " taken=1" : " taken=0";
        }
        out += '\n';
    }
    return out;
}

/// Parses the text format. Lines beginning with '#' after the header are
/// comments. A missing trailing newline on the last record is tolerated.
inline Trace parseTrace(std::string_view bytes)
{
    Trace t;
    std::size_t pos = 0;
    auto nextLine = [&](std::size_t& lineStart) -> std::string_view {
        lineStart = pos;
        auto nl = bytes.find('\n', pos);
        std::string_view line;
        if (nl == std::string_view::npos) {
            line = bytes.substr(pos);
            pos = bytes.size();
        } else {
            line = bytes.substr(pos, nl - pos);
            pos = nl + 1;
        }
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        return line;
    };

    std::size_t lineStart = 0;
    if (bytes.empty())
        throw ParseError("missing trace header", 0);
    auto header = nextLine(lineStart);
    if (header.substr(0, kTraceHeader.size()) != kTraceHeader)
        throw ParseError("missing trace header", 0);
    t.name = std::string(header.substr(kTraceHeader.size()));

    while (pos < bytes.size()) {
        auto line = nextLine(lineStart);
        if (line.empty() || line.front() == '#')
            continue;
        auto toks = detail::splitSpaces(line);
        if (toks[0].size() != 1)
            throw ParseError("bad record kind", lineStart);

        TraceEvent e;
        switch (toks[0][0]) {
          case 'L': e.kind = OpKind::Load; break;
          case 'S': e.kind = OpKind::Store; break;
          case 'B': e.kind = OpKind::Branch; break;
          case 'O': e.kind = OpKind::Other; break;
          default: throw ParseError("bad record kind", lineStart);
        }

        bool havePc = false, haveSeq = false, haveAddr = false, haveSize = false,
             haveTaken = false;
        std::size_t tokOffset = lineStart + 2;
        for (std::size_t i = 1; i < toks.size(); ++i) {
            auto tok = toks[i];
            auto eq = tok.find('=');
            if (eq == std::string_view::npos)
                throw ParseError("expected key=value", tokOffset);
            auto key = tok.substr(0, eq);
            auto val = tok.substr(eq + 1);
            std::uint64_t v = 0;
            bool ok = false;
            bool* seen = nullptr;
            if (key == "pc") {
                ok = detail::parseHex(val, v); e.pc = v; seen = &havePc;
            } else if (key == "seq") {
                ok = detail::parseDec(val, v); e.seq = v; seen = &haveSeq;
            } else if (key == "addr") {
                ok = detail::parseHex(val, v); e.addr = v; seen = &haveAddr;
            } else if (key == "size") {
                ok = detail::parseDec(val, v) && validAccessSize(unsigned(v));
                e.size = std::uint8_t(v); seen = &haveSize;
            } else if (key == "taken") {
                ok = (val == "0" || val == "1"); e.taken = (val == "1"); seen = &haveTaken;
            } else {
                throw ParseError("unknown field '" + std::string(key) + "'", tokOffset);
            }
            if (!ok)
                throw ParseError("bad value for '" + std::string(key) + "'", tokOffset);
            if (*seen)
                throw ParseError("duplicate field '" + std::string(key) + "'", tokOffset);
            *seen = true;
            tokOffset += tok.size() + 1;
        }

        if (!havePc || !haveSeq)
            throw ParseError("record needs pc and seq", lineStart);
        if (e.isMem() != (haveAddr && haveSize) || (haveAddr != haveSize))
            throw ParseError("addr/size present iff load or store", lineStart);
        if (e.isBranch() != haveTaken)
            throw ParseError("taken present iff branch", lineStart);
        if (!t.events.empty() && e.seq <= t.events.back().seq)
            throw OrderingError("seq " + std::to_string(e.seq) + " does not increase", lineStart);
        t.events.push_back(e);
    }
    return t;
}

// Binary variant for large traces:
//   "MDPTRB01" | u32 name_len | name | u64 count | count * 27-byte records
// Record: u8 kind | u8 size | u8 taken | u64 pc | u64 seq | u64 addr, little-endian.

inline constexpr std::string_view kBinaryTraceMagic = "MDPTRB01";

namespace detail {

inline void putLe(std::string& out, std::uint64_t v, int bytes)
{
    for (int i = 0; i < bytes; ++i)
        out += char((v >> (8 * i)) & 0xff);
}

inline std::uint64_t getLe(std::string_view in, std::size_t at, int bytes)
{
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= std::uint64_t(std::uint8_t(in[at + i])) << (8 * i);
    return v;
}

} // namespace detail

inline std::string serializeTraceBinary(const Trace& t)
{
    std::string out(kBinaryTraceMagic);
    detail::putLe(out, t.name.size(), 4);
    out += t.name;
    detail::putLe(out, t.events.size(), 8);
    for (const auto& e : t.events) {
        detail::putLe(out, std::uint64_t(e.kind), 1);
        detail::putLe(out, e.size, 1);
        detail::putLe(out, e.taken ? 1 : 0, 1);
        detail::putLe(out, e.pc, 8);
        detail::putLe(out, e.seq, 8);
        detail::putLe(out, e.addr, 8);
    }
    return out;
}

inline Trace parseTraceBinary(std::string_view in)
{
    constexpr std::size_t kRecord = 27;
    if (in.substr(0, kBinaryTraceMagic.size()) != kBinaryTraceMagic)
        throw ParseError("bad binary trace magic", 0);
    std::size_t at = kBinaryTraceMagic.size();
    if (in.size() < at + 4)
        throw ParseError("truncated binary trace", at);
    auto nameLen = detail::getLe(in, at, 4);
    at += 4;
    if (in.size() < at + nameLen + 8)
        throw ParseError("truncated binary trace", at);
    Trace t;
    t.name = std::string(in.substr(at, nameLen));
    at += nameLen;
    auto count = detail::getLe(in, at, 8);
    at += 8;
    if ((in.size() - at) / kRecord < count || (in.size() - at) != count * kRecord)
        throw ParseError("binary trace length mismatch", at);
    t.events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i, at += kRecord) {
        TraceEvent e;
        auto kind = detail::getLe(in, at, 1);
        if (kind > 3)
            throw ParseError("bad record kind", at);
        e.kind = OpKind(kind);
        e.size = std::uint8_t(detail::getLe(in, at + 1, 1));
        e.taken = detail::getLe(in, at + 2, 1) != 0;
        e.pc = detail::getLe(in, at + 3, 8);
        e.seq = detail::getLe(in, at + 11, 8);
        e.addr = detail::getLe(in, at + 19, 8);
        if (e.isMem() && !validAccessSize(e.size))
            throw ParseError("bad access size", at);
        if (!t.events.empty() && e.seq <= t.events.back().seq)
            throw OrderingError("seq does not increase", at);
        t.events.push_back(e);
    }
    return t;
}

inline std::string readFile(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void writeFile(const std::string& path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

/// Loads either encoding, chosen by the leading magic.
inline Trace loadTrace(const std::string& path)
{
    auto bytes = readFile(path);
    if (std::string_view(bytes).substr(0, kBinaryTraceMagic.size()) == kBinaryTraceMagic)
        return parseTraceBinary(bytes);
    return parseTrace(bytes);
}

} // namespace mdpsim
