#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dialectkit/errors.hpp"

namespace dialectkit::io {

// Fixed little-endian layout so artifacts round-trip across hosts.

inline void put_u8(std::ostream& os, std::uint8_t v) {
    os.put(static_cast<char>(v));
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::ostream& os, double v) {
    put_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void put_str(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint8_t get_u8(std::istream& is) {
    int c = is.get();
    if (c == std::istream::traits_type::eof()) throw DataError("truncated binary artifact");
    return static_cast<std::uint8_t>(c);
}

inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(get_u8(is)) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(get_u8(is)) << (8 * i);
    return v;
}

inline double get_f64(std::istream& is) {
    return std::bit_cast<double>(get_u64(is));
}

inline std::string get_str(std::istream& is) {
    const auto n = get_u32(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (is.gcount() != static_cast<std::streamsize>(n)) throw DataError("truncated binary artifact");
    return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& what) {
    char buf[4];
    is.read(buf, 4);
    if (is.gcount() != 4 || std::memcmp(buf, magic, 4) != 0)
        throw DataError("bad magic: not a " + what + " artifact");
}

inline void put_magic(std::ostream& os, const char (&magic)[5]) {
    os.write(magic, 4);
}

template <typename Fn>
void save_file(const std::string& path, Fn&& writer) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for write: " + path);
    writer(os);
    os.flush();
    if (!os) throw DataError("write failed: " + path);
}

template <typename Fn>
auto load_file(const std::string& path, Fn&& reader) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open for read: " + path);
    return reader(is);
}

} // namespace dialectkit::io
