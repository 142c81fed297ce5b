#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dialectkit::text {

/// Decodes UTF-8 into Unicode scalar values. Invalid bytes decode as
/// U+FFFD one byte at a time so malformed input still round-trips a
/// stable sequence.
inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    const auto n = s.size();
    while (i < n) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 >> 5) == 0x6 && i + 1 < n) {
            const unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
            if ((b1 >> 6) == 0x2) {
                cp = (char32_t(b0 & 0x1F) << 6) | char32_t(b1 & 0x3F);
                len = 2;
                if (cp < 0x80) cp = 0xFFFD;
            }
        } else if ((b0 >> 4) == 0xE && i + 2 < n) {
            const unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
            const unsigned char b2 = static_cast<unsigned char>(s[i + 2]);
            if ((b1 >> 6) == 0x2 && (b2 >> 6) == 0x2) {
                cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(b1 & 0x3F) << 6) | char32_t(b2 & 0x3F);
                len = 3;
                if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD, len = 1;
            }
        } else if ((b0 >> 3) == 0x1E && i + 3 < n) {
            const unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
            const unsigned char b2 = static_cast<unsigned char>(s[i + 2]);
            const unsigned char b3 = static_cast<unsigned char>(s[i + 3]);
            if ((b1 >> 6) == 0x2 && (b2 >> 6) == 0x2 && (b3 >> 6) == 0x2) {
                cp = (char32_t(b0 & 0x07) << 18) | (char32_t(b1 & 0x3F) << 12) |
                     (char32_t(b2 & 0x3F) << 6) | char32_t(b3 & 0x3F);
                len = 4;
                if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD, len = 1;
            }
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode_utf8(const std::u32string& cps) {
    std::string out;
    out.reserve(cps.size() * 3);
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

/// Number of Unicode scalar values.
inline std::size_t length(std::string_view s) { return decode_utf8(s).size(); }

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Splits on runs of ASCII whitespace; never yields empty tokens.
inline std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

inline std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i != 0) out.append(sep);
        out.append(tokens[i]);
    }
    return out;
}

/// All whitespace removed, as scalar values. chrF-style character stream.
inline std::u32string squash(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    std::u32string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v') continue;
        out.push_back(cp);
    }
    return out;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace dialectkit::text
