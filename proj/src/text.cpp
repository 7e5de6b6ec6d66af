#include "m3g/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "m3g/errors.hpp"

namespace m3g::text {

std::string nfc(const std::string& s) {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(ec);
    if (U_FAILURE(ec)) throw Error("ICU NFC normalizer unavailable");
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(s);
    icu::UnicodeString out = norm->normalize(u, ec);
    if (U_FAILURE(ec)) throw DataError("NFC normalization failed");
    std::string result;
    out.toUTF8String(result);
    return result;
}

bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
}

std::string to_lower_ascii(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_ascii_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_ascii_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string collapse_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (unsigned char c : s) {
        if (is_ascii_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& s) {
    const std::string n = nfc(s);
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (unsigned char c : n) {
        if (is_ascii_space(c)) {
            flush();
        } else if (is_ascii_punct(c)) {
            flush();
            tokens.emplace_back(1, static_cast<char>(c));
        } else {
            if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
            cur.push_back(static_cast<char>(c));
        }
    }
    flush();
    return tokens;
}

std::string join(const std::vector<std::string>& tokens, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

namespace {

// Removes one trailing "(...)" group, if the string ends with a balanced one.
bool strip_trailing_paren_group(std::string& s) {
    if (s.empty() || s.back() != ')') return false;
    int depth = 0;
    for (std::size_t i = s.size(); i-- > 0;) {
        if (s[i] == ')') ++depth;
        else if (s[i] == '(') {
            if (--depth == 0) {
                s.erase(i);
                return true;
            }
        }
    }
    return false;
}

} // namespace

std::string normalize_label(const std::string& s) {
    std::string out = collapse_whitespace(to_lower_ascii(nfc(s)));
    bool changed = true;
    while (changed) {
        changed = false;
        while (!out.empty() && is_ascii_space(static_cast<unsigned char>(out.back()))) {
            out.pop_back();
            changed = true;
        }
        while (!out.empty()) {
            char c = out.back();
            if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') {
                out.pop_back();
                changed = true;
            } else {
                break;
            }
        }
        if (strip_trailing_paren_group(out)) changed = true;
    }
    return trim(out);
}

} // namespace m3g::text
