#pragma once

#include <string>
#include <vector>

namespace m3g::text {

// Unicode NFC normalization (ICU-backed).
std::string nfc(const std::string& s);

bool is_ascii_space(unsigned char c);
bool is_ascii_punct(unsigned char c);

std::string to_lower_ascii(std::string s);
std::string trim(const std::string& s);
std::string collapse_whitespace(const std::string& s);

// The evaluation tokenizer. Bit-exact definition:
//   1. Unicode NFC normalize.
//   2. Walk bytes left to right. ASCII whitespace ends the current token.
//      An ASCII punctuation byte (ispunct in the C locale) ends the current
//      token and is emitted as a single-character token of its own.
//      Every other byte is appended to the current token, with ASCII A-Z
//      mapped to a-z. Bytes >= 0x80 pass through untouched, so multi-byte
//      UTF-8 sequences are never split or case-mapped.
std::vector<std::string> tokenize(const std::string& s);

std::string join(const std::vector<std::string>& tokens, const std::string& sep);

// Canonical form used for disease labels and frequency matching:
// NFC, ASCII lowercase, trim, collapse internal whitespace, then repeatedly
// strip trailing sentence punctuation (.,;:!?) and any trailing
// parenthesized group, e.g. "Dyshidrotic eczema (pompholyx)." ->
// "dyshidrotic eczema".
std::string normalize_label(const std::string& s);

} // namespace m3g::text
