#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace mtosc {

// Counting interface used everywhere a token count is needed. Counts must be
// deterministic for a fixed input.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual int count(std::string_view text) const = 0;
};

// Default tokenizer: counts maximal runs of non-whitespace characters.
// count("") == 0, and joining two texts with a space is additive.
class WhitespaceTokenizer final : public Tokenizer {
public:
    int count(std::string_view text) const override;
};

// Shared default instance; sessions and the harness fall back to it when no
// tokenizer is supplied.
std::shared_ptr<const Tokenizer> default_tokenizer();

int default_token_count(std::string_view text);

// First n whitespace tokens of text, joined by single spaces. Returns the
// whole (re-joined) text when it has fewer than n tokens.
std::string truncate_to_tokens(std::string_view text, int n);

// Deterministic text with exactly n whitespace tokens: "<stem>1 <stem>2 ...".
// Used by mocks and synthetic fixtures.
std::string synthetic_tokens(std::string_view stem, int n);

// ceil(ratio * n) with a small epsilon guard so that products that are exact
// in decimal but land a hair above an integer in binary (0.2*200) do not
// round up one too far.
int ceil_ratio(double ratio, int n);

}  // namespace mtosc
