#include "mtosc/tokenizer.hpp"

#include <cctype>
#include <cmath>

namespace mtosc {

namespace {

bool is_space(unsigned char c) {
    return std::isspace(c) != 0;
}

}  // namespace

int WhitespaceTokenizer::count(std::string_view text) const {
    int n = 0;
    bool in_run = false;
    for (unsigned char c : text) {
        if (is_space(c)) {
            in_run = false;
        } else if (!in_run) {
            in_run = true;
            ++n;
        }
    }
    return n;
}

std::shared_ptr<const Tokenizer> default_tokenizer() {
    static const auto instance = std::make_shared<const WhitespaceTokenizer>();
    return instance;
}

int default_token_count(std::string_view text) {
    return default_tokenizer()->count(text);
}

std::string truncate_to_tokens(std::string_view text, int n) {
    std::string out;
    int taken = 0;
    size_t i = 0;
    while (i < text.size() && taken < n) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        size_t start = i;
        while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (!out.empty()) out += ' ';
        out.append(text.substr(start, i - start));
        ++taken;
    }
    return out;
}

std::string synthetic_tokens(std::string_view stem, int n) {
    std::string out;
    for (int i = 1; i <= n; ++i) {
        if (!out.empty()) out += ' ';
        out.append(stem);
        out += std::to_string(i);
    }
    return out;
}

int ceil_ratio(double ratio, int n) {
    double v = ratio * static_cast<double>(n);
    return static_cast<int>(std::ceil(v - 1e-9));
}

}  // namespace mtosc
