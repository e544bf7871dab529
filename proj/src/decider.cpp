#include "mtosc/decider.hpp"

#include <algorithm>
#include <map>

#include "mtosc/errors.hpp"

namespace mtosc::decider {

namespace {

bool is_word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void drop(std::string& s, size_t n) { s.erase(s.size() - n); }

bool is_consonant(char c) {
    return c != 'a' && c != 'e' && c != 'i' && c != 'o' && c != 'u';
}

// runn -> run, stopp -> stop
void undouble(std::string& s) {
    if (s.size() >= 2 && s[s.size() - 1] == s[s.size() - 2] &&
        is_consonant(s.back()) && static_cast<unsigned char>(s.back()) < 0x80)
        s.pop_back();
}

}  // namespace

std::string_view to_string(Decision d) {
    return d == Decision::Withhold ? "withhold" : "condense";
}

std::string stem(std::string word) {
    if (word.size() < 3) return word;

    if (ends_with(word, "ies") && word.size() > 4) {
        drop(word, 3);
        word += 'y';
    } else if (ends_with(word, "sses")) {
        drop(word, 2);
    } else if (ends_with(word, "xes") || ends_with(word, "ches") ||
               ends_with(word, "shes") || ends_with(word, "zes")) {
        drop(word, 2);
    } else if (!ends_with(word, "ss") && !ends_with(word, "us") && !ends_with(word, "is") &&
               ends_with(word, "s") && word.size() > 3) {
        drop(word, 1);
    }

    if (ends_with(word, "ing") && word.size() >= 6) {
        drop(word, 3);
        undouble(word);
    } else if (ends_with(word, "ed") && word.size() >= 5) {
        drop(word, 2);
        undouble(word);
    }

    if (ends_with(word, "ly") && word.size() >= 5) drop(word, 2);

    return word;
}

WordSet normalize(std::string_view text, const WordSet& stopwords) {
    WordSet out;
    std::string word;
    auto flush = [&] {
        if (!word.empty() && !stopwords.count(word)) out.insert(stem(word));
        word.clear();
    };
    for (unsigned char c : text) {
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if (is_word_char(c))
            word += static_cast<char>(c);
        else
            flush();
    }
    flush();
    return out;
}

WordSet assistant_novel_terms(std::span<const HistoryEntry> window, int i,
                              const WordSet& stopwords) {
    if (i < 1 || i > static_cast<int>(window.size()))
        throw Error("assistant turn index out of range");
    WordSet novel = normalize(assistant_text(window[static_cast<size_t>(i - 1)]), stopwords);
    for (int k = 0; k < i; ++k)
        for (const auto& term : normalize(user_text(window[static_cast<size_t>(k)]), stopwords))
            novel.erase(term);
    return novel;
}

double window_overlap(std::span<const HistoryEntry> window, OverlapMode mode,
                      const WordSet& stopwords) {
    if (window.size() < 2) throw WindowTooSmall();

    std::vector<WordSet> novel;
    novel.reserve(window.size());
    for (int i = 1; i <= static_cast<int>(window.size()); ++i)
        novel.push_back(assistant_novel_terms(window, i, stopwords));

    if (mode == OverlapMode::PairwiseMean) {
        double sum = 0.0;
        int pairs = 0;
        for (size_t a = 0; a < novel.size(); ++a) {
            for (size_t b = a + 1; b < novel.size(); ++b) {
                ++pairs;
                WordSet uni = novel[a];
                uni.insert(novel[b].begin(), novel[b].end());
                if (uni.empty()) continue;
                int inter = 0;
                for (const auto& term : novel[a]) inter += novel[b].count(term) ? 1 : 0;
                sum += static_cast<double>(inter) / static_cast<double>(uni.size());
            }
        }
        return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
    }

    std::map<std::string, int> occurrences;
    for (const auto& set : novel)
        for (const auto& term : set) ++occurrences[term];
    if (occurrences.empty()) return 0.0;
    int shared = 0;
    for (const auto& [term, n] : occurrences) shared += n >= 2 ? 1 : 0;
    return static_cast<double>(shared) / static_cast<double>(occurrences.size());
}

int user_token_total(std::span<const HistoryEntry> window, const Tokenizer& tokenizer) {
    int total = 0;
    for (const auto& entry : window) total += tokenizer.count(user_text(entry));
    return total;
}

DeciderVerdict decide(std::span<const HistoryEntry> window, const WindowConfig& config,
                      const Tokenizer& tokenizer, const WordSet& stopwords,
                      std::optional<int> user_tokens_override) {
    DeciderVerdict verdict;
    verdict.gamma = config.gamma;
    verdict.tau = config.tau;
    verdict.overlap = window_overlap(window, config.overlap_mode, stopwords);
    verdict.user_tokens =
        user_tokens_override ? *user_tokens_override : user_token_total(window, tokenizer);
    const bool withhold = verdict.overlap > config.gamma && verdict.user_tokens > config.tau;
    verdict.decision =
        (config.decider_enabled && withhold) ? Decision::Withhold : Decision::Condense;
    return verdict;
}

}  // namespace mtosc::decider
