#include "mtosc/stopwords.hpp"

#include <fstream>

#include "mtosc/errors.hpp"

namespace mtosc::decider {

const WordSet& default_stopwords() {
    static const WordSet words = {
        "a",        "about",   "above",      "after",  "again",   "against", "all",
        "am",       "an",      "and",        "any",    "are",     "as",      "at",
        "be",       "because", "been",       "before", "being",   "below",   "between",
        "both",     "but",     "by",         "can",    "could",   "did",     "do",
        "does",     "doing",   "down",       "during", "each",    "few",     "for",
        "from",     "further", "had",        "has",    "have",    "having",  "he",
        "her",      "here",    "hers",       "him",    "his",     "how",     "i",
        "if",       "in",      "into",       "is",     "it",      "its",     "just",
        "me",       "more",    "most",       "my",     "no",      "nor",     "not",
        "now",      "of",      "off",        "on",     "once",    "only",    "or",
        "other",    "our",     "ours",       "out",    "over",    "own",     "same",
        "she",      "should",  "so",         "some",   "such",    "than",    "that",
        "the",      "their",   "theirs",     "them",   "then",    "there",   "these",
        "they",     "this",    "those",      "through", "to",     "too",     "under",
        "until",    "up",      "very",       "was",    "we",      "were",    "what",
        "when",     "where",   "which",      "while",  "who",     "whom",    "why",
        "will",     "with",    "would",      "you",    "your",    "yours",
    };
    return words;
}

WordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword list: " + path);
    WordSet words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n' ||
                                 line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        if (!line.empty()) words.insert(line);
    }
    return words;
}

}  // namespace mtosc::decider
