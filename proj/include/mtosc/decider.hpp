#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtosc/stopwords.hpp"
#include "mtosc/types.hpp"

namespace mtosc::decider {

enum class Decision { Condense, Withhold };

std::string_view to_string(Decision d);

// Rule-based routing of a trigger window: windows whose assistant turns keep
// re-introducing the same novel vocabulary (high overlap) while the user
// side is already heavy (high token mass) are withheld from condensation.
struct DeciderVerdict {
    Decision decision = Decision::Condense;
    double overlap = 0.0;
    int user_tokens = 0;
    double gamma = 0.0;
    int tau = 0;

    bool operator==(const DeciderVerdict&) const = default;
};

// Porter-style suffix stripping: a fixed, ordered rule list (plural endings,
// -ing/-ed with doubled-consonant undoubling, -ly). Not a full stemmer; it
// only has to map close inflections of the same content word together,
// deterministically.
std::string stem(std::string word);

// lowercase -> treat every ASCII character outside [a-z0-9] as a separator
// (bytes >= 0x80 are kept so UTF-8 sequences survive intact) -> split ->
// drop stopwords -> stem. Returns the resulting set.
WordSet normalize(std::string_view text, const WordSet& stopwords = default_stopwords());

// Novel terms of the i-th assistant turn (1-based) within the window:
// normalize(assistant_i) minus every normalized user term of turns 1..i.
// Condensed entries contribute their human_input/assistant_summary sides.
WordSet assistant_novel_terms(std::span<const HistoryEntry> window, int i,
                              const WordSet& stopwords = default_stopwords());

// SharedMass: |S| / |U| where U unions the novel sets and S keeps the terms
// present in at least two of them; 0 when U is empty. PairwiseMean: mean
// Jaccard similarity over all novel-set pairs (an empty-union pair counts
// 0). Throws WindowTooSmall for windows of fewer than 2 entries.
double window_overlap(std::span<const HistoryEntry> window,
                      OverlapMode mode = OverlapMode::SharedMass,
                      const WordSet& stopwords = default_stopwords());

// Tokenizer count summed over the user side of every entry.
int user_token_total(std::span<const HistoryEntry> window, const Tokenizer& tokenizer);

// Withhold iff overlap > gamma and user tokens > tau (both strict). With
// decider_enabled false the verdict is always Condense but the measured
// values are still reported. user_tokens_override replaces the window-scoped
// token mass when the embedder runs the TauScope::SessionRaw variant.
DeciderVerdict decide(std::span<const HistoryEntry> window, const WindowConfig& config,
                      const Tokenizer& tokenizer,
                      const WordSet& stopwords = default_stopwords(),
                      std::optional<int> user_tokens_override = std::nullopt);

}  // namespace mtosc::decider
