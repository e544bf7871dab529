#include "mtosc/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <random>
#include <utility>

#include "mtosc/errors.hpp"
#include "mtosc/tokenizer.hpp"

namespace mtosc::perturb {

std::string_view to_string(Kind kind) {
    switch (kind) {
        case Kind::RepetitionInfusion: return "ri";
        case Kind::FillerInjection: return "fi";
        case Kind::ContextualDiversion: return "cd";
    }
    return "ri";
}

Kind kind_from_string(std::string_view name) {
    if (name == "ri") return Kind::RepetitionInfusion;
    if (name == "fi") return Kind::FillerInjection;
    if (name == "cd") return Kind::ContextualDiversion;
    throw Error("unknown perturbation kind: " + std::string(name));
}

const std::array<std::string, 6>& filler_words() {
    static const std::array<std::string, 6> words = {"Um.",     "Uh.", "Well.",
                                                     "Anyway.", "Ok.", "Hmm."};
    return words;
}

std::string MockDiversionGenerator::generate(const std::string& prompt) {
    static const std::string marker = "Here is the input to modify:\n";
    size_t pos = prompt.rfind(marker);
    std::string input = pos == std::string::npos ? prompt : prompt.substr(pos + marker.size());
    return "DISTRACTOR(" + input + ")";
}

std::string build_diversion_prompt(std::string_view turn_text) {
    bool blank = true;
    for (unsigned char c : turn_text)
        if (!std::isspace(c)) {
            blank = false;
            break;
        }
    if (blank) throw BlankTurn();

    static const std::string instruction =
        "Can you come up with related but distracting information as new entry in user inputs, "
        "for example:\n"
        "\n"
        "Input:\n"
        "Check for availability of meeting rooms for next week.\n"
        "\n"
        "Output:\n"
        "Meeting rooms are often in high demand, especially during peak business hours. It's a "
        "good idea to consider alternative locations or virtual meeting options in case the "
        "preferred rooms are fully booked. Additionally, checking the amenities available in "
        "each room, such as video conferencing equipment or whiteboards, can help ensure that "
        "the meeting runs smoothly.\n"
        "\n"
        "Make sure the added information is not helping make the instructions more clear.\n"
        "\n"
        "Please respond only with the output without any extra explanations or text.\n"
        "\n"
        "Here is the input to modify:\n";
    return instruction + std::string(turn_text);
}

namespace {

// Unbiased draw from [0, n) using raw engine outputs; avoids
// std::uniform_int_distribution, whose mapping differs across standard
// library implementations.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

int insert_count(const PerturbSpec& spec, int len, int eligible) {
    int n = spec.n_override ? *spec.n_override
                            : std::max(1, ceil_ratio(spec.ratio, len));
    if (n < 0) throw Error("n_override must be non-negative");
    return std::min(n, eligible);
}

// First `count` elements of a partial Fisher-Yates shuffle over
// [first, last], returned ascending.
std::vector<int> select_targets(std::mt19937_64& rng, int first, int last, int count) {
    std::vector<int> pool;
    for (int i = first; i <= last; ++i) pool.push_back(i);
    for (int i = 0; i < count; ++i) {
        const auto j = static_cast<size_t>(i) + bounded(rng, pool.size() - static_cast<size_t>(i));
        std::swap(pool[static_cast<size_t>(i)], pool[j]);
    }
    std::vector<int> targets(pool.begin(), pool.begin() + count);
    std::sort(targets.begin(), targets.end());
    return targets;
}

bool is_blank(const std::string& text) {
    return std::all_of(text.begin(), text.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

PerturbOutcome repetition_infusion(const std::vector<std::string>& turns,
                                   const PerturbSpec& spec) {
    const int len = static_cast<int>(turns.size());
    if (len < 3) throw TooShort("repetition infusion needs at least 3 turns");

    std::mt19937_64 rng(spec.seed);
    const int n = insert_count(spec, len, len - 2);
    PerturbOutcome outcome;
    outcome.selected_indices = select_targets(rng, 1, len - 2, n);

    size_t next_target = 0;
    for (int i = 0; i < len; ++i) {
        outcome.turns.push_back(turns[static_cast<size_t>(i)]);
        if (next_target < outcome.selected_indices.size() &&
            outcome.selected_indices[next_target] == i) {
            outcome.inserted_positions.push_back(static_cast<int>(outcome.turns.size()));
            outcome.turns.push_back(turns[static_cast<size_t>(i)]);
            ++next_target;
        }
    }
    return outcome;
}

PerturbOutcome filler_injection(const std::vector<std::string>& turns, const PerturbSpec& spec) {
    const int len = static_cast<int>(turns.size());
    if (len < 2) throw TooShort("filler injection needs at least 2 turns");

    std::mt19937_64 rng(spec.seed);
    const int n = insert_count(spec, len, len - 1);
    PerturbOutcome outcome;
    outcome.selected_indices = select_targets(rng, 1, len - 1, n);

    const auto& fillers = filler_words();
    size_t next_target = 0;
    for (int i = 0; i < len; ++i) {
        if (next_target < outcome.selected_indices.size() &&
            outcome.selected_indices[next_target] == i) {
            outcome.inserted_positions.push_back(static_cast<int>(outcome.turns.size()));
            outcome.turns.push_back(fillers[bounded(rng, fillers.size())]);
            ++next_target;
        }
        outcome.turns.push_back(turns[static_cast<size_t>(i)]);
    }
    return outcome;
}

PerturbOutcome contextual_diversion(const std::vector<std::string>& turns,
                                    const PerturbSpec& spec, TextGenerator& generator) {
    const int len = static_cast<int>(turns.size());
    if (len < 3) throw TooShort("contextual diversion needs at least 3 turns");

    std::mt19937_64 rng(spec.seed);
    const int n = insert_count(spec, len, len - 2);
    PerturbOutcome outcome;
    outcome.selected_indices = select_targets(rng, 1, len - 2, n);

    // Generate everything up front: a failure must leave the caller's list
    // untouched, so no partial output can escape.
    std::vector<std::pair<int, std::string>> distractors;
    for (int target : outcome.selected_indices) {
        const std::string& text = turns[static_cast<size_t>(target)];
        if (is_blank(text)) continue;
        distractors.emplace_back(target, generator.generate(build_diversion_prompt(text)));
    }

    size_t next_distractor = 0;
    for (int i = 0; i < len; ++i) {
        outcome.turns.push_back(turns[static_cast<size_t>(i)]);
        if (next_distractor < distractors.size() && distractors[next_distractor].first == i) {
            outcome.inserted_positions.push_back(static_cast<int>(outcome.turns.size()));
            outcome.turns.push_back(std::move(distractors[next_distractor].second));
            ++next_distractor;
        }
    }
    return outcome;
}

PerturbOutcome apply_perturbation(const std::vector<std::string>& turns, const PerturbSpec& spec,
                                  TextGenerator* generator) {
    switch (spec.kind) {
        case Kind::RepetitionInfusion: return repetition_infusion(turns, spec);
        case Kind::FillerInjection: return filler_injection(turns, spec);
        case Kind::ContextualDiversion: {
            if (!generator)
                throw GeneratorError("contextual diversion needs a text generator");
            return contextual_diversion(turns, spec, *generator);
        }
    }
    throw Error("unknown perturbation kind");
}

}  // namespace mtosc::perturb
