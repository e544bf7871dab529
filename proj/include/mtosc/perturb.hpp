#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtosc::perturb {

enum class Kind { RepetitionInfusion, FillerInjection, ContextualDiversion };

std::string_view to_string(Kind kind);
Kind kind_from_string(std::string_view name);  // "ri" | "fi" | "cd"

// Generation parameters of the live distractor model.
struct DiversionParams {
    std::string model_id;
    double temperature = 1.0;
    double top_p = 0.75;
    int max_tokens = 4096;
};

struct PerturbSpec {
    Kind kind = Kind::RepetitionInfusion;
    double ratio = 0.25;
    std::optional<int> n_override;  // exact N instead of ceil(ratio * len)
    std::uint64_t seed = 0;
    std::optional<DiversionParams> diversion_params;
};

// The fixed filler vocabulary.
const std::array<std::string, 6>& filler_words();

// Text source for contextual diversion. Throws GeneratorError on failure.
class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    virtual std::string generate(const std::string& prompt) = 0;
};

// Deterministic stand-in: answers "DISTRACTOR(<input text>)".
class MockDiversionGenerator final : public TextGenerator {
public:
    std::string generate(const std::string& prompt) override;
};

// Distractor-generation prompt with the turn text appended after the
// instruction block. Throws BlankTurn for empty/whitespace-only text.
std::string build_diversion_prompt(std::string_view turn_text);

struct PerturbOutcome {
    std::vector<std::string> turns;
    std::vector<int> selected_indices;    // original turn indices, ascending
    std::vector<int> inserted_positions;  // indices of the new turns in `turns`
};

// All three operations share the same randomness contract: one mt19937_64
// seeded with spec.seed, raw outputs mapped through unbiased rejection
// sampling, targets drawn by partial Fisher-Yates over the ascending
// eligible index list and then processed in ascending order; per-insertion
// draws (the filler choice) follow the selection draws. Identical
// (turns, spec, generator) input therefore reproduces identical output on
// any platform. N is max(1, ceil(ratio * len)) unless n_override is set,
// clamped to the eligible count.

// Duplicates N distinct middle turns (never the first or last) in place,
// each copy immediately after its original. Throws TooShort for fewer than
// 3 turns.
PerturbOutcome repetition_infusion(const std::vector<std::string>& turns,
                                   const PerturbSpec& spec);

// Inserts a filler turn immediately before each of N distinct targets (any
// turn but the first). Throws TooShort for fewer than 2 turns.
PerturbOutcome filler_injection(const std::vector<std::string>& turns, const PerturbSpec& spec);

// Inserts a generated distractor immediately after each of N distinct middle
// turns; blank targets are skipped, so at most N turns are inserted and the
// last turn stays last. A GeneratorError aborts the whole operation (the
// input is left as it was). Throws TooShort for fewer than 3 turns.
PerturbOutcome contextual_diversion(const std::vector<std::string>& turns,
                                    const PerturbSpec& spec, TextGenerator& generator);

// Dispatch on spec.kind; generator may be null for RI and FI.
PerturbOutcome apply_perturbation(const std::vector<std::string>& turns, const PerturbSpec& spec,
                                  TextGenerator* generator = nullptr);

}  // namespace mtosc::perturb
