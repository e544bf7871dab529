#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtosc/types.hpp"

namespace mtosc::condenser {

// One few-shot example: an input conversation and the JSON the model is
// expected to answer with.
struct Exemplar {
    std::string conversation;
    std::string output_json;

    bool operator==(const Exemplar&) const = default;
};

// Few-shot exemplar collection. At least three entries, each output a valid
// three-key JSON object; validate() enforces both.
class ExemplarSet {
public:
    explicit ExemplarSet(std::vector<Exemplar> exemplars);

    // Bundled set covering the three condensation policies: verbatim
    // retention of specific values, comprehensive consolidation and
    // irrelevant-turn exclusion. data/exemplars.json ships the same content.
    static const ExemplarSet& defaults();

    // JSON array of {"conversation": str, "output": str}. Throws IoError on
    // file problems and Error on schema or validation problems.
    static ExemplarSet load(const std::string& path);

    void validate() const;
    const std::vector<Exemplar>& exemplars() const { return exemplars_; }

    bool operator==(const ExemplarSet&) const = default;

private:
    std::vector<Exemplar> exemplars_;
};

// Generation parameters of the condensation call.
struct CondenserParams {
    std::string model_id;
    double temperature = 0.01;
    double top_p = 1.0;
    std::optional<double> frequency_penalty = 1.0;
    int max_completion_tokens = 10000;
};

struct BackendCompletion {
    std::string text;
    // Server-reported usage; absent values fall back to the local tokenizer.
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

// Text-completion dependency of condense(). Implementations throw
// BackendError subtypes on failure.
class CondenserBackend {
public:
    virtual ~CondenserBackend() = default;
    virtual BackendCompletion complete(const std::string& prompt, const CondenserParams& params) = 0;
};

// Window rendered as alternating "Human: ..." / "Assistant: ..." blocks
// separated by blank lines. Condensed entries render their
// human_input/assistant_summary.
std::string render_window(std::span<const HistoryEntry> window);

const std::string& condenser_instruction();
const std::string& summarizer_instruction();

// Few-shot condensation prompt: the instruction, an "Examples:" header, each
// exemplar under a "Conversation History:" label, then the rendered window
// under a final "Conversation History:" label. Throws EmptyWindow.
std::string build_condenser_prompt(std::span<const HistoryEntry> window,
                                   const ExemplarSet& exemplars = ExemplarSet::defaults());

// Simple-summarizer ablation prompt: two-key instruction followed directly
// by the rendered window, no exemplars. Throws EmptyWindow.
std::string build_summarizer_prompt(std::span<const HistoryEntry> window);

// Extracts the first syntactically complete JSON object from the text
// (brace-depth scan, string escapes respected, surrounding prose ignored)
// and validates it: HumanInput and Assistant must be non-empty strings,
// Reasoning is optional and defaults to "". A missing or non-string key
// raises MissingKey. covers_*/generation_index are left at zero; the session
// fills them at integration time. Never crashes on arbitrary input: it
// either returns a pair or throws a ParseError subtype.
CondensedPair parse_condenser_output(std::string_view text);

// Canonical three-key (or two-key) JSON for a pair; inverse of
// parse_condenser_output for the text fields.
std::string serialize_condenser_output(const CondensedPair& pair, bool include_reasoning = true);

struct CondenseOptions {
    int retry_limit = 2;      // re-asks with the identical prompt
    bool summarizer = false;  // use the two-key ablation prompt
};

struct CondenseResult {
    CondensedPair pair;
    int input_tokens = 0;   // summed over attempts
    int output_tokens = 0;  // summed over attempts
    int attempts = 1;
};

// Runs one condensation over the window: builds the prompt, calls the
// backend, parses, retrying parse failures up to retry_limit times. Throws
// EmptyWindow, BackendError (with usage of prior attempts attached) or
// ParseFailedAfterRetries.
CondenseResult condense(std::span<const HistoryEntry> window, CondenserBackend& backend,
                        const CondenserParams& params,
                        const ExemplarSet& exemplars = ExemplarSet::defaults(),
                        const Tokenizer& tokenizer = *default_tokenizer(),
                        const CondenseOptions& options = {});

// Deterministic stand-in for a model call: concatenates each side of the
// window and truncates it to ceil(ratio * side token total) tokens;
// reasoning is "mock". An entirely empty side becomes "-" so the pair
// invariant holds. ratio must lie in (0, 1].
CondensedPair mock_condense(std::span<const HistoryEntry> window, double ratio,
                            const Tokenizer& tokenizer = *default_tokenizer());

// Backend that reconstructs the window from the prompt's final
// "Conversation History:" block and answers with mock_condense. Intended
// for tests; assumes turn texts do not themselves contain lines that start
// with the block labels.
class MockCondenserBackend final : public CondenserBackend {
public:
    explicit MockCondenserBackend(double ratio) : ratio_(ratio) {}
    BackendCompletion complete(const std::string& prompt, const CondenserParams& params) override;

private:
    double ratio_;
};

// Backend that ignores the prompt and always answers with a pair of fixed
// token sizes ("cu1 cu2 ..." / "ca1 ca2 ...").
class CannedCondenserBackend final : public CondenserBackend {
public:
    CannedCondenserBackend(int user_tokens, int assistant_tokens)
        : user_tokens_(user_tokens), assistant_tokens_(assistant_tokens) {}
    BackendCompletion complete(const std::string& prompt, const CondenserParams& params) override;

private:
    int user_tokens_;
    int assistant_tokens_;
};

// Backend that always fails with a TransportError.
class FailingCondenserBackend final : public CondenserBackend {
public:
    explicit FailingCondenserBackend(std::string message = "mock backend failure")
        : message_(std::move(message)) {}
    BackendCompletion complete(const std::string& prompt, const CondenserParams& params) override;

private:
    std::string message_;
};

// Backend that replays a fixed list of completions, then fails.
class ScriptedCondenserBackend final : public CondenserBackend {
public:
    explicit ScriptedCondenserBackend(std::vector<std::string> outputs)
        : outputs_(std::move(outputs)) {}
    BackendCompletion complete(const std::string& prompt, const CondenserParams& params) override;
    int calls() const { return next_; }

private:
    std::vector<std::string> outputs_;
    int next_ = 0;
};

}  // namespace mtosc::condenser
