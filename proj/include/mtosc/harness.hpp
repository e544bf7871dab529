#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtosc/condenser.hpp"
#include "mtosc/decider.hpp"
#include "mtosc/model_client.hpp"
#include "mtosc/session.hpp"
#include "mtosc/transcript.hpp"
#include "mtosc/types.hpp"

namespace mtosc::harness {

enum class StrategyKind { MtBaseline, MtOsc, Fifo, MtOscSummarizer };

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_from_string(std::string_view name);  // baseline|mtosc|fifo|summ

struct Strategy {
    StrategyKind kind = StrategyKind::MtOsc;
    WindowConfig window_config{};
    int fifo_limit = 4;  // pairs kept by Fifo

    bool operator==(const Strategy&) const = default;
};

// Linear time-to-first-token model: seconds = intercept + slope * tokens.
struct TtftModel {
    double intercept_seconds = 0.0;
    double seconds_per_token = 0.00065;

    bool operator==(const TtftModel&) const = default;
};

double estimate_ttft(int prompt_tokens, const TtftModel& model = {});

enum class CondensationEvent { Triggered, Integrated, Withheld, Failed };

std::string_view to_string(CondensationEvent event);

// Per-turn measurements. prompt_history_tokens excludes the current user
// message; background token fields stay zero for MtBaseline and Fifo and
// are charged on the turn whose completion fired the trigger. A turn can in
// principle see an integration (build phase) and a trigger outcome
// (completion phase); the later phase wins the event slot.
struct TurnRecord {
    int turn_index = 0;
    int prompt_history_tokens = 0;
    int background_tokens_in = 0;
    int background_tokens_out = 0;
    std::optional<decider::DeciderVerdict> decider_verdict;
    std::optional<CondensationEvent> condensation_event;
    std::string assistant_text;
    double estimated_ttft_seconds = 0.0;

    bool operator==(const TurnRecord&) const = default;
};

struct SessionResult {
    std::string transcript_id;
    std::vector<TurnRecord> turns;
    bool aborted = false;          // chat backend failure; turns holds the partial records
    std::string abort_reason;
    std::optional<bool> exact_match;
    int withheld_triggers = 0;
    int integrated_condensations = 0;

    bool operator==(const SessionResult&) const = default;
};

struct Aggregates {
    int session_count = 0;
    int turn_count = 0;
    long long total_history_tokens = 0;
    double avg_history_tokens = 0.0;
    long long total_background_tokens_in = 0;
    long long total_background_tokens_out = 0;
    // Accounting identity: total history + background in + background out.
    long long total_tokens_with_background = 0;
    std::optional<double> exact_match_accuracy;  // over scored sessions
    int withheld_session_count = 0;   // triggered at least once, integrated nothing
    int condensed_session_count = 0;  // integrated at least one condensation

    bool operator==(const Aggregates&) const = default;
};

Aggregates compute_aggregates(std::span<const SessionResult> sessions);

struct RunReport {
    std::string strategy_name;
    Strategy strategy{};
    std::vector<SessionResult> sessions;
    Aggregates aggregates{};

    bool operator==(const RunReport&) const = default;
};

// Normalized containment: both sides trimmed and ASCII-lowercased, true iff
// the reference then occurs in the answer. An (after trimming) empty
// reference never matches.
bool score_exact_match(std::string_view answer, std::string_view reference);

struct RunOptions {
    std::shared_ptr<const Tokenizer> tokenizer = default_tokenizer();
    TtftModel ttft{};
    std::string chat_model_id = "mock";
    double chat_temperature = 0.01;
    double chat_top_p = 1.0;
    std::optional<double> chat_frequency_penalty = 1.0;
    int chat_max_completion_tokens = 10000;
    condenser::CondenserParams condenser_params{};
    condenser::ExemplarSet exemplars = condenser::ExemplarSet::defaults();
    decider::WordSet stopwords = decider::default_stopwords();
    int condense_retry_limit = 2;
    // Transcripts run in parallel up to this bound; the chat client and
    // condenser backend must be thread-safe when it exceeds 1.
    int session_concurrency = 1;
};

// Replays one transcript under the strategy. Condensation jobs run
// synchronously at their trigger and integrate at the turn-gated boundary,
// so replays are reproducible; job failures fall back to raw history. The
// condenser backend may be null for MtBaseline and Fifo.
SessionResult run_session(const Transcript& transcript, const Strategy& strategy,
                          client::ChatClient& chat, condenser::CondenserBackend* backend,
                          const RunOptions& options = {});

RunReport run_all(std::span<const Transcript> transcripts, const Strategy& strategy,
                  client::ChatClient& chat, condenser::CondenserBackend* backend,
                  const RunOptions& options = {});

struct TranscriptComparison {
    std::string id;
    long long baseline_history_tokens = 0;
    long long candidate_history_tokens = 0;
    double reduction_percent = 0.0;

    bool operator==(const TranscriptComparison&) const = default;
};

struct TurnComparison {
    int turn_index = 0;
    int baseline_sessions = 0;  // sessions that reach this turn
    int candidate_sessions = 0;
    long long baseline_tokens = 0;  // summed across sessions at this turn
    long long candidate_tokens = 0;
    double reduction_percent = 0.0;
    long long baseline_cumulative_with_background = 0;
    long long candidate_cumulative_with_background = 0;

    bool operator==(const TurnComparison&) const = default;
};

struct ComparisonReport {
    std::string baseline_strategy;
    std::string candidate_strategy;
    std::vector<TranscriptComparison> per_transcript;
    std::vector<TurnComparison> per_turn;
    long long baseline_total_history_tokens = 0;
    long long candidate_total_history_tokens = 0;
    double reduction_percent = 0.0;
    long long baseline_total_with_background = 0;
    long long candidate_total_with_background = 0;
    std::optional<double> baseline_accuracy;
    std::optional<double> candidate_accuracy;
    std::optional<double> accuracy_delta;

    bool operator==(const ComparisonReport&) const = default;
};

// Pairs the two runs by transcript id. Throws MismatchedTranscripts when the
// id sets differ.
ComparisonReport compare_runs(const RunReport& baseline, const RunReport& candidate);

struct SweepCell {
    double gamma = 0.0;
    int tau = 0;
    int condensed_sessions = 0;
    int withheld_sessions = 0;
    int no_trigger_sessions = 0;
    long long total_history_tokens = 0;
    double avg_history_tokens = 0.0;
    long long total_tokens_with_background = 0;
    std::optional<double> exact_match_accuracy;

    bool operator==(const SweepCell&) const = default;
};

struct SweepReport {
    std::vector<double> gammas;
    std::vector<int> taus;
    std::vector<SweepCell> cells;  // row-major: gammas outer, taus inner

    bool operator==(const SweepReport&) const = default;
};

extern const std::vector<double> kDefaultSweepGammas;  // 0.1 0.2 0.3 0.4
extern const std::vector<int> kDefaultSweepTaus;       // 500 1000 2000 3000 4000

// Re-runs the suite once per (gamma, tau) grid point with the base
// strategy's other settings held fixed.
SweepReport decider_sweep(std::span<const Transcript> transcripts,
                          const std::vector<double>& gammas, const std::vector<int>& taus,
                          const Strategy& base, client::ChatClient& chat,
                          condenser::CondenserBackend* backend, const RunOptions& options = {});

}  // namespace mtosc::harness
