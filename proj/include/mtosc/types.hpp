#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtosc/tokenizer.hpp"

namespace mtosc {

enum class Role { User, Assistant, System };

std::string_view to_string(Role role);

struct Turn {
    Role role = Role::User;
    std::string text;
    int token_count = 0;

    bool operator==(const Turn&) const = default;
};

// One completed user/assistant exchange. turn_index is the 1-based position
// of the exchange within its session.
struct ExchangePair {
    Turn user;
    Turn assistant;
    int turn_index = 0;

    bool operator==(const ExchangePair&) const = default;
};

// Output of one accepted condensation. covers_from/covers_to give the
// inclusive range of original turn indices the pair stands in for;
// generation_index is 1 for the first accepted condensation of a session and
// increments with each later one. reasoning is kept for audit only and never
// re-enters a prompt.
struct CondensedPair {
    std::string human_input;
    std::string assistant_summary;
    std::string reasoning;
    int covers_from = 0;
    int covers_to = 0;
    int generation_index = 0;

    bool operator==(const CondensedPair&) const = default;
};

using HistoryEntry = std::variant<ExchangePair, CondensedPair>;

bool is_condensed(const HistoryEntry& entry);

// User-side and assistant-side text of an entry. A condensed entry
// contributes human_input / assistant_summary.
const std::string& user_text(const HistoryEntry& entry);
const std::string& assistant_text(const HistoryEntry& entry);

// First and last original turn index covered by an entry.
int covers_from(const HistoryEntry& entry);
int covers_to(const HistoryEntry& entry);

int entry_token_count(const HistoryEntry& entry, const Tokenizer& tokenizer);

ExchangePair make_exchange_pair(std::string user_text, std::string assistant_text,
                                int turn_index,
                                const Tokenizer& tokenizer = *default_tokenizer());

enum class OverlapMode { SharedMass, PairwiseMean };
enum class TauScope { Window, SessionRaw };

std::string_view to_string(OverlapMode mode);                // shared_mass|pairwise_mean
std::string_view to_string(TauScope scope);                  // window|session_raw
OverlapMode overlap_mode_from_string(std::string_view name);
TauScope tau_scope_from_string(std::string_view name);

struct WindowConfig {
    int w = 4;                        // trigger window size in entries
    double gamma = 0.2;               // overlap threshold
    int tau = 1000;                   // user-token threshold
    int integration_delay_turns = 1;  // 1 = result lands at the next-to-next turn
    bool decider_enabled = true;
    OverlapMode overlap_mode = OverlapMode::SharedMass;
    TauScope tau_scope = TauScope::Window;

    // Throws Error when w < 2, gamma outside [0, 1], tau < 0 or delay < 1.
    void validate() const;

    bool operator==(const WindowConfig&) const = default;
};

enum class JobStatus { Pending, Ready, Failed, Withheld };

std::string_view to_string(JobStatus status);

// One in-flight condensation. input_window is a snapshot of the session
// entries at trigger time (all of them; that is exactly w on the normal path
// and more after failed or withheld triggers). Token counts are populated
// once the job reaches Ready or Failed.
struct CondensationJob {
    std::vector<HistoryEntry> input_window;
    int trigger_turn = 0;
    JobStatus status = JobStatus::Pending;
    std::optional<CondensedPair> result;
    int input_tokens = 0;
    int output_tokens = 0;
};

// One prompt message, in order.
struct Message {
    Role role = Role::User;
    std::string text;

    bool operator==(const Message&) const = default;
};

}  // namespace mtosc
