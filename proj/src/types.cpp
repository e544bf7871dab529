#include "mtosc/types.hpp"

#include "mtosc/errors.hpp"

namespace mtosc {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::System: return "system";
    }
    return "user";
}

std::string_view to_string(JobStatus status) {
    switch (status) {
        case JobStatus::Pending: return "pending";
        case JobStatus::Ready: return "ready";
        case JobStatus::Failed: return "failed";
        case JobStatus::Withheld: return "withheld";
    }
    return "pending";
}

std::string_view to_string(OverlapMode mode) {
    return mode == OverlapMode::PairwiseMean ? "pairwise_mean" : "shared_mass";
}

std::string_view to_string(TauScope scope) {
    return scope == TauScope::SessionRaw ? "session_raw" : "window";
}

OverlapMode overlap_mode_from_string(std::string_view name) {
    if (name == "shared_mass") return OverlapMode::SharedMass;
    if (name == "pairwise_mean") return OverlapMode::PairwiseMean;
    throw Error("unknown overlap mode: " + std::string(name));
}

TauScope tau_scope_from_string(std::string_view name) {
    if (name == "window") return TauScope::Window;
    if (name == "session_raw") return TauScope::SessionRaw;
    throw Error("unknown tau scope: " + std::string(name));
}

bool is_condensed(const HistoryEntry& entry) {
    return std::holds_alternative<CondensedPair>(entry);
}

const std::string& user_text(const HistoryEntry& entry) {
    if (const auto* c = std::get_if<CondensedPair>(&entry)) return c->human_input;
    return std::get<ExchangePair>(entry).user.text;
}

const std::string& assistant_text(const HistoryEntry& entry) {
    if (const auto* c = std::get_if<CondensedPair>(&entry)) return c->assistant_summary;
    return std::get<ExchangePair>(entry).assistant.text;
}

int covers_from(const HistoryEntry& entry) {
    if (const auto* c = std::get_if<CondensedPair>(&entry)) return c->covers_from;
    return std::get<ExchangePair>(entry).turn_index;
}

int covers_to(const HistoryEntry& entry) {
    if (const auto* c = std::get_if<CondensedPair>(&entry)) return c->covers_to;
    return std::get<ExchangePair>(entry).turn_index;
}

int entry_token_count(const HistoryEntry& entry, const Tokenizer& tokenizer) {
    if (const auto* c = std::get_if<CondensedPair>(&entry)) {
        return tokenizer.count(c->human_input) + tokenizer.count(c->assistant_summary);
    }
    const auto& p = std::get<ExchangePair>(entry);
    return p.user.token_count + p.assistant.token_count;
}

ExchangePair make_exchange_pair(std::string user_text, std::string assistant_text,
                                int turn_index, const Tokenizer& tokenizer) {
    ExchangePair pair;
    pair.user = Turn{Role::User, std::move(user_text), 0};
    pair.assistant = Turn{Role::Assistant, std::move(assistant_text), 0};
    pair.user.token_count = tokenizer.count(pair.user.text);
    pair.assistant.token_count = tokenizer.count(pair.assistant.text);
    pair.turn_index = turn_index;
    return pair;
}

void WindowConfig::validate() const {
    if (w < 2) throw Error("window size w must be at least 2");
    if (gamma < 0.0 || gamma > 1.0) throw Error("gamma must lie in [0, 1]");
    if (tau < 0) throw Error("tau must be non-negative");
    if (integration_delay_turns < 1) throw Error("integration delay must be at least 1 turn");
}

}  // namespace mtosc
