#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mtosc/types.hpp"

namespace mtosc {

// Handed to the embedder when a condensation should start. window is a
// snapshot of the session entries at trigger time; trigger_turn is the index
// of the exchange whose completion fired the trigger.
struct TriggerRequest {
    std::vector<HistoryEntry> window;
    int trigger_turn = 0;
};

// Chat history under one-off sequential condensation.
//
// Lifecycle of a turn:
//   begin_user_turn(text)          opens turn t
//   build_prompt_history()         integrates a due result, then flattens
//   complete_assistant_reply(text) closes turn t, may return a TriggerRequest
//
// A trigger fires when no job is in flight and the entry count has reached
// w. The embedder runs the condensation off-session and reports back through
// report_job_result / report_job_failure / report_job_withheld; the session
// itself never blocks. A Ready result is applied at the first prompt
// construction whose turn index is at least trigger_turn +
// integration_delay_turns + 1 (with the default delay of 1: the
// next-to-next turn). Integration replaces the job's window, which is always
// a prefix of the entries, with a single condensed entry at position 0;
// exchanges appended while the job ran are preserved after it. A Failed job
// is discarded at the next prompt construction and the history keeps growing
// raw, so the trigger re-fires at every completed exchange until a
// condensation lands.
//
// The instance is single-writer: all mutating calls must come from one
// thread (or be externally serialized). Background work only touches the
// session through the report_* calls made by that owner.
class SessionState {
public:
    explicit SessionState(WindowConfig config = {},
                          std::shared_ptr<const Tokenizer> tokenizer = default_tokenizer());

    // Opens turn (turns_completed + 1). Throws AlreadyOpenTurn.
    void begin_user_turn(std::string text);

    // Flattened prompt for the open turn: history entries in order (a
    // condensed entry contributes its human_input/assistant_summary as a
    // user/assistant message; reasoning never appears) followed by the
    // current user message. Integrates the pending job first when it is
    // Ready and due, and discards it when it is Failed. Throws NoOpenTurn.
    std::vector<Message> build_prompt_history();

    // Closes the open turn with the assistant's text. When this completion
    // leaves no job in flight and at least w entries, a job is created and
    // its TriggerRequest returned. Throws NoOpenTurn.
    std::optional<TriggerRequest> complete_assistant_reply(std::string text);

    // Applies a Ready result now. Normally called indirectly via
    // build_prompt_history; exposed for embedders that manage the boundary
    // themselves. Throws NotReady when there is no job, the job is not Ready
    // or the integration boundary has not been reached; throws StaleJob when
    // the entries no longer start with the job's window.
    void integrate_ready_job();

    // Token count of the flattened history, current user message excluded.
    int history_token_count() const;

    // Embedder-side completion of the pending job.
    void report_job_result(CondensedPair result, int input_tokens, int output_tokens);
    void report_job_failure(int input_tokens, int output_tokens);
    // Records the decider's Withhold at this trigger and re-arms.
    void report_job_withheld();

    const std::vector<HistoryEntry>& entries() const { return entries_; }
    const std::optional<CondensationJob>& pending_job() const { return pending_job_; }
    const WindowConfig& config() const { return config_; }
    const std::vector<int>& decider_withheld_at() const { return decider_withheld_at_; }
    int next_generation_index() const { return next_generation_index_; }
    bool has_open_turn() const { return current_user_.has_value(); }
    // 1-based index of the open turn, or of the turn a begin_user_turn would
    // open next.
    int current_turn_index() const { return turns_completed_ + 1; }
    int turns_completed() const { return turns_completed_; }
    // Sum of tokenizer counts of every original raw user turn so far,
    // including turns that now live inside condensed entries. Feeds the
    // TauScope::SessionRaw decider variant.
    int raw_user_tokens_total() const { return raw_user_tokens_total_; }

private:
    bool integration_due() const;
    void discard_failed_job();

    WindowConfig config_;
    std::shared_ptr<const Tokenizer> tokenizer_;
    std::vector<HistoryEntry> entries_;
    std::optional<CondensationJob> pending_job_;
    std::optional<Turn> current_user_;
    std::vector<int> decider_withheld_at_;
    int next_generation_index_ = 1;
    int turns_completed_ = 0;
    int raw_user_tokens_total_ = 0;
};

}  // namespace mtosc
