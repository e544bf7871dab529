#include "mtosc/session.hpp"

#include <algorithm>
#include <utility>

#include "mtosc/errors.hpp"

namespace mtosc {

SessionState::SessionState(WindowConfig config, std::shared_ptr<const Tokenizer> tokenizer)
    : config_(config), tokenizer_(std::move(tokenizer)) {
    config_.validate();
    if (!tokenizer_) tokenizer_ = default_tokenizer();
}

void SessionState::begin_user_turn(std::string text) {
    if (current_user_) throw AlreadyOpenTurn();
    Turn turn{Role::User, std::move(text), 0};
    turn.token_count = tokenizer_->count(turn.text);
    current_user_ = std::move(turn);
}

bool SessionState::integration_due() const {
    return pending_job_ && pending_job_->status == JobStatus::Ready &&
           current_turn_index() >= pending_job_->trigger_turn + config_.integration_delay_turns + 1;
}

void SessionState::discard_failed_job() {
    if (pending_job_ && pending_job_->status == JobStatus::Failed) pending_job_.reset();
}

std::vector<Message> SessionState::build_prompt_history() {
    if (!current_user_) throw NoOpenTurn();
    discard_failed_job();
    if (integration_due()) integrate_ready_job();

    std::vector<Message> prompt;
    prompt.reserve(entries_.size() * 2 + 1);
    for (const auto& entry : entries_) {
        prompt.push_back(Message{Role::User, user_text(entry)});
        prompt.push_back(Message{Role::Assistant, assistant_text(entry)});
    }
    prompt.push_back(Message{Role::User, current_user_->text});
    return prompt;
}

std::optional<TriggerRequest> SessionState::complete_assistant_reply(std::string text) {
    if (!current_user_) throw NoOpenTurn();

    ExchangePair pair;
    pair.user = std::move(*current_user_);
    current_user_.reset();
    pair.assistant = Turn{Role::Assistant, std::move(text), 0};
    pair.assistant.token_count = tokenizer_->count(pair.assistant.text);
    pair.turn_index = ++turns_completed_;
    raw_user_tokens_total_ += pair.user.token_count;
    entries_.push_back(std::move(pair));

    if (pending_job_ || static_cast<int>(entries_.size()) < config_.w) return std::nullopt;

    CondensationJob job;
    job.input_window = entries_;
    job.trigger_turn = turns_completed_;
    job.status = JobStatus::Pending;
    pending_job_ = std::move(job);
    return TriggerRequest{pending_job_->input_window, pending_job_->trigger_turn};
}

void SessionState::integrate_ready_job() {
    if (!pending_job_ || pending_job_->status != JobStatus::Ready)
        throw NotReady("no Ready condensation result to integrate");
    if (!integration_due())
        throw NotReady("integration boundary not reached");

    const auto& window = pending_job_->input_window;
    if (entries_.size() < window.size() ||
        !std::equal(window.begin(), window.end(), entries_.begin()))
        throw StaleJob();

    CondensedPair condensed = *pending_job_->result;
    condensed.covers_from = mtosc::covers_from(window.front());
    condensed.covers_to = pending_job_->trigger_turn;
    condensed.generation_index = next_generation_index_++;

    entries_.erase(entries_.begin(), entries_.begin() + static_cast<long>(window.size()));
    entries_.insert(entries_.begin(), HistoryEntry{std::move(condensed)});
    pending_job_.reset();
}

int SessionState::history_token_count() const {
    int total = 0;
    for (const auto& entry : entries_) total += entry_token_count(entry, *tokenizer_);
    return total;
}

void SessionState::report_job_result(CondensedPair result, int input_tokens, int output_tokens) {
    if (!pending_job_ || pending_job_->status != JobStatus::Pending)
        throw NotReady("no pending job to complete");
    pending_job_->result = std::move(result);
    pending_job_->input_tokens = input_tokens;
    pending_job_->output_tokens = output_tokens;
    pending_job_->status = JobStatus::Ready;
}

void SessionState::report_job_failure(int input_tokens, int output_tokens) {
    if (!pending_job_ || pending_job_->status != JobStatus::Pending)
        throw NotReady("no pending job to fail");
    pending_job_->input_tokens = input_tokens;
    pending_job_->output_tokens = output_tokens;
    pending_job_->status = JobStatus::Failed;
}

void SessionState::report_job_withheld() {
    if (!pending_job_ || pending_job_->status != JobStatus::Pending)
        throw NotReady("no pending job to withhold");
    decider_withheld_at_.push_back(pending_job_->trigger_turn);
    pending_job_.reset();
}

}  // namespace mtosc
