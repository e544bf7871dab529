#include "mtosc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <thread>

#include "mtosc/errors.hpp"

namespace mtosc::harness {

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::MtBaseline: return "baseline";
        case StrategyKind::MtOsc: return "mtosc";
        case StrategyKind::Fifo: return "fifo";
        case StrategyKind::MtOscSummarizer: return "summ";
    }
    return "mtosc";
}

StrategyKind strategy_from_string(std::string_view name) {
    if (name == "baseline") return StrategyKind::MtBaseline;
    if (name == "mtosc") return StrategyKind::MtOsc;
    if (name == "fifo") return StrategyKind::Fifo;
    if (name == "summ") return StrategyKind::MtOscSummarizer;
    throw Error("unknown strategy: " + std::string(name));
}

std::string_view to_string(CondensationEvent event) {
    switch (event) {
        case CondensationEvent::Triggered: return "triggered";
        case CondensationEvent::Integrated: return "integrated";
        case CondensationEvent::Withheld: return "withheld";
        case CondensationEvent::Failed: return "failed";
    }
    return "triggered";
}

double estimate_ttft(int prompt_tokens, const TtftModel& model) {
    return model.intercept_seconds + model.seconds_per_token * static_cast<double>(prompt_tokens);
}

bool score_exact_match(std::string_view answer, std::string_view reference) {
    auto normalized = [](std::string_view text) {
        size_t begin = 0;
        size_t end = text.size();
        while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
        while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
        std::string out(text.substr(begin, end - begin));
        for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    const std::string a = normalized(answer);
    const std::string r = normalized(reference);
    if (r.empty()) return false;
    return a.find(r) != std::string::npos;
}

namespace {

client::ChatRequest make_chat_request(const std::vector<Message>& prompt,
                                      const RunOptions& options) {
    client::ChatRequest request;
    request.model_id = options.chat_model_id;
    request.temperature = options.chat_temperature;
    request.top_p = options.chat_top_p;
    request.frequency_penalty = options.chat_frequency_penalty;
    request.max_completion_tokens = options.chat_max_completion_tokens;
    request.messages.reserve(prompt.size());
    for (const auto& message : prompt)
        request.messages.push_back(client::ChatMessage{message.role, message.text});
    return request;
}

void finish_scoring(const Transcript& transcript, SessionResult& result) {
    if (transcript.scoring != Scoring::ExactMatch || !transcript.reference_answer ||
        result.aborted || result.turns.empty())
        return;
    result.exact_match =
        score_exact_match(result.turns.back().assistant_text, *transcript.reference_answer);
}

// MtBaseline and Fifo share the plain replay loop; they differ only in how
// much history enters the prompt.
SessionResult run_plain(const Transcript& transcript, const Strategy& strategy,
                        client::ChatClient& chat, const RunOptions& options) {
    const Tokenizer& tokenizer = *options.tokenizer;
    const bool fifo = strategy.kind == StrategyKind::Fifo;
    if (fifo && strategy.fifo_limit < 1) throw Error("fifo_limit must be at least 1");

    SessionResult result;
    result.transcript_id = transcript.id;
    std::vector<ExchangePair> history;

    for (size_t i = 0; i < transcript.user_turns.size(); ++i) {
        const std::string& user_turn = transcript.user_turns[i];
        const size_t first =
            fifo && history.size() > static_cast<size_t>(strategy.fifo_limit)
                ? history.size() - static_cast<size_t>(strategy.fifo_limit)
                : 0;

        TurnRecord record;
        record.turn_index = static_cast<int>(i + 1);
        std::vector<Message> prompt;
        for (size_t k = first; k < history.size(); ++k) {
            prompt.push_back(Message{Role::User, history[k].user.text});
            prompt.push_back(Message{Role::Assistant, history[k].assistant.text});
            record.prompt_history_tokens += history[k].user.token_count;
            record.prompt_history_tokens += history[k].assistant.token_count;
        }
        prompt.push_back(Message{Role::User, user_turn});
        record.estimated_ttft_seconds = estimate_ttft(
            record.prompt_history_tokens + tokenizer.count(user_turn), options.ttft);

        client::ChatCompletion completion;
        try {
            completion = chat.complete(make_chat_request(prompt, options));
        } catch (const BackendError& e) {
            result.aborted = true;
            result.abort_reason = e.what();
            break;
        }
        record.assistant_text = completion.text;
        history.push_back(make_exchange_pair(user_turn, completion.text,
                                             static_cast<int>(i + 1), tokenizer));
        result.turns.push_back(std::move(record));
    }
    finish_scoring(transcript, result);
    return result;
}

SessionResult run_condensing(const Transcript& transcript, const Strategy& strategy,
                             client::ChatClient& chat, condenser::CondenserBackend* backend,
                             const RunOptions& options) {
    if (!backend) throw Error("strategy needs a condenser backend");
    const Tokenizer& tokenizer = *options.tokenizer;

    condenser::CondenseOptions condense_options;
    condense_options.retry_limit = options.condense_retry_limit;
    condense_options.summarizer = strategy.kind == StrategyKind::MtOscSummarizer;

    SessionResult result;
    result.transcript_id = transcript.id;
    SessionState session(strategy.window_config, options.tokenizer);

    for (const std::string& user_turn : transcript.user_turns) {
        session.begin_user_turn(user_turn);

        TurnRecord record;
        record.turn_index = session.current_turn_index();

        const int generation_before = session.next_generation_index();
        std::vector<Message> prompt = session.build_prompt_history();
        if (session.next_generation_index() != generation_before) {
            record.condensation_event = CondensationEvent::Integrated;
            ++result.integrated_condensations;
        }
        record.prompt_history_tokens = session.history_token_count();
        record.estimated_ttft_seconds = estimate_ttft(
            record.prompt_history_tokens + tokenizer.count(user_turn), options.ttft);

        client::ChatCompletion completion;
        try {
            completion = chat.complete(make_chat_request(prompt, options));
        } catch (const BackendError& e) {
            result.aborted = true;
            result.abort_reason = e.what();
            break;
        }
        record.assistant_text = completion.text;

        if (auto trigger = session.complete_assistant_reply(completion.text)) {
            record.condensation_event = CondensationEvent::Triggered;
            std::optional<int> tau_tokens;
            if (strategy.window_config.tau_scope == TauScope::SessionRaw)
                tau_tokens = session.raw_user_tokens_total();
            record.decider_verdict = decider::decide(trigger->window, strategy.window_config,
                                                     tokenizer, options.stopwords, tau_tokens);
            if (record.decider_verdict->decision == decider::Decision::Withhold) {
                session.report_job_withheld();
                record.condensation_event = CondensationEvent::Withheld;
                ++result.withheld_triggers;
            } else {
                try {
                    condenser::CondenseResult condensed = condenser::condense(
                        trigger->window, *backend, options.condenser_params, options.exemplars,
                        tokenizer, condense_options);
                    record.background_tokens_in = condensed.input_tokens;
                    record.background_tokens_out = condensed.output_tokens;
                    session.report_job_result(std::move(condensed.pair), condensed.input_tokens,
                                              condensed.output_tokens);
                } catch (const BackendError& e) {
                    record.background_tokens_in = e.input_tokens;
                    record.background_tokens_out = e.output_tokens;
                    session.report_job_failure(e.input_tokens, e.output_tokens);
                    record.condensation_event = CondensationEvent::Failed;
                } catch (const ParseFailedAfterRetries& e) {
                    record.background_tokens_in = e.input_tokens;
                    record.background_tokens_out = e.output_tokens;
                    session.report_job_failure(e.input_tokens, e.output_tokens);
                    record.condensation_event = CondensationEvent::Failed;
                }
            }
        }
        result.turns.push_back(std::move(record));
    }
    finish_scoring(transcript, result);
    return result;
}

}  // namespace

SessionResult run_session(const Transcript& transcript, const Strategy& strategy,
                          client::ChatClient& chat, condenser::CondenserBackend* backend,
                          const RunOptions& options) {
    if (transcript.user_turns.empty()) throw Error("transcript has no user turns");
    strategy.window_config.validate();
    if (strategy.kind == StrategyKind::MtBaseline || strategy.kind == StrategyKind::Fifo)
        return run_plain(transcript, strategy, chat, options);
    return run_condensing(transcript, strategy, chat, backend, options);
}

Aggregates compute_aggregates(std::span<const SessionResult> sessions) {
    Aggregates agg;
    agg.session_count = static_cast<int>(sessions.size());
    int scored = 0;
    int matched = 0;
    for (const auto& session : sessions) {
        bool triggered = session.withheld_triggers > 0;
        for (const auto& turn : session.turns) {
            ++agg.turn_count;
            agg.total_history_tokens += turn.prompt_history_tokens;
            agg.total_background_tokens_in += turn.background_tokens_in;
            agg.total_background_tokens_out += turn.background_tokens_out;
            if (turn.condensation_event &&
                *turn.condensation_event != CondensationEvent::Integrated)
                triggered = true;
        }
        if (session.integrated_condensations > 0)
            ++agg.condensed_session_count;
        else if (triggered)
            ++agg.withheld_session_count;
        if (session.exact_match) {
            ++scored;
            matched += *session.exact_match ? 1 : 0;
        }
    }
    agg.total_tokens_with_background = agg.total_history_tokens +
                                       agg.total_background_tokens_in +
                                       agg.total_background_tokens_out;
    if (agg.turn_count > 0)
        agg.avg_history_tokens =
            static_cast<double>(agg.total_history_tokens) / static_cast<double>(agg.turn_count);
    if (scored > 0)
        agg.exact_match_accuracy = static_cast<double>(matched) / static_cast<double>(scored);
    return agg;
}

RunReport run_all(std::span<const Transcript> transcripts, const Strategy& strategy,
                  client::ChatClient& chat, condenser::CondenserBackend* backend,
                  const RunOptions& options) {
    RunReport report;
    report.strategy_name = std::string(to_string(strategy.kind));
    report.strategy = strategy;
    report.sessions.resize(transcripts.size());

    const int workers = std::max(1, std::min<int>(options.session_concurrency,
                                                  static_cast<int>(transcripts.size())));
    if (workers <= 1) {
        for (size_t i = 0; i < transcripts.size(); ++i)
            report.sessions[i] = run_session(transcripts[i], strategy, chat, backend, options);
    } else {
        std::atomic<size_t> cursor{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (size_t i = cursor.fetch_add(1); i < transcripts.size();
                     i = cursor.fetch_add(1))
                    report.sessions[i] =
                        run_session(transcripts[i], strategy, chat, backend, options);
            });
        }
        for (auto& worker : pool) worker.join();
    }
    report.aggregates = compute_aggregates(report.sessions);
    return report;
}

namespace {

double reduction_percent(long long baseline, long long candidate) {
    if (baseline <= 0) return 0.0;
    return 100.0 * (1.0 - static_cast<double>(candidate) / static_cast<double>(baseline));
}

}  // namespace

ComparisonReport compare_runs(const RunReport& baseline, const RunReport& candidate) {
    std::map<std::string, const SessionResult*> baseline_by_id;
    for (const auto& session : baseline.sessions) baseline_by_id[session.transcript_id] = &session;
    if (baseline_by_id.size() != baseline.sessions.size())
        throw MismatchedTranscripts("duplicate transcript ids in the baseline run");

    ComparisonReport report;
    report.baseline_strategy = baseline.strategy_name;
    report.candidate_strategy = candidate.strategy_name;

    std::map<std::string, const SessionResult*> candidate_by_id;
    for (const auto& session : candidate.sessions) candidate_by_id[session.transcript_id] = &session;
    if (candidate_by_id.size() != candidate.sessions.size())
        throw MismatchedTranscripts("duplicate transcript ids in the candidate run");
    if (baseline_by_id.size() != candidate_by_id.size())
        throw MismatchedTranscripts("the two runs cover different transcript sets");
    for (const auto& [id, session] : baseline_by_id)
        if (!candidate_by_id.count(id))
            throw MismatchedTranscripts("transcript \"" + id + "\" is missing from the candidate run");

    size_t max_turns = 0;
    for (const auto& [id, base_session] : baseline_by_id) {
        const SessionResult* cand_session = candidate_by_id.at(id);
        TranscriptComparison tc;
        tc.id = id;
        for (const auto& turn : base_session->turns)
            tc.baseline_history_tokens += turn.prompt_history_tokens;
        for (const auto& turn : cand_session->turns)
            tc.candidate_history_tokens += turn.prompt_history_tokens;
        tc.reduction_percent =
            reduction_percent(tc.baseline_history_tokens, tc.candidate_history_tokens);
        report.per_transcript.push_back(std::move(tc));
        max_turns = std::max({max_turns, base_session->turns.size(), cand_session->turns.size()});
    }

    long long base_cumulative = 0;
    long long cand_cumulative = 0;
    for (size_t t = 0; t < max_turns; ++t) {
        TurnComparison tc;
        tc.turn_index = static_cast<int>(t + 1);
        for (const auto& [id, base_session] : baseline_by_id) {
            if (t < base_session->turns.size()) {
                const auto& turn = base_session->turns[t];
                ++tc.baseline_sessions;
                tc.baseline_tokens += turn.prompt_history_tokens;
                base_cumulative += turn.prompt_history_tokens + turn.background_tokens_in +
                                   turn.background_tokens_out;
            }
            const SessionResult* cand_session = candidate_by_id.at(id);
            if (t < cand_session->turns.size()) {
                const auto& turn = cand_session->turns[t];
                ++tc.candidate_sessions;
                tc.candidate_tokens += turn.prompt_history_tokens;
                cand_cumulative += turn.prompt_history_tokens + turn.background_tokens_in +
                                   turn.background_tokens_out;
            }
        }
        tc.reduction_percent = reduction_percent(tc.baseline_tokens, tc.candidate_tokens);
        tc.baseline_cumulative_with_background = base_cumulative;
        tc.candidate_cumulative_with_background = cand_cumulative;
        report.per_turn.push_back(std::move(tc));
    }

    report.baseline_total_history_tokens = baseline.aggregates.total_history_tokens;
    report.candidate_total_history_tokens = candidate.aggregates.total_history_tokens;
    report.reduction_percent = reduction_percent(report.baseline_total_history_tokens,
                                                 report.candidate_total_history_tokens);
    report.baseline_total_with_background = baseline.aggregates.total_tokens_with_background;
    report.candidate_total_with_background = candidate.aggregates.total_tokens_with_background;
    report.baseline_accuracy = baseline.aggregates.exact_match_accuracy;
    report.candidate_accuracy = candidate.aggregates.exact_match_accuracy;
    if (report.baseline_accuracy && report.candidate_accuracy)
        report.accuracy_delta = *report.candidate_accuracy - *report.baseline_accuracy;
    return report;
}

const std::vector<double> kDefaultSweepGammas = {0.1, 0.2, 0.3, 0.4};
const std::vector<int> kDefaultSweepTaus = {500, 1000, 2000, 3000, 4000};

SweepReport decider_sweep(std::span<const Transcript> transcripts,
                          const std::vector<double>& gammas, const std::vector<int>& taus,
                          const Strategy& base, client::ChatClient& chat,
                          condenser::CondenserBackend* backend, const RunOptions& options) {
    if (gammas.empty() || taus.empty()) throw Error("sweep grids must be non-empty");
    SweepReport report;
    report.gammas = gammas;
    report.taus = taus;
    for (double gamma : gammas) {
        for (int tau : taus) {
            Strategy strategy = base;
            strategy.window_config.gamma = gamma;
            strategy.window_config.tau = tau;
            strategy.window_config.decider_enabled = true;
            RunReport run = run_all(transcripts, strategy, chat, backend, options);

            SweepCell cell;
            cell.gamma = gamma;
            cell.tau = tau;
            cell.condensed_sessions = run.aggregates.condensed_session_count;
            cell.withheld_sessions = run.aggregates.withheld_session_count;
            cell.no_trigger_sessions = run.aggregates.session_count -
                                       run.aggregates.condensed_session_count -
                                       run.aggregates.withheld_session_count;
            cell.total_history_tokens = run.aggregates.total_history_tokens;
            cell.avg_history_tokens = run.aggregates.avg_history_tokens;
            cell.total_tokens_with_background = run.aggregates.total_tokens_with_background;
            cell.exact_match_accuracy = run.aggregates.exact_match_accuracy;
            report.cells.push_back(cell);
        }
    }
    return report;
}

}  // namespace mtosc::harness
