#include "mtosc/report.hpp"

#include <fstream>
#include <sstream>

#include "mtosc/errors.hpp"

namespace mtosc::report {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Shortest representation that parses back to the same double, so CSV and
// JSON agree and output is byte-stable.
std::string fmt(double value) { return json(value).dump(); }

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

ordered_json window_to_json(const WindowConfig& config) {
    return ordered_json{{"w", config.w},
                        {"gamma", config.gamma},
                        {"tau", config.tau},
                        {"integration_delay_turns", config.integration_delay_turns},
                        {"decider_enabled", config.decider_enabled},
                        {"overlap_mode", to_string(config.overlap_mode)},
                        {"tau_scope", to_string(config.tau_scope)}};
}

ordered_json strategy_to_json(const harness::Strategy& strategy) {
    return ordered_json{{"kind", to_string(strategy.kind)},
                        {"window", window_to_json(strategy.window_config)},
                        {"fifo_limit", strategy.fifo_limit}};
}

ordered_json verdict_to_json(const decider::DeciderVerdict& verdict) {
    return ordered_json{{"decision", to_string(verdict.decision)},
                        {"overlap", verdict.overlap},
                        {"user_tokens", verdict.user_tokens},
                        {"gamma", verdict.gamma},
                        {"tau", verdict.tau}};
}

ordered_json turn_to_json(const harness::TurnRecord& turn) {
    ordered_json j{{"turn_index", turn.turn_index},
                   {"prompt_history_tokens", turn.prompt_history_tokens},
                   {"background_tokens_in", turn.background_tokens_in},
                   {"background_tokens_out", turn.background_tokens_out}};
    j["decider_verdict"] =
        turn.decider_verdict ? verdict_to_json(*turn.decider_verdict) : ordered_json(nullptr);
    j["condensation_event"] = turn.condensation_event
                                  ? ordered_json(to_string(*turn.condensation_event))
                                  : ordered_json(nullptr);
    j["assistant_text"] = turn.assistant_text;
    j["estimated_ttft_seconds"] = turn.estimated_ttft_seconds;
    return j;
}

ordered_json session_to_json(const harness::SessionResult& session) {
    ordered_json j{{"transcript_id", session.transcript_id},
                   {"aborted", session.aborted},
                   {"abort_reason", session.abort_reason}};
    j["exact_match"] = session.exact_match ? ordered_json(*session.exact_match)
                                           : ordered_json(nullptr);
    j["withheld_triggers"] = session.withheld_triggers;
    j["integrated_condensations"] = session.integrated_condensations;
    j["turns"] = ordered_json::array();
    for (const auto& turn : session.turns) j["turns"].push_back(turn_to_json(turn));
    return j;
}

ordered_json aggregates_to_json(const harness::Aggregates& agg) {
    ordered_json j{{"session_count", agg.session_count},
                   {"turn_count", agg.turn_count},
                   {"total_history_tokens", agg.total_history_tokens},
                   {"avg_history_tokens", agg.avg_history_tokens},
                   {"total_background_tokens_in", agg.total_background_tokens_in},
                   {"total_background_tokens_out", agg.total_background_tokens_out},
                   {"total_tokens_with_background", agg.total_tokens_with_background}};
    j["exact_match_accuracy"] = agg.exact_match_accuracy
                                    ? ordered_json(*agg.exact_match_accuracy)
                                    : ordered_json(nullptr);
    j["withheld_session_count"] = agg.withheld_session_count;
    j["condensed_session_count"] = agg.condensed_session_count;
    return j;
}

[[noreturn]] void bad_shape(const std::string& what) { throw SchemaError(0, what); }

const json& need(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) bad_shape(std::string("missing key \"") + key + "\"");
    return *it;
}

WindowConfig window_from_json(const json& j) {
    WindowConfig config;
    config.w = need(j, "w").get<int>();
    config.gamma = need(j, "gamma").get<double>();
    config.tau = need(j, "tau").get<int>();
    config.integration_delay_turns = need(j, "integration_delay_turns").get<int>();
    config.decider_enabled = need(j, "decider_enabled").get<bool>();
    config.overlap_mode = overlap_mode_from_string(need(j, "overlap_mode").get<std::string>());
    config.tau_scope = tau_scope_from_string(need(j, "tau_scope").get<std::string>());
    return config;
}

harness::TurnRecord turn_from_json(const json& j) {
    harness::TurnRecord turn;
    turn.turn_index = need(j, "turn_index").get<int>();
    turn.prompt_history_tokens = need(j, "prompt_history_tokens").get<int>();
    turn.background_tokens_in = need(j, "background_tokens_in").get<int>();
    turn.background_tokens_out = need(j, "background_tokens_out").get<int>();
    const json& verdict = need(j, "decider_verdict");
    if (!verdict.is_null()) {
        decider::DeciderVerdict v;
        const std::string decision = need(verdict, "decision").get<std::string>();
        if (decision == "condense")
            v.decision = decider::Decision::Condense;
        else if (decision == "withhold")
            v.decision = decider::Decision::Withhold;
        else
            bad_shape("unknown decision \"" + decision + "\"");
        v.overlap = need(verdict, "overlap").get<double>();
        v.user_tokens = need(verdict, "user_tokens").get<int>();
        v.gamma = need(verdict, "gamma").get<double>();
        v.tau = need(verdict, "tau").get<int>();
        turn.decider_verdict = v;
    }
    const json& event = need(j, "condensation_event");
    if (!event.is_null()) {
        const std::string name = event.get<std::string>();
        if (name == "triggered")
            turn.condensation_event = harness::CondensationEvent::Triggered;
        else if (name == "integrated")
            turn.condensation_event = harness::CondensationEvent::Integrated;
        else if (name == "withheld")
            turn.condensation_event = harness::CondensationEvent::Withheld;
        else if (name == "failed")
            turn.condensation_event = harness::CondensationEvent::Failed;
        else
            bad_shape("unknown condensation event \"" + name + "\"");
    }
    turn.assistant_text = need(j, "assistant_text").get<std::string>();
    turn.estimated_ttft_seconds = need(j, "estimated_ttft_seconds").get<double>();
    return turn;
}

}  // namespace

ordered_json to_json(const harness::RunReport& report) {
    ordered_json j;
    j["strategy_name"] = report.strategy_name;
    j["strategy"] = strategy_to_json(report.strategy);
    j["aggregates"] = aggregates_to_json(report.aggregates);
    j["sessions"] = ordered_json::array();
    for (const auto& session : report.sessions) j["sessions"].push_back(session_to_json(session));
    return j;
}

ordered_json to_json(const harness::ComparisonReport& report) {
    ordered_json j;
    j["baseline_strategy"] = report.baseline_strategy;
    j["candidate_strategy"] = report.candidate_strategy;
    j["baseline_total_history_tokens"] = report.baseline_total_history_tokens;
    j["candidate_total_history_tokens"] = report.candidate_total_history_tokens;
    j["reduction_percent"] = report.reduction_percent;
    j["baseline_total_with_background"] = report.baseline_total_with_background;
    j["candidate_total_with_background"] = report.candidate_total_with_background;
    j["baseline_accuracy"] = report.baseline_accuracy ? ordered_json(*report.baseline_accuracy)
                                                      : ordered_json(nullptr);
    j["candidate_accuracy"] = report.candidate_accuracy ? ordered_json(*report.candidate_accuracy)
                                                        : ordered_json(nullptr);
    j["accuracy_delta"] = report.accuracy_delta ? ordered_json(*report.accuracy_delta)
                                                : ordered_json(nullptr);
    j["per_transcript"] = ordered_json::array();
    for (const auto& tc : report.per_transcript)
        j["per_transcript"].push_back(
            ordered_json{{"id", tc.id},
                         {"baseline_history_tokens", tc.baseline_history_tokens},
                         {"candidate_history_tokens", tc.candidate_history_tokens},
                         {"reduction_percent", tc.reduction_percent}});
    j["per_turn"] = ordered_json::array();
    for (const auto& tc : report.per_turn)
        j["per_turn"].push_back(ordered_json{
            {"turn_index", tc.turn_index},
            {"baseline_sessions", tc.baseline_sessions},
            {"candidate_sessions", tc.candidate_sessions},
            {"baseline_tokens", tc.baseline_tokens},
            {"candidate_tokens", tc.candidate_tokens},
            {"reduction_percent", tc.reduction_percent},
            {"baseline_cumulative_with_background", tc.baseline_cumulative_with_background},
            {"candidate_cumulative_with_background", tc.candidate_cumulative_with_background}});
    return j;
}

ordered_json to_json(const harness::SweepReport& report) {
    ordered_json j;
    j["gammas"] = report.gammas;
    j["taus"] = report.taus;
    j["cells"] = ordered_json::array();
    for (const auto& cell : report.cells) {
        ordered_json c{{"gamma", cell.gamma},
                       {"tau", cell.tau},
                       {"condensed_sessions", cell.condensed_sessions},
                       {"withheld_sessions", cell.withheld_sessions},
                       {"no_trigger_sessions", cell.no_trigger_sessions},
                       {"total_history_tokens", cell.total_history_tokens},
                       {"avg_history_tokens", cell.avg_history_tokens},
                       {"total_tokens_with_background", cell.total_tokens_with_background}};
        c["exact_match_accuracy"] = cell.exact_match_accuracy
                                        ? ordered_json(*cell.exact_match_accuracy)
                                        : ordered_json(nullptr);
        j["cells"].push_back(std::move(c));
    }
    return j;
}

harness::RunReport run_report_from_json(const json& j) {
    harness::RunReport report;
    report.strategy_name = need(j, "strategy_name").get<std::string>();
    const json& strategy = need(j, "strategy");
    report.strategy.kind =
        harness::strategy_from_string(need(strategy, "kind").get<std::string>());
    report.strategy.window_config = window_from_json(need(strategy, "window"));
    report.strategy.fifo_limit = need(strategy, "fifo_limit").get<int>();
    for (const json& s : need(j, "sessions")) {
        harness::SessionResult session;
        session.transcript_id = need(s, "transcript_id").get<std::string>();
        session.aborted = need(s, "aborted").get<bool>();
        session.abort_reason = need(s, "abort_reason").get<std::string>();
        const json& match = need(s, "exact_match");
        if (!match.is_null()) session.exact_match = match.get<bool>();
        session.withheld_triggers = need(s, "withheld_triggers").get<int>();
        session.integrated_condensations = need(s, "integrated_condensations").get<int>();
        for (const json& t : need(s, "turns")) session.turns.push_back(turn_from_json(t));
        report.sessions.push_back(std::move(session));
    }
    report.aggregates = harness::compute_aggregates(report.sessions);
    return report;
}

std::string turns_csv(const harness::RunReport& report) {
    std::ostringstream out;
    out << "transcript_id,turn_index,prompt_history_tokens,background_tokens_in,"
           "background_tokens_out,condensation_event,decision,overlap,user_tokens,"
           "estimated_ttft_seconds\n";
    for (const auto& session : report.sessions) {
        for (const auto& turn : session.turns) {
            out << csv_escape(session.transcript_id) << ',' << turn.turn_index << ','
                << turn.prompt_history_tokens << ',' << turn.background_tokens_in << ','
                << turn.background_tokens_out << ',';
            if (turn.condensation_event) out << to_string(*turn.condensation_event);
            out << ',';
            if (turn.decider_verdict) {
                out << to_string(turn.decider_verdict->decision) << ','
                    << fmt(turn.decider_verdict->overlap) << ','
                    << turn.decider_verdict->user_tokens;
            } else {
                out << ",,";
            }
            out << ',' << fmt(turn.estimated_ttft_seconds) << '\n';
        }
    }
    return out.str();
}

std::string curve_csv(const harness::RunReport& report) {
    size_t max_turns = 0;
    for (const auto& session : report.sessions)
        max_turns = std::max(max_turns, session.turns.size());

    std::ostringstream out;
    out << "turn_index,sessions,total_history_tokens,avg_history_tokens,"
           "background_tokens_in,background_tokens_out,cumulative_with_background\n";
    long long cumulative = 0;
    for (size_t t = 0; t < max_turns; ++t) {
        int sessions = 0;
        long long history = 0;
        long long bg_in = 0;
        long long bg_out = 0;
        for (const auto& session : report.sessions) {
            if (t >= session.turns.size()) continue;
            const auto& turn = session.turns[t];
            ++sessions;
            history += turn.prompt_history_tokens;
            bg_in += turn.background_tokens_in;
            bg_out += turn.background_tokens_out;
        }
        cumulative += history + bg_in + bg_out;
        const double avg = sessions > 0 ? static_cast<double>(history) / sessions : 0.0;
        out << (t + 1) << ',' << sessions << ',' << history << ',' << fmt(avg) << ',' << bg_in
            << ',' << bg_out << ',' << cumulative << '\n';
    }
    return out.str();
}

std::string curve_csv(const harness::ComparisonReport& report) {
    std::ostringstream out;
    out << "turn_index,baseline_sessions,candidate_sessions,baseline_tokens,candidate_tokens,"
           "reduction_percent,baseline_cumulative_with_background,"
           "candidate_cumulative_with_background\n";
    for (const auto& tc : report.per_turn) {
        out << tc.turn_index << ',' << tc.baseline_sessions << ',' << tc.candidate_sessions << ','
            << tc.baseline_tokens << ',' << tc.candidate_tokens << ','
            << fmt(tc.reduction_percent) << ',' << tc.baseline_cumulative_with_background << ','
            << tc.candidate_cumulative_with_background << '\n';
    }
    return out.str();
}

std::string sweep_csv(const harness::SweepReport& report) {
    std::ostringstream out;
    out << "gamma,tau,condensed_sessions,withheld_sessions,no_trigger_sessions,"
           "total_history_tokens,avg_history_tokens,total_tokens_with_background,"
           "exact_match_accuracy\n";
    for (const auto& cell : report.cells) {
        out << fmt(cell.gamma) << ',' << cell.tau << ',' << cell.condensed_sessions << ','
            << cell.withheld_sessions << ',' << cell.no_trigger_sessions << ','
            << cell.total_history_tokens << ',' << fmt(cell.avg_history_tokens) << ','
            << cell.total_tokens_with_background << ',';
        if (cell.exact_match_accuracy) out << fmt(*cell.exact_match_accuracy);
        out << '\n';
    }
    return out.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write to " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

harness::RunReport load_run_report(const std::filesystem::path& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw SchemaError(0, path.string() + " is not valid JSON");
    return run_report_from_json(j);
}

void emit_report(const harness::RunReport& report, Format format,
                 const std::filesystem::path& path) {
    write_file(path, format == Format::Json ? to_json(report).dump(2) + "\n"
                                            : turns_csv(report));
}

void emit_report(const harness::ComparisonReport& report, Format format,
                 const std::filesystem::path& path) {
    write_file(path, format == Format::Json ? to_json(report).dump(2) + "\n"
                                            : curve_csv(report));
}

void emit_report(const harness::SweepReport& report, Format format,
                 const std::filesystem::path& path) {
    write_file(path, format == Format::Json ? to_json(report).dump(2) + "\n"
                                            : sweep_csv(report));
}

}  // namespace mtosc::report
