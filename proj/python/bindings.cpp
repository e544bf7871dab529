#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mtosc/condenser.hpp"
#include "mtosc/decider.hpp"
#include "mtosc/errors.hpp"
#include "mtosc/harness.hpp"
#include "mtosc/mocks.hpp"
#include "mtosc/perturb.hpp"
#include "mtosc/report.hpp"
#include "mtosc/session.hpp"
#include "mtosc/tokenizer.hpp"
#include "mtosc/transcript.hpp"
#include "mtosc/types.hpp"

namespace py = pybind11;
using namespace mtosc;

namespace {

std::vector<HistoryEntry> window_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<HistoryEntry> window;
    window.reserve(pairs.size());
    int turn = 0;
    for (const auto& [user, assistant] : pairs)
        window.push_back(make_exchange_pair(user, assistant, ++turn));
    return window;
}

WindowConfig make_config(int w, double gamma, int tau, int delay, bool decider_enabled,
                         const std::string& overlap_mode, const std::string& tau_scope) {
    WindowConfig config;
    config.w = w;
    config.gamma = gamma;
    config.tau = tau;
    config.integration_delay_turns = delay;
    config.decider_enabled = decider_enabled;
    config.overlap_mode = overlap_mode_from_string(overlap_mode);
    config.tau_scope = tau_scope_from_string(tau_scope);
    config.validate();
    return config;
}

py::dict pair_to_dict(const CondensedPair& pair) {
    py::dict d;
    d["human_input"] = pair.human_input;
    d["assistant_summary"] = pair.assistant_summary;
    d["reasoning"] = pair.reasoning;
    d["covers_from"] = pair.covers_from;
    d["covers_to"] = pair.covers_to;
    d["generation_index"] = pair.generation_index;
    return d;
}

py::dict entry_to_dict(const HistoryEntry& entry) {
    if (is_condensed(entry)) {
        py::dict d = pair_to_dict(std::get<CondensedPair>(entry));
        d["condensed"] = true;
        return d;
    }
    const auto& pair = std::get<ExchangePair>(entry);
    py::dict d;
    d["condensed"] = false;
    d["user"] = pair.user.text;
    d["assistant"] = pair.assistant.text;
    d["turn_index"] = pair.turn_index;
    return d;
}

py::dict verdict_to_dict(const decider::DeciderVerdict& verdict) {
    py::dict d;
    d["decision"] = std::string(decider::to_string(verdict.decision));
    d["overlap"] = verdict.overlap;
    d["user_tokens"] = verdict.user_tokens;
    d["gamma"] = verdict.gamma;
    d["tau"] = verdict.tau;
    return d;
}

harness::Transcript transcript_from_dict(const py::dict& d) {
    harness::Transcript t;
    t.id = py::cast<std::string>(d["id"]);
    for (auto turn : d["user_turns"]) t.user_turns.push_back(py::cast<std::string>(turn));
    if (d.contains("reference_answer") && !d["reference_answer"].is_none())
        t.reference_answer = py::cast<std::string>(d["reference_answer"]);
    if (d.contains("scoring")) {
        const auto name = py::cast<std::string>(d["scoring"]);
        if (name == "exact_match")
            t.scoring = harness::Scoring::ExactMatch;
        else if (name != "none")
            throw Error("unknown scoring: " + name);
    }
    if (d.contains("tags"))
        for (auto tag : d["tags"]) t.tags.push_back(py::cast<std::string>(tag));
    return t;
}

py::dict transcript_to_dict(const harness::Transcript& t) {
    py::dict d;
    d["id"] = t.id;
    d["user_turns"] = t.user_turns;
    d["scoring"] = std::string(harness::to_string(t.scoring));
    if (t.reference_answer)
        d["reference_answer"] = *t.reference_answer;
    else
        d["reference_answer"] = py::none();
    d["tags"] = t.tags;
    return d;
}

// A corpus argument is either a JSONL path or a list of transcript dicts.
std::vector<harness::Transcript> corpus_from_arg(const py::object& arg) {
    if (py::isinstance<py::str>(arg))
        return harness::load_transcripts(py::cast<std::string>(arg));
    std::vector<harness::Transcript> transcripts;
    for (auto item : py::cast<py::list>(arg))
        transcripts.push_back(transcript_from_dict(py::cast<py::dict>(item)));
    return transcripts;
}

harness::Strategy make_strategy(const std::string& name, const WindowConfig& config,
                                int fifo_limit) {
    harness::Strategy strategy;
    strategy.kind = harness::strategy_from_string(name);
    strategy.window_config = config;
    strategy.fifo_limit = fifo_limit;
    return strategy;
}

// Replays the corpus against the deterministic offline backends and returns
// the full run report as a JSON string.
std::string run_mock_json(const py::object& corpus, const std::string& strategy_name, int w,
                          double gamma, int tau, int delay, bool decider_enabled,
                          const std::string& overlap_mode, const std::string& tau_scope,
                          int fifo_limit, int shared_tokens, int unique_tokens,
                          double mock_ratio, int concurrency) {
    const std::vector<harness::Transcript> transcripts = corpus_from_arg(corpus);
    const harness::Strategy strategy = make_strategy(
        strategy_name, make_config(w, gamma, tau, delay, decider_enabled, overlap_mode, tau_scope),
        fifo_limit);
    harness::MockChatClient chat(shared_tokens, unique_tokens);
    condenser::MockCondenserBackend backend(mock_ratio);
    harness::RunOptions options;
    options.session_concurrency = concurrency;
    const harness::RunReport report =
        harness::run_all(transcripts, strategy, chat, &backend, options);
    return report::to_json(report).dump(2) + "\n";
}

std::string compare_runs_json(const std::string& baseline_json,
                              const std::string& candidate_json) {
    const harness::RunReport baseline =
        report::run_report_from_json(nlohmann::json::parse(baseline_json));
    const harness::RunReport candidate =
        report::run_report_from_json(nlohmann::json::parse(candidate_json));
    return report::to_json(harness::compare_runs(baseline, candidate)).dump(2) + "\n";
}

std::string sweep_mock_json(const py::object& corpus, const std::vector<double>& gammas,
                            const std::vector<int>& taus, int w, int delay,
                            const std::string& overlap_mode, const std::string& tau_scope,
                            int shared_tokens, int unique_tokens, double mock_ratio,
                            int concurrency) {
    const std::vector<harness::Transcript> transcripts = corpus_from_arg(corpus);
    const harness::Strategy strategy = make_strategy(
        "mtosc", make_config(w, 0.2, 1000, delay, true, overlap_mode, tau_scope), 4);
    harness::MockChatClient chat(shared_tokens, unique_tokens);
    condenser::MockCondenserBackend backend(mock_ratio);
    harness::RunOptions options;
    options.session_concurrency = concurrency;
    const harness::SweepReport sweep = harness::decider_sweep(
        transcripts, gammas.empty() ? harness::kDefaultSweepGammas : gammas,
        taus.empty() ? harness::kDefaultSweepTaus : taus, strategy, chat, &backend, options);
    return report::to_json(sweep).dump(2) + "\n";
}

// Thin owner of a SessionState with python-friendly argument and return
// types. The embedder loop (trigger handling, job reporting) stays explicit
// on the python side.
class PySession {
public:
    explicit PySession(WindowConfig config) : state_(std::move(config)) {}

    void begin_user_turn(const std::string& text) { state_.begin_user_turn(text); }

    std::vector<std::pair<std::string, std::string>> build_prompt_history() {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& message : state_.build_prompt_history())
            out.emplace_back(std::string(to_string(message.role)), message.text);
        return out;
    }

    py::object complete_assistant_reply(const std::string& text) {
        const auto trigger = state_.complete_assistant_reply(text);
        if (!trigger) return py::none();
        py::dict d;
        d["trigger_turn"] = trigger->trigger_turn;
        py::list window;
        for (const auto& entry : trigger->window) window.append(entry_to_dict(entry));
        d["window"] = window;
        return d;
    }

    void report_job_result(const std::string& human_input, const std::string& assistant_summary,
                           const std::string& reasoning, int input_tokens, int output_tokens) {
        CondensedPair pair;
        pair.human_input = human_input;
        pair.assistant_summary = assistant_summary;
        pair.reasoning = reasoning;
        state_.report_job_result(std::move(pair), input_tokens, output_tokens);
    }

    void report_job_failure(int input_tokens, int output_tokens) {
        state_.report_job_failure(input_tokens, output_tokens);
    }

    void report_job_withheld() { state_.report_job_withheld(); }
    void integrate_ready_job() { state_.integrate_ready_job(); }
    int history_token_count() const { return state_.history_token_count(); }
    bool has_open_turn() const { return state_.has_open_turn(); }
    int current_turn_index() const { return state_.current_turn_index(); }
    int turns_completed() const { return state_.turns_completed(); }
    int raw_user_tokens_total() const { return state_.raw_user_tokens_total(); }
    int next_generation_index() const { return state_.next_generation_index(); }
    std::vector<int> decider_withheld_at() const { return state_.decider_withheld_at(); }

    py::list entries() const {
        py::list out;
        for (const auto& entry : state_.entries()) out.append(entry_to_dict(entry));
        return out;
    }

private:
    SessionState state_;
};

}  // namespace

PYBIND11_MODULE(_mtosc, m) {
    m.doc() = "Windowed one-off sequential chat-history condensation";

    py::register_exception<Error>(m, "MtoscError");

    // tokenizer
    m.def("count_tokens", &default_token_count, py::arg("text"));
    m.def("synthetic_tokens", &synthetic_tokens, py::arg("stem"), py::arg("n"));
    m.def("truncate_to_tokens", &truncate_to_tokens, py::arg("text"), py::arg("n"));
    m.def("ceil_ratio", &ceil_ratio, py::arg("ratio"), py::arg("n"));

    // decider
    m.def(
        "normalize",
        [](const std::string& text) { return decider::normalize(text); },
        py::arg("text"));
    m.def(
        "window_overlap",
        [](const std::vector<std::pair<std::string, std::string>>& pairs,
           const std::string& mode) {
            return decider::window_overlap(window_from_pairs(pairs),
                                           overlap_mode_from_string(mode));
        },
        py::arg("pairs"), py::arg("mode") = "shared_mass");
    m.def(
        "decide",
        [](const std::vector<std::pair<std::string, std::string>>& pairs, double gamma, int tau,
           bool decider_enabled, const std::string& overlap_mode, const std::string& tau_scope,
           std::optional<int> user_tokens_override) {
            WindowConfig config = make_config(4, gamma, tau, 1, decider_enabled, overlap_mode,
                                              tau_scope);
            return verdict_to_dict(decider::decide(window_from_pairs(pairs), config,
                                                   *default_tokenizer(),
                                                   decider::default_stopwords(),
                                                   user_tokens_override));
        },
        py::arg("pairs"), py::arg("gamma") = 0.2, py::arg("tau") = 1000,
        py::arg("decider_enabled") = true, py::arg("overlap_mode") = "shared_mass",
        py::arg("tau_scope") = "window", py::arg("user_tokens_override") = py::none());

    // condenser
    m.def(
        "build_condenser_prompt",
        [](const std::vector<std::pair<std::string, std::string>>& pairs) {
            return condenser::build_condenser_prompt(window_from_pairs(pairs));
        },
        py::arg("pairs"));
    m.def(
        "build_summarizer_prompt",
        [](const std::vector<std::pair<std::string, std::string>>& pairs) {
            return condenser::build_summarizer_prompt(window_from_pairs(pairs));
        },
        py::arg("pairs"));
    m.def(
        "mock_condense",
        [](const std::vector<std::pair<std::string, std::string>>& pairs, double ratio) {
            return pair_to_dict(condenser::mock_condense(window_from_pairs(pairs), ratio));
        },
        py::arg("pairs"), py::arg("ratio") = 0.2);
    m.def(
        "parse_condenser_output",
        [](const std::string& text) {
            return pair_to_dict(condenser::parse_condenser_output(text));
        },
        py::arg("text"));
    m.def(
        "serialize_condenser_output",
        [](const std::string& human_input, const std::string& assistant_summary,
           const std::string& reasoning, bool include_reasoning) {
            CondensedPair pair;
            pair.human_input = human_input;
            pair.assistant_summary = assistant_summary;
            pair.reasoning = reasoning;
            return condenser::serialize_condenser_output(pair, include_reasoning);
        },
        py::arg("human_input"), py::arg("assistant_summary"), py::arg("reasoning") = "",
        py::arg("include_reasoning") = true);

    // session
    py::class_<PySession>(m, "Session")
        .def(py::init([](int w, double gamma, int tau, int delay, bool decider_enabled,
                         const std::string& overlap_mode, const std::string& tau_scope) {
                 return PySession(make_config(w, gamma, tau, delay, decider_enabled,
                                              overlap_mode, tau_scope));
             }),
             py::arg("w") = 4, py::arg("gamma") = 0.2, py::arg("tau") = 1000,
             py::arg("delay") = 1, py::arg("decider_enabled") = true,
             py::arg("overlap_mode") = "shared_mass", py::arg("tau_scope") = "window")
        .def("begin_user_turn", &PySession::begin_user_turn, py::arg("text"))
        .def("build_prompt_history", &PySession::build_prompt_history)
        .def("complete_assistant_reply", &PySession::complete_assistant_reply, py::arg("text"))
        .def("report_job_result", &PySession::report_job_result, py::arg("human_input"),
             py::arg("assistant_summary"), py::arg("reasoning") = "",
             py::arg("input_tokens") = 0, py::arg("output_tokens") = 0)
        .def("report_job_failure", &PySession::report_job_failure, py::arg("input_tokens") = 0,
             py::arg("output_tokens") = 0)
        .def("report_job_withheld", &PySession::report_job_withheld)
        .def("integrate_ready_job", &PySession::integrate_ready_job)
        .def("history_token_count", &PySession::history_token_count)
        .def("has_open_turn", &PySession::has_open_turn)
        .def("current_turn_index", &PySession::current_turn_index)
        .def("turns_completed", &PySession::turns_completed)
        .def("raw_user_tokens_total", &PySession::raw_user_tokens_total)
        .def("next_generation_index", &PySession::next_generation_index)
        .def("decider_withheld_at", &PySession::decider_withheld_at)
        .def("entries", &PySession::entries);

    // perturbation
    m.def(
        "apply_perturbation",
        [](const std::vector<std::string>& turns, const std::string& kind, double ratio,
           std::optional<int> n, std::uint64_t seed) {
            perturb::PerturbSpec spec;
            spec.kind = perturb::kind_from_string(kind);
            spec.ratio = ratio;
            spec.n_override = n;
            spec.seed = seed;
            perturb::MockDiversionGenerator generator;
            perturb::PerturbOutcome outcome =
                perturb::apply_perturbation(turns, spec, &generator);
            py::dict d;
            d["turns"] = outcome.turns;
            d["selected_indices"] = outcome.selected_indices;
            d["inserted_positions"] = outcome.inserted_positions;
            return d;
        },
        py::arg("turns"), py::arg("kind"), py::arg("ratio") = 0.25, py::arg("n") = py::none(),
        py::arg("seed") = 0);

    // transcripts
    m.def(
        "load_transcripts",
        [](const std::string& path, bool lenient) {
            py::list out;
            for (const auto& t : harness::load_transcripts(path, lenient))
                out.append(transcript_to_dict(t));
            return out;
        },
        py::arg("path"), py::arg("lenient") = false);
    m.def(
        "save_transcripts",
        [](const py::list& transcripts, const std::string& path) {
            std::vector<harness::Transcript> out;
            for (auto item : transcripts)
                out.push_back(transcript_from_dict(py::cast<py::dict>(item)));
            harness::save_transcripts(out, path);
        },
        py::arg("transcripts"), py::arg("path"));

    // harness
    m.def("estimate_ttft",
          [](int prompt_tokens, double intercept_seconds, double seconds_per_token) {
              return harness::estimate_ttft(prompt_tokens,
                                            {intercept_seconds, seconds_per_token});
          },
          py::arg("prompt_tokens"), py::arg("intercept_seconds") = 0.0,
          py::arg("seconds_per_token") = 0.00065);
    m.def(
        "score_exact_match",
        [](const std::string& answer, const std::string& reference) {
            return harness::score_exact_match(answer, reference);
        },
        py::arg("answer"), py::arg("reference"));
    m.def("run_mock_json", &run_mock_json, py::arg("corpus"), py::arg("strategy") = "mtosc",
          py::arg("w") = 4, py::arg("gamma") = 0.2, py::arg("tau") = 1000, py::arg("delay") = 1,
          py::arg("decider_enabled") = true, py::arg("overlap_mode") = "shared_mass",
          py::arg("tau_scope") = "window", py::arg("fifo_limit") = 4,
          py::arg("shared_tokens") = 150, py::arg("unique_tokens") = 0,
          py::arg("mock_ratio") = 0.2, py::arg("concurrency") = 1);
    m.def("compare_runs_json", &compare_runs_json, py::arg("baseline_json"),
          py::arg("candidate_json"));
    m.def("sweep_mock_json", &sweep_mock_json, py::arg("corpus"),
          py::arg("gammas") = std::vector<double>{}, py::arg("taus") = std::vector<int>{},
          py::arg("w") = 4, py::arg("delay") = 1, py::arg("overlap_mode") = "shared_mass",
          py::arg("tau_scope") = "window", py::arg("shared_tokens") = 150,
          py::arg("unique_tokens") = 0, py::arg("mock_ratio") = 0.2, py::arg("concurrency") = 1);
}
