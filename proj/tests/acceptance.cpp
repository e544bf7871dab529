// Acceptance suite: one line per criterion, non-zero exit on any failure.
// Criterion 11 talks to a live endpoint and is skipped unless MTOSC_BASE_URL
// is set.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mtosc/condenser.hpp"
#include "mtosc/decider.hpp"
#include "mtosc/errors.hpp"
#include "mtosc/harness.hpp"
#include "mtosc/mocks.hpp"
#include "mtosc/model_client.hpp"
#include "mtosc/perturb.hpp"
#include "mtosc/session.hpp"

using namespace mtosc;
using harness::MockChatClient;
using harness::RunReport;
using harness::SessionResult;
using harness::Strategy;
using harness::StrategyKind;
using harness::Transcript;

namespace {

struct Failure {
    std::string message;
};

struct Skip {
    std::string reason;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw Failure{message};
}

template <typename T>
void require_eq(const T& actual, const T& expected, const std::string& what) {
    if (actual != expected) {
        std::ostringstream out;
        out << what << ": got " << actual << ", expected " << expected;
        throw Failure{out.str()};
    }
}

std::string lower(std::string text) {
    for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return text;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

Transcript uniform_transcript(const std::string& id, int turns, int user_tokens) {
    Transcript t;
    t.id = id;
    for (int i = 1; i <= turns; ++i)
        t.user_turns.push_back(synthetic_tokens(id + "t" + std::to_string(i) + "x", user_tokens));
    return t;
}

// ---------------------------------------------------------------- criterion 1

void golden_trace() {
    SessionState session;  // w=4, delay 1
    std::vector<std::string> users;
    std::vector<std::vector<Message>> prompts;
    std::vector<TriggerRequest> triggers;

    for (int t = 1; t <= 9; ++t) {
        users.push_back(synthetic_tokens("u" + std::to_string(t) + "q", 3));
        session.begin_user_turn(users.back());
        prompts.push_back(session.build_prompt_history());
        auto trigger =
            session.complete_assistant_reply(synthetic_tokens("a" + std::to_string(t) + "r", 5));
        if (trigger) {
            triggers.push_back(*trigger);
            CondensedPair pair = condenser::mock_condense(trigger->window, 0.5);
            session.report_job_result(std::move(pair), 10, 5);
        }
    }

    require_eq<size_t>(triggers.size(), 2, "trigger count");
    require_eq(triggers[0].trigger_turn, 4, "first trigger turn");
    require_eq(triggers[1].trigger_turn, 7, "second trigger turn");

    // first condensation input: the four raw opening pairs
    require_eq<size_t>(triggers[0].window.size(), 4, "first trigger window size");
    for (int i = 0; i < 4; ++i) {
        require(!is_condensed(triggers[0].window[static_cast<size_t>(i)]),
                "first trigger window must be raw");
        require_eq(user_text(triggers[0].window[static_cast<size_t>(i)]),
                   users[static_cast<size_t>(i)], "first trigger window user text");
    }

    // H5: four raw pairs plus the current user message
    require_eq<size_t>(prompts[4].size(), 9, "H5 message count");
    require_eq(prompts[4][0].text, users[0], "H5 starts with the raw opening turn");

    // H6: {C1, p5}
    const CondensedPair c1 = condenser::mock_condense(triggers[0].window, 0.5);
    require_eq<size_t>(prompts[5].size(), 5, "H6 message count");
    require(prompts[5][0].role == Role::User && prompts[5][0].text == c1.human_input,
            "H6 must open with C1's human input");
    require(prompts[5][1].role == Role::Assistant && prompts[5][1].text == c1.assistant_summary,
            "H6 must follow with C1's summary");
    require_eq(prompts[5][2].text, users[4], "H6 keeps p5 after C1");

    // second condensation input: {C1, p5, p6, p7}
    require_eq<size_t>(triggers[1].window.size(), 4, "second trigger window size");
    require(is_condensed(triggers[1].window[0]), "second trigger window starts with C1");
    const auto& c1_entry = std::get<CondensedPair>(triggers[1].window[0]);
    require_eq(c1_entry.generation_index, 1, "C1 generation index");
    require_eq(c1_entry.covers_from, 1, "C1 covers_from");
    require_eq(c1_entry.covers_to, 4, "C1 covers_to");
    for (int i = 1; i <= 3; ++i)
        require_eq(user_text(triggers[1].window[static_cast<size_t>(i)]),
                   users[static_cast<size_t>(4 + i - 1)], "second trigger window raw tail");

    // H8: still {C1, p5, p6, p7} (the second job is not due yet)
    require_eq<size_t>(prompts[7].size(), 9, "H8 message count");
    require_eq(prompts[7][0].text, c1.human_input, "H8 still opens with C1");

    // H9: {C2, p8}
    const CondensedPair c2 = condenser::mock_condense(triggers[1].window, 0.5);
    require_eq<size_t>(prompts[8].size(), 5, "H9 message count");
    require_eq(prompts[8][0].text, c2.human_input, "H9 opens with C2's human input");
    require_eq(prompts[8][1].text, c2.assistant_summary, "H9 follows with C2's summary");
    require_eq(prompts[8][2].text, users[7], "H9 keeps p8 after C2");

    const auto& final_entries = session.entries();
    require_eq<size_t>(final_entries.size(), 3, "final entry count");  // C2, p8, p9
    require(is_condensed(final_entries[0]), "final history starts condensed");
    const auto& c2_entry = std::get<CondensedPair>(final_entries[0]);
    require_eq(c2_entry.generation_index, 2, "C2 generation index");
    require_eq(c2_entry.covers_from, 1, "C2 covers_from");
    require_eq(c2_entry.covers_to, 7, "C2 covers_to");
}

// ---------------------------------------------------------------- criterion 2

std::vector<int> curve_of(const SessionResult& session) {
    std::vector<int> curve;
    for (const auto& turn : session.turns) curve.push_back(turn.prompt_history_tokens);
    return curve;
}

void token_curve() {
    MockChatClient chat(150);
    condenser::CannedCondenserBackend backend(20, 60);
    std::vector<Transcript> corpus = {uniform_transcript("curve", 10, 50)};

    Strategy baseline;
    baseline.kind = StrategyKind::MtBaseline;
    Strategy mtosc;
    mtosc.kind = StrategyKind::MtOsc;

    RunReport base = harness::run_all(corpus, baseline, chat, nullptr);
    RunReport cand = harness::run_all(corpus, mtosc, chat, &backend);

    const std::vector<int> expected_mtosc = {0, 200, 400, 600, 800, 280, 480, 680, 280, 480};
    std::vector<int> expected_base;
    for (int t = 0; t < 10; ++t) expected_base.push_back(200 * t);

    require(curve_of(cand.sessions[0]) == expected_mtosc, "condensed per-turn curve mismatch");
    require(curve_of(base.sessions[0]) == expected_base, "baseline per-turn curve mismatch");
    require_eq(cand.aggregates.total_history_tokens, 4200LL, "condensed cumulative history");
    require_eq(base.aggregates.total_history_tokens, 9000LL, "baseline cumulative history");

    harness::ComparisonReport cmp = harness::compare_runs(base, cand);
    require(std::fabs(cmp.reduction_percent - 100.0 * (1.0 - 4200.0 / 9000.0)) < 1e-9,
            "cumulative reduction must be 53.3%");
    require(std::fabs(cmp.per_turn.back().reduction_percent -
                      100.0 * (1.0 - 480.0 / 1800.0)) < 1e-9,
            "turn-10 reduction must be 73.3%");
}

// ---------------------------------------------------------------- criterion 3

std::set<std::string> word_set(const std::string& text) {
    std::istringstream in(text);
    std::set<std::string> words;
    std::string word;
    while (in >> word) words.insert(word);
    return words;
}

int word_count(const std::string& text) {
    std::istringstream in(text);
    int n = 0;
    std::string word;
    while (in >> word) ++n;
    return n;
}

// Brute-force re-statement of the overlap definitions with plain set
// arithmetic over whitespace words. Valid because the generated vocabulary
// contains no stopwords, punctuation or inflected forms.
double oracle_shared_mass(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::set<std::string>> novel;
    std::set<std::string> seen_user;
    for (const auto& [user, assistant] : pairs) {
        for (const auto& w : word_set(user)) seen_user.insert(w);
        std::set<std::string> n;
        for (const auto& w : word_set(assistant))
            if (!seen_user.count(w)) n.insert(w);
        novel.push_back(std::move(n));
    }
    std::map<std::string, int> occurrences;
    for (const auto& n : novel)
        for (const auto& w : n) ++occurrences[w];
    int shared = 0;
    for (const auto& [w, c] : occurrences) shared += c >= 2 ? 1 : 0;
    if (occurrences.empty()) return 0.0;
    return static_cast<double>(shared) / static_cast<double>(occurrences.size());
}

double oracle_pairwise_mean(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::set<std::string>> novel;
    std::set<std::string> seen_user;
    for (const auto& [user, assistant] : pairs) {
        for (const auto& w : word_set(user)) seen_user.insert(w);
        std::set<std::string> n;
        for (const auto& w : word_set(assistant))
            if (!seen_user.count(w)) n.insert(w);
        novel.push_back(std::move(n));
    }
    double total = 0.0;
    int count = 0;
    for (size_t i = 0; i < novel.size(); ++i) {
        for (size_t j = i + 1; j < novel.size(); ++j) {
            std::set<std::string> u = novel[i];
            u.insert(novel[j].begin(), novel[j].end());
            int inter = 0;
            for (const auto& w : novel[i]) inter += novel[j].count(w) ? 1 : 0;
            total += u.empty() ? 0.0
                               : static_cast<double>(inter) / static_cast<double>(u.size());
            ++count;
        }
    }
    return count > 0 ? total / count : 0.0;
}

void decider_oracle() {
    std::mt19937 rng(424242);
    std::vector<std::string> vocab;
    for (int i = 0; i < 30; ++i) vocab.push_back("tok" + std::to_string(i));

    auto random_text = [&](int max_words) {
        std::uniform_int_distribution<int> len(0, max_words);
        std::uniform_int_distribution<size_t> pick(0, vocab.size() - 1);
        const int n = len(rng);
        std::string text;
        for (int i = 0; i < n; ++i) {
            if (!text.empty()) text += ' ';
            text += vocab[pick(rng)];
        }
        return text;
    };

    const Tokenizer& tokenizer = *default_tokenizer();
    std::uniform_int_distribution<int> pair_count(2, 6);
    std::uniform_real_distribution<double> gamma_dist(0.0, 1.0);
    std::uniform_int_distribution<int> tau_dist(0, 40);

    for (int round = 0; round < 500; ++round) {
        const int n = pair_count(rng);
        std::vector<std::pair<std::string, std::string>> texts;
        std::vector<HistoryEntry> window;
        for (int i = 0; i < n; ++i) {
            texts.emplace_back(random_text(8), random_text(8));
            window.push_back(make_exchange_pair(texts.back().first, texts.back().second, i + 1));
        }

        const double expected_shared = oracle_shared_mass(texts);
        const double actual_shared = decider::window_overlap(window);
        require(actual_shared == expected_shared,
                "shared-mass overlap disagrees with the oracle in round " +
                    std::to_string(round));

        const double expected_pairwise = oracle_pairwise_mean(texts);
        const double actual_pairwise =
            decider::window_overlap(window, OverlapMode::PairwiseMean);
        require(std::fabs(actual_pairwise - expected_pairwise) < 1e-12,
                "pairwise-mean overlap disagrees with the oracle in round " +
                    std::to_string(round));

        int user_tokens = 0;
        for (const auto& [user, assistant] : texts) user_tokens += word_count(user);

        WindowConfig config;
        config.gamma = gamma_dist(rng);
        config.tau = tau_dist(rng);
        const auto verdict = decider::decide(window, config, tokenizer);
        const bool expected_withhold =
            expected_shared > config.gamma && user_tokens > config.tau;
        require(verdict.user_tokens == user_tokens,
                "decider user-token mass disagrees with the oracle");
        require((verdict.decision == decider::Decision::Withhold) == expected_withhold,
                "decision disagrees with the oracle in round " + std::to_string(round));
    }
}

// ---------------------------------------------------------------- criterion 4

void decider_defaults() {
    auto build_window = [](int filler_per_turn) {
        const std::vector<std::pair<std::string, std::string>> texts = {
            {"apple", "cherry date"},
            {"banana", "cherry fig"},
            {"carrot", ""},
            {"dill", ""},
        };
        std::vector<HistoryEntry> window;
        int turn = 0;
        for (const auto& [user, assistant] : texts) {
            ++turn;
            std::string padded =
                user + ' ' + synthetic_tokens("uf" + std::to_string(turn) + "x", filler_per_turn);
            window.push_back(make_exchange_pair(padded, assistant, turn));
        }
        return window;
    };

    const Tokenizer& tokenizer = *default_tokenizer();
    WindowConfig config;  // gamma 0.2, tau 1000

    // 4 content words + 4*299 filler = 1200 user tokens
    auto heavy = build_window(299);
    auto verdict = decider::decide(heavy, config, tokenizer);
    require(std::fabs(verdict.overlap - 1.0 / 3.0) < 1e-12, "constructed overlap must be 1/3");
    require_eq(verdict.user_tokens, 1200, "heavy window user tokens");
    require(verdict.decision == decider::Decision::Withhold, "1200 user tokens must withhold");

    // 4 + 4*179 = 720 user tokens
    auto light = build_window(179);
    verdict = decider::decide(light, config, tokenizer);
    require_eq(verdict.user_tokens, 720, "light window user tokens");
    require(verdict.decision == decider::Decision::Condense, "720 user tokens must condense");

    config.decider_enabled = false;
    require(decider::decide(heavy, config, tokenizer).decision == decider::Decision::Condense,
            "disabled decider must condense the heavy window");
    require(decider::decide(light, config, tokenizer).decision == decider::Decision::Condense,
            "disabled decider must condense the light window");
}

// ---------------------------------------------------------------- criterion 5

std::string token_records(const SessionResult& session) {
    std::ostringstream out;
    for (const auto& turn : session.turns) {
        char ttft[40];
        std::snprintf(ttft, sizeof ttft, "%.17g", turn.estimated_ttft_seconds);
        out << turn.turn_index << ',' << turn.prompt_history_tokens << ','
            << turn.background_tokens_in << ',' << turn.background_tokens_out << ',' << ttft
            << '\n';
    }
    return out.str();
}

void fallback_equivalence() {
    MockChatClient chat(150);
    condenser::FailingCondenserBackend backend("backend permanently down");

    std::vector<Transcript> corpus;
    for (int i = 0; i < 20; ++i)
        corpus.push_back(
            uniform_transcript("fb" + std::to_string(i), 4 + (i % 9), 15 + 7 * i));

    Strategy baseline;
    baseline.kind = StrategyKind::MtBaseline;
    Strategy mtosc;
    mtosc.kind = StrategyKind::MtOsc;

    RunReport base = harness::run_all(corpus, baseline, chat, nullptr);
    RunReport cand = harness::run_all(corpus, mtosc, chat, &backend);

    require_eq<size_t>(base.sessions.size(), 20, "suite size");
    for (size_t i = 0; i < base.sessions.size(); ++i) {
        require(token_records(base.sessions[i]) == token_records(cand.sessions[i]),
                "token records diverge on transcript " + base.sessions[i].transcript_id);
        require_eq(cand.sessions[i].integrated_condensations, 0,
                   "failing backend must never integrate");
    }
    require_eq(base.aggregates.total_tokens_with_background,
               cand.aggregates.total_tokens_with_background, "background-inclusive totals");
}

// ---------------------------------------------------------------- criterion 6

void fifo_plateau() {
    MockChatClient chat(150);
    std::vector<Transcript> corpus = {uniform_transcript("fifo", 10, 50)};
    Strategy strategy;
    strategy.kind = StrategyKind::Fifo;
    strategy.fifo_limit = 4;

    RunReport run = harness::run_all(corpus, strategy, chat, nullptr);
    const std::vector<int> expected = {0, 200, 400, 600, 800, 800, 800, 800, 800, 800};
    require(curve_of(run.sessions[0]) == expected, "fifo curve must plateau at 4 pairs");
}

// ---------------------------------------------------------------- criterion 7

void perturbation_invariants() {
    const auto& fillers = perturb::filler_words();
    require_eq<size_t>(fillers.size(), 6, "filler vocabulary size");
    std::set<std::string> filler_set(fillers.begin(), fillers.end());
    perturb::MockDiversionGenerator generator;

    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const int len = 3 + static_cast<int>(seed % 10);
        std::vector<std::string> turns;
        for (int i = 0; i < len; ++i)
            turns.push_back("p" + std::to_string(seed) + "t" + std::to_string(i));
        if (len >= 5) turns[2] = "";  // a blank middle turn for cd to skip

        perturb::PerturbSpec spec;
        spec.ratio = 0.3;
        spec.seed = seed;

        spec.kind = perturb::Kind::RepetitionInfusion;
        auto ri = perturb::repetition_infusion(turns, spec);
        require(ri.turns.size() == turns.size() + ri.selected_indices.size(),
                "ri output length must be input + N");
        require(std::count(ri.turns.begin(), ri.turns.end(), turns.front()) == 1,
                "ri must not duplicate the first turn");
        require(std::count(ri.turns.begin(), ri.turns.end(), turns.back()) == 1,
                "ri must not duplicate the last turn");
        require(perturb::repetition_infusion(turns, spec).turns == ri.turns,
                "ri must be deterministic per seed");

        spec.kind = perturb::Kind::FillerInjection;
        auto fi = perturb::filler_injection(turns, spec);
        require(fi.turns.size() == turns.size() + fi.selected_indices.size(),
                "fi output length must be input + N");
        for (int pos : fi.inserted_positions)
            require(filler_set.count(fi.turns[static_cast<size_t>(pos)]) == 1,
                    "fi must only insert words from the filler list");
        require(perturb::filler_injection(turns, spec).turns == fi.turns,
                "fi must be deterministic per seed");

        spec.kind = perturb::Kind::ContextualDiversion;
        auto cd = perturb::contextual_diversion(turns, spec, generator);
        require(cd.inserted_positions.size() <= cd.selected_indices.size(),
                "cd must insert at most N distractors");
        require(cd.turns.back() == turns.back(), "cd must never insert after the last turn");
        for (int pos : cd.inserted_positions) {
            require(pos < static_cast<int>(cd.turns.size()) - 1,
                    "cd distractor positions must precede the final turn");
            const std::string& text = cd.turns[static_cast<size_t>(pos)];
            require(text.size() > std::strlen("DISTRACTOR()"),
                    "cd must never divert a blank turn");
        }
        auto cd2 = perturb::contextual_diversion(turns, spec, generator);
        require(cd2.turns == cd.turns && cd2.inserted_positions == cd.inserted_positions,
                "cd must be deterministic per seed");
    }
}

// ---------------------------------------------------------------- criterion 8

// Ten 8-turn transcripts crossing five overlap tiers with two user-mass
// tiers. The first user turn absorbs a slice of the mock assistant
// vocabulary, which dials the shared-term overlap; the per-turn filler mass
// dials the tau side.
std::vector<Transcript> sweep_corpus() {
    const int absorbed[] = {147, 143, 138, 131, 110};
    const int per_turn_tokens[] = {175, 1125};

    std::vector<Transcript> corpus;
    for (int m : absorbed) {
        for (int mass : per_turn_tokens) {
            Transcript t;
            t.id = "sw_m" + std::to_string(m) + "_u" + std::to_string(mass);
            for (int turn = 1; turn <= 8; ++turn) {
                std::string text;
                int filler = mass;
                if (turn == 1) {
                    text = synthetic_tokens("s", m);
                    filler -= m;
                }
                std::string pad =
                    synthetic_tokens("f" + t.id + "t" + std::to_string(turn) + "x", filler);
                if (!text.empty() && !pad.empty()) text += ' ';
                text += pad;
                t.user_turns.push_back(std::move(text));
            }
            corpus.push_back(std::move(t));
        }
    }
    return corpus;
}

void sweep_grid() {
    MockChatClient chat(150, 10);
    condenser::MockCondenserBackend backend(0.4);
    std::vector<Transcript> corpus = sweep_corpus();

    Strategy base;
    base.kind = StrategyKind::MtOsc;
    base.window_config.decider_enabled = false;  // the sweep must force it on

    harness::SweepReport sweep =
        harness::decider_sweep(corpus, harness::kDefaultSweepGammas, harness::kDefaultSweepTaus,
                               base, chat, &backend);

    require_eq<size_t>(sweep.cells.size(), 20, "default grid must emit 20 cells");
    const size_t rows = harness::kDefaultSweepGammas.size();
    const size_t cols = harness::kDefaultSweepTaus.size();
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < cols; ++c) {
            const auto& cell = sweep.cells[r * cols + c];
            require(cell.gamma == harness::kDefaultSweepGammas[r] &&
                        cell.tau == harness::kDefaultSweepTaus[c],
                    "cells must be laid out row-major");
            require_eq(cell.condensed_sessions + cell.withheld_sessions +
                           cell.no_trigger_sessions,
                       static_cast<int>(corpus.size()), "cell session partition");
        }
    }

    int max_withheld = 0;
    int min_withheld = static_cast<int>(corpus.size());
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < cols; ++c) {
            const int withheld = sweep.cells[r * cols + c].withheld_sessions;
            max_withheld = std::max(max_withheld, withheld);
            min_withheld = std::min(min_withheld, withheld);
            if (c + 1 < cols)
                require(sweep.cells[r * cols + c + 1].withheld_sessions <= withheld,
                        "withheld count must be non-increasing in tau");
            if (r + 1 < rows)
                require(sweep.cells[(r + 1) * cols + c].withheld_sessions <= withheld,
                        "withheld count must be non-increasing in gamma");
        }
    }
    require(max_withheld > min_withheld, "the grid must actually discriminate");
    require_eq(sweep.cells[0].withheld_sessions, 8, "loosest cell withheld count");
    require_eq(sweep.cells[(rows - 1) * cols].withheld_sessions, 0,
               "strictest gamma row withheld count");
}

// ---------------------------------------------------------------- criterion 9

void parser_fuzz() {
    const std::string alphabet = "{}[]\",:\\ abHumanInputAssistantReasoning01\n";
    std::mt19937 rng(99173);
    std::uniform_int_distribution<int> len(0, 120);
    std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);

    for (int round = 0; round < 10000; ++round) {
        std::string text;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) text += alphabet[pick(rng)];
        if (round % 7 == 0)
            text += R"( {"HumanInput": "h", "Assistant": "a", "Reasoning": "r"} )";

        try {
            CondensedPair pair = condenser::parse_condenser_output(text);
            require(!pair.human_input.empty() && !pair.assistant_summary.empty(),
                    "parsed pair fields must be non-empty");
            CondensedPair again = condenser::parse_condenser_output(
                condenser::serialize_condenser_output(pair));
            require(again.human_input == pair.human_input &&
                        again.assistant_summary == pair.assistant_summary &&
                        again.reasoning == pair.reasoning,
                    "serialized pair must parse back identically");
        } catch (const ParseError&) {
            // a typed rejection is an acceptable outcome
        }
    }

    // strict three-key round trip on awkward content
    CondensedPair tricky;
    tricky.human_input = "line one\nline {two} \"quoted\" \\ backslash";
    tricky.assistant_summary = "summary with , commas and }{ braces";
    tricky.reasoning = "multi\nline reasoning";
    CondensedPair parsed =
        condenser::parse_condenser_output(condenser::serialize_condenser_output(tricky));
    require(parsed.human_input == tricky.human_input &&
                parsed.assistant_summary == tricky.assistant_summary &&
                parsed.reasoning == tricky.reasoning,
            "strict round trip must preserve every field");
}

// --------------------------------------------------------------- criterion 10

void accounting_identity() {
    MockChatClient chat(150, 5);
    condenser::CannedCondenserBackend backend(20, 60);
    std::vector<Transcript> corpus;
    for (int i = 0; i < 8; ++i)
        corpus.push_back(uniform_transcript("acc" + std::to_string(i), 3 + 2 * i, 20 + 4 * i));

    for (auto kind : {StrategyKind::MtBaseline, StrategyKind::Fifo, StrategyKind::MtOsc,
                      StrategyKind::MtOscSummarizer}) {
        Strategy strategy;
        strategy.kind = kind;
        RunReport run = harness::run_all(corpus, strategy, chat, &backend);
        long long manual = 0;
        for (const auto& session : run.sessions)
            for (const auto& turn : session.turns)
                manual += turn.prompt_history_tokens + turn.background_tokens_in +
                          turn.background_tokens_out;
        require_eq(run.aggregates.total_tokens_with_background, manual,
                   std::string("accounting identity under ") +
                       std::string(harness::to_string(kind)));
    }
}

// --------------------------------------------------------------- criterion 11

void live_smoke() {
    const char* base_url = std::getenv("MTOSC_BASE_URL");
    if (!base_url || !*base_url) throw Skip{"MTOSC_BASE_URL is not set"};

    std::vector<std::pair<std::string, std::string>> texts = {
        {"Q: how far is Elvis from his house?\nA:",
         "To answer this question, I need more information. The question doesn't provide "
         "enough context or details about Elvis's location or the location of his house.\n\n"
         "Could you please provide more information, such as:\n\n* Where is Elvis currently "
         "located?\n* Where is his house located?\n* Is there a specific distance or direction "
         "mentioned?\n\nWith more context, I can try to help you solve the problem and estimate "
         "the distance between Elvis and his house."},
        {"Q: Elvis begins his journey from his house.\nA:",
         "With this new information, we can start fresh.\n\nSince Elvis begins his journey from "
         "his house, that means he is currently at his house.\n\nSo, to answer the original "
         "question: \"How far is Elvis from his house?\"\n\nThe answer would be: Elvis is 0 "
         "miles (or 0 kilometers) away from his house, since he is starting from there."},
        {"Q: he drives west for 5 hours.\nA:",
         "New development!\n\nSince Elvis drives west for 5 hours, we need to consider the "
         "distance he covers during this time. However, we don't know his exact speed.\n\nLet's "
         "assume a moderate speed of 60 miles per hour (mph) for simplicity. This is just an "
         "estimate, as the actual speed might vary.\n\nDistance = Speed × Time\n= 60 mph "
         "× 5 hours\n= 300 miles\n\nSo, Elvis drives 300 miles west from his house.\n\nTo "
         "answer the original question: \"How far is Elvis from his house?\"\n\nThe answer "
         "would be: Elvis is approximately 300 miles away from his house, in a westerly "
         "direction."},
        {"Q: after that, he turns around to change direction.\nA:",
         "Plot twist!\n\nSince Elvis turns around to change direction, that means he is now "
         "heading in the opposite direction, which is east.\n\nHe was previously 300 miles west "
         "of his house. Now, he starts driving east, but we don't know for how long or how "
         "far.\n\nThe distance between Elvis and his house remains the same for now: 300 miles. "
         "However, as he starts driving east, this distance will begin to decrease.\n\nWe'll "
         "need more information about his speed and the time he drives east to determine the "
         "new distance between Elvis and his house."},
    };
    std::vector<HistoryEntry> window;
    int turn = 0;
    for (const auto& [user, assistant] : texts) {
        ++turn;
        window.push_back(make_exchange_pair(user, assistant, turn));
    }

    client::ClientConfig config = client::config_from_env();
    client::HttpCondenserBackend backend(config);
    condenser::CondenserParams params;
    const char* model = std::getenv("MTOSC_LIVE_MODEL");
    params.model_id = model && *model ? model : "gpt-4o-mini";

    condenser::CondenseResult result;
    try {
        result = condenser::condense(window, backend, params);
    } catch (const Error& e) {
        throw Failure{std::string("live condensation failed: ") + e.what()};
    }
    const std::string human = lower(result.pair.human_input);
    require(contains(human, "5 hours"), "condensed human input must keep \"5 hours\"");
    require(contains(human, "west"), "condensed human input must keep \"west\"");
}

// ------------------------------------------------------------------- driver

int g_failures = 0;

template <typename Body>
void run_criterion(int number, const char* description, double limit_seconds, Body&& body) {
    const auto begin = std::chrono::steady_clock::now();
    try {
        body();
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
        if (limit_seconds > 0.0 && elapsed > limit_seconds) {
            ++g_failures;
            std::printf("FAIL %2d. %s (%.2fs exceeds the %.0fs limit)\n", number, description,
                        elapsed, limit_seconds);
            return;
        }
        std::printf("PASS %2d. %s (%.2fs)\n", number, description, elapsed);
    } catch (const Skip& skip) {
        std::printf("SKIP %2d. %s (%s)\n", number, description, skip.reason.c_str());
    } catch (const Failure& failure) {
        ++g_failures;
        std::printf("FAIL %2d. %s: %s\n", number, description, failure.message.c_str());
    } catch (const std::exception& e) {
        ++g_failures;
        std::printf("FAIL %2d. %s: unexpected error: %s\n", number, description, e.what());
    }
    std::fflush(stdout);
}

}  // namespace

int main() {
    run_criterion(1, "golden trace: scripted 9-turn session reproduces the condensation schedule",
                  1.0, golden_trace);
    run_criterion(2, "token curve: exact per-turn history sequence and 53.3%/73.3% reductions",
                  1.0, token_curve);
    run_criterion(3, "decider matches a brute-force set-arithmetic oracle on 500 random windows",
                  10.0, decider_oracle);
    run_criterion(4, "decider defaults: overlap-1/3 window withheld at 1200 user tokens, "
                     "condensed at 720",
                  0.0, decider_defaults);
    run_criterion(5, "fallback equivalence: failing condenser reproduces baseline token records",
                  0.0, fallback_equivalence);
    run_criterion(6, "fifo baseline plateaus at its 4-pair limit", 0.0, fifo_plateau);
    run_criterion(7, "perturbation invariants hold across 200 seeded runs per kind", 5.0,
                  perturbation_invariants);
    run_criterion(8, "default 4x5 decider sweep emits 20 cells with monotone withheld counts",
                  0.0, sweep_grid);
    run_criterion(9, "condenser output parser survives a 10,000-case fuzz corpus", 0.0,
                  parser_fuzz);
    run_criterion(10, "token accounting identity holds exactly under every strategy", 0.0,
                  accounting_identity);
    run_criterion(11, "live condensation keeps user-given facts (gated on MTOSC_BASE_URL)", 0.0,
                  live_smoke);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria satisfied\n");
    return 0;
}
