#include <doctest.h>

#include "mtosc/errors.hpp"
#include "mtosc/types.hpp"

using namespace mtosc;

TEST_CASE("make_exchange_pair stores tokenizer counts") {
    ExchangePair pair = make_exchange_pair("one two", "three four five", 7);
    CHECK(pair.user.role == Role::User);
    CHECK(pair.user.token_count == 2);
    CHECK(pair.assistant.role == Role::Assistant);
    CHECK(pair.assistant.token_count == 3);
    CHECK(pair.turn_index == 7);
}

TEST_CASE("history entry accessors dispatch on the variant") {
    HistoryEntry raw = make_exchange_pair("u text", "a text", 3);
    CHECK_FALSE(is_condensed(raw));
    CHECK(user_text(raw) == "u text");
    CHECK(assistant_text(raw) == "a text");
    CHECK(covers_from(raw) == 3);
    CHECK(covers_to(raw) == 3);

    CondensedPair condensed;
    condensed.human_input = "merged ask";
    condensed.assistant_summary = "merged answer";
    condensed.reasoning = "because";
    condensed.covers_from = 1;
    condensed.covers_to = 4;
    condensed.generation_index = 2;
    HistoryEntry entry = condensed;
    CHECK(is_condensed(entry));
    CHECK(user_text(entry) == "merged ask");
    CHECK(assistant_text(entry) == "merged answer");
    CHECK(covers_from(entry) == 1);
    CHECK(covers_to(entry) == 4);
}

TEST_CASE("entry_token_count covers both sides, reasoning excluded") {
    const Tokenizer& tok = *default_tokenizer();
    HistoryEntry raw = make_exchange_pair("one two", "three four five", 1);
    CHECK(entry_token_count(raw, tok) == 5);

    CondensedPair condensed;
    condensed.human_input = "a b c";
    condensed.assistant_summary = "d e";
    condensed.reasoning = "many words that must not count";
    CHECK(entry_token_count(HistoryEntry{condensed}, tok) == 5);
}

TEST_CASE("window config validation") {
    WindowConfig config;
    CHECK_NOTHROW(config.validate());

    WindowConfig bad = config;
    bad.w = 1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.gamma = -0.1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.gamma = 1.5;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.tau = -1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.integration_delay_turns = 0;
    CHECK_THROWS_AS(bad.validate(), Error);

    WindowConfig edge = config;
    edge.gamma = 0.0;
    CHECK_NOTHROW(edge.validate());
    edge.gamma = 1.0;
    CHECK_NOTHROW(edge.validate());
    edge.tau = 0;
    CHECK_NOTHROW(edge.validate());
}

TEST_CASE("enum string conversions") {
    CHECK(to_string(Role::User) == "user");
    CHECK(to_string(Role::Assistant) == "assistant");
    CHECK(to_string(Role::System) == "system");
    CHECK(to_string(JobStatus::Pending) == "pending");
    CHECK(to_string(JobStatus::Ready) == "ready");
    CHECK(to_string(JobStatus::Failed) == "failed");
    CHECK(to_string(JobStatus::Withheld) == "withheld");
    CHECK(to_string(OverlapMode::SharedMass) == "shared_mass");
    CHECK(to_string(OverlapMode::PairwiseMean) == "pairwise_mean");
    CHECK(to_string(TauScope::Window) == "window");
    CHECK(to_string(TauScope::SessionRaw) == "session_raw");
    CHECK(overlap_mode_from_string("shared_mass") == OverlapMode::SharedMass);
    CHECK(overlap_mode_from_string("pairwise_mean") == OverlapMode::PairwiseMean);
    CHECK(tau_scope_from_string("window") == TauScope::Window);
    CHECK(tau_scope_from_string("session_raw") == TauScope::SessionRaw);
    CHECK_THROWS_AS(overlap_mode_from_string("nope"), Error);
    CHECK_THROWS_AS(tau_scope_from_string("nope"), Error);
}
