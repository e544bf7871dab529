#include <doctest.h>

#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mtosc/decider.hpp"
#include "mtosc/errors.hpp"
#include "test_util.hpp"

using namespace mtosc;
using namespace mtosc::decider;
using mtosc::testutil::make_window;

TEST_CASE("stemming rules") {
    CHECK(stem("stories") == "story");
    CHECK(stem("parties") == "party");
    CHECK(stem("ties") == "tie");  // too short for the ies rule, plain s applies
    CHECK(stem("classes") == "class");
    CHECK(stem("boxes") == "box");
    CHECK(stem("churches") == "church");
    CHECK(stem("dishes") == "dish");
    CHECK(stem("quizzes") == "quizz");
    CHECK(stem("cats") == "cat");
    CHECK(stem("class") == "class");    // ss kept
    CHECK(stem("status") == "status");  // us kept
    CHECK(stem("basis") == "basis");    // is kept
    CHECK(stem("gas") == "gas");        // too short for plain s
    CHECK(stem("running") == "run");
    CHECK(stem("walking") == "walk");
    CHECK(stem("sing") == "sing");  // too short for the ing rule
    CHECK(stem("stopped") == "stop");
    CHECK(stem("walked") == "walk");
    CHECK(stem("red") == "red");  // too short for the ed rule
    CHECK(stem("quickly") == "quick");
    CHECK(stem("fly") == "fly");
    CHECK(stem("it") == "it");
    CHECK(stem("") == "");
    // chained: plural then participle then adverb suffixes
    CHECK(stem("walkings") == "walk");
}

TEST_CASE("normalize lowercases, splits on non-alphanumerics and drops stopwords") {
    const WordSet& stop = default_stopwords();
    CHECK(normalize("Hello, WORLD!", stop) == WordSet{"hello", "world"});
    CHECK(normalize("the a and of", stop) == WordSet{});
    // the plural rule also catches the unit suffix: "9000ms" -> "9000m"
    CHECK(normalize("rate-limit: 9000ms", stop) == WordSet{"rate", "limit", "9000m"});
    CHECK(normalize("", stop) == WordSet{});
    CHECK(normalize("   \t\n", stop) == WordSet{});
    // stopword check happens before stemming
    CHECK(normalize("doing", stop) == WordSet{});
    // multibyte sequences survive as word characters
    CHECK(normalize("caf\xc3\xa9", stop) == WordSet{"caf\xc3\xa9"});
    // stemming applies after splitting
    CHECK(normalize("running quickly", stop) == WordSet{"run", "quick"});
}

TEST_CASE("load_stopwords matches the embedded defaults") {
    WordSet loaded = load_stopwords(std::string(MTOSC_SOURCE_DIR) + "/data/stopwords_en.txt");
    CHECK(loaded == default_stopwords());
    CHECK_THROWS_AS(load_stopwords("/nonexistent/stopwords.txt"), IoError);
}

TEST_CASE("assistant_novel_terms subtracts user terms seen so far") {
    auto window = make_window({{"apple pie", "cherry date"},
                               {"banana split", "cherry fig apple"}});
    const WordSet& stop = default_stopwords();
    CHECK(assistant_novel_terms(window, 1, stop) == WordSet{"cherry", "date"});
    // "apple" was introduced by user turn 1, so it is not novel in a2.
    CHECK(assistant_novel_terms(window, 2, stop) == WordSet{"cherry", "fig"});
    CHECK_THROWS_AS(assistant_novel_terms(window, 0, stop), Error);
    CHECK_THROWS_AS(assistant_novel_terms(window, 3, stop), Error);
}

TEST_CASE("window_overlap shared-mass hand examples") {
    const WordSet& stop = default_stopwords();

    // N1={cherry,date}, N2={cherry,fig}, N3=N4={} -> S={cherry},
    // U={cherry,date,fig} -> 1/3.
    auto window = make_window({{"apple", "cherry date"},
                               {"banana", "cherry fig"},
                               {"carrot", ""},
                               {"dill", ""}});
    CHECK(window_overlap(window, OverlapMode::SharedMass, stop) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // disjoint novel sets -> 0
    auto disjoint = make_window({{"x", "alpha"}, {"y", "bravo"}});
    CHECK(window_overlap(disjoint, OverlapMode::SharedMass, stop) == 0.0);

    // identical novel sets -> 1
    auto identical = make_window({{"x", "zebra quokka"}, {"y", "zebra quokka"}});
    CHECK(window_overlap(identical, OverlapMode::SharedMass, stop) == 1.0);

    // all assistant terms known from users -> U empty -> 0
    auto absorbed = make_window({{"zebra", "zebra"}, {"zebra", "zebra"}});
    CHECK(window_overlap(absorbed, OverlapMode::SharedMass, stop) == 0.0);

    CHECK_THROWS_AS(
        window_overlap(make_window({{"u", "a"}}), OverlapMode::SharedMass, stop),
        WindowTooSmall);
}

TEST_CASE("window_overlap pairwise-mean variant") {
    const WordSet& stop = default_stopwords();
    // N1={p,q}, N2={q,r}: jaccard 1/3; N3={}: pairs with {} contribute 0.
    auto window = make_window({{"x", "pig quokka"}, {"y", "quokka rat"}, {"z", ""}});
    CHECK(window_overlap(window, OverlapMode::PairwiseMean, stop) ==
          doctest::Approx((1.0 / 3.0) / 3.0).epsilon(1e-12));

    auto empty = make_window({{"a", ""}, {"b", ""}});
    CHECK(window_overlap(empty, OverlapMode::PairwiseMean, stop) == 0.0);
}

TEST_CASE("decide applies strict thresholds") {
    const Tokenizer& tok = *default_tokenizer();
    WindowConfig config;  // gamma 0.2, tau 1000

    // overlap 1/3; user tokens controlled by filler mass
    auto window = [&](int filler_per_turn) {
        return make_window({{synthetic_tokens("uf1x", filler_per_turn), "cherry date"},
                            {synthetic_tokens("uf2x", filler_per_turn), "cherry fig"},
                            {synthetic_tokens("uf3x", filler_per_turn), ""},
                            {synthetic_tokens("uf4x", filler_per_turn), ""}});
    };

    DeciderVerdict heavy = decide(window(300), config, tok);
    CHECK(heavy.decision == Decision::Withhold);
    CHECK(heavy.user_tokens == 1200);
    CHECK(heavy.overlap == doctest::Approx(1.0 / 3.0));
    CHECK(heavy.gamma == 0.2);
    CHECK(heavy.tau == 1000);

    DeciderVerdict light = decide(window(180), config, tok);
    CHECK(light.decision == Decision::Condense);
    CHECK(light.user_tokens == 720);

    // strict inequality: exactly tau tokens stays Condense
    DeciderVerdict at_tau = decide(window(250), config, tok);
    CHECK(at_tau.user_tokens == 1000);
    CHECK(at_tau.decision == Decision::Condense);

    // strict inequality on gamma
    WindowConfig at_gamma = config;
    at_gamma.gamma = 1.0 / 3.0;
    CHECK(decide(window(300), at_gamma, tok).decision == Decision::Condense);

    // disabled decider still measures but always condenses
    WindowConfig disabled = config;
    disabled.decider_enabled = false;
    DeciderVerdict measured = decide(window(300), disabled, tok);
    CHECK(measured.decision == Decision::Condense);
    CHECK(measured.user_tokens == 1200);
    CHECK(measured.overlap == doctest::Approx(1.0 / 3.0));

    // session-scope override replaces the window token mass
    DeciderVerdict overridden = decide(window(180), config, tok, default_stopwords(), 5000);
    CHECK(overridden.user_tokens == 5000);
    CHECK(overridden.decision == Decision::Withhold);
}

namespace {

// Brute-force oracle over a clean vocabulary ("tok<i>": no stopwords, no
// stemmable suffixes, no case), written with plain set arithmetic and
// whitespace splitting only.
std::set<std::string> oracle_words(const std::string& text) {
    std::set<std::string> out;
    std::istringstream in(text);
    std::string word;
    while (in >> word) out.insert(word);
    return out;
}

double oracle_overlap(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::set<std::string>> novel;
    std::set<std::string> user_union;
    for (const auto& [user, assistant] : pairs) {
        for (const auto& w : oracle_words(user)) user_union.insert(w);
        std::set<std::string> n;
        for (const auto& w : oracle_words(assistant))
            if (!user_union.count(w)) n.insert(w);
        novel.push_back(std::move(n));
    }
    std::set<std::string> all;
    std::set<std::string> shared;
    for (size_t i = 0; i < novel.size(); ++i) {
        for (const auto& w : novel[i]) {
            if (all.count(w))
                shared.insert(w);
            else
                all.insert(w);
        }
    }
    if (all.empty()) return 0.0;
    return static_cast<double>(shared.size()) / static_cast<double>(all.size());
}

int oracle_user_tokens(const std::vector<std::pair<std::string, std::string>>& pairs) {
    int total = 0;
    for (const auto& [user, assistant] : pairs) {
        std::istringstream in(user);
        std::string word;
        while (in >> word) ++total;
    }
    return total;
}

}  // namespace

TEST_CASE("oracle equivalence over 500 random windows") {
    std::mt19937 rng(20240817);
    const Tokenizer& tok = *default_tokenizer();

    auto random_text = [&](int max_words) {
        std::uniform_int_distribution<int> n_words(0, max_words);
        std::uniform_int_distribution<int> vocab(0, 29);
        int n = n_words(rng);
        std::string text;
        for (int i = 0; i < n; ++i) {
            if (!text.empty()) text += ' ';
            text += "tok" + std::to_string(vocab(rng));
        }
        return text;
    };

    for (int iter = 0; iter < 500; ++iter) {
        std::uniform_int_distribution<int> n_pairs(2, 6);
        int n = n_pairs(rng);
        std::vector<std::pair<std::string, std::string>> pairs;
        for (int i = 0; i < n; ++i) pairs.emplace_back(random_text(8), random_text(12));

        auto window = make_window(pairs);
        const double expected = oracle_overlap(pairs);
        const double actual = window_overlap(window, OverlapMode::SharedMass,
                                             default_stopwords());
        REQUIRE(actual == expected);

        std::uniform_real_distribution<double> gamma_dist(0.0, 1.0);
        std::uniform_int_distribution<int> tau_dist(0, 40);
        WindowConfig config;
        config.gamma = gamma_dist(rng);
        config.tau = tau_dist(rng);
        DeciderVerdict verdict = decide(window, config, tok);
        REQUIRE(verdict.user_tokens == oracle_user_tokens(pairs));
        const bool withhold = expected > config.gamma && verdict.user_tokens > config.tau;
        REQUIRE(verdict.decision ==
                (withhold ? Decision::Withhold : Decision::Condense));
    }
}

TEST_CASE("user_token_total sums the user side only") {
    auto window = make_window({{"one two", "x y z"}, {"three", "w"}});
    CHECK(user_token_total(window, *default_tokenizer()) == 3);
}
