#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtosc/condenser.hpp"
#include "mtosc/errors.hpp"
#include "mtosc/harness.hpp"
#include "mtosc/mocks.hpp"
#include "mtosc/model_client.hpp"
#include "mtosc/perturb.hpp"
#include "mtosc/report.hpp"
#include "mtosc/transcript.hpp"

namespace fs = std::filesystem;
using namespace mtosc;

namespace {

struct CommonFlags {
    std::string transcripts_path;
    std::string strategy = "mtosc";
    int w = 4;
    double gamma = 0.2;
    int tau = 1000;
    int delay = 1;
    bool no_decider = false;
    std::string overlap_mode = "shared_mass";
    std::string tau_scope = "window";
    int fifo_limit = 4;
    bool live = false;
    std::string model = "mock";
    std::string condenser_model;
    std::string provider_profile_path;
    int shared_tokens = 150;
    int unique_tokens = 0;
    double mock_ratio = 0.2;
    std::string stopwords_path;
    std::string exemplars_path;
    bool lenient = false;
    int repeats = 1;
    int concurrency = 1;
    std::string out_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool with_strategy) {
    cmd->add_option("--transcripts", f.transcripts_path, "Transcript JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_strategy)
        cmd->add_option("--strategy", f.strategy, "Replay strategy")
            ->check(CLI::IsMember({"baseline", "mtosc", "fifo", "summ"}))
            ->capture_default_str();
    cmd->add_option("--w", f.w, "Trigger window size in exchange pairs")->capture_default_str();
    cmd->add_option("--gamma", f.gamma, "Decider overlap threshold")->capture_default_str();
    cmd->add_option("--tau", f.tau, "Decider user-token threshold")->capture_default_str();
    cmd->add_option("--delay", f.delay, "Integration delay in turns")->capture_default_str();
    cmd->add_flag("--no-decider", f.no_decider, "Condense every trigger unconditionally");
    cmd->add_option("--overlap-mode", f.overlap_mode, "Overlap statistic")
        ->check(CLI::IsMember({"shared_mass", "pairwise_mean"}))
        ->capture_default_str();
    cmd->add_option("--tau-scope", f.tau_scope, "Token mass the tau test uses")
        ->check(CLI::IsMember({"window", "session_raw"}))
        ->capture_default_str();
    cmd->add_option("--fifo-limit", f.fifo_limit, "Pairs kept by the fifo strategy")
        ->capture_default_str();

    auto* mock = cmd->add_flag("--mock", "Use the deterministic offline backends (default)");
    auto* live = cmd->add_flag("--live", f.live,
                               "Use the HTTP backend at MTOSC_BASE_URL (MTOSC_API_KEY as bearer)");
    mock->excludes(live);
    cmd->add_option("--model", f.model, "Chat model id")->capture_default_str();
    cmd->add_option("--condenser-model", f.condenser_model,
                    "Condenser model id (defaults to --model)");
    cmd->add_option("--provider-profile", f.provider_profile_path,
                    "Provider capability profile JSON")
        ->check(CLI::ExistingFile);
    cmd->add_option("--shared-tokens", f.shared_tokens,
                    "Mock chat: shared vocabulary tokens per reply")
        ->capture_default_str();
    cmd->add_option("--unique-tokens", f.unique_tokens,
                    "Mock chat: reply-specific tokens per reply")
        ->capture_default_str();
    cmd->add_option("--mock-ratio", f.mock_ratio, "Mock condenser compression ratio")
        ->capture_default_str();
    cmd->add_option("--stopwords", f.stopwords_path, "Stopword list, one word per line")
        ->check(CLI::ExistingFile);
    cmd->add_option("--exemplars", f.exemplars_path, "Few-shot exemplar JSON file")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--lenient", f.lenient, "Skip malformed transcript lines with a warning");
    cmd->add_option("--repeats", f.repeats, "Replay the whole corpus this many times")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--concurrency", f.concurrency, "Parallel sessions")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--out", f.out_dir, "Output directory")->required();
}

harness::Strategy strategy_from_flags(const CommonFlags& f) {
    harness::Strategy strategy;
    strategy.kind = harness::strategy_from_string(f.strategy);
    strategy.window_config.w = f.w;
    strategy.window_config.gamma = f.gamma;
    strategy.window_config.tau = f.tau;
    strategy.window_config.integration_delay_turns = f.delay;
    strategy.window_config.decider_enabled = !f.no_decider;
    strategy.window_config.overlap_mode = overlap_mode_from_string(f.overlap_mode);
    strategy.window_config.tau_scope = tau_scope_from_string(f.tau_scope);
    strategy.fifo_limit = f.fifo_limit;
    strategy.window_config.validate();
    return strategy;
}

std::vector<harness::Transcript> load_corpus(const CommonFlags& f) {
    std::vector<harness::Transcript> transcripts = harness::load_transcripts(f.transcripts_path, f.lenient);
    if (transcripts.empty()) throw Error("no transcripts loaded from " + f.transcripts_path);
    if (f.repeats > 1) {
        const size_t base = transcripts.size();
        transcripts.reserve(base * static_cast<size_t>(f.repeats));
        for (int r = 2; r <= f.repeats; ++r) {
            for (size_t i = 0; i < base; ++i) {
                harness::Transcript copy = transcripts[i];
                copy.id += "#" + std::to_string(r);
                transcripts.push_back(std::move(copy));
            }
        }
    }
    return transcripts;
}

struct Backends {
    std::unique_ptr<client::ChatClient> chat;
    std::unique_ptr<condenser::CondenserBackend> condenser;
};

Backends make_backends(const CommonFlags& f, bool needs_condenser) {
    Backends b;
    if (f.live) {
        client::ClientConfig config = client::config_from_env();
        if (config.base_url.empty())
            throw Error("--live requires MTOSC_BASE_URL to be set");
        client::ProviderProfile profile;
        if (!f.provider_profile_path.empty())
            profile = client::ProviderProfile::load(f.provider_profile_path);
        b.chat = std::make_unique<client::HttpChatClient>(config, profile);
        if (needs_condenser)
            b.condenser = std::make_unique<client::HttpCondenserBackend>(config, profile);
    } else {
        b.chat = std::make_unique<harness::MockChatClient>(f.shared_tokens, f.unique_tokens);
        if (needs_condenser)
            b.condenser = std::make_unique<condenser::MockCondenserBackend>(f.mock_ratio);
    }
    return b;
}

harness::RunOptions options_from_flags(const CommonFlags& f) {
    harness::RunOptions options;
    options.chat_model_id = f.model;
    options.condenser_params.model_id =
        f.condenser_model.empty() ? f.model : f.condenser_model;
    if (!f.stopwords_path.empty()) options.stopwords = decider::load_stopwords(f.stopwords_path);
    if (!f.exemplars_path.empty())
        options.exemplars = condenser::ExemplarSet::load(f.exemplars_path);
    options.session_concurrency = f.concurrency;
    return options;
}

void print_run_summary(const harness::RunReport& report) {
    const auto& agg = report.aggregates;
    std::printf("strategy=%s sessions=%d turns=%d history_tokens=%lld with_background=%lld",
                report.strategy_name.c_str(), agg.session_count, agg.turn_count,
                agg.total_history_tokens, agg.total_tokens_with_background);
    if (agg.exact_match_accuracy)
        std::printf(" exact_match=%.4f", *agg.exact_match_accuracy);
    std::printf("\n");
}

int cmd_run(const CommonFlags& f) {
    const harness::Strategy strategy = strategy_from_flags(f);
    const std::vector<harness::Transcript> transcripts = load_corpus(f);
    const bool needs_condenser = strategy.kind == harness::StrategyKind::MtOsc ||
                                 strategy.kind == harness::StrategyKind::MtOscSummarizer;
    Backends backends = make_backends(f, needs_condenser);
    const harness::RunOptions options = options_from_flags(f);

    harness::RunReport report =
        harness::run_all(transcripts, strategy, *backends.chat, backends.condenser.get(), options);

    fs::create_directories(f.out_dir);
    report::emit_report(report, report::Format::Json, fs::path(f.out_dir) / "report.json");
    report::emit_report(report, report::Format::Csv, fs::path(f.out_dir) / "turns.csv");
    report::write_file(fs::path(f.out_dir) / "curve.csv", report::curve_csv(report));
    print_run_summary(report);
    return 0;
}

int cmd_sweep(const CommonFlags& f, const std::vector<double>& gammas,
              const std::vector<int>& taus) {
    harness::Strategy strategy = strategy_from_flags(f);
    if (strategy.kind != harness::StrategyKind::MtOsc &&
        strategy.kind != harness::StrategyKind::MtOscSummarizer)
        throw Error("sweep requires a condensing strategy (mtosc or summ)");
    const std::vector<harness::Transcript> transcripts = load_corpus(f);
    Backends backends = make_backends(f, true);
    const harness::RunOptions options = options_from_flags(f);

    harness::SweepReport sweep = harness::decider_sweep(
        transcripts, gammas.empty() ? harness::kDefaultSweepGammas : gammas,
        taus.empty() ? harness::kDefaultSweepTaus : taus, strategy, *backends.chat,
        backends.condenser.get(), options);

    fs::create_directories(f.out_dir);
    report::emit_report(sweep, report::Format::Json, fs::path(f.out_dir) / "sweep.json");
    report::emit_report(sweep, report::Format::Csv, fs::path(f.out_dir) / "sweep.csv");
    std::printf("sweep cells=%zu gammas=%zu taus=%zu\n", sweep.cells.size(),
                sweep.gammas.size(), sweep.taus.size());
    return 0;
}

// Sends the diversion prompt as a single user message with the diversion
// generation parameters.
class LiveDiversionGenerator final : public perturb::TextGenerator {
public:
    LiveDiversionGenerator(client::ClientConfig config, client::ProviderProfile profile,
                           perturb::DiversionParams params)
        : config_(std::move(config)), profile_(profile), params_(std::move(params)) {}

    std::string generate(const std::string& prompt) override {
        client::ChatRequest request;
        request.model_id = params_.model_id;
        request.messages.push_back({Role::User, prompt});
        request.temperature = params_.temperature;
        request.top_p = params_.top_p;
        request.frequency_penalty = std::nullopt;
        request.max_completion_tokens = params_.max_tokens;
        try {
            return client::chat_complete(request, config_, profile_).text;
        } catch (const BackendError& e) {
            throw GeneratorError(e.what());
        }
    }

private:
    client::ClientConfig config_;
    client::ProviderProfile profile_;
    perturb::DiversionParams params_;
};

struct PerturbFlags {
    std::string in_path;
    std::string out_path;
    std::string manifest_path;
    std::string kind = "ri";
    double ratio = 0.25;
    int n = -1;
    std::uint64_t seed = 0;
    bool live = false;
    std::string model = "mock";
    std::string provider_profile_path;
    bool lenient = false;
};

int cmd_perturb(const PerturbFlags& f) {
    std::vector<harness::Transcript> transcripts = harness::load_transcripts(f.in_path, f.lenient);
    if (transcripts.empty()) throw Error("no transcripts loaded from " + f.in_path);

    perturb::PerturbSpec spec;
    spec.kind = perturb::kind_from_string(f.kind);
    spec.ratio = f.ratio;
    if (f.n >= 0) spec.n_override = f.n;
    spec.seed = f.seed;

    std::unique_ptr<perturb::TextGenerator> generator;
    if (spec.kind == perturb::Kind::ContextualDiversion) {
        if (f.live) {
            client::ClientConfig config = client::config_from_env();
            if (config.base_url.empty())
                throw Error("--live requires MTOSC_BASE_URL to be set");
            client::ProviderProfile profile;
            if (!f.provider_profile_path.empty())
                profile = client::ProviderProfile::load(f.provider_profile_path);
            perturb::DiversionParams params;
            params.model_id = f.model;
            generator = std::make_unique<LiveDiversionGenerator>(config, profile, params);
        } else {
            generator = std::make_unique<perturb::MockDiversionGenerator>();
        }
    }

    nlohmann::ordered_json manifest;
    manifest["kind"] = f.kind;
    manifest["ratio"] = f.ratio;
    manifest["n_override"] = f.n >= 0 ? nlohmann::ordered_json(f.n) : nlohmann::ordered_json(nullptr);
    manifest["seed"] = f.seed;
    manifest["generator"] = spec.kind != perturb::Kind::ContextualDiversion ? "none"
                            : f.live                                        ? "live"
                                                                            : "mock";
    manifest["transcripts"] = nlohmann::ordered_json::array();

    // Each transcript gets its own seed so equal-length inputs are not all
    // perturbed at the same positions.
    for (size_t i = 0; i < transcripts.size(); ++i) {
        harness::Transcript& transcript = transcripts[i];
        perturb::PerturbSpec per = spec;
        per.seed = spec.seed + i;
        perturb::PerturbOutcome outcome =
            perturb::apply_perturbation(transcript.user_turns, per, generator.get());
        transcript.user_turns = std::move(outcome.turns);
        transcript.tags.push_back("perturbed:" + f.kind);

        nlohmann::ordered_json entry;
        entry["id"] = transcript.id;
        entry["seed"] = per.seed;
        entry["selected_indices"] = outcome.selected_indices;
        entry["inserted_positions"] = outcome.inserted_positions;
        manifest["transcripts"].push_back(std::move(entry));
    }

    harness::save_transcripts(transcripts, f.out_path);
    const std::string manifest_path =
        f.manifest_path.empty() ? f.out_path + ".manifest.json" : f.manifest_path;
    report::write_file(manifest_path, manifest.dump(2) + "\n");
    std::printf("perturbed %zu transcripts -> %s (manifest %s)\n", transcripts.size(),
                f.out_path.c_str(), manifest_path.c_str());
    return 0;
}

int cmd_report(const std::vector<std::string>& compare, const std::string& out_dir) {
    harness::RunReport baseline = report::load_run_report(compare[0]);
    harness::RunReport candidate = report::load_run_report(compare[1]);
    harness::ComparisonReport comparison = harness::compare_runs(baseline, candidate);

    fs::create_directories(out_dir);
    report::emit_report(comparison, report::Format::Json, fs::path(out_dir) / "compare.json");
    report::emit_report(comparison, report::Format::Csv, fs::path(out_dir) / "curve.csv");
    std::printf("%s vs %s: history tokens %lld -> %lld (%.1f%% reduction)\n",
                comparison.baseline_strategy.c_str(), comparison.candidate_strategy.c_str(),
                comparison.baseline_total_history_tokens,
                comparison.candidate_total_history_tokens, comparison.reduction_percent);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Windowed one-off sequential chat-history condensation: replay and evaluation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML config file");

    CommonFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "Replay transcripts under one strategy");
    add_common_flags(run, run_flags, true);

    PerturbFlags perturb_flags;
    CLI::App* perturb_cmd = app.add_subcommand("perturb", "Write a perturbed copy of a corpus");
    perturb_cmd->add_option("--in", perturb_flags.in_path, "Transcript JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    perturb_cmd->add_option("--out", perturb_flags.out_path, "Perturbed JSONL destination")
        ->required();
    perturb_cmd->add_option("--manifest", perturb_flags.manifest_path,
                            "Manifest destination (default: <out>.manifest.json)");
    perturb_cmd->add_option("--kind", perturb_flags.kind, "Perturbation kind")
        ->check(CLI::IsMember({"ri", "fi", "cd"}))
        ->capture_default_str();
    perturb_cmd->add_option("--ratio", perturb_flags.ratio, "Insertions per turn ratio")
        ->capture_default_str();
    perturb_cmd->add_option("--n", perturb_flags.n, "Exact insertion count (overrides --ratio)");
    perturb_cmd->add_option("--seed", perturb_flags.seed, "Base RNG seed")->capture_default_str();
    perturb_cmd->add_flag("--live", perturb_flags.live,
                          "Generate cd distractors through the HTTP backend");
    perturb_cmd->add_option("--model", perturb_flags.model, "Distractor model id (with --live)")
        ->capture_default_str();
    perturb_cmd->add_option("--provider-profile", perturb_flags.provider_profile_path,
                            "Provider capability profile JSON")
        ->check(CLI::ExistingFile);
    perturb_cmd->add_flag("--lenient", perturb_flags.lenient,
                          "Skip malformed transcript lines with a warning");

    CommonFlags sweep_flags;
    std::vector<double> gammas;
    std::vector<int> taus;
    CLI::App* sweep = app.add_subcommand("sweep", "Replay once per decider threshold pair");
    add_common_flags(sweep, sweep_flags, true);
    sweep->add_option("--gammas", gammas, "Overlap thresholds (default 0.1 0.2 0.3 0.4)")
        ->delimiter(',');
    sweep->add_option("--taus", taus, "Token thresholds (default 500 1000 2000 3000 4000)")
        ->delimiter(',');

    std::vector<std::string> compare;
    std::string report_out;
    CLI::App* report_cmd = app.add_subcommand("report", "Compare two saved run reports");
    report_cmd->add_option("--compare", compare, "Baseline and candidate report.json paths")
        ->expected(2)
        ->required()
        ->check(CLI::ExistingFile);
    report_cmd->add_option("--out", report_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (perturb_cmd->parsed()) return cmd_perturb(perturb_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, gammas, taus);
        if (report_cmd->parsed()) return cmd_report(compare, report_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
