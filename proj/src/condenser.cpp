#include "mtosc/condenser.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "mtosc/errors.hpp"

namespace mtosc::condenser {

using nlohmann::json;
using nlohmann::ordered_json;

ExemplarSet::ExemplarSet(std::vector<Exemplar> exemplars) : exemplars_(std::move(exemplars)) {
    validate();
}

void ExemplarSet::validate() const {
    if (exemplars_.size() < 3)
        throw Error("exemplar set needs at least 3 entries, got " +
                    std::to_string(exemplars_.size()));
    for (size_t i = 0; i < exemplars_.size(); ++i) {
        const auto& ex = exemplars_[i];
        if (ex.conversation.empty())
            throw Error("exemplar " + std::to_string(i + 1) + " has an empty conversation");
        CondensedPair pair;
        try {
            pair = parse_condenser_output(ex.output_json);
        } catch (const ParseError& e) {
            throw Error("exemplar " + std::to_string(i + 1) + " output is invalid: " + e.what());
        }
        if (pair.reasoning.empty())
            throw Error("exemplar " + std::to_string(i + 1) + " output lacks a Reasoning value");
    }
}

const ExemplarSet& ExemplarSet::defaults() {
    static const ExemplarSet instance{{
        Exemplar{
            "Human: Set up the nightly backup job for the analytics database. Use bucket "
            "s3://acme-dw-backups, keep 14 daily snapshots, and run it at 02:30 UTC. Compression "
            "should be zstd level 6.\n\n"
            "Assistant: Done. I created a cron entry at 02:30 UTC that dumps the analytics "
            "database, compresses it with zstd at level 6, uploads to s3://acme-dw-backups, and "
            "prunes to the 14 most recent snapshots.\n\n"
            "Human: Also email a failure alert to oncall@acme.io if the dump exits non-zero.\n\n"
            "Assistant: Added. A non-zero exit now triggers an alert email to oncall@acme.io "
            "with the last 50 log lines attached.",
            R"({"HumanInput": "Set up a nightly backup job for the analytics database: run at 02:30 UTC, bucket s3://acme-dw-backups, keep 14 daily snapshots, zstd level 6 compression, and email a failure alert to oncall@acme.io on non-zero exit.", "Assistant": "Created the 02:30 UTC cron job with zstd level 6 compression, uploads to s3://acme-dw-backups, pruning to 14 snapshots, and failure alerts to oncall@acme.io.", "Reasoning": "Every concrete value the human gave (time, bucket, retention, compression level, alert address) is kept verbatim because later turns may depend on it; the assistant side is reduced to the actions taken."})",
        },
        Exemplar{
            "Human: I'm planning a three-day hiking trip in the Dolomites in early September.\n\n"
            "Assistant: Early September is a good window: huts are still open, trails are "
            "quieter, and the weather is usually stable. Do you want hut-to-hut suggestions?\n\n"
            "Human: Yes, hut-to-hut, moderate difficulty, starting from Cortina.\n\n"
            "Assistant: A classic moderate loop from Cortina: day one to Rifugio Nuvolau, day "
            "two via Passo Giau to Rifugio Citta di Fiume, day three back through Forcella "
            "Ambrizzola. Book the huts ahead; September weekends fill up.",
            R"({"HumanInput": "Plan a three-day, moderate, hut-to-hut hiking trip in the Dolomites in early September, starting from Cortina.", "Assistant": "Recommended a moderate loop from Cortina: Rifugio Nuvolau, then Passo Giau to Rifugio Citta di Fiume, returning via Forcella Ambrizzola; early September is quiet and stable but huts should be booked ahead.", "Reasoning": "The two human turns describe one evolving request, so they are merged into a single consolidated instruction; the assistant summary keeps the full route and the booking advice."})",
        },
        Exemplar{
            "Human: Draft a short product note announcing that exports now support CSV with "
            "custom delimiters.\n\n"
            "Assistant: Draft: \"Exports just got more flexible: you can now download your data "
            "as CSV with a delimiter of your choice (comma, semicolon, tab, or pipe). Available "
            "today under Settings > Exports.\"\n\n"
            "Human: By the way, what's the weather like in Lisbon right now?\n\n"
            "Assistant: I don't have live weather data, but Lisbon in this season is typically "
            "mild; checking a forecast service will give you current conditions.\n\n"
            "Human: Make the note mention that the old XLSX export is unchanged.\n\n"
            "Assistant: Updated draft: \"Exports just got more flexible: download your data as "
            "CSV with a delimiter of your choice (comma, semicolon, tab, or pipe). Your existing "
            "XLSX exports continue to work unchanged. Available today under Settings > "
            "Exports.\"",
            R"({"HumanInput": "Draft a short product note announcing CSV exports with custom delimiters (comma, semicolon, tab, or pipe), mentioning that the old XLSX export is unchanged.", "Assistant": "Produced the note: CSV export with a chosen delimiter is available under Settings > Exports, and existing XLSX exports keep working unchanged.", "Reasoning": "The weather question is unrelated to the drafting task and does not constrain future turns, so it is excluded; the delimiter list and the XLSX caveat are kept because the note depends on them."})",
        },
    }};
    return instance;
}

ExemplarSet ExemplarSet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open exemplar file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw Error("exemplar file must be a JSON array: " + path);
    std::vector<Exemplar> exemplars;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("conversation") ||
            !item["conversation"].is_string() || !item.contains("output") ||
            !item["output"].is_string())
            throw Error("exemplar entries need string fields \"conversation\" and \"output\"");
        exemplars.push_back(
            Exemplar{item["conversation"].get<std::string>(), item["output"].get<std::string>()});
    }
    return ExemplarSet(std::move(exemplars));
}

const std::string& condenser_instruction() {
    static const std::string text =
        "Condense the information from HumanInput and also share a concise summary of Assistant "
        "response to the human input. Make sure you don't miss any specific values and "
        "instructions provided by the human input that are relevant for the conversation.\n"
        "For the assistant response summary, make sure to keep any important points but keep it "
        "concise.\n"
        "Also return the reasoning behind your condensation strategy.\n"
        "Return in JSON format {\"HumanInput\": \"<text>\", \"Assistant\": \"<text>\", "
        "\"Reasoning\": \"<text>\"}. Only return the JSON with no additional text.";
    return text;
}

const std::string& summarizer_instruction() {
    static const std::string text =
        "Summarize the information from HumanInput and also share a concise summary of Assistant "
        "response to the human input. Make sure you don't miss any specific values and "
        "instructions provided by the human input. For the assistant response summary, make sure "
        "to keep any important points but keep it concise. Return in JSON format "
        "{\"HumanInput\": \"<text>\", \"Assistant\": \"<text>\"}. Only return the JSON with no "
        "additional text.";
    return text;
}

std::string render_window(std::span<const HistoryEntry> window) {
    std::string out;
    for (const auto& entry : window) {
        if (!out.empty()) out += "\n\n";
        out += "Human: ";
        out += user_text(entry);
        out += "\n\nAssistant: ";
        out += assistant_text(entry);
    }
    return out;
}

std::string build_condenser_prompt(std::span<const HistoryEntry> window,
                                   const ExemplarSet& exemplars) {
    if (window.empty()) throw EmptyWindow();
    std::string prompt = condenser_instruction();
    prompt += "\n\nExamples:\n";
    for (const auto& ex : exemplars.exemplars()) {
        prompt += "\nConversation History: ";
        prompt += ex.conversation;
        prompt += '\n';
        prompt += ex.output_json;
        prompt += '\n';
    }
    prompt += "\nConversation History: ";
    prompt += render_window(window);
    return prompt;
}

std::string build_summarizer_prompt(std::span<const HistoryEntry> window) {
    if (window.empty()) throw EmptyWindow();
    return summarizer_instruction() + "\n\n" + render_window(window);
}

namespace {

// Candidate span [start, end) that balances braces outside of strings, or
// npos when the text runs out first.
size_t balanced_end(std::string_view text, size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
            if (depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

}  // namespace

CondensedPair parse_condenser_output(std::string_view text) {
    json doc;
    bool found = false;
    for (size_t pos = text.find('{'); pos != std::string_view::npos;
         pos = text.find('{', pos + 1)) {
        size_t end = balanced_end(text, pos);
        if (end == std::string_view::npos) continue;
        json candidate = json::parse(text.substr(pos, end - pos), nullptr, false);
        if (candidate.is_discarded() || !candidate.is_object()) continue;
        doc = std::move(candidate);
        found = true;
        break;
    }
    if (!found) throw NoJsonFound();

    auto required = [&doc](const char* key) -> std::string {
        if (!doc.contains(key) || !doc[key].is_string()) throw MissingKey(key);
        return doc[key].get<std::string>();
    };

    CondensedPair pair;
    pair.human_input = required("HumanInput");
    pair.assistant_summary = required("Assistant");
    if (doc.contains("Reasoning") && doc["Reasoning"].is_string())
        pair.reasoning = doc["Reasoning"].get<std::string>();
    if (pair.human_input.empty()) throw EmptyField("HumanInput");
    if (pair.assistant_summary.empty()) throw EmptyField("Assistant");
    return pair;
}

std::string serialize_condenser_output(const CondensedPair& pair, bool include_reasoning) {
    ordered_json doc;
    doc["HumanInput"] = pair.human_input;
    doc["Assistant"] = pair.assistant_summary;
    if (include_reasoning) doc["Reasoning"] = pair.reasoning;
    return doc.dump();
}

CondenseResult condense(std::span<const HistoryEntry> window, CondenserBackend& backend,
                        const CondenserParams& params, const ExemplarSet& exemplars,
                        const Tokenizer& tokenizer, const CondenseOptions& options) {
    if (window.empty()) throw EmptyWindow();
    const std::string prompt = options.summarizer ? build_summarizer_prompt(window)
                                                  : build_condenser_prompt(window, exemplars);
    const int local_prompt_tokens = tokenizer.count(prompt);

    int acc_in = 0;
    int acc_out = 0;
    const int max_attempts = 1 + options.retry_limit;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        BackendCompletion completion;
        try {
            completion = backend.complete(prompt, params);
        } catch (BackendError& e) {
            e.input_tokens += acc_in;
            e.output_tokens += acc_out;
            throw;
        }
        acc_in += completion.prompt_tokens.value_or(local_prompt_tokens);
        acc_out += completion.completion_tokens.value_or(tokenizer.count(completion.text));
        try {
            return CondenseResult{parse_condenser_output(completion.text), acc_in, acc_out,
                                  attempt};
        } catch (const ParseError&) {
            // identical prompt, next attempt
        }
    }
    throw ParseFailedAfterRetries(max_attempts, acc_in, acc_out);
}

CondensedPair mock_condense(std::span<const HistoryEntry> window, double ratio,
                            const Tokenizer& tokenizer) {
    if (window.empty()) throw EmptyWindow();
    if (!(ratio > 0.0) || ratio > 1.0) throw Error("mock_condense ratio must lie in (0, 1]");

    auto side = [&](bool user_side) {
        std::string joined;
        for (const auto& entry : window) {
            const std::string& text = user_side ? user_text(entry) : assistant_text(entry);
            if (!joined.empty() && !text.empty()) joined += ' ';
            joined += text;
        }
        const int total = tokenizer.count(joined);
        std::string out = truncate_to_tokens(joined, ceil_ratio(ratio, total));
        return out.empty() ? std::string("-") : out;
    };

    CondensedPair pair;
    pair.human_input = side(true);
    pair.assistant_summary = side(false);
    pair.reasoning = "mock";
    return pair;
}

namespace {

// Pull the rendered window back out of a prompt: everything after the last
// "Conversation History:" label (the whole text when the label is absent),
// split at lines that start a Human/Assistant block.
std::vector<HistoryEntry> window_from_prompt(const std::string& prompt) {
    static const std::string label = "Conversation History: ";
    size_t start = prompt.rfind(label);
    std::string body = start == std::string::npos ? prompt : prompt.substr(start + label.size());

    std::vector<std::string> users;
    std::vector<std::string> assistants;
    std::string* current = nullptr;
    std::istringstream lines(body);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("Human: ", 0) == 0 || line == "Human:") {
            users.push_back(line.size() > 7 ? line.substr(7) : "");
            current = &users.back();
        } else if (line.rfind("Assistant: ", 0) == 0 || line == "Assistant:") {
            assistants.push_back(line.size() > 11 ? line.substr(11) : "");
            current = &assistants.back();
        } else if (current && !line.empty()) {
            *current += '\n';
            *current += line;
        }
    }
    if (users.empty() || users.size() != assistants.size())
        throw TransportError("mock backend could not reconstruct the window from the prompt");

    std::vector<HistoryEntry> window;
    window.reserve(users.size());
    for (size_t i = 0; i < users.size(); ++i)
        window.push_back(make_exchange_pair(users[i], assistants[i], static_cast<int>(i + 1)));
    return window;
}

}  // namespace

BackendCompletion MockCondenserBackend::complete(const std::string& prompt,
                                                 const CondenserParams&) {
    auto window = window_from_prompt(prompt);
    return BackendCompletion{serialize_condenser_output(mock_condense(window, ratio_)),
                             std::nullopt, std::nullopt};
}

BackendCompletion CannedCondenserBackend::complete(const std::string&, const CondenserParams&) {
    CondensedPair pair;
    pair.human_input = synthetic_tokens("cu", user_tokens_);
    pair.assistant_summary = synthetic_tokens("ca", assistant_tokens_);
    pair.reasoning = "mock";
    return BackendCompletion{serialize_condenser_output(pair), std::nullopt, std::nullopt};
}

BackendCompletion FailingCondenserBackend::complete(const std::string&, const CondenserParams&) {
    throw TransportError(message_);
}

BackendCompletion ScriptedCondenserBackend::complete(const std::string&, const CondenserParams&) {
    if (next_ >= static_cast<int>(outputs_.size()))
        throw TransportError("scripted condenser backend exhausted");
    return BackendCompletion{outputs_[static_cast<size_t>(next_++)], std::nullopt, std::nullopt};
}

}  // namespace mtosc::condenser
