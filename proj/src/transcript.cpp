#include "mtosc/transcript.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "mtosc/errors.hpp"

namespace mtosc::harness {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Scoring scoring) {
    return scoring == Scoring::ExactMatch ? "exact_match" : "none";
}

namespace {

Transcript transcript_from_json(const json& doc) {
    if (!doc.is_object()) throw Error("transcript line must be a JSON object");
    Transcript t;

    if (!doc.contains("id") || !doc["id"].is_string() || doc["id"].get<std::string>().empty())
        throw Error("\"id\" must be a non-empty string");
    t.id = doc["id"].get<std::string>();

    if (!doc.contains("user_turns") || !doc["user_turns"].is_array() ||
        doc["user_turns"].empty())
        throw Error("\"user_turns\" must be a non-empty array");
    for (const auto& turn : doc["user_turns"]) {
        if (!turn.is_string()) throw Error("\"user_turns\" entries must be strings");
        t.user_turns.push_back(turn.get<std::string>());
    }

    if (doc.contains("scoring")) {
        if (!doc["scoring"].is_string()) throw Error("\"scoring\" must be a string");
        const auto s = doc["scoring"].get<std::string>();
        if (s == "exact_match")
            t.scoring = Scoring::ExactMatch;
        else if (s != "none")
            throw Error("\"scoring\" must be \"none\" or \"exact_match\"");
    }

    if (doc.contains("reference_answer")) {
        if (!doc["reference_answer"].is_string())
            throw Error("\"reference_answer\" must be a string");
        t.reference_answer = doc["reference_answer"].get<std::string>();
    }
    if (t.scoring == Scoring::ExactMatch &&
        (!t.reference_answer || t.reference_answer->empty()))
        throw Error("exact_match scoring requires a non-empty \"reference_answer\"");

    if (doc.contains("tags")) {
        if (!doc["tags"].is_array()) throw Error("\"tags\" must be an array");
        for (const auto& tag : doc["tags"]) {
            if (!tag.is_string()) throw Error("\"tags\" entries must be strings");
            t.tags.push_back(tag.get<std::string>());
        }
    }
    return t;
}

}  // namespace

std::vector<Transcript> load_transcripts(const std::string& path, bool lenient) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transcript file: " + path);

    std::vector<Transcript> transcripts;
    std::set<std::string> seen_ids;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json doc = json::parse(line, nullptr, false);
            if (doc.is_discarded()) throw Error("not valid JSON");
            Transcript t = transcript_from_json(doc);
            if (!seen_ids.insert(t.id).second) throw Error("duplicate id \"" + t.id + "\"");
            transcripts.push_back(std::move(t));
        } catch (const Error& e) {
            if (!lenient) throw SchemaError(line_number, e.what());
            std::cerr << "warning: " << path << " line " << line_number << " skipped: " << e.what()
                      << "\n";
        }
    }
    if (transcripts.empty())
        std::cerr << "warning: " << path << " contains no transcripts\n";
    return transcripts;
}

void save_transcripts(std::span<const Transcript> transcripts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write transcript file: " + path);
    for (const auto& t : transcripts) {
        ordered_json doc;
        doc["id"] = t.id;
        doc["user_turns"] = t.user_turns;
        doc["scoring"] = std::string(to_string(t.scoring));
        if (t.reference_answer) doc["reference_answer"] = *t.reference_answer;
        doc["tags"] = t.tags;
        out << doc.dump() << "\n";
    }
    if (!out) throw IoError("failed while writing transcript file: " + path);
}

}  // namespace mtosc::harness
