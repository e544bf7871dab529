#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtosc::harness {

enum class Scoring { None, ExactMatch };

std::string_view to_string(Scoring scoring);

// One replayable conversation: the user side of every turn, optionally with
// a reference answer the final assistant reply is scored against.
struct Transcript {
    std::string id;
    std::vector<std::string> user_turns;
    std::optional<std::string> reference_answer;
    Scoring scoring = Scoring::None;
    std::vector<std::string> tags;

    bool operator==(const Transcript&) const = default;
};

// JSONL, one object per line:
//   {"id": "...", "user_turns": ["...", ...],
//    "scoring": "none"|"exact_match", "reference_answer": "...",
//    "tags": ["...", ...]}
// id and a non-empty user_turns array are required; ids must be unique
// within a file; scoring defaults to "none" and exact_match requires a
// non-empty reference_answer; tags defaults to []; unknown keys are
// ignored. Blank lines are skipped. A malformed line raises
// SchemaError(line); with lenient=true it is skipped with a warning on
// stderr instead. An empty file warns and yields an empty list.
std::vector<Transcript> load_transcripts(const std::string& path, bool lenient = false);

void save_transcripts(std::span<const Transcript> transcripts, const std::string& path);

}  // namespace mtosc::harness
