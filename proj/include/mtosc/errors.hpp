#pragma once

#include <stdexcept>
#include <string>

namespace mtosc {

// Base class for every error raised by this library. Callers that do not
// care about the precise failure can catch this one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- session state machine ---

struct AlreadyOpenTurn : Error {
    AlreadyOpenTurn() : Error("a user turn is already open") {}
};

struct NoOpenTurn : Error {
    NoOpenTurn() : Error("no user turn is open") {}
};

// Integration was requested but the pending job is absent, not Ready yet,
// or the integration boundary has not been reached.
struct NotReady : Error {
    using Error::Error;
};

// The session entries no longer start with the job's window. This signals
// a logic error in the embedder; the session is left unchanged.
struct StaleJob : Error {
    StaleJob() : Error("pending job window is not a prefix of session entries") {}
};

// --- decider ---

struct WindowTooSmall : Error {
    WindowTooSmall() : Error("overlap requires a window of at least 2 entries") {}
};

// --- condenser ---

struct EmptyWindow : Error {
    EmptyWindow() : Error("condensation window is empty") {}
};

struct ParseError : Error {
    using Error::Error;
};

struct NoJsonFound : ParseError {
    NoJsonFound() : ParseError("no syntactically complete JSON object in model output") {}
};

struct MissingKey : ParseError {
    explicit MissingKey(const std::string& k)
        : ParseError("model output JSON is missing key \"" + k + "\""), key(k) {}
    std::string key;
};

struct EmptyField : ParseError {
    explicit EmptyField(const std::string& f)
        : ParseError("model output JSON field \"" + f + "\" is empty"), field(f) {}
    std::string field;
};

// Raised by condense() once the retry budget is spent. Token counts cover
// every attempt so the embedder can still charge the background cost.
struct ParseFailedAfterRetries : Error {
    ParseFailedAfterRetries(int attempts_, int in_tokens, int out_tokens)
        : Error("condenser output failed to parse after " + std::to_string(attempts_) + " attempts"),
          attempts(attempts_), input_tokens(in_tokens), output_tokens(out_tokens) {}
    int attempts = 0;
    int input_tokens = 0;
    int output_tokens = 0;
};

// --- model client ---

// Any backend/transport failure. Token counts are the usage accumulated
// before the failure (zero when nothing was consumed).
struct BackendError : Error {
    using Error::Error;
    int input_tokens = 0;
    int output_tokens = 0;
};

struct AuthError : BackendError {
    using BackendError::BackendError;
};

struct RateLimited : BackendError {
    using BackendError::BackendError;
};

struct TransportError : BackendError {
    using BackendError::BackendError;
};

struct MalformedResponse : BackendError {
    using BackendError::BackendError;
};

// --- perturbations ---

struct TooShort : Error {
    using Error::Error;
};

struct BlankTurn : Error {
    BlankTurn() : Error("cannot build a diversion prompt for a blank turn") {}
};

struct GeneratorError : Error {
    using Error::Error;
};

// --- harness ---

struct IoError : Error {
    using Error::Error;
};

struct SchemaError : Error {
    SchemaError(int line_, const std::string& what_)
        : Error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
    int line = 0;
};

struct MismatchedTranscripts : Error {
    using Error::Error;
};

}  // namespace mtosc
