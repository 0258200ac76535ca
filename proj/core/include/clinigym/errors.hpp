#pragma once

#include <stdexcept>
#include <string>

namespace clinigym {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed boolean query expression.
struct QuerySyntaxError : Error {
    using Error::Error;
};

/// Duplicate doc_id or unreadable corpus during ingestion.
struct IngestError : Error {
    using Error::Error;
};

struct NotFoundError : Error {
    using Error::Error;
};

struct DomainNotRegisteredError : Error {
    using Error::Error;
};

/// step() after the episode reached a terminal state.
struct EpisodeFinishedError : Error {
    using Error::Error;
};

/// A caller violated a documented precondition (shape mismatch, value out
/// of range). Distinct from soft errors, which never throw.
struct ContractError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

/// A task file yielded zero valid tasks.
struct EmptySuiteError : Error {
    using Error::Error;
};

struct ConversionError : Error {
    using Error::Error;
};

struct ProtocolError : Error {
    using Error::Error;
};

}  // namespace clinigym
