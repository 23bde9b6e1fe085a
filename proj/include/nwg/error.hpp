// error.hpp -- exception types shared across the library
#pragma once

#include <stdexcept>
#include <string>

namespace nwg {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed textual input (words, automata, transducers, games).
struct ParseError : Error {
    using Error::Error;
};

/// A value violates its type's invariants (diagnosed by the validate functions).
struct ValidationError : Error {
    using Error::Error;
};

/// Precondition violation, e.g. a non-well-nested word passed to an
/// operation that requires NW(Sigma) input.
struct PreconditionError : Error {
    using Error::Error;
};

/// An operation that only applies to non-deleting transducers was handed a
/// deleting one. Games can route around this via make_non_deleting.
struct DeletingTransducerError : Error {
    using Error::Error;
};

/// A construction exceeded its configured resource budget (e.g. the state
/// budget of determinize). Surfaced as an error instead of an OOM.
struct BudgetError : Error {
    using Error::Error;
};

} // namespace nwg
