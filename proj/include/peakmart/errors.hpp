#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace peakmart {

/// A caller broke an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An observation arrived with an index other than the detector's next step.
class StreamOrderError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed input text. Carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string reason);

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

/// Input does not match the supplied SNAP layout descriptor.
class LayoutMismatchError : public ParseError {
public:
    using ParseError::ParseError;
};

} // namespace peakmart
