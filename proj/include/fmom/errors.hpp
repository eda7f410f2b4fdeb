#pragma once

#include <stdexcept>
#include <string>

namespace fmom {

/// Base of every error raised by the library. Carries a process exit code
/// so the command-line layer can map failures without a type switch.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, int exit_code = 2)
        : std::runtime_error(what), exit_code_(exit_code) {}

    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

// Input data problems.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what, 3) {}
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

// Refusal to build a strategy whose weights would see the return they trade.
class LookaheadError : public Error {
public:
    using Error::Error;
};

class UndefinedStatsError : public Error {
public:
    using Error::Error;
};

class RankDeficientError : public Error {
public:
    using Error::Error;
};

class NonStationaryError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fmom
