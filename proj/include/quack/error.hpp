#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace quack {

// Base class for every error raised by the library. Callers that only care
// about "something in quack failed" catch this; the subclasses carry detail.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration documents (map config, run config, run spec).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An engine-level rule violation: illegal action, dead agent, bad vote.
class RuleError : public Error {
 public:
  using Error::Error;
};

// Malformed event-log bytes. `line` is 1-based; 0 when not line-specific.
class LogParseError : public Error {
 public:
  LogParseError(std::size_t line, const std::string& what)
      : Error("log line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A well-formed log that is missing its GameOver terminator.
class IncompleteLogError : public Error {
 public:
  using Error::Error;
};

// Append-time ordering violation (sequence gap, tick regression).
class SequenceError : public Error {
 public:
  using Error::Error;
};

// An event that cannot be applied to the state reconstructed so far.
class ReplayError : public Error {
 public:
  ReplayError(std::uint64_t seq, const std::string& what)
      : Error("event seq " + std::to_string(seq) + ": " + what), seq_(seq) {}
  std::uint64_t seq() const noexcept { return seq_; }

 private:
  std::uint64_t seq_;
};

// Claim DSL / extraction reply problems. `position` is a byte offset into the
// utterance (or reply) when known.
class ClaimParseError : public Error {
 public:
  ClaimParseError(std::size_t position, const std::string& what)
      : Error("at offset " + std::to_string(position) + ": " + what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// A policy reply that does not parse into a usable decision.
class ResponseError : public Error {
 public:
  enum class Kind { Empty, UnknownAction, MultipleActions, IllegalAction, UnknownVote };
  ResponseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Remote model endpoint failures (transport, HTTP status, bad envelope).
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace quack
