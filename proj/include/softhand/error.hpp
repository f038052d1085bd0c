#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace softhand {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Caller passed a value outside an operation's domain.
class InputError : public Error {
  public:
    using Error::Error;
};

// Bellow with zero midsection expansion: the bend radius is unbounded.
class NoExpansionError : public InputError {
  public:
    NoExpansionError() : InputError("no expansion: delta_d is zero, bend radius is infinite") {}
};

class UnreachableTargetError : public InputError {
  public:
    UnreachableTargetError()
        : InputError("unreachable target: per-chamber bend angle is zero") {}
};

class DegenerateFitError : public InputError {
  public:
    DegenerateFitError() : InputError("degenerate fit: need at least two samples with some pressure > 0") {}
};

// Socket-level failure (connect refused, peer closed, timeout).
class TransportError : public Error {
  public:
    using Error::Error;
};

// Peer answered with a well-formed error (Modbus exception, `ERR ...` line).
class ProtocolError : public Error {
  public:
    ProtocolError(const std::string& what, std::uint8_t code = 0) : Error(what), code_(code) {}
    std::uint8_t code() const noexcept { return code_; }

  private:
    std::uint8_t code_;
};

class ParseError : public Error {
  public:
    ParseError(std::size_t line, std::string field, const std::string& message)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + message),
          line_(line),
          field_(std::move(field)) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

  private:
    std::size_t line_;
    std::string field_;
};

class ConfigError : public Error {
  public:
    ConfigError(std::string key, const std::string& message)
        : Error("config key '" + key + "': " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

}  // namespace softhand
