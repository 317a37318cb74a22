#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace pcbnet {

// Base for all library failures. `code` is a stable machine-readable tag
// ("shape", "numeric", ...) surfaced in the CLI error records.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& message) : Error("numeric", message) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& message) : Error("parse", message) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

struct IoError : Error {
  explicit IoError(const std::string& message) : Error("io", message) {}
};

// File-format violation at a known byte position.
class FormatError : public Error {
public:
  explicit FormatError(const std::string& message,
                       std::optional<std::uint64_t> byte_offset = std::nullopt)
      : Error("format", byte_offset ? message + " (byte " + std::to_string(*byte_offset) + ")"
                                    : message),
        byte_offset_(byte_offset) {}

  std::optional<std::uint64_t> byte_offset() const noexcept { return byte_offset_; }

private:
  std::optional<std::uint64_t> byte_offset_;
};

// Raised when a frame segment is shorter than the requested sampling depth
// and loop padding is disabled.
class SegmentTooShortError : public Error {
public:
  SegmentTooShortError(std::size_t length, std::size_t depth)
      : Error("segment_too_short", "segment holds " + std::to_string(length) +
                                       " frames, sampling depth needs " + std::to_string(depth)),
        length_(length),
        depth_(depth) {}

  std::size_t length() const noexcept { return length_; }
  std::size_t depth() const noexcept { return depth_; }

private:
  std::size_t length_;
  std::size_t depth_;
};

class InsufficientSamplesError : public Error {
public:
  InsufficientSamplesError(const std::string& pool, std::size_t required, std::size_t available)
      : Error("insufficient_samples", pool + ": need " + std::to_string(required) +
                                          " samples, pool provides " + std::to_string(available)),
        required_(required),
        available_(available) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t available() const noexcept { return available_; }

private:
  std::size_t required_;
  std::size_t available_;
};

}  // namespace pcbnet
