#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "teleop/core/messages.hpp"

namespace teleop::net {

/// One envelope as a single UTF-8 JSON line, newline included.
std::string encode_envelope(const Envelope& e);

/// Parses one line (trailing newline optional). Throws SchemaError on bad
/// JSON, missing fields, or an unregistered topic.
Envelope decode_envelope(std::string_view line);

/// Reassembles lines from arbitrary stream chunks.
class LineFramer {
 public:
  explicit LineFramer(std::size_t max_line = 16u << 20) : max_line_(max_line) {}

  void feed(std::string_view chunk);
  /// Next complete line without its newline, if any.
  std::optional<std::string> next();

 private:
  std::size_t max_line_;
  std::string buffer_;
  std::size_t start_ = 0;
};

}  // namespace teleop::net
