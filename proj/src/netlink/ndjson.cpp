#include "teleop/netlink/ndjson.hpp"

#include "teleop/core/errors.hpp"

namespace teleop::net {

std::string encode_envelope(const Envelope& e) {
  std::string line = json(e).dump();
  line.push_back('\n');
  return line;
}

Envelope decode_envelope(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  try {
    const json j = json::parse(line);
    Envelope e = j.get<Envelope>();
    if (!topics::is_registered(e.topic)) throw SchemaError("envelope: unregistered topic " + e.topic);
    return e;
  } catch (const json::exception& ex) {
    throw SchemaError(std::string("envelope: ") + ex.what());
  }
}

void LineFramer::feed(std::string_view chunk) {
  if (start_ > 0 && start_ == buffer_.size()) {
    buffer_.clear();
    start_ = 0;
  }
  buffer_.append(chunk);
  if (buffer_.size() - start_ > max_line_ && buffer_.find('\n', start_) == std::string::npos) {
    throw SchemaError("envelope: line exceeds " + std::to_string(max_line_) + " bytes");
  }
}

std::optional<std::string> LineFramer::next() {
  const auto nl = buffer_.find('\n', start_);
  if (nl == std::string::npos) {
    if (start_ > 0) {
      buffer_.erase(0, start_);
      start_ = 0;
    }
    return std::nullopt;
  }
  std::string line = buffer_.substr(start_, nl - start_);
  start_ = nl + 1;
  return line;
}

}  // namespace teleop::net
