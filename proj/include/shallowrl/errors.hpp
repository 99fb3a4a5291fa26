#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shallowrl {

/// A file or message failed to decode; offset is the byte position reached.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// The emulator peer misbehaved or could not be reached.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shallowrl
