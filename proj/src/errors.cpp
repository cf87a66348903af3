#include "proxyclust/errors.hpp"

namespace proxyclust {

FormatError::FormatError(const std::string& message, std::size_t byte_offset)
    : ConfigError(message + " (at byte " + std::to_string(byte_offset) + ")"),
      offset_(byte_offset) {}

}  // namespace proxyclust
