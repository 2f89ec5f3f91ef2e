#include "biasbench/error.hpp"

#include <fmt/format.h>

namespace biasbench {

namespace {
std::string format_parse_error(const std::string& message, const std::string& field,
                               std::size_t position) {
  if (field.empty()) return fmt::format("syntax error at offset {}: {}", position, message);
  return fmt::format("syntax error in '{}' at offset {}: {}", field, position, message);
}
}  // namespace

ParseError::ParseError(std::string message, std::string field, std::size_t position)
    : Error(format_parse_error(message, field, position)),
      message_(std::move(message)),
      field_(std::move(field)),
      position_(position) {}

}  // namespace biasbench
