#include "capqe/error.hpp"

namespace capqe {

ParseError::ParseError(std::string source, std::size_t line, const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message),
      source_(std::move(source)),
      line_(line) {}

}  // namespace capqe
