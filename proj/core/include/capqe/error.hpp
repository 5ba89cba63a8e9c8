#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace capqe {

// Base of every error the library raises on purpose. Anything else escaping a
// call (std::bad_alloc, a test's simulated crash) is not a domain failure.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* code() const noexcept = 0;
};

#define CAPQE_DECLARE_ERROR(Name, Code)                              \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(what) {}          \
    const char* code() const noexcept override { return Code; }      \
  };

CAPQE_DECLARE_ERROR(ArgumentError, "argument")
CAPQE_DECLARE_ERROR(ConfigError, "config")
CAPQE_DECLARE_ERROR(IntegrityError, "integrity")
CAPQE_DECLARE_ERROR(AlignmentError, "alignment")
CAPQE_DECLARE_ERROR(ProviderError, "provider")
CAPQE_DECLARE_ERROR(TransientError, "transient")
CAPQE_DECLARE_ERROR(NotFoundError, "not_found")
CAPQE_DECLARE_ERROR(ConflictError, "conflict")
CAPQE_DECLARE_ERROR(InvalidStateError, "invalid_state")
CAPQE_DECLARE_ERROR(ValidationError, "validation")

#undef CAPQE_DECLARE_ERROR

// Malformed input, with the 1-based line (record) number it was found on.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message);
  const char* code() const noexcept override { return "parse"; }
  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace capqe
