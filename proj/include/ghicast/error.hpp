#pragma once

#include <stdexcept>
#include <string>

namespace ghicast {

/// Broad failure classes. The CLI maps these to exit codes and prints the
/// category name as the machine-parsable prefix of its error line.
enum class ErrorCategory {
    io,
    parse,
    empty_input,
    config,
    shape,
    decode,
    undefined_metric,
    empty_report,
    incompatible,
    checksum,
};

const char* category_name(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define GHICAST_DEFINE_ERROR(Name, Cat)                                  \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& message) : Error(Cat, message) {} \
    };

GHICAST_DEFINE_ERROR(IoError, ErrorCategory::io)
GHICAST_DEFINE_ERROR(ParseError, ErrorCategory::parse)
GHICAST_DEFINE_ERROR(EmptyInputError, ErrorCategory::empty_input)
GHICAST_DEFINE_ERROR(ConfigError, ErrorCategory::config)
GHICAST_DEFINE_ERROR(ShapeError, ErrorCategory::shape)
GHICAST_DEFINE_ERROR(DecodeError, ErrorCategory::decode)
GHICAST_DEFINE_ERROR(UndefinedMetricError, ErrorCategory::undefined_metric)
GHICAST_DEFINE_ERROR(EmptyReportError, ErrorCategory::empty_report)
GHICAST_DEFINE_ERROR(IncompatibleError, ErrorCategory::incompatible)
GHICAST_DEFINE_ERROR(ChecksumError, ErrorCategory::checksum)

#undef GHICAST_DEFINE_ERROR

} // namespace ghicast
