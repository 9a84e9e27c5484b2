#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capax {

enum class ErrorKind {
    InvalidArgument,
    InadmissibleParams,
    NoBracket,
    NotMonotone,
    TargetUnreachable,
    SchemeFailure,
    MonotonicityViolation,
    NewtonDiverged,
    BoundaryOutflow,
    StepOutOfDomain,
};

std::string_view to_string(ErrorKind kind);

/// Domain or solver failure. The kind is the contract; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace capax
