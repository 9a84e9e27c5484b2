#include "capax/errors.hpp"

namespace capax {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InadmissibleParams: return "InadmissibleParams";
        case ErrorKind::NoBracket: return "NoBracket";
        case ErrorKind::NotMonotone: return "NotMonotone";
        case ErrorKind::TargetUnreachable: return "TargetUnreachable";
        case ErrorKind::SchemeFailure: return "SchemeFailure";
        case ErrorKind::MonotonicityViolation: return "MonotonicityViolation";
        case ErrorKind::NewtonDiverged: return "NewtonDiverged";
        case ErrorKind::BoundaryOutflow: return "BoundaryOutflow";
        case ErrorKind::StepOutOfDomain: return "StepOutOfDomain";
    }
    return "Unknown";
}

}  // namespace capax
