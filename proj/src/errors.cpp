#include "kdvstab/errors.hpp"

namespace kdvstab {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::degenerate_roots: return "DegenerateRoots";
    case ErrorKind::bracket_failure: return "BracketFailure";
    case ErrorKind::zero_norm: return "ZeroNorm";
    case ErrorKind::grid_too_coarse: return "GridTooCoarse";
    case ErrorKind::convergence_failure: return "ConvergenceFailure";
    case ErrorKind::not_positive_definite: return "NotPositiveDefinite";
    case ErrorKind::singular_gramian: return "SingularGramian";
    case ErrorKind::unstable_integration: return "UnstableIntegration";
    case ErrorKind::degenerate_fit: return "DegenerateFit";
    case ErrorKind::degenerate_observability: return "DegenerateObservability";
    case ErrorKind::empty_input: return "EmptyInput";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::io_failure: return "IoFailure";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
{
}

void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

} // namespace kdvstab
