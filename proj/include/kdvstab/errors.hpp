#pragma once

#include <stdexcept>
#include <string>

namespace kdvstab {

enum class ErrorKind {
    degenerate_roots,
    bracket_failure,
    zero_norm,
    grid_too_coarse,
    convergence_failure,
    not_positive_definite,
    singular_gramian,
    unstable_integration,
    degenerate_fit,
    degenerate_observability,
    empty_input,
    invalid_argument,
    io_failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

} // namespace kdvstab
