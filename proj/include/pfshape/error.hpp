#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pfshape {

enum class ErrorCode {
    InvalidArgument,
    InvalidOrder,
    InvalidScale,
    InvalidInput,
    Infeasible,
    Convergence,
    BlockTooLarge,
    SearchSpaceTooLarge,
    NotFullCode,
    InvalidSymbol,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Thrown by the capacity solver when the iteration caps are hit. Carries the
// best iterate seen so that callers can inspect or reuse it.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> best_pmf, double residual)
        : Error(ErrorCode::Convergence, what), best_pmf_(std::move(best_pmf)), residual_(residual) {}

    const std::vector<double>& best_pmf() const noexcept { return best_pmf_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> best_pmf_;
    double residual_;
};

} // namespace pfshape
