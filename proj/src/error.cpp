#include "pfshape/error.hpp"

namespace pfshape {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidOrder: return "invalid-order";
    case ErrorCode::InvalidScale: return "invalid-scale";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::BlockTooLarge: return "block-too-large";
    case ErrorCode::SearchSpaceTooLarge: return "search-space-too-large";
    case ErrorCode::NotFullCode: return "not-full-code";
    case ErrorCode::InvalidSymbol: return "invalid-symbol";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

} // namespace pfshape
