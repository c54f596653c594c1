#pragma once

#include <stdexcept>
#include <string>

namespace bcl {

/// Failure categories surfaced by the library.  The CLI maps these to
/// diagnostics and exit codes.
enum class Errc {
    invalid_input,
    not_hermitian,
    not_unitary,
    dimension_mismatch,
    tensor_form_violation,
    pairing_violation,
    index_mismatch,
    inconsistent_classification,
    budget_exceeded,
    parse_error,
};

inline const char* errc_name(Errc c)
{
    switch (c) {
    case Errc::invalid_input: return "InvalidInput";
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::not_unitary: return "NotUnitary";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::tensor_form_violation: return "TensorFormViolation";
    case Errc::pairing_violation: return "PairingViolation";
    case Errc::index_mismatch: return "IndexMismatch";
    case Errc::inconsistent_classification: return "InconsistentClassification";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::parse_error: return "ParseError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace bcl
