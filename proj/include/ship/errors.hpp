#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace ship {

enum class ErrorCode {
    invalid_argument = 1,
    out_of_range,
    io,
    parse,
    not_ultrametric,
    structure,
    budget,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& w) : Error(ErrorCode::invalid_argument, w) {}
};
struct OutOfRange : Error {
    explicit OutOfRange(const std::string& w) : Error(ErrorCode::out_of_range, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorCode::io, w) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(ErrorCode::parse, w) {}
};
struct StructureError : Error {
    explicit StructureError(const std::string& w) : Error(ErrorCode::structure, w) {}
};
struct BudgetError : Error {
    explicit BudgetError(const std::string& w) : Error(ErrorCode::budget, w) {}
};

// Input dissimilarity is not a relaxed ultrametric. The witness names the
// offending indices; unused slots are -1.
struct NotUltrametric : Error {
    NotUltrametric(const std::string& w, std::array<long long, 3> witness)
        : Error(ErrorCode::not_ultrametric, w), witness(witness) {}
    std::array<long long, 3> witness;
};

}  // namespace ship
