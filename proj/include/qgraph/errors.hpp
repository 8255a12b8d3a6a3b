#pragma once

#include <stdexcept>
#include <string>

namespace qgraph {

enum class ErrorCode {
    InvalidGraph,
    ParseError,
    ImproperPartition,
    DirichletGlue,
    Disconnects,
    BracketFailure,
    DegenerateEigenvalue,
    IdenticallyZeroEdge,
    ImproperEigenfunction,
    OutsideDomain,
    NotEquipartition,
    SectionOnZero,
    LeftNeighborhood,
    NoConvergence,
    LeftDomain,
    UnsupportedBeta,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ImproperPartition: return "ImproperPartition";
    case ErrorCode::DirichletGlue: return "DirichletGlue";
    case ErrorCode::Disconnects: return "Disconnects";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::DegenerateEigenvalue: return "DegenerateEigenvalue";
    case ErrorCode::IdenticallyZeroEdge: return "IdenticallyZeroEdge";
    case ErrorCode::ImproperEigenfunction: return "ImproperEigenfunction";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::NotEquipartition: return "NotEquipartition";
    case ErrorCode::SectionOnZero: return "SectionOnZero";
    case ErrorCode::LeftNeighborhood: return "LeftNeighborhood";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LeftDomain: return "LeftDomain";
    case ErrorCode::UnsupportedBeta: return "UnsupportedBeta";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code; every library failure goes through it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace qgraph
