#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rssvar {

enum class ErrorKind {
    degenerate_geometry,
    singular_position,
    quadrature_failure,
    divergent_tail,
    region_too_small,
    schema_mismatch,
    unknown_node_id,
    no_overlap,
    no_scatterers,
    io_error,
    invalid_argument,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. Every failure mode the API documents maps to one
/// ErrorKind so callers (the CLI in particular) can branch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string const& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::degenerate_geometry: return "DegenerateGeometry";
    case ErrorKind::singular_position: return "SingularPosition";
    case ErrorKind::quadrature_failure: return "QuadratureFailure";
    case ErrorKind::divergent_tail: return "DivergentTail";
    case ErrorKind::region_too_small: return "RegionTooSmall";
    case ErrorKind::schema_mismatch: return "SchemaMismatch";
    case ErrorKind::unknown_node_id: return "UnknownNodeId";
    case ErrorKind::no_overlap: return "NoOverlap";
    case ErrorKind::no_scatterers: return "NoScatterers";
    case ErrorKind::io_error: return "IoError";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace rssvar
