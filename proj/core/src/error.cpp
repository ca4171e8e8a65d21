#include "onset/error.hpp"

namespace onset {

UnknownIriError::UnknownIriError(std::string iri)
    : Error("unknown iri: " + iri), iri_(std::move(iri)) {}

NonConformanceError::NonConformanceError(const std::string& what, std::string completion)
    : BackendError(what), completion_(std::move(completion)) {}

}  // namespace onset
