#include "tabsynth/error.hpp"

namespace tabsynth {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MalformedMarkup: return "MalformedMarkup";
    case Errc::InconsistentSpans: return "InconsistentSpans";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::NoOuterBoundary: return "NoOuterBoundary";
    case Errc::NonRectangularSpan: return "NonRectangularSpan";
    case Errc::OrphanText: return "OrphanText";
    case Errc::InsufficientEvidence: return "InsufficientEvidence";
    case Errc::UnknownCategory: return "UnknownCategory";
    case Errc::UnresolvableAttribute: return "UnresolvableAttribute";
    case Errc::CanvasOverflow: return "CanvasOverflow";
    case Errc::BoxOutOfBounds: return "BoxOutOfBounds";
    case Errc::ParseFailure: return "ParseFailure";
    case Errc::InsufficientPool: return "InsufficientPool";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tabsynth
