#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tabsynth {

enum class Errc {
  MalformedMarkup,
  InconsistentSpans,
  EmptyTable,
  NoOuterBoundary,
  NonRectangularSpan,
  OrphanText,
  InsufficientEvidence,
  UnknownCategory,
  UnresolvableAttribute,
  CanvasOverflow,
  BoxOutOfBounds,
  ParseFailure,
  InsufficientPool,
  ConfigError,
  IoError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tabsynth
