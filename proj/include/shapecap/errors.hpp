#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapecap {

// Base class for all library errors. Subclasses exist so callers can
// distinguish failure modes without string matching.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingExhausted : Error {
  using Error::Error;
};

struct InvalidDimensions : Error {
  using Error::Error;
};

struct UnsupportedAst : Error {
  using Error::Error;
};

struct UnsupportedQuantity : Error {
  using Error::Error;
};

struct WorldTooLarge : Error {
  using Error::Error;
};

// Carries the index of the token that could not be consumed.
struct ParseFailure : Error {
  std::size_t token_index;
  ParseFailure(const std::string& msg, std::size_t index)
      : Error(msg), token_index(index) {}
};

struct NoValidCaption : Error {
  using Error::Error;
};

struct NoValidCorruption : Error {
  using Error::Error;
};

struct GenerationStalled : Error {
  using Error::Error;
};

struct MalformedRecord : Error {
  using Error::Error;
};

struct TooFewRecords : Error {
  using Error::Error;
};

struct MissingPrediction : Error {
  using Error::Error;
};

struct DuplicatePrediction : Error {
  using Error::Error;
};

struct UnknownId : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace shapecap
