#pragma once

#include <stdexcept>
#include <string>

namespace selfdc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config validation
struct InvalidThresholds : Error { using Error::Error; };
struct InvalidField : Error { using Error::Error; };

// Backends
struct BackendUnavailable : Error { using Error::Error; };
struct ProbsUnsupported : Error { using Error::Error; };
struct UnrecognizedPrompt : Error { using Error::Error; };
struct CacheInvalid : Error { using Error::Error; };

// Retrieval
struct RetrieverUnavailable : Error { using Error::Error; };

// Confidence / controller
struct ParseFailure : Error { using Error::Error; };
struct NoTokenProbabilities : Error { using Error::Error; };
struct DecompositionParseFailure : Error { using Error::Error; };

// Datagen
struct EmptyEntityList : Error { using Error::Error; };
struct GenerationFormatError : Error { using Error::Error; };

// Eval
struct JudgeParseFailure : Error { using Error::Error; };

// Prompt registry
struct UnknownTemplate : Error { using Error::Error; };
struct UnfilledSlot : Error { using Error::Error; };

}  // namespace selfdc
