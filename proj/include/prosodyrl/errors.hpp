#pragma once

#include <stdexcept>
#include <string>

namespace prosody {

// Single exception type for the library. `kind` identifies the failure class
// so callers and tests can match without parsing messages.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    MalformedWav,
    UnsupportedFormat,
    IoError,
    EmptySignal,
    InvalidSpec,
    BadLength,
    OutOfRange,
    SignalTooShort,
    BadRatio,
    OverlappingSpans,
    SpanOutOfBounds,
    Unvoiced,
    ShapeMismatch,
    NonFinite,
    NotScalar,
    TooLong,
    LengthMismatch,
    EmptyCorpus,
    NoSegments,
    BadArgument,
  };

  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

[[noreturn]] inline void fail(Error::Kind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// The char* overload keeps hot paths free of std::string construction.
inline void require(bool cond, Error::Kind kind, const char* msg) {
  if (!cond) fail(kind, std::string(msg));
}

inline void require(bool cond, Error::Kind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace prosody
