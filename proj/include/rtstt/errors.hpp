#pragma once

#include <stdexcept>
#include <string>

namespace rtstt {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedAudioError : Error {
  using Error::Error;
};

// WAV header field outside the supported PCM16/mono/16kHz contract.
struct UnsupportedFormatError : Error {
  using Error::Error;
};

struct InvalidTimelineError : Error {
  using Error::Error;
};

struct InvalidCorpusError : Error {
  using Error::Error;
};

struct DegenerateFitError : Error {
  using Error::Error;
};

struct BackendUnavailableError : Error {
  using Error::Error;
};

struct ProtocolError : Error {
  using Error::Error;
};

struct ConnectionError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rtstt
