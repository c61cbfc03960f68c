#pragma once

#include <stdexcept>
#include <string>

namespace tcpnc {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or scenario; raised before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the coding primitives (sealed generation, oversize packet, ...).
class CodecError : public Error {
 public:
  using Error::Error;
};

/// A datagram that does not follow the wire format.
class FramingError : public Error {
 public:
  enum class Code { unsupported_version, malformed_datagram };

  FramingError(Code code, const std::string& what) : Error(what), code_(code) {}

  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

}  // namespace tcpnc
