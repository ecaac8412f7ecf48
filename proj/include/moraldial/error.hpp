#pragma once

#include <stdexcept>
#include <string>

namespace moraldial {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (schema column-maps, config keys, flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied value violates an operation's precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A remote service could not be reached after the configured retries.
class ServiceUnavailable : public Error {
 public:
  ServiceUnavailable(std::string service, const std::string& detail)
      : Error(service + " unavailable: " + detail), service_(std::move(service)) {}

  const std::string& service() const noexcept { return service_; }

 private:
  std::string service_;
};

/// A remote service answered with something that does not follow the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class EmptyReportError : public Error {
 public:
  using Error::Error;
};

}  // namespace moraldial
