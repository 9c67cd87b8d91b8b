#pragma once

#include <stdexcept>
#include <string>

namespace chatter {

// Every failure raised by the library derives from Error so the CLI can map
// it to a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CHATTER_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

CHATTER_DEFINE_ERROR(DomainError)
CHATTER_DEFINE_ERROR(SimulationDiverged)
CHATTER_DEFINE_ERROR(InsufficientSamples)
CHATTER_DEFINE_ERROR(ZeroVariance)
CHATTER_DEFINE_ERROR(CapacityExceeded)
CHATTER_DEFINE_ERROR(InvalidDiagram)
CHATTER_DEFINE_ERROR(SingleClass)
CHATTER_DEFINE_ERROR(IoError)
CHATTER_DEFINE_ERROR(ConfigError)

#undef CHATTER_DEFINE_ERROR

}  // namespace chatter
