#pragma once

#include <stdexcept>
#include <string>

namespace adaclust {

// Base of every error raised by the library. The CLI maps these onto exit
// codes and prints kind() in its machine-readable error line.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "Error"; }
};

#define ADACLUST_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(what) {}              \
    const char* kind() const noexcept override { return #Name; }         \
  }

ADACLUST_DEFINE_ERROR(DomainError);
ADACLUST_DEFINE_ERROR(NonFinite);
ADACLUST_DEFINE_ERROR(EmptyCluster);
ADACLUST_DEFINE_ERROR(DegenerateComponent);
ADACLUST_DEFINE_ERROR(InitError);
ADACLUST_DEFINE_ERROR(SingularBlock);
ADACLUST_DEFINE_ERROR(IoError);
ADACLUST_DEFINE_ERROR(ParseError);
ADACLUST_DEFINE_ERROR(LengthMismatch);
ADACLUST_DEFINE_ERROR(GeneratorTimeout);
ADACLUST_DEFINE_ERROR(ConfigError);

#undef ADACLUST_DEFINE_ERROR

}  // namespace adaclust
