#pragma once

#include <stdexcept>
#include <string>

namespace salab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SALAB_DEFINE_ERROR(Name) \
  class Name : public Error {    \
   public:                       \
    using Error::Error;          \
  }

SALAB_DEFINE_ERROR(InvalidArgument);
SALAB_DEFINE_ERROR(NonFiniteIterate);
SALAB_DEFINE_ERROR(UnsupportedNorm);
SALAB_DEFINE_ERROR(SingularJacobian);
SALAB_DEFINE_ERROR(SingularSystem);
SALAB_DEFINE_ERROR(OddDimension);
SALAB_DEFINE_ERROR(ReducibleChain);
SALAB_DEFINE_ERROR(GreedyNotUnique);
SALAB_DEFINE_ERROR(NotContractive);
SALAB_DEFINE_ERROR(UnsupportedBehavior);
SALAB_DEFINE_ERROR(NotHurwitz);
SALAB_DEFINE_ERROR(MalformedMdp);

#undef SALAB_DEFINE_ERROR

// Spec-file validation failure, addressed by 1-based line number (0 = whole file).
class SpecError : public Error {
 public:
  SpecError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace salab
