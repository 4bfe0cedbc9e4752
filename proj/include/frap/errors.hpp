#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace frap {

enum class ErrorCode {
  MalformedRecord,
  UnknownVertexKind,
  NonMonotonicSeq,
  IoFailure,
  ObserveAfterDeclaration,
  InsufficientEdges,
  EpsilonMassOverflow,
  SupportMismatch,
  InvalidK,
  AllSingletons,
  VersionMismatch,
  InvalidScenario,
  MissingConfirmation,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Warnings go to stderr unless a sink is installed (tests capture them).
using WarningSink = std::function<void(std::string_view)>;
// Returns the sink it replaces.
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace frap
