#include "frap/errors.hpp"

#include <iostream>
#include <mutex>

namespace frap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnknownVertexKind: return "UnknownVertexKind";
    case ErrorCode::NonMonotonicSeq: return "NonMonotonicSeq";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ObserveAfterDeclaration: return "ObserveAfterDeclaration";
    case ErrorCode::InsufficientEdges: return "InsufficientEdges";
    case ErrorCode::EpsilonMassOverflow: return "EpsilonMassOverflow";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::AllSingletons: return "AllSingletons";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::MissingConfirmation: return "MissingConfirmation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {
std::mutex g_sink_mutex;
WarningSink g_sink;
}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mutex);
  std::swap(g_sink, sink);
  return sink;
}

void warn(std::string_view message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace frap
