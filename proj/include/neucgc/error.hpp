#pragma once

#include <stdexcept>
#include <string>

namespace neucgc {

/// Error taxonomy shared by the C++ core and the C API status codes.
enum class ErrorCode : int {
    kIo = 1,            // missing files, unreadable paths
    kFormat = 2,        // malformed dataset contents
    kParam = 3,         // invalid configuration or argument value
    kShape = 4,         // dimension mismatch between operands
    kMissingLabels = 5, // operation requires ground-truth labels
    kDegenerate = 6,    // input is structurally degenerate (no edges, N < 2, ...)
    kNumeric = 7,       // non-finite values where finite ones are required
    kTraining = 8,      // training aborted (non-finite loss)
    kInternal = 9,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace neucgc
