#ifndef ADB_CORE_ERRORS_HPP
#define ADB_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace adb {

enum class ErrorCode {
  kArgument,          // precondition or argument violation
  kParse,             // malformed input file content
  kDimension,         // vector dimension mismatch
  kEmptyDataset,      // file or dataset with no records
  kInsufficientData,  // a class has too few records for the requested operation
  kModelFormat,       // model file fails schema or invariant checks
  kIo,                // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_argument(const std::string& msg) {
  throw Error(ErrorCode::kArgument, msg);
}

[[noreturn]] inline void throw_parse(const std::string& msg) {
  throw Error(ErrorCode::kParse, msg);
}

[[noreturn]] inline void throw_dimension(const std::string& msg) {
  throw Error(ErrorCode::kDimension, msg);
}

[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorCode::kIo, msg);
}

}  // namespace adb

#endif  // ADB_CORE_ERRORS_HPP
