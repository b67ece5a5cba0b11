#pragma once

#include <stdexcept>
#include <string>

namespace genseg {

enum class ErrorCode {
  invalid_input,
  io_failure,
  bad_format,
  no_path,
  out_of_vocabulary,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

[[noreturn]] inline void fail_invalid(const std::string& what) {
  throw Error(ErrorCode::invalid_input, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail_invalid(what);
}

}  // namespace genseg
