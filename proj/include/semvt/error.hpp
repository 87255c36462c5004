#pragma once

#include <stdexcept>
#include <string>

namespace semvt {

enum class ErrorCode {
    invalid_argument = 1,  // bad parameter or malformed input
    config = 2,            // configuration file / validation failure
    infeasible = 3,        // plan threshold unreachable
    io = 4,                // file read/write failure
    overflow = 5,          // integer overflow detected
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

} // namespace semvt
