#pragma once

#include <stdexcept>
#include <string>

namespace mandikin {

// Exit-code classes used by the CLI: 2 for I/O and format problems,
// 3 for numerical or degenerate-input problems.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid arguments detected by the library (maps to exit code 1 in the CLI).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace mandikin
