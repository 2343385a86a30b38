#pragma once

#include <stdexcept>
#include <string>

namespace normpred {

// Raised for anything wrong with user-supplied data or resources
// (unreadable files, malformed formats, contract violations between
// resources). The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
  public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace normpred
