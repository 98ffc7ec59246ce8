#pragma once

#include <stdexcept>
#include <string>

namespace oscnorm {

// Raised for precondition violations and malformed inputs.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oscnorm
