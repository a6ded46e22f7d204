// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace rough {

enum class ErrorKind {
    InvalidParam,
    MalformedCustom,
    NotIncoming,
    BoundaryCase,
    DegenerateAngle,
    TooManySingular,
    Empty,
    Singular,
    Capped,
};

const char* error_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace rough
