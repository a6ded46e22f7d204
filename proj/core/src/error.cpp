// SPDX-License-Identifier: Apache-2.0
#include "rough/error.hpp"

namespace rough {

const char* error_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidParam: return "InvalidParam";
        case ErrorKind::MalformedCustom: return "MalformedCustom";
        case ErrorKind::NotIncoming: return "NotIncoming";
        case ErrorKind::BoundaryCase: return "BoundaryCase";
        case ErrorKind::DegenerateAngle: return "DegenerateAngle";
        case ErrorKind::TooManySingular: return "TooManySingular";
        case ErrorKind::Empty: return "Empty";
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::Capped: return "Capped";
    }
    return "Unknown";
}

}  // namespace rough
