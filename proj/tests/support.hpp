#pragma once

#include <optional>

#include "gcsf/error.hpp"

namespace gcsf::testing {

template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

}  // namespace gcsf::testing
