#pragma once

#include <stdexcept>
#include <string>

namespace annealnqs {

enum class Errc {
    invalid_argument,
    dimension_too_small,
    negative_field,
    length_mismatch,
    index_out_of_range,
    non_finite,
    too_large,
    capacity_exceeded,
    solver_failure,
    not_converged,
};

const char* to_string(Errc code);

/// Error raised by every library operation on contract violations.
class Error : public std::runtime_error {
   public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

   private:
    Errc code_;
};

}  // namespace annealnqs
