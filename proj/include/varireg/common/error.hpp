#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace varireg {

enum class Errc {
  parse,
  index_out_of_range,
  empty_mesh,
  degenerate_face,
  io,
  invalid_argument,
  size_mismatch,
  connectivity_mismatch,
  non_finite,
  unreachable_target,
  degenerate_configuration,
  non_stabilizing_quadrature,
};

std::string_view to_string(Errc code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace varireg
