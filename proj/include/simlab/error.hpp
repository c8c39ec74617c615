#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simlab {

enum class Errc {
  past_time,
  zero_bound,
  duplicate_name,
  duplicate_ip,
  unknown_node,
  unknown_segment,
  unknown_interface,
  unknown_ref,
  powered_off,
  detached,
  out_of_range,
  off_subnet,
  already_configured,
  not_point_to_point,
  bad_state,
  no_free_lci,
  link_down,
  bad_circuit_state,
  unknown_lci,
  duplicate_key,
  key_not_found,
  empty_heap,
  negative_weight,
  cycle_detected,
  syntax_error,
  bad_time_order,
  missing_field,
  bad_type,
  unknown_session,
  seq_too_old,
  io_error,
};

std::string_view to_string(Errc code);

// Every failure in the library surfaces as this type. `path` locates the
// offending element in a scenario document when there is one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string path = {})
      : std::runtime_error(message), code_(code), path_(std::move(path)) {}

  Errc code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  Errc code_;
  std::string path_;
};

}  // namespace simlab
