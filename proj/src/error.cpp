#include "simlab/error.hpp"

namespace simlab {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::past_time: return "past_time";
    case Errc::zero_bound: return "zero_bound";
    case Errc::duplicate_name: return "duplicate_name";
    case Errc::duplicate_ip: return "duplicate_ip";
    case Errc::unknown_node: return "unknown_node";
    case Errc::unknown_segment: return "unknown_segment";
    case Errc::unknown_interface: return "unknown_interface";
    case Errc::unknown_ref: return "unknown_ref";
    case Errc::powered_off: return "powered_off";
    case Errc::detached: return "detached";
    case Errc::out_of_range: return "out_of_range";
    case Errc::off_subnet: return "off_subnet";
    case Errc::already_configured: return "already_configured";
    case Errc::not_point_to_point: return "not_point_to_point";
    case Errc::bad_state: return "bad_state";
    case Errc::no_free_lci: return "no_free_lci";
    case Errc::link_down: return "link_down";
    case Errc::bad_circuit_state: return "bad_circuit_state";
    case Errc::unknown_lci: return "unknown_lci";
    case Errc::duplicate_key: return "duplicate_key";
    case Errc::key_not_found: return "key_not_found";
    case Errc::empty_heap: return "empty_heap";
    case Errc::negative_weight: return "negative_weight";
    case Errc::cycle_detected: return "cycle_detected";
    case Errc::syntax_error: return "syntax_error";
    case Errc::bad_time_order: return "bad_time_order";
    case Errc::missing_field: return "missing_field";
    case Errc::bad_type: return "bad_type";
    case Errc::unknown_session: return "unknown_session";
    case Errc::seq_too_old: return "seq_too_old";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace simlab
