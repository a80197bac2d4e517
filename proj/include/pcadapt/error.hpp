#pragma once

#include <stdexcept>
#include <string>

namespace pcadapt {

// Error codes cover every failure mode the library promises to report.
enum class Errc {
  malformed_header,
  count_mismatch,
  bad_index,
  degenerate_mesh,
  too_many_requested,
  empty_roster,
  dimension_mismatch,
  batch_too_small,
  batch_too_large,
  shape_mismatch,
  empty_cloud,
  label_out_of_range,
  non_finite_loss,
  empty_dataset,
  invalid_argument,
  bad_config,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_header: return "malformed_header";
    case Errc::count_mismatch: return "count_mismatch";
    case Errc::bad_index: return "bad_index";
    case Errc::degenerate_mesh: return "degenerate_mesh";
    case Errc::too_many_requested: return "too_many_requested";
    case Errc::empty_roster: return "empty_roster";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::batch_too_small: return "batch_too_small";
    case Errc::batch_too_large: return "batch_too_large";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::empty_cloud: return "empty_cloud";
    case Errc::label_out_of_range: return "label_out_of_range";
    case Errc::non_finite_loss: return "non_finite_loss";
    case Errc::empty_dataset: return "empty_dataset";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::bad_config: return "bad_config";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace pcadapt
