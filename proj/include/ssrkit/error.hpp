#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssrkit {

enum class Errc {
  malformed_document,
  missing_key,
  bad_type,
  invariant_violation,
  index_out_of_range,
  not_rectilinear,
  open_boundary,
  multiple_loops,
  invalid_geometry,
  lattice_mismatch,
  missing_mesh,
  not_single_addition,
  dimension_mismatch,
  bad_format,
  bad_norm,
  inconsistent_dimension,
  empty_prompt,
  too_few_samples,
  all_invalid,
  illegal_edit,
  missing_prompt_bank_entry,
  missing_embedding,
  no_commands,
  malformed_tag,
  io_error,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::malformed_document: return "malformed_document";
    case Errc::missing_key: return "missing_key";
    case Errc::bad_type: return "bad_type";
    case Errc::invariant_violation: return "invariant_violation";
    case Errc::index_out_of_range: return "index_out_of_range";
    case Errc::not_rectilinear: return "not_rectilinear";
    case Errc::open_boundary: return "open_boundary";
    case Errc::multiple_loops: return "multiple_loops";
    case Errc::invalid_geometry: return "invalid_geometry";
    case Errc::lattice_mismatch: return "lattice_mismatch";
    case Errc::missing_mesh: return "missing_mesh";
    case Errc::not_single_addition: return "not_single_addition";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::bad_format: return "bad_format";
    case Errc::bad_norm: return "bad_norm";
    case Errc::inconsistent_dimension: return "inconsistent_dimension";
    case Errc::empty_prompt: return "empty_prompt";
    case Errc::too_few_samples: return "too_few_samples";
    case Errc::all_invalid: return "all_invalid";
    case Errc::illegal_edit: return "illegal_edit";
    case Errc::missing_prompt_bank_entry: return "missing_prompt_bank_entry";
    case Errc::missing_embedding: return "missing_embedding";
    case Errc::no_commands: return "no_commands";
    case Errc::malformed_tag: return "malformed_tag";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

/// Every failure raised by the library. `detail` carries the key path,
/// jid, entry index or other context the code refers to.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace ssrkit
