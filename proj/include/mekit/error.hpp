#pragma once

#include <stdexcept>
#include <string>

namespace mekit {

enum class Err {
  missing_file,
  io_error,
  malformed_row,
  non_contiguous_frames,
  row_sum_out_of_tolerance,
  probability_out_of_range,
  unknown_label,
  duplicate_video_id,
  bad_config,
  bad_value,
  all_zero_after_penalty,
  non_square_matrix,
  infeasible_spec,
  non_finite_input,
  diverged_loss,
};

const char* err_name(Err code);

// Every validation failure carries a code so callers can branch on it.
// `line` is 1-based when the error points at a line of a text file, -1 otherwise.
class Error : public std::runtime_error {
 public:
  Error(Err code, std::string message, long line = -1);

  Err code() const { return code_; }
  long line() const { return line_; }

 private:
  Err code_;
  long line_;
};

}  // namespace mekit
