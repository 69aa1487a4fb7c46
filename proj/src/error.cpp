#include "mekit/error.hpp"

namespace mekit {

const char* err_name(Err code) {
  switch (code) {
    case Err::missing_file: return "MissingFile";
    case Err::io_error: return "IoError";
    case Err::malformed_row: return "MalformedRow";
    case Err::non_contiguous_frames: return "NonContiguousFrames";
    case Err::row_sum_out_of_tolerance: return "RowSumOutOfTolerance";
    case Err::probability_out_of_range: return "ProbabilityOutOfRange";
    case Err::unknown_label: return "UnknownLabel";
    case Err::duplicate_video_id: return "DuplicateVideoId";
    case Err::bad_config: return "BadConfig";
    case Err::bad_value: return "BadValue";
    case Err::all_zero_after_penalty: return "AllZeroAfterPenalty";
    case Err::non_square_matrix: return "NonSquareMatrix";
    case Err::infeasible_spec: return "InfeasibleSpec";
    case Err::non_finite_input: return "NonFiniteInput";
    case Err::diverged_loss: return "DivergedLoss";
  }
  return "UnknownError";
}

namespace {

std::string compose(Err code, const std::string& message, long line) {
  std::string out = err_name(code);
  if (line >= 0) {
    out += " (line ";
    out += std::to_string(line);
    out += ")";
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(Err code, std::string message, long line)
    : std::runtime_error(compose(code, message, line)), code_(code), line_(line) {}

}  // namespace mekit
