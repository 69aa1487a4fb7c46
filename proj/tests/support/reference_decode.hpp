#pragma once

#include <span>
#include <vector>

#include "mekit/types.hpp"

namespace mekit::testsupport {

// Second, structurally independent implementation of the SISS contract, used
// only as a test oracle. Instead of stateful pointer walks it materializes
// per-apex violation flags and derives boundaries and visited ranges from
// maximal-run arithmetic; peak candidates come from a brute-force plateau
// scan around every frame.
std::vector<Interval> reference_decode_siss(std::span<const double> spot,
                                            const DecoderConfig& config);

}  // namespace mekit::testsupport
