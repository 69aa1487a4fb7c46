#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mekit/metrics.hpp"
#include "mekit/types.hpp"

namespace mekit {

// Shortest decimal text that parses back to the identical double. All file
// formats use this for reals, which is what makes write -> read -> write a
// byte-level fixpoint.
std::string format_double(double value);

// Writes via a temp file in the same directory plus rename, so readers never
// observe a partially written file.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

// Track CSV: header `frame,spot,p_<label0>,...,p_<labelN-1>`, LF line ends,
// frames 0..T-1 consecutive. The file carries no video metadata; callers pass
// it alongside (an empty video_id defaults to the file stem). Emotion rows
// are kept verbatim when they sum to 1 within 1e-12, renormalized when within
// 1e-6, rejected beyond that.
ProbabilityTrack read_track(const std::filesystem::path& path, std::string video_id = "",
                            std::string subject_id = "", double fps = 30.0);
void write_track(const ProbabilityTrack& track, const std::filesystem::path& path);
std::string track_to_csv(const ProbabilityTrack& track);

Annotation read_annotation(const std::filesystem::path& path,
                           std::span<const std::string> labels = {});
void write_annotation(const Annotation& annotation, const std::filesystem::path& path);
std::string annotation_to_json(const Annotation& annotation);

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
std::string manifest_to_json(const Manifest& manifest);

// Intervals output: JSON list of {video_id, onset, apex, offset, label, confidence}.
void write_intervals(std::span<const LabeledInterval> intervals, std::string_view video_id,
                     const std::filesystem::path& path);
std::vector<std::pair<std::string, LabeledInterval>> read_intervals(
    const std::filesystem::path& path);

void write_report(const EvalReport& report, const std::filesystem::path& json_path);
void write_report_csv(const EvalReport& report, const std::filesystem::path& csv_path);

// Loads one manifest entry's track and annotation, resolving relative paths
// against the manifest's directory and checking labels against the manifest.
struct LoadedVideo {
  ProbabilityTrack track;
  Annotation annotation;
};

LoadedVideo load_video(const Manifest& manifest, const ManifestEntry& entry,
                       const std::filesystem::path& manifest_dir);

}  // namespace mekit
