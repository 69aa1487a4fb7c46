#include "mekit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mekit/kernels.hpp"

namespace mekit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Err::io_error, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Err::io_error, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Err::io_error, "rename to " + path.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::missing_file, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view text, long line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error(Err::malformed_row, "not a number: \"" + std::string(text) + "\"", line_no);
  return value;
}

long long parse_int(std::string_view text, long line_no) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error(Err::malformed_row, "not an integer: \"" + std::string(text) + "\"", line_no);
  return value;
}

// Already-normalized rows (1e-12) pass through verbatim so reparsing a file
// we wrote is the identity. Upstream float noise up to 1e-3 renormalizes to
// an exact distribution; anything worse is rejected.
constexpr double kReadRowTolerance = 1e-3;

void settle_row(std::span<double> row, long line_no) {
  const double sum = kernels::sum(row.data(), row.size());
  const double off = std::fabs(sum - 1.0);
  if (off <= 1e-12) return;
  if (off > kReadRowTolerance)
    throw Error(Err::row_sum_out_of_tolerance, "row sums to " + format_double(sum), line_no);
  kernels::scale(1.0 / sum, row.data(), row.size());
}

json parse_json(const fs::path& path) {
  if (!fs::exists(path)) throw Error(Err::missing_file, path.string());
  json doc = json::parse(read_text(path), nullptr, false);
  if (doc.is_discarded())
    throw Error(Err::malformed_row, "invalid JSON in " + path.string(), 1);
  return doc;
}

void require_keys(const json& obj, std::initializer_list<const char*> keys,
                  const std::string& what) {
  if (!obj.is_object()) throw Error(Err::bad_value, what + " must be a JSON object");
  for (const char* key : keys)
    if (!obj.contains(key)) throw Error(Err::bad_value, what + " missing key \"" + key + "\"");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : keys) known = known || it.key() == key;
    if (!known) throw Error(Err::bad_value, what + " has unknown key \"" + it.key() + "\"");
  }
}

double as_double(const json& v, const std::string& what) {
  if (!v.is_number()) throw Error(Err::bad_value, what + " must be a number");
  return v.get<double>();
}

int as_frame(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw Error(Err::bad_value, what + " must be an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& what) {
  if (!v.is_string()) throw Error(Err::bad_value, what + " must be a string");
  return v.get<std::string>();
}

}  // namespace

ProbabilityTrack read_track(const fs::path& path, std::string video_id, std::string subject_id,
                            double fps) {
  if (!fs::exists(path)) throw Error(Err::missing_file, path.string());
  const std::string text = read_text(path);

  ProbabilityTrack track;
  track.video_id = video_id.empty() ? path.stem().string() : std::move(video_id);
  track.subject_id = std::move(subject_id);
  track.fps = fps;

  std::size_t pos = 0;
  long line_no = 0;
  bool saw_header = false;
  std::size_t n_classes = 0;
  long long next_frame = 0;

  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) {
      if (pos >= text.size()) break;  // trailing newline
      throw Error(Err::malformed_row, "blank line", line_no);
    }

    const std::vector<std::string> fields = split(line, ',');
    if (!saw_header) {
      if (fields.size() < 4 || fields[0] != "frame" || fields[1] != "spot")
        throw Error(Err::malformed_row, "header must be frame,spot,p_<class>,...", line_no);
      for (std::size_t i = 2; i < fields.size(); ++i) {
        if (fields[i].rfind("p_", 0) != 0 || fields[i].size() == 2)
          throw Error(Err::malformed_row, "bad probability column \"" + fields[i] + "\"",
                      line_no);
        track.labels.push_back(fields[i].substr(2));
      }
      n_classes = track.labels.size();
      if (track.labels.front() != kNeutralLabel)
        throw Error(Err::malformed_row, "first probability column must be p_neutral", line_no);
      saw_header = true;
      continue;
    }

    if (fields.size() != n_classes + 2)
      throw Error(Err::malformed_row,
                  "expected " + std::to_string(n_classes + 2) + " fields, got " +
                      std::to_string(fields.size()),
                  line_no);
    const long long frame = parse_int(fields[0], line_no);
    if (frame != next_frame)
      throw Error(Err::non_contiguous_frames,
                  "expected frame " + std::to_string(next_frame) + ", got " +
                      std::to_string(frame),
                  line_no);
    ++next_frame;

    const double spot = parse_double(fields[1], line_no);
    if (!(spot >= 0.0 && spot <= 1.0))
      throw Error(Err::probability_out_of_range, "spot value " + fields[1], line_no);
    track.spot.push_back(spot);

    const std::size_t row_start = track.emo.size();
    for (std::size_t i = 0; i < n_classes; ++i) {
      const double v = parse_double(fields[2 + i], line_no);
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(Err::probability_out_of_range, "emotion value " + fields[2 + i], line_no);
      track.emo.push_back(v);
    }
    settle_row({track.emo.data() + row_start, n_classes}, line_no);
  }

  if (!saw_header) throw Error(Err::malformed_row, "empty file", 1);
  validate(track);
  return track;
}

std::string track_to_csv(const ProbabilityTrack& track) {
  std::string out = "frame,spot";
  for (const auto& label : track.labels) {
    out += ",p_";
    out += label;
  }
  out += '\n';
  for (int t = 0; t < track.frames(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += format_double(track.spot[t]);
    for (double v : track.emo_row(t)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_track(const ProbabilityTrack& track, const fs::path& path) {
  validate(track);
  write_text_atomic(path, track_to_csv(track));
}

Annotation read_annotation(const fs::path& path, std::span<const std::string> labels) {
  const json doc = parse_json(path);
  require_keys(doc, {"video_id", "subject_id", "fps", "events"}, "annotation");

  Annotation ann;
  ann.video_id = as_string(doc["video_id"], "video_id");
  ann.subject_id = as_string(doc["subject_id"], "subject_id");
  ann.fps = as_double(doc["fps"], "fps");
  if (!doc["events"].is_array()) throw Error(Err::bad_value, "events must be an array");
  for (const json& ev : doc["events"]) {
    require_keys(ev, {"onset", "apex", "offset", "label"}, "event");
    AnnotationEvent event;
    event.interval.onset = as_frame(ev["onset"], "onset");
    event.interval.apex = as_frame(ev["apex"], "apex");
    event.interval.offset = as_frame(ev["offset"], "offset");
    event.label = as_string(ev["label"], "label");
    ann.events.push_back(std::move(event));
  }
  validate(ann, labels);
  return ann;
}

std::string annotation_to_json(const Annotation& annotation) {
  json events = json::array();
  for (const auto& event : annotation.events)
    events.push_back({{"onset", event.interval.onset},
                      {"apex", event.interval.apex},
                      {"offset", event.interval.offset},
                      {"label", event.label}});
  json doc = {{"video_id", annotation.video_id},
              {"subject_id", annotation.subject_id},
              {"fps", annotation.fps},
              {"events", std::move(events)}};
  return doc.dump(2) + "\n";
}

void write_annotation(const Annotation& annotation, const fs::path& path) {
  validate(annotation);
  write_text_atomic(path, annotation_to_json(annotation));
}

Manifest read_manifest(const fs::path& path) {
  const json doc = parse_json(path);
  require_keys(doc, {"labels", "class_priors", "entries"}, "manifest");

  Manifest manifest;
  if (!doc["labels"].is_array() || !doc["class_priors"].is_array() ||
      !doc["entries"].is_array())
    throw Error(Err::bad_value, "labels, class_priors and entries must be arrays");
  for (const json& label : doc["labels"])
    manifest.labels.push_back(as_string(label, "label"));
  for (const json& p : doc["class_priors"])
    manifest.class_priors.push_back(as_double(p, "class prior"));
  for (const json& e : doc["entries"]) {
    require_keys(e, {"video_id", "subject_id", "track_path", "annotation_path", "fps"},
                 "manifest entry");
    ManifestEntry entry;
    entry.video_id = as_string(e["video_id"], "video_id");
    entry.subject_id = as_string(e["subject_id"], "subject_id");
    entry.track_path = as_string(e["track_path"], "track_path");
    entry.annotation_path = as_string(e["annotation_path"], "annotation_path");
    entry.fps = as_double(e["fps"], "fps");
    manifest.entries.push_back(std::move(entry));
  }

  // same keep-or-renormalize policy as emotion rows
  if (!manifest.class_priors.empty()) {
    const double sum =
        kernels::sum(manifest.class_priors.data(), manifest.class_priors.size());
    const double off = std::fabs(sum - 1.0);
    if (off > 1e-12 && off <= kRowSumTolerance)
      kernels::scale(1.0 / sum, manifest.class_priors.data(), manifest.class_priors.size());
  }
  validate(manifest);
  return manifest;
}

std::string manifest_to_json(const Manifest& manifest) {
  json entries = json::array();
  for (const auto& entry : manifest.entries)
    entries.push_back({{"video_id", entry.video_id},
                       {"subject_id", entry.subject_id},
                       {"track_path", entry.track_path},
                       {"annotation_path", entry.annotation_path},
                       {"fps", entry.fps}});
  json doc = {{"labels", manifest.labels},
              {"class_priors", manifest.class_priors},
              {"entries", std::move(entries)}};
  return doc.dump(2) + "\n";
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  validate(manifest);
  write_text_atomic(path, manifest_to_json(manifest));
}

void write_intervals(std::span<const LabeledInterval> intervals, std::string_view video_id,
                     const fs::path& path) {
  json doc = json::array();
  for (const auto& li : intervals)
    doc.push_back({{"video_id", std::string(video_id)},
                   {"onset", li.interval.onset},
                   {"apex", li.interval.apex},
                   {"offset", li.interval.offset},
                   {"label", li.label},
                   {"confidence", li.confidence}});
  write_text_atomic(path, doc.dump(2) + "\n");
}

std::vector<std::pair<std::string, LabeledInterval>> read_intervals(const fs::path& path) {
  const json doc = parse_json(path);
  if (!doc.is_array()) throw Error(Err::bad_value, "intervals file must be a JSON array");
  std::vector<std::pair<std::string, LabeledInterval>> out;
  for (const json& item : doc) {
    require_keys(item, {"video_id", "onset", "apex", "offset", "label", "confidence"},
                 "interval");
    LabeledInterval li;
    li.interval.onset = as_frame(item["onset"], "onset");
    li.interval.apex = as_frame(item["apex"], "apex");
    li.interval.offset = as_frame(item["offset"], "offset");
    li.label = as_string(item["label"], "label");
    li.confidence = as_double(item["confidence"], "confidence");
    validate(li.interval);
    out.emplace_back(as_string(item["video_id"], "video_id"), std::move(li));
  }
  return out;
}

namespace {

json report_scores_json(const MetricsReport& r) {
  return {{"tp", r.tp},
          {"fp", r.fp},
          {"fn", r.fn},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1_spot", r.f1_spot},
          {"iou_tp", r.iou_tp},
          {"iou_all", r.iou_all},
          {"f1_rec", r.f1_rec},
          {"uf1", r.uf1},
          {"uar", r.uar},
          {"micro_f1", r.micro_f1},
          {"strs", r.strs}};
}

void append_csv_row(std::string& out, const std::string& id, const MetricsReport& r) {
  out += id;
  out += ',' + std::to_string(r.tp) + ',' + std::to_string(r.fp) + ',' + std::to_string(r.fn);
  for (double v : {r.precision, r.recall, r.f1_spot, r.iou_tp, r.iou_all, r.f1_rec, r.uf1,
                   r.uar, r.strs}) {
    out += ',';
    out += format_double(v);
  }
  out += '\n';
}

}  // namespace

void write_report(const EvalReport& report, const fs::path& json_path) {
  json videos = json::array();
  for (const auto& video : report.videos) {
    json v = report_scores_json(video.scores);
    v["video_id"] = video.video_id;
    videos.push_back(std::move(v));
  }
  json overall = report_scores_json(report.overall);
  overall["confusion"] = report.overall.confusion;
  json doc = {{"overall", std::move(overall)},
              {"videos", std::move(videos)},
              {"labels", report.labels},
              {"averaging", report.averaging == Averaging::macro ? "macro" : "micro"}};
  write_text_atomic(json_path, doc.dump(2) + "\n");
}

void write_report_csv(const EvalReport& report, const fs::path& csv_path) {
  std::string out =
      "video_id,tp,fp,fn,precision,recall,f1_spot,iou_tp,iou_all,f1_rec,uf1,uar,strs\n";
  for (const auto& video : report.videos) append_csv_row(out, video.video_id, video.scores);
  append_csv_row(out, "ALL", report.overall);
  write_text_atomic(csv_path, out);
}

LoadedVideo load_video(const Manifest& manifest, const ManifestEntry& entry,
                       const fs::path& manifest_dir) {
  auto resolve = [&](const std::string& p) {
    fs::path candidate(p);
    return candidate.is_absolute() ? candidate : manifest_dir / candidate;
  };
  LoadedVideo video;
  video.track =
      read_track(resolve(entry.track_path), entry.video_id, entry.subject_id, entry.fps);
  if (video.track.labels != manifest.labels)
    throw Error(Err::unknown_label,
                "track " + entry.video_id + " classes differ from manifest labels");
  video.annotation = read_annotation(resolve(entry.annotation_path), manifest.labels);
  return video;
}

}  // namespace mekit
