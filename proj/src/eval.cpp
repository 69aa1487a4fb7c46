#include "mekit/eval.hpp"

#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "mekit/decode.hpp"
#include "mekit/io.hpp"

namespace mekit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

PenaltyMode penalty_mode_from(const std::string& name) {
  if (name == "none") return PenaltyMode::none;
  if (name == "inverse_prior") return PenaltyMode::inverse_prior;
  if (name == "custom") return PenaltyMode::custom;
  throw Error(Err::bad_config, "unknown penalty mode \"" + name + "\"");
}

const char* penalty_mode_name(PenaltyMode mode) {
  switch (mode) {
    case PenaltyMode::none: return "none";
    case PenaltyMode::inverse_prior: return "inverse_prior";
    case PenaltyMode::custom: return "custom";
  }
  return "none";
}

void require_known_keys(const json& obj, std::initializer_list<const char*> keys,
                        const std::string& what) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : keys) known = known || it.key() == key;
    if (!known) throw Error(Err::bad_config, what + ": unknown key \"" + it.key() + "\"");
  }
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(Err::bad_config, "invalid config JSON");
  if (!doc.is_object()) throw Error(Err::bad_config, "config must be a JSON object");
  require_known_keys(doc,
                     {"decoder", "k", "theta_low", "theta_high", "patience",
                      "min_peak_height", "nms_iou", "penalty", "averaging", "threads"},
                     "config");
  RunConfig cfg;
  try {
    if (doc.contains("decoder")) {
      const std::string name = doc["decoder"].get<std::string>();
      if (name == "siss") cfg.decoder = DecoderKind::siss;
      else if (name == "fixed") cfg.decoder = DecoderKind::fixed;
      else throw Error(Err::bad_config, "unknown decoder \"" + name + "\"");
    }
    if (doc.contains("k") && !doc["k"].is_null()) cfg.k = doc["k"].get<int>();
    if (doc.contains("theta_low")) cfg.theta_low = doc["theta_low"].get<double>();
    if (doc.contains("theta_high")) cfg.theta_high = doc["theta_high"].get<double>();
    if (doc.contains("patience")) cfg.patience = doc["patience"].get<int>();
    if (doc.contains("min_peak_height"))
      cfg.min_peak_height = doc["min_peak_height"].get<double>();
    if (doc.contains("nms_iou")) cfg.nms_iou = doc["nms_iou"].get<double>();
    if (doc.contains("penalty")) {
      const json& p = doc["penalty"];
      require_known_keys(p, {"mode", "weights", "epsilon"}, "penalty");
      if (p.contains("mode")) cfg.penalty.mode = penalty_mode_from(p["mode"].get<std::string>());
      if (p.contains("weights")) cfg.penalty.weights = p["weights"].get<std::vector<double>>();
      if (p.contains("epsilon")) cfg.penalty.epsilon = p["epsilon"].get<double>();
    }
    if (doc.contains("averaging")) {
      const std::string name = doc["averaging"].get<std::string>();
      if (name == "macro") cfg.averaging = Averaging::macro;
      else if (name == "micro") cfg.averaging = Averaging::micro;
      else throw Error(Err::bad_config, "unknown averaging \"" + name + "\"");
    }
    if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
  } catch (const json::exception& e) {
    throw Error(Err::bad_config, std::string("config JSON: ") + e.what());
  }
  return cfg;
}

std::string run_config_to_json(const RunConfig& config) {
  json doc = {{"decoder", config.decoder == DecoderKind::siss ? "siss" : "fixed"},
              {"theta_low", config.theta_low},
              {"theta_high", config.theta_high},
              {"patience", config.patience},
              {"min_peak_height", config.min_peak_height},
              {"nms_iou", config.nms_iou},
              {"penalty",
               {{"mode", penalty_mode_name(config.penalty.mode)},
                {"weights", config.penalty.weights},
                {"epsilon", config.penalty.epsilon}}},
              {"averaging", config.averaging == Averaging::macro ? "macro" : "micro"},
              {"threads", config.threads}};
  if (config.k) doc["k"] = *config.k;
  else doc["k"] = nullptr;
  return doc.dump(2) + "\n";
}

DecoderConfig decoder_config_for(const RunConfig& config, double fps) {
  DecoderConfig d;
  d.k = config.k ? *config.k : duration_prior_from_fps(fps);
  d.theta_low = config.theta_low;
  d.theta_high = config.theta_high;
  d.patience = config.patience;
  d.min_peak_height = config.min_peak_height;
  d.nms_iou = config.nms_iou;
  validate(d);
  return d;
}

std::vector<LabeledInterval> decode_track(const ProbabilityTrack& track,
                                          std::span<const double> priors,
                                          const RunConfig& config) {
  const DecoderConfig dc = decoder_config_for(config, track.fps);
  const std::vector<Interval> intervals = config.decoder == DecoderKind::siss
                                              ? decode_siss(track.spot, dc)
                                              : decode_fixed(track.spot, dc);
  std::vector<LabeledInterval> out;
  out.reserve(intervals.size());
  for (const Interval& interval : intervals)
    out.push_back(assign_emotion(track, interval, priors, config.penalty));
  return out;
}

std::string curve_csv(const ProbabilityTrack& track, std::span<const LabeledInterval> preds,
                      std::span<const double> priors, const RunConfig& config) {
  std::string out = "frame,spot,decoded";
  for (const auto& label : track.labels) {
    out += ",score_";
    out += label;
  }
  out += '\n';
  for (int t = 0; t < track.frames(); ++t) {
    bool decoded = false;
    for (const auto& p : preds) decoded = decoded || p.interval.contains(t);
    out += std::to_string(t);
    out += ',';
    out += format_double(track.spot[t]);
    out += decoded ? ",1" : ",0";
    const std::vector<double> scores = penalize(track.emo_row(t), priors, config.penalty);
    for (double v : scores) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

int resolve_threads(int requested) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ME_KIT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  return n;
}

namespace {

// run fn(i) for i in [0, count) on `threads` workers; exceptions resurface
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace

EvalOutcome evaluate_manifest(const Manifest& manifest, const fs::path& manifest_dir,
                              const RunConfig& config,
                              const std::optional<fs::path>& predictions) {
  validate(manifest);
  const int n = static_cast<int>(manifest.entries.size());

  EvalOutcome outcome;
  outcome.intervals.resize(n);
  std::vector<Annotation> annotations(n);

  const int threads = resolve_threads(config.threads);
  parallel_for(n, threads, [&](int i) {
    const LoadedVideo video = load_video(manifest, manifest.entries[i], manifest_dir);
    annotations[i] = video.annotation;
    if (predictions) {
      const fs::path file = *predictions / (manifest.entries[i].video_id + ".json");
      for (auto& [vid, li] : read_intervals(file)) {
        if (vid != manifest.entries[i].video_id)
          throw Error(Err::bad_value, "prediction file " + file.string() +
                                          " holds intervals for video \"" + vid + "\"");
        outcome.intervals[i].push_back(std::move(li));
      }
    } else {
      outcome.intervals[i] = decode_track(video.track, manifest.class_priors, config);
    }
  });

  // fold in manifest order so reports never depend on the thread count
  MetricsTally tally(manifest.labels);
  for (int i = 0; i < n; ++i) {
    MetricsReport video_scores =
        tally.add_video(outcome.intervals[i], annotations[i], config.averaging);
    outcome.report.videos.push_back({manifest.entries[i].video_id, std::move(video_scores)});
  }
  outcome.report.overall = tally.finalize(config.averaging);
  outcome.report.labels = manifest.labels;
  outcome.report.averaging = config.averaging;
  return outcome;
}

EvalReport evaluate_model_heldout(const TinyModel& model, const Manifest& manifest,
                                  const fs::path& manifest_dir, int holdout,
                                  int segment_len, const RunConfig& config) {
  validate(manifest);
  const int n = static_cast<int>(manifest.entries.size());
  if (holdout < 1 || holdout > n)
    throw Error(Err::bad_config, "holdout must select at least one video");

  EvalReport report;
  report.labels = manifest.labels;
  report.averaging = config.averaging;
  MetricsTally tally(manifest.labels);
  for (int i = n - holdout; i < n; ++i) {
    const LoadedVideo video = load_video(manifest, manifest.entries[i], manifest_dir);
    const std::vector<double> features = demo_features(video.track);
    const ForwardResult fr =
        forward_video(model, features, video.track.frames(), segment_len);

    ProbabilityTrack predicted = video.track;
    predicted.spot = fr.spot;
    predicted.emo = fr.emo;

    const std::vector<LabeledInterval> preds =
        decode_track(predicted, manifest.class_priors, config);
    MetricsReport scores = tally.add_video(preds, video.annotation, config.averaging);
    report.videos.push_back({manifest.entries[i].video_id, std::move(scores)});
  }
  report.overall = tally.finalize(config.averaging);
  return report;
}

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

}  // namespace mekit
