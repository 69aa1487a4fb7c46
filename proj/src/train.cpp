#include "mekit/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "mekit/io.hpp"
#include "mekit/kernels.hpp"
#include "mekit/rng.hpp"

namespace mekit {

using nlohmann::json;

namespace {

constexpr double kFeatureGain = 4.0;   // demo corruption: x = gain * (v - 0.5)
constexpr double kFeatureClip = 6.0;
constexpr std::uint64_t kShuffleStream = 0x517CC1B727220A95ULL;

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw Error(Err::non_finite_input, "non-finite feature value");
}

// column-padded window around frame t, flattened into `out` (window*feat_dim)
void gather_window(std::span<const double> features, int frames, int feat_dim, int window,
                   int t, double* out) {
  const int half = (window - 1) / 2;
  for (int w = 0; w < window; ++w) {
    const int src = t - half + w;
    double* dst = out + static_cast<std::size_t>(w) * feat_dim;
    if (src < 0 || src >= frames) {
      std::fill(dst, dst + feat_dim, 0.0);
    } else {
      const double* row = features.data() + static_cast<std::size_t>(src) * feat_dim;
      std::copy(row, row + feat_dim, dst);
    }
  }
}

struct FrameState {
  std::vector<double> x;       // window * feat_dim
  std::vector<double> h;       // hidden
  std::vector<double> p;       // softmax probabilities
  double sigma = 0.0;          // logistic spotting output
  double log_p_target = 0.0;   // set when a class target is known
};

void forward_frame(const TinyModel& m, std::span<const double> features, int frames, int t,
                   FrameState& s, int class_target) {
  const int wf = m.window * m.feat_dim;
  gather_window(features, frames, m.feat_dim, m.window, t, s.x.data());

  for (int i = 0; i < m.hidden; ++i)
    s.h[i] = std::tanh(kernels::dot(m.trunk_w.data() + static_cast<std::size_t>(i) * wf,
                                    s.x.data(), wf) +
                       m.trunk_b[i]);

  s.sigma = logistic(kernels::dot(m.spot_w.data(), s.h.data(), m.hidden) + m.spot_b);

  double max_logit = -1e300;
  for (int c = 0; c < m.classes; ++c) {
    s.p[c] = kernels::dot(m.rec_w.data() + static_cast<std::size_t>(c) * m.hidden, s.h.data(),
                          m.hidden) +
             m.rec_b[c];
    max_logit = std::max(max_logit, s.p[c]);
  }
  double z = 0.0;
  for (int c = 0; c < m.classes; ++c) {
    s.p[c] = std::exp(s.p[c] - max_logit);
    z += s.p[c];
  }
  for (int c = 0; c < m.classes; ++c) s.p[c] /= z;
  if (class_target >= 0)
    s.log_p_target = std::log(std::max(s.p[class_target], 1e-300));
}

void check_model(const TinyModel& m) {
  if (m.window < 1 || m.window % 2 == 0)
    throw Error(Err::bad_config, "window must be odd and positive");
  if (m.feat_dim < 1 || m.hidden < 1 || m.classes < 2)
    throw Error(Err::bad_config, "bad model dimensions");
  const std::size_t wf = static_cast<std::size_t>(m.window) * m.feat_dim;
  if (m.trunk_w.size() != wf * m.hidden || m.trunk_b.size() != std::size_t(m.hidden) ||
      m.spot_w.size() != std::size_t(m.hidden) ||
      m.rec_w.size() != std::size_t(m.classes) * m.hidden ||
      m.rec_b.size() != std::size_t(m.classes))
    throw Error(Err::bad_config, "parameter array sizes do not match dimensions");
}

}  // namespace

std::size_t TinyModel::parameter_count() const {
  return trunk_w.size() + trunk_b.size() + spot_w.size() + 1 + rec_w.size() + rec_b.size();
}

TinyModel init_model(int window, int feat_dim, int hidden, int classes, std::uint64_t seed) {
  TinyModel m;
  m.window = window;
  m.feat_dim = feat_dim;
  m.hidden = hidden;
  m.classes = classes;
  const int wf = window * feat_dim;
  m.trunk_w.resize(static_cast<std::size_t>(hidden) * wf);
  m.trunk_b.assign(hidden, 0.0);
  m.spot_w.resize(hidden);
  m.rec_w.resize(static_cast<std::size_t>(classes) * hidden);
  m.rec_b.assign(classes, 0.0);
  check_model(m);

  SplitMix64 rng(seed);
  const double trunk_scale = 1.0 / std::sqrt(static_cast<double>(wf));
  for (double& w : m.trunk_w) w = rng.next_range(-trunk_scale, trunk_scale);
  const double head_scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& w : m.spot_w) w = rng.next_range(-head_scale, head_scale);
  for (double& w : m.rec_w) w = rng.next_range(-head_scale, head_scale);
  return m;
}

void validate(const TrainConfig& config) {
  if (!(std::isfinite(config.lr) && config.lr >= 0.0))
    throw Error(Err::bad_config, "lr must be finite and non-negative");
  if (config.epochs < 1) throw Error(Err::bad_config, "epochs must be >= 1");
  if (config.segment_len < 1) throw Error(Err::bad_config, "segment_len must be >= 1");
  if (!(std::isfinite(config.neg_pos_ratio) && config.neg_pos_ratio >= 0.0))
    throw Error(Err::bad_config, "neg_pos_ratio must be >= 0");
}

ForwardResult forward(const TinyModel& model, std::span<const double> features, int frames) {
  check_model(model);
  if (frames < 1) throw Error(Err::bad_value, "need at least one frame");
  if (features.size() != static_cast<std::size_t>(frames) * model.feat_dim)
    throw Error(Err::bad_value, "feature buffer size does not match frames x feat_dim");
  check_finite(features);

  ForwardResult out;
  out.spot.resize(frames);
  out.emo.resize(static_cast<std::size_t>(frames) * model.classes);

  FrameState s;
  s.x.resize(static_cast<std::size_t>(model.window) * model.feat_dim);
  s.h.resize(model.hidden);
  s.p.resize(model.classes);
  for (int t = 0; t < frames; ++t) {
    forward_frame(model, features, frames, t, s, -1);
    out.spot[t] = s.sigma;
    std::copy(s.p.begin(), s.p.end(),
              out.emo.begin() + static_cast<std::size_t>(t) * model.classes);
  }
  return out;
}

ForwardResult forward_video(const TinyModel& model, std::span<const double> features,
                            int frames, int segment_len) {
  if (segment_len < 1) throw Error(Err::bad_config, "segment_len must be >= 1");
  ForwardResult out;
  out.spot.reserve(frames);
  out.emo.reserve(static_cast<std::size_t>(frames) * model.classes);
  for (int start = 0; start < frames; start += segment_len) {
    const int len = std::min(segment_len, frames - start);
    const std::span<const double> chunk(
        features.data() + static_cast<std::size_t>(start) * model.feat_dim,
        static_cast<std::size_t>(len) * model.feat_dim);
    ForwardResult part = forward(model, chunk, len);
    out.spot.insert(out.spot.end(), part.spot.begin(), part.spot.end());
    out.emo.insert(out.emo.end(), part.emo.begin(), part.emo.end());
  }
  return out;
}

namespace {

void check_batch(const TinyModel& m, std::span<const Segment> batch,
                 std::span<const double> class_weights) {
  check_model(m);
  if (class_weights.size() != static_cast<std::size_t>(m.classes))
    throw Error(Err::bad_config, "class_weights length must equal the class count");
  for (const Segment& seg : batch) {
    const std::size_t frames = seg.spot_target.size();
    if (frames == 0 || seg.class_target.size() != frames ||
        seg.features.size() != frames * m.feat_dim)
      throw Error(Err::bad_value, "inconsistent segment buffers");
    check_finite(seg.features);
    for (int c : seg.class_target)
      if (c < 0 || c >= m.classes) throw Error(Err::bad_value, "class target out of range");
  }
}

}  // namespace

LossBreakdown loss(const TinyModel& model, std::span<const Segment> batch,
                   std::span<const double> class_weights) {
  check_batch(model, batch, class_weights);
  LossBreakdown lb;
  long long frames_total = 0;

  FrameState s;
  s.x.resize(static_cast<std::size_t>(model.window) * model.feat_dim);
  s.h.resize(model.hidden);
  s.p.resize(model.classes);
  for (const Segment& seg : batch) {
    const int frames = static_cast<int>(seg.spot_target.size());
    for (int t = 0; t < frames; ++t) {
      const int target = seg.class_target[t];
      forward_frame(model, seg.features, frames, t, s, target);
      const double diff = s.sigma - seg.spot_target[t];
      lb.mse += diff * diff;
      lb.ce += class_weights[target] * -s.log_p_target;
    }
    frames_total += frames;
  }
  if (frames_total > 0) {
    lb.mse /= static_cast<double>(frames_total);
    lb.ce /= static_cast<double>(frames_total);
  }
  lb.total = lb.mse + lb.ce;
  return lb;
}

Gradients gradients(const TinyModel& model, std::span<const Segment> batch,
                    std::span<const double> class_weights) {
  check_batch(model, batch, class_weights);

  Gradients g;
  g.trunk_w.assign(model.trunk_w.size(), 0.0);
  g.trunk_b.assign(model.trunk_b.size(), 0.0);
  g.spot_w.assign(model.spot_w.size(), 0.0);
  g.rec_w.assign(model.rec_w.size(), 0.0);
  g.rec_b.assign(model.rec_b.size(), 0.0);

  const int wf = model.window * model.feat_dim;
  long long frames_total = 0;

  FrameState s;
  s.x.resize(wf);
  s.h.resize(model.hidden);
  s.p.resize(model.classes);
  std::vector<double> d_rec(model.classes), d_h(model.hidden), d_z(model.hidden);

  for (const Segment& seg : batch) {
    const int frames = static_cast<int>(seg.spot_target.size());
    frames_total += frames;
    for (int t = 0; t < frames; ++t) {
      const int target = seg.class_target[t];
      forward_frame(model, seg.features, frames, t, s, target);

      // spotting head: d/dlogit of (sigma - y)^2
      const double d_spot = 2.0 * (s.sigma - seg.spot_target[t]) * s.sigma * (1.0 - s.sigma);
      kernels::axpy(d_spot, s.h.data(), g.spot_w.data(), model.hidden);
      g.spot_b += d_spot;

      // recognition head: weighted softmax cross-entropy
      const double w = class_weights[target];
      for (int c = 0; c < model.classes; ++c)
        d_rec[c] = w * (s.p[c] - (c == target ? 1.0 : 0.0));
      for (int c = 0; c < model.classes; ++c) {
        kernels::axpy(d_rec[c], s.h.data(),
                      g.rec_w.data() + static_cast<std::size_t>(c) * model.hidden,
                      model.hidden);
        g.rec_b[c] += d_rec[c];
      }

      // shared trunk collects both signals
      std::fill(d_h.begin(), d_h.end(), 0.0);
      kernels::axpy(d_spot, model.spot_w.data(), d_h.data(), model.hidden);
      for (int c = 0; c < model.classes; ++c)
        kernels::axpy(d_rec[c], model.rec_w.data() + static_cast<std::size_t>(c) * model.hidden,
                      d_h.data(), model.hidden);
      for (int i = 0; i < model.hidden; ++i) d_z[i] = d_h[i] * (1.0 - s.h[i] * s.h[i]);
      for (int i = 0; i < model.hidden; ++i) {
        kernels::axpy(d_z[i], s.x.data(),
                      g.trunk_w.data() + static_cast<std::size_t>(i) * wf, wf);
        g.trunk_b[i] += d_z[i];
      }
    }
  }

  if (frames_total > 0) {
    const double inv = 1.0 / static_cast<double>(frames_total);
    kernels::scale(inv, g.trunk_w.data(), g.trunk_w.size());
    kernels::scale(inv, g.trunk_b.data(), g.trunk_b.size());
    kernels::scale(inv, g.spot_w.data(), g.spot_w.size());
    g.spot_b *= inv;
    kernels::scale(inv, g.rec_w.data(), g.rec_w.size());
    kernels::scale(inv, g.rec_b.data(), g.rec_b.size());
  }
  return g;
}

std::vector<double> demo_features(const ProbabilityTrack& track) {
  const int n = track.classes();
  const int feat_dim = 1 + n;
  std::vector<double> out(static_cast<std::size_t>(track.frames()) * feat_dim);
  auto corrupt = [](double v) {
    return std::clamp(kFeatureGain * (v - 0.5), -kFeatureClip, kFeatureClip);
  };
  for (int t = 0; t < track.frames(); ++t) {
    double* row = out.data() + static_cast<std::size_t>(t) * feat_dim;
    row[0] = corrupt(track.spot[t]);
    const auto emo = track.emo_row(t);
    for (int c = 0; c < n; ++c) row[1 + c] = corrupt(emo[c]);
  }
  return out;
}

namespace {

double spot_target_at(const Annotation& annotation, int frame, bool soft) {
  for (const auto& event : annotation.events) {
    const Interval& iv = event.interval;
    if (!iv.contains(frame)) continue;
    if (!soft) return 1.0;
    if (frame == iv.apex || iv.length() == 1) return 1.0;
    if (frame < iv.apex)
      return static_cast<double>(frame - iv.onset) / static_cast<double>(iv.apex - iv.onset);
    return static_cast<double>(iv.offset - frame) /
           static_cast<double>(iv.offset - iv.apex);
  }
  return 0.0;
}

int class_target_at(const Annotation& annotation, std::span<const std::string> labels,
                    int frame) {
  for (const auto& event : annotation.events)
    if (event.interval.contains(frame)) {
      for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i] == event.label) return static_cast<int>(i);
      throw Error(Err::unknown_label, "event label \"" + event.label + "\"");
    }
  return 0;
}

Segment cut_segment(std::span<const double> features, int feat_dim,
                    const ProbabilityTrack& track, const Annotation& annotation,
                    const TrainConfig& cfg, int start) {
  Segment seg;
  const int len = cfg.segment_len;
  seg.features.assign(features.begin() + static_cast<std::size_t>(start) * feat_dim,
                      features.begin() + static_cast<std::size_t>(start + len) * feat_dim);
  seg.spot_target.resize(len);
  seg.class_target.resize(len);
  for (int i = 0; i < len; ++i) {
    seg.spot_target[i] = spot_target_at(annotation, start + i, cfg.soft_spot_targets);
    seg.class_target[i] = class_target_at(annotation, track.labels, start + i);
  }
  return seg;
}

}  // namespace

SegmentSample sample_segments(const ProbabilityTrack& track, const Annotation& annotation,
                              const TrainConfig& config) {
  validate(config);
  const int frames = track.frames();
  const int len = config.segment_len;
  if (frames < len) throw Error(Err::bad_value, "track shorter than segment_len");

  const std::vector<double> features = demo_features(track);
  const int feat_dim = 1 + track.classes();

  SegmentSample out;
  for (const auto& event : annotation.events) {
    const int start = std::clamp(event.interval.apex - len / 2, 0, frames - len);
    out.segments.push_back(cut_segment(features, feat_dim, track, annotation, config, start));
  }
  const std::size_t positives = out.segments.size();

  // candidate negative starts: segments that never touch an event
  std::vector<int> event_frame(frames, 0);
  for (const auto& event : annotation.events)
    for (int t = event.interval.onset; t <= event.interval.offset && t < frames; ++t)
      event_frame[t] = 1;
  std::vector<int> prefix(frames + 1, 0);
  for (int t = 0; t < frames; ++t) prefix[t + 1] = prefix[t] + event_frame[t];
  std::vector<int> candidates;
  for (int s = 0; s + len <= frames; ++s)
    if (prefix[s + len] - prefix[s] == 0) candidates.push_back(s);

  std::size_t wanted = static_cast<std::size_t>(
      std::llround(config.neg_pos_ratio * static_cast<double>(positives)));
  if (wanted > candidates.size()) {
    out.negatives_exhausted = true;
    wanted = candidates.size();
  }

  SplitMix64 rng(config.seed ^ fnv1a64(track.video_id.data(), track.video_id.size()));
  for (std::size_t i = 0; i < wanted; ++i) {
    const std::size_t j = i + rng.next_below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
    out.segments.push_back(
        cut_segment(features, feat_dim, track, annotation, config, candidates[i]));
  }
  return out;
}

TrainOutcome train_demo(const Manifest& manifest, const std::filesystem::path& manifest_dir,
                        const TrainConfig& config, int holdout) {
  validate(config);
  validate(manifest);
  const int n_entries = static_cast<int>(manifest.entries.size());
  if (holdout < 0 || holdout >= n_entries)
    throw Error(Err::bad_config, "holdout must leave at least one training video");

  const int n_classes = static_cast<int>(manifest.labels.size());
  std::vector<double> weights = config.class_weights;
  if (weights.empty()) {
    // inverse prior frequency, normalized to mean 1
    weights.resize(n_classes);
    for (int c = 0; c < n_classes; ++c) weights[c] = 1.0 / (manifest.class_priors[c] + 1e-6);
    const double mean = kernels::sum(weights.data(), weights.size()) / n_classes;
    kernels::scale(1.0 / mean, weights.data(), weights.size());
  } else if (weights.size() != static_cast<std::size_t>(n_classes)) {
    throw Error(Err::bad_config, "class_weights length must equal the class count");
  }

  std::vector<Segment> pool;
  for (int v = 0; v < n_entries - holdout; ++v) {
    const LoadedVideo video = load_video(manifest, manifest.entries[v], manifest_dir);
    SegmentSample sample = sample_segments(video.track, video.annotation, config);
    if (sample.negatives_exhausted)
      std::fprintf(stderr,
                   "warning: %s has fewer negative segment positions than requested; "
                   "using all of them\n",
                   video.track.video_id.c_str());
    for (auto& seg : sample.segments) pool.push_back(std::move(seg));
  }
  if (pool.empty()) throw Error(Err::bad_value, "no training segments");

  constexpr int kWindow = 11;
  constexpr int kHidden = 32;
  TrainOutcome outcome;
  outcome.labels = manifest.labels;
  outcome.model = init_model(kWindow, 1 + n_classes, kHidden, n_classes, config.seed);
  TinyModel& model = outcome.model;

  SplitMix64 shuffle_rng(config.seed ^ kShuffleStream);
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = i + shuffle_rng.next_below(order.size() - i);
      std::swap(order[i], order[j]);
    }
    for (std::size_t idx : order) {
      const Gradients g = gradients(model, {&pool[idx], 1}, weights);
      kernels::axpy(-config.lr, g.trunk_w.data(), model.trunk_w.data(), g.trunk_w.size());
      kernels::axpy(-config.lr, g.trunk_b.data(), model.trunk_b.data(), g.trunk_b.size());
      kernels::axpy(-config.lr, g.spot_w.data(), model.spot_w.data(), g.spot_w.size());
      model.spot_b -= config.lr * g.spot_b;
      kernels::axpy(-config.lr, g.rec_w.data(), model.rec_w.data(), g.rec_w.size());
      kernels::axpy(-config.lr, g.rec_b.data(), model.rec_b.data(), g.rec_b.size());
    }
    const LossBreakdown lb = loss(model, pool, weights);
    if (!std::isfinite(lb.total))
      throw Error(Err::diverged_loss, "non-finite loss at epoch " + std::to_string(epoch));
    outcome.log.push_back({epoch, lb.mse, lb.ce, lb.total});
  }
  return outcome;
}

std::string model_to_json(const TinyModel& model, std::span<const std::string> labels) {
  json doc = {{"format_version", 1},
              {"window", model.window},
              {"feat_dim", model.feat_dim},
              {"hidden", model.hidden},
              {"classes", model.classes},
              {"labels", std::vector<std::string>(labels.begin(), labels.end())},
              {"trunk_w", model.trunk_w},
              {"trunk_b", model.trunk_b},
              {"spot_w", model.spot_w},
              {"spot_b", model.spot_b},
              {"rec_w", model.rec_w},
              {"rec_b", model.rec_b}};
  return doc.dump(2) + "\n";
}

TinyModel model_from_json(const std::string& text, std::vector<std::string>* labels) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(Err::bad_value, "invalid model JSON");
  TinyModel m;
  try {
    m.window = doc.at("window").get<int>();
    m.feat_dim = doc.at("feat_dim").get<int>();
    m.hidden = doc.at("hidden").get<int>();
    m.classes = doc.at("classes").get<int>();
    m.trunk_w = doc.at("trunk_w").get<std::vector<double>>();
    m.trunk_b = doc.at("trunk_b").get<std::vector<double>>();
    m.spot_w = doc.at("spot_w").get<std::vector<double>>();
    m.spot_b = doc.at("spot_b").get<double>();
    m.rec_w = doc.at("rec_w").get<std::vector<double>>();
    m.rec_b = doc.at("rec_b").get<std::vector<double>>();
    if (labels) *labels = doc.at("labels").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Err::bad_value, std::string("model JSON: ") + e.what());
  }
  check_model(m);
  return m;
}

std::string training_log_to_csv(std::span<const TrainLogEntry> log) {
  std::string out = "epoch,mse_term,ce_term,total\n";
  for (const auto& entry : log) {
    out += std::to_string(entry.epoch);
    for (double v : {entry.mse, entry.ce, entry.total}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace mekit
