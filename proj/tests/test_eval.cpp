#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <unistd.h>

#include "mekit/eval.hpp"
#include "mekit/io.hpp"
#include "mekit/synth.hpp"

using namespace mekit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("mekit_eval_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("run config: JSON round trip and unknown keys") {
  RunConfig cfg;
  cfg.decoder = DecoderKind::fixed;
  cfg.k = 21;
  cfg.theta_low = 0.1;
  cfg.penalty.mode = PenaltyMode::custom;
  cfg.penalty.weights = {1.0, 2.0, 3.0};
  cfg.averaging = Averaging::micro;
  cfg.threads = 3;

  const RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back.decoder == DecoderKind::fixed);
  CHECK(back.k == 21);
  CHECK(back.theta_low == 0.1);
  CHECK(back.penalty.mode == PenaltyMode::custom);
  CHECK(back.penalty.weights == cfg.penalty.weights);
  CHECK(back.averaging == Averaging::micro);
  CHECK(back.threads == 3);

  CHECK_THROWS_AS(run_config_from_json("{\"bogus\": 1}"), Error);
  CHECK_THROWS_AS(run_config_from_json("{\"penalty\": {\"oops\": 2}}"), Error);
  CHECK_THROWS_AS(run_config_from_json("{\"decoder\": \"whatever\"}"), Error);
}

TEST_CASE("duration prior derives from fps when k is unset") {
  RunConfig cfg;
  CHECK(decoder_config_for(cfg, 30.0).k == 15);
  CHECK(decoder_config_for(cfg, 200.0).k == 100);
  CHECK(decoder_config_for(cfg, 1.0).k == 1);
  cfg.k = 7;
  CHECK(decoder_config_for(cfg, 200.0).k == 7);
}

TEST_CASE("evaluate_manifest: aggregation, intervals and curves") {
  TempDir dir;
  SynthSpec spec;
  spec.frames = 250;
  spec.n_events = 2;
  const SuiteResult suite = generate_suite(spec, 4, 21, dir.path);

  RunConfig cfg;
  const EvalOutcome outcome = evaluate_manifest(suite.manifest, dir.path, cfg);
  CHECK(outcome.report.videos.size() == 4);
  CHECK(outcome.intervals.size() == 4);
  CHECK(outcome.report.overall.tp + outcome.report.overall.fn == 8);  // 2 events x 4 videos
  CHECK(outcome.report.overall.strs ==
        outcome.report.overall.f1_spot * outcome.report.overall.f1_rec);

  // per-video counts fold into the overall totals
  long long tp = 0, fp = 0, fn = 0;
  for (const auto& video : outcome.report.videos) {
    tp += video.scores.tp;
    fp += video.scores.fp;
    fn += video.scores.fn;
  }
  CHECK(tp == outcome.report.overall.tp);
  CHECK(fp == outcome.report.overall.fp);
  CHECK(fn == outcome.report.overall.fn);

  const LoadedVideo video = load_video(suite.manifest, suite.manifest.entries[0], dir.path);
  const std::string curve =
      curve_csv(video.track, outcome.intervals[0], suite.manifest.class_priors, cfg);
  CHECK(curve.rfind("frame,spot,decoded", 0) == 0);
  CHECK(std::count(curve.begin(), curve.end(), '\n') == video.track.frames() + 1);
}

TEST_CASE("evaluate_manifest: reads predictions from a directory when given") {
  TempDir dir;
  SynthSpec spec;
  spec.frames = 200;
  spec.n_events = 1;
  const SuiteResult suite = generate_suite(spec, 2, 5, dir.path);

  const fs::path preds = dir.path / "preds";
  for (const auto& entry : suite.manifest.entries) {
    const Annotation ann = read_annotation(dir.path / entry.annotation_path);
    std::vector<LabeledInterval> perfect;
    for (const auto& event : ann.events) perfect.push_back({event.interval, event.label, 1.0});
    write_intervals(perfect, entry.video_id, preds / (entry.video_id + ".json"));
  }

  RunConfig cfg;
  const EvalOutcome outcome = evaluate_manifest(suite.manifest, dir.path, cfg, preds);
  CHECK(outcome.report.overall.f1_spot == 1.0);
  CHECK(outcome.report.overall.micro_f1 == 1.0);  // uf1 < 1: zero-support classes count 0
  CHECK(outcome.report.overall.iou_tp == 1.0);

  // a prediction file carrying a foreign video id is rejected
  const auto foreign = read_intervals(preds / (suite.manifest.entries[0].video_id + ".json"));
  write_intervals({&foreign[0].second, 1}, "someone_else",
                  preds / (suite.manifest.entries[1].video_id + ".json"));
  CHECK_THROWS_AS(evaluate_manifest(suite.manifest, dir.path, cfg, preds), Error);
}

TEST_CASE("thread resolution respects the environment cap") {
  unsetenv("ME_KIT_THREADS");
  CHECK(resolve_threads(4) == 4);
  setenv("ME_KIT_THREADS", "2", 1);
  CHECK(resolve_threads(4) == 2);
  CHECK(resolve_threads(1) == 1);
  setenv("ME_KIT_THREADS", "garbage", 1);
  CHECK(resolve_threads(3) == 3);
  unsetenv("ME_KIT_THREADS");
}
