// mekit CLI: decode | eval | synth | traindemo | version

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mekit/eval.hpp"
#include "mekit/io.hpp"
#include "mekit/kernels.hpp"
#include "mekit/synth.hpp"
#include "mekit/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DecoderFlags {
  std::string config_path;
  std::string decoder = "siss";
  int k = 0;  // 0 = derive from fps
  double theta_low = 0.25;
  double theta_high = 0.5;
  int patience = 2;
  double min_peak_height = 0.6;
  double nms_iou = 0.3;
  std::string penalty_mode = "inverse_prior";
  std::vector<double> penalty_weights;
  double penalty_epsilon = 1e-6;
  std::string averaging = "macro";
  int threads = 0;
  bool print_config = false;
};

void add_decoder_flags(CLI::App* cmd, DecoderFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; explicit flags win");
  cmd->add_option("--decoder", f.decoder, "siss | fixed")->check(CLI::IsMember({"siss", "fixed"}));
  cmd->add_option("--k", f.k, "duration prior in frames (0 = round(0.5s * fps))");
  cmd->add_option("--theta-low", f.theta_low, "inner-zone threshold");
  cmd->add_option("--theta-high", f.theta_high, "outer-zone threshold");
  cmd->add_option("--patience", f.patience, "consecutive violations that stop extension");
  cmd->add_option("--min-peak-height", f.min_peak_height, "candidate peak floor");
  cmd->add_option("--nms-iou", f.nms_iou, "greedy NMS overlap limit");
  cmd->add_option("--penalty", f.penalty_mode, "none | inverse_prior | custom")
      ->check(CLI::IsMember({"none", "inverse_prior", "custom"}));
  cmd->add_option("--penalty-weights", f.penalty_weights,
                  "per-class weights for custom penalty");
  cmd->add_option("--penalty-epsilon", f.penalty_epsilon, "inverse-prior epsilon");
  cmd->add_option("--averaging", f.averaging, "macro | micro recognition F1")
      ->check(CLI::IsMember({"macro", "micro"}));
  cmd->add_option("--threads", f.threads, "parallel videos (0 = hardware)");
  cmd->add_flag("--print-config", f.print_config, "print the effective config and exit");
}

mekit::RunConfig resolve_config(const CLI::App* cmd, const DecoderFlags& f) {
  mekit::RunConfig cfg;
  if (!f.config_path.empty())
    cfg = mekit::run_config_from_json(mekit::read_text(f.config_path));

  auto given = [&](const char* name) { return cmd->count(name) > 0; };
  if (given("--decoder") || f.config_path.empty())
    cfg.decoder = f.decoder == "fixed" ? mekit::DecoderKind::fixed : mekit::DecoderKind::siss;
  if (given("--k")) cfg.k = f.k > 0 ? std::optional<int>(f.k) : std::nullopt;
  if (given("--theta-low") || f.config_path.empty()) cfg.theta_low = f.theta_low;
  if (given("--theta-high") || f.config_path.empty()) cfg.theta_high = f.theta_high;
  if (given("--patience") || f.config_path.empty()) cfg.patience = f.patience;
  if (given("--min-peak-height") || f.config_path.empty())
    cfg.min_peak_height = f.min_peak_height;
  if (given("--nms-iou") || f.config_path.empty()) cfg.nms_iou = f.nms_iou;
  if (given("--penalty") || f.config_path.empty()) {
    if (f.penalty_mode == "none") cfg.penalty.mode = mekit::PenaltyMode::none;
    else if (f.penalty_mode == "custom") cfg.penalty.mode = mekit::PenaltyMode::custom;
    else cfg.penalty.mode = mekit::PenaltyMode::inverse_prior;
  }
  if (given("--penalty-weights")) cfg.penalty.weights = f.penalty_weights;
  if (given("--penalty-epsilon") || f.config_path.empty())
    cfg.penalty.epsilon = f.penalty_epsilon;
  if (given("--averaging") || f.config_path.empty())
    cfg.averaging = f.averaging == "micro" ? mekit::Averaging::micro : mekit::Averaging::macro;
  if (given("--threads") || f.config_path.empty()) cfg.threads = f.threads;
  return cfg;
}

std::vector<double> uniform_priors(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

int run_decode(const CLI::App* cmd, const DecoderFlags& flags, const std::string& track_path,
               const std::string& out_path, const std::string& manifest_path,
               const std::string& video_id, double fps) {
  const mekit::RunConfig cfg = resolve_config(cmd, flags);
  if (flags.print_config) {
    std::cout << mekit::run_config_to_json(cfg);
    return 0;
  }
  mekit::ProbabilityTrack track = mekit::read_track(track_path, video_id, "", fps);
  std::vector<double> priors;
  if (!manifest_path.empty()) {
    const mekit::Manifest manifest = mekit::read_manifest(manifest_path);
    if (manifest.labels != track.labels)
      throw mekit::Error(mekit::Err::unknown_label,
                         "track classes differ from manifest labels");
    priors = manifest.class_priors;
  } else {
    priors = uniform_priors(track.labels.size());
  }
  const std::vector<mekit::LabeledInterval> intervals =
      mekit::decode_track(track, priors, cfg);
  mekit::write_intervals(intervals, track.video_id, out_path);
  std::cout << "decoded " << intervals.size() << " interval(s) -> " << out_path << "\n";
  return 0;
}

int run_eval(const CLI::App* cmd, const DecoderFlags& flags, const std::string& manifest_path,
             const std::string& out_dir, const std::string& predictions_dir,
             bool write_curves) {
  const mekit::RunConfig cfg = resolve_config(cmd, flags);
  if (flags.print_config) {
    std::cout << mekit::run_config_to_json(cfg);
    return 0;
  }
  const fs::path manifest_file(manifest_path);
  const mekit::Manifest manifest = mekit::read_manifest(manifest_file);
  const fs::path manifest_dir = manifest_file.parent_path();

  std::optional<fs::path> predictions;
  if (!predictions_dir.empty()) predictions = fs::path(predictions_dir);
  const mekit::EvalOutcome outcome =
      mekit::evaluate_manifest(manifest, manifest_dir, cfg, predictions);

  const fs::path out(out_dir);
  mekit::write_report(outcome.report, out / "report.json");
  mekit::write_report_csv(outcome.report, out / "report.csv");
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& entry = manifest.entries[i];
    mekit::write_intervals(outcome.intervals[i], entry.video_id,
                           out / "intervals" / (entry.video_id + ".json"));
    if (write_curves) {
      const mekit::LoadedVideo video = mekit::load_video(manifest, entry, manifest_dir);
      mekit::write_text_atomic(
          out / "curves" / (entry.video_id + "_curve.csv"),
          mekit::curve_csv(video.track, outcome.intervals[i], manifest.class_priors, cfg));
    }
  }
  const auto& overall = outcome.report.overall;
  std::cout << "videos=" << outcome.report.videos.size() << " tp=" << overall.tp
            << " fp=" << overall.fp << " fn=" << overall.fn << " f1_spot="
            << mekit::format_double(overall.f1_spot) << " f1_rec="
            << mekit::format_double(overall.f1_rec) << " strs="
            << mekit::format_double(overall.strs) << "\n"
            << "report -> " << (out / "report.json").string() << "\n";
  return 0;
}

mekit::SynthSpec synth_spec_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded())
    throw mekit::Error(mekit::Err::bad_config, "invalid synth spec JSON");
  mekit::SynthSpec spec;
  try {
    if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("frames")) spec.frames = doc["frames"].get<int>();
    if (doc.contains("n_events")) spec.n_events = doc["n_events"].get<int>();
    if (doc.contains("duration_range")) {
      spec.duration_min = doc["duration_range"].at(0).get<int>();
      spec.duration_max = doc["duration_range"].at(1).get<int>();
    }
    if (doc.contains("amplitude_range")) {
      spec.amplitude_min = doc["amplitude_range"].at(0).get<double>();
      spec.amplitude_max = doc["amplitude_range"].at(1).get<double>();
    }
    if (doc.contains("noise_level")) spec.noise_level = doc["noise_level"].get<double>();
    if (doc.contains("shape")) {
      const std::string shape = doc["shape"].get<std::string>();
      if (shape == "triangle") spec.shape = mekit::SynthSpec::Shape::triangle;
      else if (shape == "gaussian") spec.shape = mekit::SynthSpec::Shape::gaussian;
      else throw mekit::Error(mekit::Err::bad_config, "unknown shape \"" + shape + "\"");
    }
    if (doc.contains("labels")) spec.labels = doc["labels"].get<std::vector<std::string>>();
    if (doc.contains("class_mix"))
      spec.class_mix = doc["class_mix"].get<std::vector<double>>();
    if (doc.contains("fps")) spec.fps = doc["fps"].get<double>();
  } catch (const json::exception& e) {
    throw mekit::Error(mekit::Err::bad_config, std::string("synth spec: ") + e.what());
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"micro-expression spotting: interval decoding, evaluation, synthetic data "
               "and a two-head training demo"};
  app.require_subcommand(1);

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "decode one track into labeled intervals");
  DecoderFlags decode_flags;
  std::string track_path, decode_out = "intervals.json", decode_manifest, decode_video_id;
  double decode_fps = 30.0;
  add_decoder_flags(decode_cmd, decode_flags);
  decode_cmd->add_option("--track", track_path, "track CSV");
  decode_cmd->add_option("--out", decode_out, "output intervals JSON");
  decode_cmd->add_option("--manifest", decode_manifest,
                         "manifest supplying labels and class priors");
  decode_cmd->add_option("--video-id", decode_video_id, "id recorded in the output");
  decode_cmd->add_option("--fps", decode_fps, "frames per second of the track");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "decode + score every manifest entry");
  DecoderFlags eval_flags;
  std::string eval_manifest, eval_out = "eval_out", eval_predictions;
  bool eval_no_curves = false;
  add_decoder_flags(eval_cmd, eval_flags);
  eval_cmd->add_option("--manifest", eval_manifest, "suite manifest JSON");
  eval_cmd->add_option("--out-dir", eval_out, "directory for report.json/csv and curves");
  eval_cmd->add_option("--predictions", eval_predictions,
                       "directory of <video_id>.json interval files to score instead of decoding");
  eval_cmd->add_flag("--no-curves", eval_no_curves, "skip per-video curve CSVs");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic suite");
  std::string synth_out, synth_spec_path;
  int synth_videos = 20;
  std::uint64_t synth_base_seed = 1;
  mekit::SynthSpec synth_template;
  std::vector<std::string> synth_labels;
  std::string synth_shape = "triangle";
  synth_cmd->add_option("--out-dir", synth_out, "suite output directory")->required();
  synth_cmd->add_option("--spec", synth_spec_path, "SynthSpec JSON template");
  synth_cmd->add_option("--videos", synth_videos, "number of videos");
  synth_cmd->add_option("--base-seed", synth_base_seed, "video v uses seed base+v");
  synth_cmd->add_option("--frames", synth_template.frames, "frames per video");
  synth_cmd->add_option("--events", synth_template.n_events, "events per video");
  synth_cmd->add_option("--duration-min", synth_template.duration_min, "frames");
  synth_cmd->add_option("--duration-max", synth_template.duration_max, "frames");
  synth_cmd->add_option("--amplitude-min", synth_template.amplitude_min, "peak height");
  synth_cmd->add_option("--amplitude-max", synth_template.amplitude_max, "peak height");
  synth_cmd->add_option("--noise", synth_template.noise_level, "baseline noise level");
  synth_cmd->add_option("--shape", synth_shape, "triangle | gaussian")
      ->check(CLI::IsMember({"triangle", "gaussian"}));
  synth_cmd->add_option("--labels", synth_labels, "class list, neutral first");
  synth_cmd->add_option("--fps", synth_template.fps, "frames per second");

  // traindemo
  auto* train_cmd =
      app.add_subcommand("traindemo", "shared-trunk two-head training demo on a suite");
  DecoderFlags train_flags;
  std::string train_manifest, train_out = "train_out";
  mekit::TrainConfig train_config;
  int train_holdout = 5;
  add_decoder_flags(train_cmd, train_flags);
  train_cmd->add_option("--manifest", train_manifest, "suite manifest JSON");
  train_cmd->add_option("--out-dir", train_out, "directory for model, log and report");
  train_cmd->add_option("--lr", train_config.lr, "learning rate");
  train_cmd->add_option("--epochs", train_config.epochs, "training epochs");
  train_cmd->add_option("--segment-len", train_config.segment_len, "segment length, frames");
  train_cmd->add_option("--neg-pos-ratio", train_config.neg_pos_ratio,
                        "non-ME segments per ME segment");
  train_cmd->add_option("--class-weights", train_config.class_weights,
                        "override recognition loss weights");
  train_cmd->add_option("--seed", train_config.seed, "init/sampling seed");
  train_cmd->add_flag("--soft-targets", train_config.soft_spot_targets,
                      "triangular spotting targets instead of hard 0/1");
  train_cmd->add_option("--holdout", train_holdout, "videos held out for evaluation");

  // version
  auto* version_cmd = app.add_subcommand("version", "print version and format info");

  try {
    app.parse(argc, argv);

    if (decode_cmd->parsed()) {
      if (track_path.empty() && !decode_flags.print_config)
        throw mekit::Error(mekit::Err::bad_config, "decode requires --track");
      return run_decode(decode_cmd, decode_flags, track_path, decode_out, decode_manifest,
                        decode_video_id, decode_fps);
    }
    if (eval_cmd->parsed()) {
      if (eval_manifest.empty() && !eval_flags.print_config)
        throw mekit::Error(mekit::Err::bad_config, "eval requires --manifest");
      return run_eval(eval_cmd, eval_flags, eval_manifest, eval_out, eval_predictions,
                      !eval_no_curves);
    }
    if (synth_cmd->parsed()) {
      mekit::SynthSpec spec = synth_template;
      if (!synth_spec_path.empty()) {
        spec = synth_spec_from_json(mekit::read_text(synth_spec_path));
        // explicit flags win over the spec file
        if (synth_cmd->count("--frames")) spec.frames = synth_template.frames;
        if (synth_cmd->count("--events")) spec.n_events = synth_template.n_events;
        if (synth_cmd->count("--duration-min")) spec.duration_min = synth_template.duration_min;
        if (synth_cmd->count("--duration-max")) spec.duration_max = synth_template.duration_max;
        if (synth_cmd->count("--amplitude-min"))
          spec.amplitude_min = synth_template.amplitude_min;
        if (synth_cmd->count("--amplitude-max"))
          spec.amplitude_max = synth_template.amplitude_max;
        if (synth_cmd->count("--noise")) spec.noise_level = synth_template.noise_level;
        if (synth_cmd->count("--fps")) spec.fps = synth_template.fps;
      }
      if (synth_cmd->count("--shape"))
        spec.shape = synth_shape == "gaussian" ? mekit::SynthSpec::Shape::gaussian
                                               : mekit::SynthSpec::Shape::triangle;
      if (!synth_labels.empty()) spec.labels = synth_labels;
      const mekit::SuiteResult result =
          mekit::generate_suite(spec, synth_videos, synth_base_seed, synth_out);
      std::cout << "wrote " << result.manifest.entries.size() << " videos -> "
                << result.manifest_path.string() << "\n";
      return 0;
    }
    if (train_cmd->parsed()) {
      if (train_manifest.empty() && !train_flags.print_config)
        throw mekit::Error(mekit::Err::bad_config, "traindemo requires --manifest");
      const mekit::RunConfig cfg = resolve_config(train_cmd, train_flags);
      if (train_flags.print_config) {
        std::cout << mekit::run_config_to_json(cfg);
        return 0;
      }
      const fs::path manifest_file(train_manifest);
      const mekit::Manifest manifest = mekit::read_manifest(manifest_file);
      const fs::path manifest_dir = manifest_file.parent_path();
      const mekit::TrainOutcome outcome =
          mekit::train_demo(manifest, manifest_dir, train_config, train_holdout);

      const fs::path out(train_out);
      mekit::write_text_atomic(out / "model.json",
                               mekit::model_to_json(outcome.model, outcome.labels));
      mekit::write_text_atomic(out / "training_log.csv",
                               mekit::training_log_to_csv(outcome.log));
      if (train_holdout > 0) {
        const mekit::EvalReport heldout = mekit::evaluate_model_heldout(
            outcome.model, manifest, manifest_dir, train_holdout,
            train_config.segment_len, cfg);
        mekit::write_report(heldout, out / "heldout_report.json");
        mekit::write_report_csv(heldout, out / "heldout_report.csv");
        std::cout << "heldout f1_spot=" << mekit::format_double(heldout.overall.f1_spot)
                  << " strs=" << mekit::format_double(heldout.overall.strs) << "\n";
      }
      std::cout << "final loss=" << mekit::format_double(outcome.log.back().total)
                << " -> " << (out / "model.json").string() << "\n";
      return 0;
    }
    if (version_cmd->parsed()) {
      std::cout << "mekit " << mekit::kVersion << " (formats v" << mekit::kFormatVersion
                << "; simd "
                << mekit::kernels::backend_name(mekit::kernels::active_backend()) << ")\n";
      return 0;
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      (void)app.exit(e);
      return 0;
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const mekit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
