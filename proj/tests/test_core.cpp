#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>

#include "mekit/io.hpp"
#include "mekit/rng.hpp"
#include "support/generators.hpp"

using namespace mekit;
namespace fs = std::filesystem;
namespace ts = mekit::testsupport;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mekit_core_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("read_track: three-frame round trip") {
  TempDir dir;
  const fs::path file = dir.path / "t.csv";
  write_file(file,
             "frame,spot,p_neutral,p_happy\n"
             "0,0,1,0\n"
             "1,0.5,0.25,0.75\n"
             "2,1,0,1\n");
  const ProbabilityTrack track = read_track(file, "vid", "s1", 30.0);
  CHECK(track.frames() == 3);
  CHECK(track.classes() == 2);
  CHECK(track.spot == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(track.labels == std::vector<std::string>{"neutral", "happy"});
  CHECK(track.emo_row(1)[1] == 0.75);
  CHECK(track.video_id == "vid");
}

TEST_CASE("read_track: row inside tolerance renormalizes to exactly 1") {
  TempDir dir;
  const fs::path file = dir.path / "t.csv";
  write_file(file,
             "frame,spot,p_neutral,p_happy\n"
             "0,0.1,0.4993,0.5\n");
  const ProbabilityTrack track = read_track(file);
  double sum = 0.0;
  for (double v : track.emo_row(0)) sum += v;
  CHECK(std::fabs(sum - 1.0) <= 1e-12);
}

TEST_CASE("read_track: row sum far from 1 is rejected with a line number") {
  TempDir dir;
  const fs::path file = dir.path / "t.csv";
  write_file(file,
             "frame,spot,p_neutral,p_happy\n"
             "0,0.1,0.5,0.5\n"
             "1,0.1,0.45,0.45\n");
  try {
    read_track(file);
    FAIL("expected RowSumOutOfTolerance");
  } catch (const Error& e) {
    CHECK(e.code() == Err::row_sum_out_of_tolerance);
    CHECK(e.line() == 3);
  }
}

TEST_CASE("read_track: typed errors") {
  TempDir dir;
  const fs::path file = dir.path / "t.csv";

  CHECK_THROWS_AS(read_track(dir.path / "absent.csv"), Error);
  try {
    read_track(dir.path / "absent.csv");
  } catch (const Error& e) {
    CHECK(e.code() == Err::missing_file);
  }

  write_file(file, "frame,spot,p_neutral,p_happy\n0,0.1,0.5\n");
  try {
    read_track(file);
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(e.code() == Err::malformed_row);
    CHECK(e.line() == 2);
  }

  write_file(file, "frame,spot,p_neutral,p_happy\n0,0.1,0.5,0.5\n2,0.1,0.5,0.5\n");
  try {
    read_track(file);
    FAIL("expected NonContiguousFrames");
  } catch (const Error& e) {
    CHECK(e.code() == Err::non_contiguous_frames);
  }

  write_file(file, "frame,spot,p_neutral,p_happy\n0,1.2,0.5,0.5\n");
  try {
    read_track(file);
    FAIL("expected ProbabilityOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Err::probability_out_of_range);
  }

  write_file(file, "frame,spot,p_happy,p_neutral\n0,0.1,0.5,0.5\n");
  CHECK_THROWS_AS(read_track(file), Error);  // neutral must be first
}

TEST_CASE("annotation round trips") {
  TempDir dir;
  const fs::path file = dir.path / "a.json";

  Annotation empty;
  empty.video_id = "v";
  empty.subject_id = "s";
  empty.fps = 30.0;
  write_annotation(empty, file);
  CHECK(read_annotation(file) == empty);

  Annotation ann = empty;
  ann.events.push_back({{10, 12, 20}, "surprise"});
  write_annotation(ann, file);
  const Annotation back = read_annotation(file);
  CHECK(back == ann);
  CHECK(back.events[0].interval.apex == 12);
}

TEST_CASE("annotation label checking and event validation") {
  TempDir dir;
  const fs::path file = dir.path / "a.json";
  Annotation ann;
  ann.video_id = "v";
  ann.subject_id = "s";
  ann.events.push_back({{10, 12, 20}, "surprise"});
  write_annotation(ann, file);

  const std::vector<std::string> labels{"neutral", "happy"};
  try {
    read_annotation(file, labels);
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.code() == Err::unknown_label);
  }

  CHECK_THROWS_AS(validate(Interval{5, 4, 6}), Error);
  Annotation dup = ann;
  dup.events.push_back(dup.events[0]);
  CHECK_THROWS_AS(validate(dup), Error);
}

TEST_CASE("manifest: priors round-trip bit-exactly as decimal text") {
  TempDir dir;
  const fs::path file = dir.path / "m.json";
  Manifest manifest;
  manifest.labels = {"neutral", "a", "b"};
  manifest.class_priors = {0.5, 0.3, 0.2};
  manifest.entries.push_back({"v0", "s0", "tracks/v0.csv", "annotations/v0.json", 30.0});
  write_manifest(manifest, file);
  const Manifest back = read_manifest(file);
  CHECK(back.class_priors == manifest.class_priors);
  CHECK(back == manifest);

  Manifest dup = manifest;
  dup.entries.push_back(dup.entries[0]);
  try {
    validate(dup);
    FAIL("expected DuplicateVideoId");
  } catch (const Error& e) {
    CHECK(e.code() == Err::duplicate_video_id);
  }
}

TEST_CASE("write -> read -> write is a byte-level fixpoint") {
  TempDir dir;
  SplitMix64 rng(101);
  for (int it = 0; it < 40; ++it) {
    const ProbabilityTrack track = ts::random_track(rng);
    const fs::path f1 = dir.path / "t1.csv", f2 = dir.path / "t2.csv";
    write_track(track, f1);
    const ProbabilityTrack back =
        read_track(f1, track.video_id, track.subject_id, track.fps);
    write_track(back, f2);
    CHECK(read_text(f1) == read_text(f2));

    const Manifest manifest = ts::random_manifest(rng);
    const fs::path m1 = dir.path / "m1.json", m2 = dir.path / "m2.json";
    write_manifest(manifest, m1);
    write_manifest(read_manifest(m1), m2);
    CHECK(read_text(m1) == read_text(m2));

    const Annotation ann = ts::random_annotation(rng, manifest.labels);
    const fs::path a1 = dir.path / "a1.json", a2 = dir.path / "a2.json";
    write_annotation(ann, a1);
    write_annotation(read_annotation(a1), a2);
    CHECK(read_text(a1) == read_text(a2));
  }
}

TEST_CASE("intervals file round trip") {
  TempDir dir;
  const fs::path file = dir.path / "iv.json";
  std::vector<LabeledInterval> intervals{{{2, 4, 7}, "happy", 0.75},
                                         {{30, 31, 39}, "surprise", 0.5}};
  write_intervals(intervals, "vid9", file);
  const auto back = read_intervals(file);
  REQUIRE(back.size() == 2);
  CHECK(back[0].first == "vid9");
  CHECK(back[0].second == intervals[0]);
  CHECK(back[1].second == intervals[1]);
}

TEST_CASE("malformed inputs never yield a value") {
  TempDir dir;
  const fs::path file = dir.path / "x.json";
  write_file(file, "{\"video_id\": 3}");
  CHECK_THROWS_AS(read_annotation(file), Error);
  write_file(file, "not json at all");
  CHECK_THROWS_AS(read_manifest(file), Error);
  write_file(file, "{\"labels\": [\"neutral\",\"a\"], \"class_priors\": [0.5, 0.5], "
                   "\"entries\": [], \"extra\": 1}");
  CHECK_THROWS_AS(read_manifest(file), Error);
}
