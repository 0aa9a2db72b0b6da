// Runs the trackgraph executable as a subprocess.
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "trackgraph/io_formats.hpp"
#include "trackgraph/metrics.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = TRACKGRAPH_CLI;
const std::string kScenarios = TRACKGRAPH_SCENARIO_DIR;

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("trackgraph_cli_" + std::string(info->name()) + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of the command; stdout and stderr land in files.
  int run(const std::string& args) {
    const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + path("stdout.txt") +
                            "\" 2> \"" + path("stderr.txt") + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& file) const {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthIsDeterministicPerSeed) {
  ASSERT_EQ(run("synth --spec " + kScenarios + "/demo.json --seed 5 --out " + path("a")), 0);
  ASSERT_EQ(run("synth --spec " + kScenarios + "/demo.json --seed 5 --out " + path("b")), 0);
  ASSERT_EQ(run("synth --spec " + kScenarios + "/demo.json --seed 6 --out " + path("c")), 0);
  for (const char* f : {"detections.csv", "features.jsonl", "gt.csv"}) {
    EXPECT_EQ(slurp(path("a/") + f), slurp(path("b/") + f)) << f;
    EXPECT_FALSE(slurp(path("a/") + f).empty()) << f;
  }
  EXPECT_NE(slurp(path("a/detections.csv")), slurp(path("c/detections.csv")));
}

TEST_F(Cli, EmptyScenarioWritesEmptyFiles) {
  ASSERT_EQ(run("synth --spec " + kScenarios + "/empty.json --seed 1 --out " + path("e")), 0);
  for (const char* f : {"detections.csv", "features.jsonl", "gt.csv"}) {
    ASSERT_TRUE(fs::exists(path("e/") + f)) << f;
    EXPECT_EQ(fs::file_size(path("e/") + f), 0u) << f;
  }
}

TEST_F(Cli, MalformedScenarioFails) {
  std::ofstream(path("bad.json")) << "{\"frames\": \"many\"}";
  EXPECT_NE(run("synth --spec " + path("bad.json") + " --out " + path("x")), 0);
  EXPECT_FALSE(slurp(path("stderr.txt")).empty());
}

TEST_F(Cli, TrackWithoutFeaturesNamesTheRequirement) {
  ASSERT_EQ(run("synth --spec " + kScenarios + "/clean_five.json --out " + path("s")), 0);
  EXPECT_NE(run("track --detections " + path("s/detections.csv") + " --output " +
                path("t.csv")),
            0);
  EXPECT_NE(slurp(path("stderr.txt")).find("features"), std::string::npos);
}

TEST_F(Cli, TrackIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(run("synth --spec " + kScenarios + "/demo.json --seed 3 --out " + path("s")), 0);
  const std::string base = "track --detections " + path("s/detections.csv") + " --features " +
                           path("s/features.jsonl") + " --config " + path("s/sequence.cfg");
  ASSERT_EQ(run(base + " --output " + path("t1.csv")), 0);
  EXPECT_NE(slurp(path("stdout.txt")).find("born="), std::string::npos);
  ASSERT_EQ(run(base + " --output " + path("t2.csv") + " --serial"), 0);
  ASSERT_EQ(run(base + " --output " + path("t3.csv") + " --jobs 3"), 0);
  EXPECT_EQ(slurp(path("t1.csv")), slurp(path("t2.csv")));
  EXPECT_EQ(slurp(path("t1.csv")), slurp(path("t3.csv")));
}

TEST_F(Cli, NoiselessTrackKeepsIdsAndScoresPerfectly) {
  ASSERT_EQ(run("synth --spec " + kScenarios + "/clean_five.json --out " + path("s")), 0);
  ASSERT_EQ(run("track --detections " + path("s/detections.csv") + " --features " +
                path("s/features.jsonl") + " --config " + path("s/sequence.cfg") +
                " --output " + path("t.csv")),
            0);
  ASSERT_EQ(run("eval --tracks " + path("t.csv") + " --gt " + path("s/gt.csv") + " --report " +
                path("r.txt")),
            0);
  EXPECT_NE(slurp(path("r.txt")).find("mota=1.000000000"), std::string::npos);
  std::ifstream in(path("t.csv"));
  const auto rows = trackgraph::parse_tracks(in);
  std::set<trackgraph::TrackId> ids;
  for (const auto& r : rows) ids.insert(r.track_id);
  EXPECT_EQ(ids.size(), 5u);
}

TEST_F(Cli, MultipleSequencesAndAppearanceNone) {
  ASSERT_EQ(run("synth --spec " + kScenarios + "/clean_five.json --out " + path("a")), 0);
  ASSERT_EQ(run("synth --spec " + kScenarios + "/occlusion.json --out " + path("b")), 0);
  ASSERT_EQ(run("track --appearance none --detections " + path("a/detections.csv") +
                " --detections " + path("b/detections.csv") + " --output " + path("a.csv") +
                " --output " + path("b.csv") + " --jobs 2"),
            0);
  EXPECT_TRUE(fs::exists(path("a.csv")));
  EXPECT_TRUE(fs::exists(path("b.csv")));
}

TEST_F(Cli, EvalGroundTruthAgainstItself) {
  ASSERT_EQ(run("synth --spec " + kScenarios + "/demo.json --out " + path("s")), 0);
  std::ifstream gt_in(path("s/gt.csv"));
  const auto gt = trackgraph::parse_gt(gt_in);
  std::vector<trackgraph::TrackRow> rows;
  for (const auto& g : gt) rows.push_back({g.frame_index, g.gt_id, g.bbox});
  {
    std::ofstream out(path("self.csv"));
    trackgraph::write_track_rows(out, rows);
  }
  ASSERT_EQ(run("eval --tracks " + path("self.csv") + " --gt " + path("s/gt.csv") +
                " --report " + path("r.txt")),
            0);
  EXPECT_EQ(slurp(path("r.txt")).substr(0, 16), "mota=1.000000000");
  EXPECT_NE(slurp(path("stdout.txt")).find("MOTA"), std::string::npos);

  {
    std::ofstream out(path("none.csv"));
    trackgraph::write_track_rows(out, {});
  }
  ASSERT_EQ(run("eval --tracks " + path("none.csv") + " --gt " + path("s/gt.csv") +
                " --report " + path("r0.txt")),
            0);
  EXPECT_EQ(slurp(path("r0.txt")).substr(0, 16), "mota=0.000000000");
}

TEST_F(Cli, EvalEmptyGroundTruthFails) {
  std::ofstream(path("gt.csv")).close();
  {
    std::ofstream out(path("t.csv"));
    trackgraph::write_track_rows(out, {});
  }
  EXPECT_NE(run("eval --tracks " + path("t.csv") + " --gt " + path("gt.csv")), 0);
}

TEST_F(Cli, DemoPipelineRuns) {
  ASSERT_EQ(run("pipeline --spec " + kScenarios + "/demo.json --seed 1 --out " + path("p") +
                " --report " + path("p.txt")),
            0);
  EXPECT_TRUE(fs::exists(path("p/tracks.csv")));
  EXPECT_NE(slurp(path("stdout.txt")).find("MOTA"), std::string::npos);
  EXPECT_NE(slurp(path("p.txt")).find("gt_total="), std::string::npos);
}

TEST_F(Cli, UnknownFlagFails) {
  EXPECT_NE(run("track --no-such-flag"), 0);
}
