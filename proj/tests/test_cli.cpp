#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "doctest.h"
#include "frap/commands.hpp"
#include "frap/synthgen.hpp"
#include "support.hpp"

using namespace frap;

namespace {

std::vector<std::filesystem::path> in_dir(const std::filesystem::path& dir, const std::string& prefix,
                                          std::initializer_list<int> indices) {
  std::vector<std::filesystem::path> out;
  for (int i : indices) out.push_back(dir / (prefix + "-" + std::to_string(i) + ".prov"));
  return out;
}

int run(const std::string& args) {
  const std::string cmd = std::string(FRAP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Table1 {
  testing::TempDir dir;
  std::filesystem::path model;
  Table1() {
    std::ostringstream out, err;
    REQUIRE(cmd_gen("table1", std::nullopt, dir.path(), std::nullopt, out, err) == 0);
    model = dir / "table1.frap";
    REQUIRE(cmd_learn(in_dir(dir.path(), "table1", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), Config{}, model, out, err) == 0);
  }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("learn, inspect and detect on table1") {
    Table1 t;
    std::ifstream report(t.model.string() + ".report");
    std::stringstream rs;
    rs << report.rdbuf();
    CHECK(rs.str().find("discarded table1-7 ") != std::string::npos);
    CHECK(rs.str().find("metric=kld") != std::string::npos);

    std::ostringstream out, err;
    CHECK(cmd_inspect(t.model, out, err) == 0);
    CHECK(out.str().find("clusters: 1\n") != std::string::npos);
    CHECK(out.str().find("cluster 0: size 9 ") != std::string::npos);

    // Relearning with the same configuration reproduces the summary.
    std::ostringstream o2, e2, o3, e3;
    const auto again = t.dir / "again.frap";
    REQUIRE(cmd_learn(in_dir(t.dir.path(), "table1", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), Config{}, again, o2, e2) == 0);
    CHECK(cmd_inspect(again, o3, e3) == 0);
    CHECK(o3.str() == out.str());

    std::ostringstream bad_out, bad_err;
    CHECK(cmd_detect(t.model, in_dir(t.dir.path(), "table1", {7}), Config{}, std::nullopt, bad_out, bad_err) ==
          kExitAnomaly);
    CHECK(bad_out.str().find(",anomalous,") != std::string::npos);

    std::ostringstream ok_out, ok_err;
    CHECK(cmd_detect(t.model, in_dir(t.dir.path(), "table1", {0, 3}), Config{}, std::nullopt, ok_out, ok_err) ==
          kExitClean);
    CHECK(ok_out.str().find("anomalous") == std::string::npos);
  }

  TEST_CASE("short stream gives no verdicts and exits cleanly") {
    Table1 t;
    auto edges = read_instance(t.dir / "table1-0.prov");
    edges.resize(10);
    write_instance(t.dir / "short.prov", edges);
    std::ostringstream out, err;
    CHECK(cmd_detect(t.model, {t.dir / "short.prov"}, Config{}, std::nullopt, out, err) == kExitClean);
    CHECK(out.str().empty());
    CHECK(err.str().find("short") != std::string::npos);
  }

  TEST_CASE("learn edge cases") {
    testing::TempDir dir;
    const auto edges = read_instance([&] {
      std::ostringstream o, e;
      cmd_gen("homogeneous", std::nullopt, dir.path(), std::nullopt, o, e);
      return dir / "homogeneous-0.prov";
    }());
    write_instance(dir / "copy.prov", edges);
    std::ostringstream out, err;
    CHECK(cmd_learn({dir / "homogeneous-0.prov", dir / "copy.prov"}, Config{}, dir / "same.frap", out, err) == 0);
    const auto same = load_model(dir / "same.frap");
    REQUIRE(same.clusters.size() == 1);
    CHECK(same.clusters[0].radius == 0);

    std::vector<ProvenanceEdge> other;
    for (std::uint64_t s = 1; s <= 1300; ++s) {
      other.push_back(testing::make_edge(s, "wasInformedBy", "x" + std::to_string(s), "agent:user",
                                         "y" + std::to_string(s), "entity:pipe"));
    }
    write_instance(dir / "other.prov", other);
    std::ostringstream o2, e2;
    CHECK(cmd_learn({dir / "homogeneous-0.prov", dir / "other.prov"}, Config{}, dir / "x.frap", o2, e2) != 0);
    CHECK(e2.str().find("AllSingletons") != std::string::npos);

    std::ostringstream o3, e3;
    CHECK(cmd_learn({dir / "homogeneous-0.prov"}, Config{}, dir / "y.frap", o3, e3) == kExitUsage);
    std::ostringstream o4, e4;
    CHECK(cmd_learn({dir / "missing.prov", dir / "copy.prov"}, Config{}, dir / "z.frap", o4, e4) == kExitData);
  }

  TEST_CASE("revise requires confirmation and adds a cluster") {
    Table1 t;
    std::ostringstream o, e;
    REQUIRE(cmd_gen("novel", std::nullopt, t.dir.path(), std::nullopt, o, e) == 0);
    const auto novel = in_dir(t.dir.path(), "novel", {0, 1, 2});
    const auto revised = t.dir / "revised.frap";

    std::ostringstream o1, e1;
    CHECK(cmd_revise(t.model, novel, false, revised, o1, e1) == kExitUsage);
    CHECK(e1.str().find("MissingConfirmation") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(revised));

    std::ostringstream o2, e2;
    CHECK(cmd_detect(t.model, {novel[0]}, Config{}, std::nullopt, o2, e2) == kExitAnomaly);

    std::ostringstream o3, e3;
    CHECK(cmd_revise(t.model, novel, true, revised, o3, e3) == kExitClean);
    CHECK(load_model(revised).clusters.size() == load_model(t.model).clusters.size() + 1);

    std::ostringstream o4, e4;
    CHECK(cmd_detect(revised, {novel[0]}, Config{}, std::nullopt, o4, e4) == kExitClean);
  }

  TEST_CASE("corrupt model") {
    testing::TempDir dir;
    std::ofstream(dir / "junk.frap") << "garbage\n";
    std::ostringstream out, err;
    CHECK(cmd_inspect(dir / "junk.frap", out, err) == kExitData);
    CHECK(err.str().find("VersionMismatch") != std::string::npos);
  }

  TEST_CASE("gen rejects unknown scenarios") {
    testing::TempDir dir;
    std::ostringstream out, err;
    CHECK(cmd_gen("nope", std::nullopt, dir.path(), std::nullopt, out, err) == kExitUsage);
  }

  TEST_CASE("binary exit codes") {
    testing::TempDir dir;
    const auto d = dir.path().string();
    CHECK(run("gen --scenario table1 --out-dir " + d) == 0);
    std::string files;
    for (int i = 0; i < 10; ++i) files += " " + d + "/table1-" + std::to_string(i) + ".prov";
    CHECK(run("learn --out " + d + "/m.frap" + files) == 0);
    CHECK(run("detect --model " + d + "/m.frap " + d + "/table1-2.prov") == 0);
    CHECK(run("detect --model " + d + "/m.frap " + d + "/table1-7.prov") == 1);
    CHECK(run("detect --model " + d + "/m.frap --metric kld " + d + "/table1-2.prov") == 2);
    CHECK(run("learn --metric cosine --out " + d + "/x.frap" + files) == 2);
    CHECK(run("revise --model " + d + "/m.frap --out " + d + "/r.frap " + d + "/table1-2.prov") == 2);
    CHECK(run("inspect " + d + "/missing.frap") == 3);
    CHECK(run("learn --epsilon 0 --out " + d + "/x.frap" + files) == 2);
  }
}
