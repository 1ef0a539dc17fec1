// End-to-end tests of the eppc binary: subcommand round trips, exit-code
// mapping, and byte-level determinism of generated files. Each case shells
// out to the real executable (path injected at configure time).

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "epp/artifact.hpp"
#include "epp/textio.hpp"

namespace {

struct CliResult {
  int code = -1;
  std::string output;  // stdout + stderr interleaved
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string capture = "cli_scratch/capture_" + std::to_string(counter++) + ".txt";
  const std::string cmd =
      std::string("\"") + EPPC_PATH + "\" " + args + " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.output = epp::read_file(capture);
  return r;
}

// One scratch directory for the whole suite; files are prefixed per case.
struct Scratch {
  Scratch() { std::filesystem::create_directories("cli_scratch"); }
  std::string operator()(const std::string& name) const {
    return "cli_scratch/" + name;
  }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("help and missing arguments map to exit codes 0 and 1") {
  Scratch p;
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("train --help").code == 0);
  CHECK(run_cli("").code == 1);                       // subcommand required
  CHECK(run_cli("evaluate --data x.csv").code == 1);  // --out-dir missing
  CHECK(run_cli("frobnicate").code == 1);             // unknown subcommand
}

TEST_CASE("generate is deterministic in the seed and validates its config") {
  Scratch p;
  const std::string base = " --stations 3 --days 20 --members 4";
  REQUIRE(run_cli("generate --out " + p("g1.csv") + base + " --seed 9").code == 0);
  REQUIRE(run_cli("generate --out " + p("g2.csv") + base + " --seed 9").code == 0);
  REQUIRE(run_cli("generate --out " + p("g3.csv") + base + " --seed 10").code == 0);
  CHECK(epp::read_file(p("g1.csv")) == epp::read_file(p("g2.csv")));
  CHECK(epp::read_file(p("g1.csv")) != epp::read_file(p("g3.csv")));

  CHECK(run_cli("generate --out " + p("bad.csv") + " --stations 0").code == 1);
  CHECK(run_cli("generate --out " + p("bad.csv") + " --underdispersion 0").code == 1);
  CHECK(run_cli("generate --out " + p("bad.csv") + " --start nonsense").code == 1);
}

TEST_CASE("train maps unknown models and bad inputs to usage/data errors") {
  Scratch p;
  REQUIRE(run_cli("generate --out " + p("t.csv") + " --stations 3 --days 30 --members 4").code == 0);

  const CliResult unknown =
      run_cli("train --model bogus --data " + p("t.csv") + " --out " + p("m.json"));
  CHECK(unknown.code == 1);
  CHECK(unknown.output.find("unknown model") != std::string::npos);

  CHECK(run_cli("train --model emos-gl --data " + p("nope.csv") + " --out " +
                p("m.json")).code == 2);

  // Too little data for the requested batch size is a data error (exit 2):
  // the flag itself is legal, the dataset cannot support it.
  CHECK(run_cli("train --model fcn --data " + p("t.csv") + " --out " + p("m.json") +
                " --batch 4096").code == 2);
  // A structurally invalid flag value is a usage error (exit 1).
  CHECK(run_cli("train --model fcn --data " + p("t.csv") + " --out " + p("m.json") +
                " --holdout 0.9").code == 1);
}

TEST_CASE("train/predict round trip works for every family and is deterministic") {
  Scratch p;
  const std::string gen = " --stations 3 --days 80 --members 4 --seed 21";
  REQUIRE(run_cli("generate --out " + p("tr.csv") + gen).code == 0);
  REQUIRE(run_cli("generate --out " + p("va.csv") +
                  " --stations 3 --days 20 --members 4 --seed 21 --start 2014-03-22")
              .code == 0);

  const std::string nets = " --hidden 4 --epochs 3 --batch 16 --runs 1";
  const std::vector<std::pair<std::string, std::string>> jobs = {
      {"emos-gl", ""},
      {"emos-loc", ""},
      {"emos-loc-bst", " --boost-iters 150"},
      {"qrf", " --trees 20"},
      {"fcn", nets},
      {"nn-aux-emb", nets},
  };
  for (const auto& [model, extra] : jobs) {
    CAPTURE(model);
    const std::string art1 = p(model + "_1.json");
    const std::string art2 = p(model + "_2.json");
    REQUIRE(run_cli("train --model " + model + " --data " + p("tr.csv") +
                    " --out " + art1 + extra).code == 0);
    REQUIRE(run_cli("train --model " + model + " --data " + p("tr.csv") +
                    " --out " + art2 + extra).code == 0);

    const epp::ModelArtifact loaded = epp::load_artifact(art1);
    CHECK(loaded.family == model);

    const std::string pr1 = p(model + "_1.preds.csv");
    const std::string pr2 = p(model + "_2.preds.csv");
    REQUIRE(run_cli("predict --artifact " + art1 + " --data " + p("va.csv") +
                    " --out " + pr1).code == 0);
    REQUIRE(run_cli("predict --artifact " + art2 + " --data " + p("va.csv") +
                    " --out " + pr2).code == 0);
    // Identical flags must give bit-identical predictions (training included).
    CHECK(epp::read_file(pr1) == epp::read_file(pr2));

    const std::string header = epp::read_file(pr1).substr(0, 60);
    if (model == "qrf") {
      CHECK(header.find(",q1,") != std::string::npos);
    } else {
      CHECK(header.find(",mu,sigma") != std::string::npos);
    }
  }
}

TEST_CASE("evaluate writes the report files and honors --importance") {
  Scratch p;
  REQUIRE(run_cli("generate --out " + p("etr.csv") +
                  " --stations 3 --days 80 --members 4 --seed 5").code == 0);
  REQUIRE(run_cli("generate --out " + p("eva.csv") +
                  " --stations 3 --days 25 --members 4 --seed 5 --start 2014-03-22")
              .code == 0);
  REQUIRE(run_cli("train --model emos-gl --data " + p("etr.csv") + " --out " +
                  p("egl.json")).code == 0);
  REQUIRE(run_cli("train --model emos-loc --data " + p("etr.csv") + " --out " +
                  p("elo.json")).code == 0);

  const CliResult ev = run_cli(
      "evaluate --data " + p("eva.csv") + " --artifact " + p("egl.json") +
      " --artifact " + p("elo.json") + " --out-dir " + p("report") +
      " --reference emos-gl --importance --importance-seed 3 --print-config");
  REQUIRE(ev.code == 0);
  CHECK(ev.output.find("mean_crps") != std::string::npos);
  CHECK(ev.output.find("config (evaluate)") != std::string::npos);

  for (const std::string f :
       {"crps_overall.txt", "crps_overall.csv", "crps_stations.txt",
        "best_model.txt", "significance.txt", "crpss_vs_emos-gl.txt",
        "hist_raw.txt", "hist_emos-gl.txt", "hist_emos-loc.txt",
        "importance_emos-gl.csv", "importance_emos-loc.csv"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(p("report/" + f)));
  }

  // An unknown reference name is a usage error.
  CHECK(run_cli("evaluate --data " + p("eva.csv") + " --artifact " + p("egl.json") +
                " --out-dir " + p("r2") + " --reference nope").code == 1);
}

TEST_CASE("importance subcommand writes sorted tables and rejects bad artifacts") {
  Scratch p;
  REQUIRE(run_cli("generate --out " + p("itr.csv") +
                  " --stations 3 --days 60 --members 4 --seed 6").code == 0);
  REQUIRE(run_cli("train --model emos-loc --data " + p("itr.csv") + " --out " +
                  p("ilo.json")).code == 0);

  const CliResult imp = run_cli("importance --artifact " + p("ilo.json") +
                                " --data " + p("itr.csv") + " --out-dir " +
                                p("imp") + " --seed 4");
  REQUIRE(imp.code == 0);
  CHECK(imp.output.find("t2m_mean") != std::string::npos);
  CHECK(std::filesystem::exists(p("imp/importance_emos-loc.txt")));
  CHECK(std::filesystem::exists(p("imp/importance_emos-loc.csv")));

  // A tampered format version is a data error (exit 2).
  std::string doc = epp::read_file(p("ilo.json"));
  const std::string needle = "\"format_version\":1";
  const std::size_t at = doc.find(needle);
  REQUIRE(at != std::string::npos);
  doc.replace(at, needle.size(), "\"format_version\":7");
  epp::write_file_atomic(p("bad.json"), doc);
  CHECK(run_cli("importance --artifact " + p("bad.json") + " --data " + p("itr.csv") +
                " --out-dir " + p("imp2")).code == 2);
}

TEST_SUITE_END();
