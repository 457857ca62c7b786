// SPDX-License-Identifier: Apache-2.0
//
// Runs the built command-line tool end to end.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "stealthrmt/reports.hpp"

namespace fs = std::filesystem;
using stealthrmt::reports::read_text_file;
using stealthrmt::reports::write_text_file;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "stealthrmt_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  std::string cmd = std::string(STEALTHRMT_CLI) + " " + args + " > " + (scratch() / "stdout.txt").string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("flags override file values") {
  write_text_file(scratch() / "seed1.json", R"({"master_seed": 1, "trials": 20, "beta_grid": [5]})");
  auto out = scratch() / "prec";
  REQUIRE(run("ergodic --config " + (scratch() / "seed1.json").string() + " --beta 2,10,30 --seed 7 --out " +
              out.string()) == 0);
  auto m = nlohmann::json::parse(read_text_file(out / "ergodic.manifest.json"));
  CHECK(m.at("master_seed") == 7);
  CHECK(m.at("config").at("trials") == 20);
  CHECK(m.at("config").at("beta_grid") == nlohmann::json::array({2.0, 10.0, 30.0}));
  CHECK(fs::exists(out / "ergodic.csv"));
  CHECK(fs::exists(out / "ergodic.gp"));
  CHECK(run("replay " + (out / "ergodic.manifest.json").string()) == 0);
}

TEST_CASE("exit codes") {
  write_text_file(scratch() / "bad_key.json", R"({"unknown": 1})");
  write_text_file(scratch() / "bad_r.json", R"({"decay_r": 1.5})");
  CHECK(run("ergodic --config " + (scratch() / "bad_key.json").string()) == 2);
  CHECK(run("ergodic --config " + (scratch() / "bad_r.json").string()) == 2);
  CHECK(run("ergodic --no-such-flag") == 2);
  CHECK(run("variance --beta 1 --trials 5 --out " + (scratch() / "dom").string()) == 3);
  CHECK(run("ergodic --case /nonexistent/case.m") == 4);
  CHECK(run("ergodic --config /nonexistent/config.json") == 4);
  CHECK(run("parse-case --case ieee118") == 0);
  CHECK(read_text_file(scratch() / "stdout.txt").find("states n: 117") != std::string::npos);

  auto out = scratch() / "tamper";
  REQUIRE(run("corr-check --trials 200 --beta 2 --out " + out.string()) == 0);
  write_text_file(out / "corr_check.csv", "changed\n");
  CHECK(run("replay " + (out / "corr_check.manifest.json").string()) == 1);
}

TEST_CASE("case directory comes from the environment") {
  fs::path dir = scratch() / "cases";
  fs::create_directories(dir);
  fs::copy_file(fs::path(STEALTHRMT_TEST_CASE_DIR) / "case30.m", dir / "case30.m",
                fs::copy_options::overwrite_existing);
  std::string env = "STEALTHRMT_CASE_DIR=" + dir.string() + " ";
  std::string cmd = env + STEALTHRMT_CLI + " parse-case > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  cmd = env + STEALTHRMT_CLI + " parse-case --case ieee118 > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 4);
}
