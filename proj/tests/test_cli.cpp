#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>

#include "pamri/io.hpp"
#include "pamri/rng.hpp"

using namespace pamri;

namespace {

struct TempDir {
  std::string path;
  explicit TempDir(const char* tag) {
    path = (std::filesystem::temp_directory_path() /
            (std::string("pamri_cli_") + tag + "_" +
             std::to_string(Rng(clock()).next_u64() % 100000)))
               .string();
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PAMRI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const char* kConfig = R"({
  "seed": 3,
  "coils": 2,
  "phantom_suite": {"count": 2, "height": 32, "width": 32,
                    "lesions_per_subject": 1, "seed": 9},
  "mask": {"strategy": "no_learn", "R": 4.0, "mode": "lines1d"},
  "recon": {"K": 1, "n_inner": 1,
            "cg": {"tol": 1e-5, "max_iter": 12},
            "denoiser": {"kind": "tv_prox", "weight": 0.05, "iters": 8}},
  "provider": {"kind": "boxes", "feather": 2.0},
  "optimizer": {"kind": "greedy"},
  "workers": 2
})";

}  // namespace

TEST_CASE("run subcommand succeeds and emits byte-identical reruns") {
  TempDir tmp("run");
  const std::string cfg_path = tmp.path + "/cfg.json";
  write_text_file(cfg_path, kConfig);

  CHECK(run_cli("run --config " + cfg_path + " --out " + tmp.path + "/a") == 0);
  CHECK(run_cli("run --config " + cfg_path + " --out " + tmp.path + "/b") == 0);
  CHECK(read_text_file(tmp.path + "/a/metrics.csv") ==
        read_text_file(tmp.path + "/b/metrics.csv"));
  CHECK(read_text_file(tmp.path + "/a/recon_000") ==
        read_text_file(tmp.path + "/b/recon_000"));

  // a different seed changes the acquisition
  CHECK(run_cli("run --config " + cfg_path + " --seed 99 --out " + tmp.path +
                "/c") == 0);
  CHECK(read_text_file(tmp.path + "/a/metrics.csv") !=
        read_text_file(tmp.path + "/c/metrics.csv"));
}

TEST_CASE("config errors exit with status 1 and reach stderr verbatim") {
  TempDir tmp("cfgerr");
  const std::string cfg_path = tmp.path + "/bad.json";
  write_text_file(cfg_path, R"({"seed": 1, "unknown_key": 2})");
  CHECK(run_cli("run --config " + cfg_path + " --out " + tmp.path + "/out") == 1);

  // strategy/mode mismatch surfaces the sampling module's error
  write_text_file(cfg_path, R"({
    "seed": 1, "coils": 2,
    "phantom_suite": {"count": 1, "height": 32, "width": 32},
    "mask": {"strategy": "equispaced", "R": 4.0, "mode": "points2d"}
  })");
  const std::string cmd = std::string(PAMRI_CLI_PATH) + " run --config " +
                          cfg_path + " --out " + tmp.path + "/out2 2>" +
                          tmp.path + "/err.txt >/dev/null";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 1);
  const std::string err = read_text_file(tmp.path + "/err.txt");
  CHECK(err.find("lines1d") != std::string::npos);
}

TEST_CASE("io errors exit with status 3") {
  TempDir tmp("ioerr");
  CHECK(run_cli("run --config " + tmp.path + "/does_not_exist.json --out " +
                tmp.path) == 3);
}

TEST_CASE("phantom then metrics round trip through the CLI") {
  TempDir tmp("roundtrip");
  const std::string cfg_path = tmp.path + "/cfg.json";
  write_text_file(cfg_path, kConfig);
  CHECK(run_cli("phantom --config " + cfg_path + " --out " + tmp.path + "/ph") == 0);
  CHECK(run_cli("metrics --recon " + tmp.path + "/ph/gt_000 --ref " + tmp.path +
                "/ph/gt_000 --boxes " + tmp.path + "/ph/boxes_000.json") == 0);
}
