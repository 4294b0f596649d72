#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pdmatch/image_io.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = PDMATCH_CLI_PATH;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string cmd = kCli + " " + args + " > " + out_file.string() + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

fs::path make_workdir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& p) { return slurp(p); }

// Fast synthesis overrides shared by the CLI runs.
const std::string kQuick =
    " --num-optimization-steps 3 --num-projections 4 --coarse-dim 16 --patch-size 5";

}  // namespace

TEST_CASE("cli: reshuffle is deterministic and writes the expected file") {
  const fs::path dir = make_workdir("pdmatch_cli_reshuffle");
  const fs::path input = dir / "texture.png";
  pdmatch::save_image(fixtures::multiscale_texture(24, 24, 3), input.string());

  const std::string args = "reshuffle --input " + input.string() + " --seed 7 --output " +
                           (dir / "out").string() + kQuick;
  const CliResult first = run_cli(args, dir);
  REQUIRE(first.exit_code == 0);
  const fs::path produced = dir / "out" / "reshuffle_seed7.png";
  REQUIRE(fs::exists(produced));
  CHECK(first.out.find("reshuffle_seed7.png") != std::string::npos);
  CHECK(first.err.find("seed=7") != std::string::npos);
  CHECK(first.err.find("pyramid_factor=0.85") != std::string::npos);
  const std::string bytes_first = file_bytes(produced);

  const CliResult second = run_cli(args, dir);
  REQUIRE(second.exit_code == 0);
  CHECK(file_bytes(produced) == bytes_first);

  // --num-outputs produces one file per seed.
  const CliResult multi = run_cli("reshuffle --input " + input.string() + " --seed 20 --num-outputs 2 --output " +
                                      (dir / "multi").string() + kQuick,
                                  dir);
  REQUIRE(multi.exit_code == 0);
  CHECK(fs::exists(dir / "multi" / "reshuffle_seed20.png"));
  CHECK(fs::exists(dir / "multi" / "reshuffle_seed21.png"));
}

TEST_CASE("cli: retarget forwards scale factors to the output size") {
  const fs::path dir = make_workdir("pdmatch_cli_retarget");
  const fs::path input = dir / "input.png";
  pdmatch::save_image(fixtures::stripe_texture(20, 25), input.string());

  const CliResult r = run_cli("retarget --input " + input.string() +
                                  " --scale-factors 1,2 --seed 1 --output " + (dir / "out").string() +
                                  kQuick,
                              dir);
  REQUIRE(r.exit_code == 0);
  const pdmatch::Image out = pdmatch::load_image((dir / "out" / "retarget_seed1.png").string());
  CHECK(out.height == 20);
  CHECK(out.width == 50);
}

TEST_CASE("cli: metrics of an image against itself is the zero report") {
  const fs::path dir = make_workdir("pdmatch_cli_metrics");
  const fs::path input = dir / "x.png";
  pdmatch::save_image(fixtures::multiscale_texture(20, 20, 9), input.string());

  const CliResult r =
      run_cli("metrics --a " + input.string() + " --b " + input.string() + " --patch-size 5", dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("coherence=0\n") != std::string::npos);
  CHECK(r.out.find("completeness=0\n") != std::string::npos);
  CHECK(r.out.find("bds=0\n") != std::string::npos);
  CHECK(r.out.find("remd=0\n") != std::string::npos);
  CHECK(r.out.find("patch_swd=0\n") != std::string::npos);

  const CliResult rec = run_cli(
      "metrics --a " + input.string() + " --b " + input.string() + " --patch-size 5 --format record",
      dir);
  REQUIRE(rec.exit_code == 0);
  CHECK(rec.out.find("coherence=0,completeness=0,") != std::string::npos);
}

TEST_CASE("cli: bench emits CSV records") {
  const fs::path dir = make_workdir("pdmatch_cli_bench");
  const CliResult r = run_cli("bench --swd-sizes 12,16 --nn-sizes 12,16 --num-projections 4", dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("swd,36,7,4,") != std::string::npos);
  CHECK(r.out.find("swd,100,7,4,") != std::string::npos);
  CHECK(r.out.find("exact_nn,36,7,0,") != std::string::npos);
  CHECK(r.out.find("exact_nn,100,7,0,") != std::string::npos);
}

TEST_CASE("cli: config file applies under flags") {
  const fs::path dir = make_workdir("pdmatch_cli_config");
  const fs::path input = dir / "t.png";
  pdmatch::save_image(fixtures::multiscale_texture(24, 24, 4), input.string());
  const fs::path cfg = dir / "run.cfg";
  {
    std::ofstream f(cfg);
    f << "# quick run\n"
      << "patch_size=5\n"
      << "num_projections=4\n"
      << "num_optimization_steps=2\n"
      << "coarse_dim=16\n";
  }
  // Flag overrides the config's num_projections; config supplies the rest.
  const CliResult r = run_cli("reshuffle --input " + input.string() + " --config " + cfg.string() +
                                  " --num-projections 6 --seed 3 --output " + (dir / "out").string(),
                              dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.find("patch_size=5") != std::string::npos);
  CHECK(r.err.find("num_projections=6") != std::string::npos);
  CHECK(r.err.find("num_optimization_steps=2") != std::string::npos);
}

TEST_CASE("cli: failures exit nonzero with a diagnostic") {
  const fs::path dir = make_workdir("pdmatch_cli_errors");
  const fs::path input = dir / "t.png";
  pdmatch::save_image(fixtures::multiscale_texture(20, 20, 4), input.string());

  const CliResult missing = run_cli("reshuffle --input " + (dir / "nope.png").string() + kQuick, dir);
  CHECK(missing.exit_code != 0);
  CHECK(missing.err.find("cannot open") != std::string::npos);

  const CliResult unknown = run_cli("reshuffle --input " + input.string() + " --frobnicate 3", dir);
  CHECK(unknown.exit_code != 0);

  const CliResult no_sub = run_cli("", dir);
  CHECK(no_sub.exit_code != 0);

  const CliResult bad_scale =
      run_cli("retarget --input " + input.string() + " --scale-factors oops" + kQuick, dir);
  CHECK(bad_scale.exit_code != 0);

  const CliResult bad_backend = run_cli("--backend quantum reshuffle --input " + input.string() + kQuick, dir);
  CHECK(bad_backend.exit_code != 0);
  CHECK(bad_backend.err.find("backend") != std::string::npos);
}
