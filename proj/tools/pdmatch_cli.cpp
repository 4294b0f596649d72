// pdmatch command line: patch-distribution image synthesis, metrics, and
// benchmarks. One subcommand per task; every synthesis parameter is settable
// by flag, with task defaults < --config file < flags.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pdmatch/bench.hpp"
#include "pdmatch/image_io.hpp"
#include "pdmatch/kernels.hpp"
#include "pdmatch/metrics.hpp"
#include "pdmatch/synthesis.hpp"

namespace {

using pdmatch::Image;
using pdmatch::InitMode;
using pdmatch::SynthesisConfig;

InitMode parse_init_mode(const std::string& s) {
  if (s == "zeros") return InitMode::zeros;
  if (s == "target") return InitMode::target;
  if (s == "blurred_target") return InitMode::blurred_target;
  if (s == "provided_image") return InitMode::provided_image;
  throw CLI::ValidationError("init-mode", "unknown init mode '" + s + "'");
}

std::string init_mode_name(InitMode m) {
  switch (m) {
    case InitMode::zeros: return "zeros";
    case InitMode::target: return "target";
    case InitMode::blurred_target: return "blurred_target";
    case InitMode::provided_image: return "provided_image";
  }
  return "?";
}

std::pair<double, double> parse_scale_factors(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("scale-factors", "expected two comma-separated factors, got '" + s + "'");
  try {
    const double a = std::stod(s.substr(0, comma));
    const double b = std::stod(s.substr(comma + 1));
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("non-positive");
    return {a, b};
  } catch (const std::exception&) {
    throw CLI::ValidationError("scale-factors", "bad scale factors '" + s + "'");
  }
}

// Synthesis flags shared by all task subcommands. Values land in `raw`; only
// options the user actually set (or that appear in --config) override the
// task preset.
struct TaskFlags {
  std::string config_path;
  double pyramid_factor = 0.0;
  int coarse_dim = 0;
  std::string scale_factors;
  std::string init_mode;
  double noise_sigma = 0.0;
  int patch_size = 0;
  int stride = 0;
  int num_projections = 0;
  double learning_rate = 0.0;
  int num_steps = 0;
  std::uint64_t seed = 0;
  std::string init_image;
  std::string mask_path;
  int boost_factor = 1;
  int num_outputs = 1;
  int threads = 1;
  std::string output_dir = "out";

  CLI::Option* opt_pyramid_factor = nullptr;
  CLI::Option* opt_coarse_dim = nullptr;
  CLI::Option* opt_scale_factors = nullptr;
  CLI::Option* opt_init_mode = nullptr;
  CLI::Option* opt_noise_sigma = nullptr;
  CLI::Option* opt_patch_size = nullptr;
  CLI::Option* opt_stride = nullptr;
  CLI::Option* opt_num_projections = nullptr;
  CLI::Option* opt_learning_rate = nullptr;
  CLI::Option* opt_num_steps = nullptr;
};

void add_task_flags(CLI::App* cmd, TaskFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value config file ('#' comments)");
  f.opt_pyramid_factor = cmd->add_option("--pyramid-factor", f.pyramid_factor, "pyramid downscale ratio");
  f.opt_coarse_dim = cmd->add_option("--coarse-dim", f.coarse_dim, "minimal dimension of the coarsest level");
  f.opt_scale_factors = cmd->add_option("--scale-factors", f.scale_factors, "output size multipliers, e.g. 1,2");
  f.opt_init_mode = cmd->add_option("--init-mode", f.init_mode,
                                    "zeros | target | blurred_target | provided_image");
  f.opt_noise_sigma = cmd->add_option("--noise-sigma", f.noise_sigma, "gaussian noise on the initial guess");
  f.opt_patch_size = cmd->add_option("--patch-size", f.patch_size, "square patch side");
  f.opt_stride = cmd->add_option("--stride", f.stride, "patch extraction stride");
  f.opt_num_projections = cmd->add_option("--num-projections", f.num_projections, "projections per step");
  f.opt_learning_rate = cmd->add_option("--learning-rate", f.learning_rate, "Adam step size");
  f.opt_num_steps = cmd->add_option("--num-optimization-steps", f.num_steps, "Adam steps per scale");
  cmd->add_option("--seed", f.seed, "random seed (default 0)");
  cmd->add_option("--init-image", f.init_image, "image for init-mode=provided_image");
  cmd->add_option("--mask", f.mask_path, "grayscale mask PNG (thresholded at 0.5)");
  cmd->add_option("--boost-factor", f.boost_factor, "duplication factor for masked patches")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--num-outputs", f.num_outputs, "generate N variants with seeds seed..seed+N-1")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "worker threads (results are identical for any count)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--output", f.output_dir, "output directory");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void apply_config_entry(SynthesisConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "pyramid_factor") cfg.pyramid_factor = std::stod(value);
  else if (key == "coarse_dim" || key == "coarse_dimension") cfg.coarse_dim = std::stoi(value);
  else if (key == "scale_factors") std::tie(cfg.scale_h, cfg.scale_w) = parse_scale_factors(value);
  else if (key == "init_mode") cfg.init_mode = parse_init_mode(value);
  else if (key == "noise_sigma") cfg.noise_sigma = std::stod(value);
  else if (key == "patch_size") cfg.patch_size = std::stoi(value);
  else if (key == "stride") cfg.stride = std::stoi(value);
  else if (key == "num_projections") cfg.num_projections = std::stoi(value);
  else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
  else if (key == "num_optimization_steps" || key == "num_steps") cfg.num_steps = std::stoi(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else throw std::runtime_error("unknown config key '" + key + "'");
}

SynthesisConfig resolve_config(SynthesisConfig cfg, const TaskFlags& f) {
  if (!f.config_path.empty())
    for (const auto& [key, value] : read_config_file(f.config_path)) apply_config_entry(cfg, key, value);
  if (f.opt_pyramid_factor->count()) cfg.pyramid_factor = f.pyramid_factor;
  if (f.opt_coarse_dim->count()) cfg.coarse_dim = f.coarse_dim;
  if (f.opt_scale_factors->count()) std::tie(cfg.scale_h, cfg.scale_w) = parse_scale_factors(f.scale_factors);
  if (f.opt_init_mode->count()) cfg.init_mode = parse_init_mode(f.init_mode);
  if (f.opt_noise_sigma->count()) cfg.noise_sigma = f.noise_sigma;
  if (f.opt_patch_size->count()) cfg.patch_size = f.patch_size;
  if (f.opt_stride->count()) cfg.stride = f.stride;
  if (f.opt_num_projections->count()) cfg.num_projections = f.num_projections;
  if (f.opt_learning_rate->count()) cfg.learning_rate = f.learning_rate;
  if (f.opt_num_steps->count()) cfg.num_steps = f.num_steps;
  cfg.seed = f.seed;
  return cfg;
}

void print_resolved_config(const std::string& task, const SynthesisConfig& cfg, const TaskFlags& f) {
  std::ostringstream os;
  os << "task=" << task << "\n"
     << "backend=" << pdmatch::kernels::active().name << "\n"
     << "threads=" << f.threads << "\n"
     << "pyramid_factor=" << cfg.pyramid_factor << "\n"
     << "coarse_dim=" << cfg.coarse_dim << "\n"
     << "scale_factors=" << cfg.scale_h << "," << cfg.scale_w << "\n"
     << "init_mode=" << init_mode_name(cfg.init_mode) << "\n"
     << "noise_sigma=" << cfg.noise_sigma << "\n"
     << "patch_size=" << cfg.patch_size << "\n"
     << "stride=" << cfg.stride << "\n"
     << "num_projections=" << cfg.num_projections << "\n"
     << "learning_rate=" << cfg.learning_rate << "\n"
     << "num_optimization_steps=" << cfg.num_steps << "\n"
     << "seed=" << cfg.seed << "\n"
     << "num_outputs=" << f.num_outputs << "\n"
     << "output=" << f.output_dir << "\n";
  std::cerr << os.str();
}

// Runs one synthesis task for each requested seed and writes the PNGs.
void run_synthesis_task(const std::string& task, SynthesisConfig cfg, const TaskFlags& f,
                        const Image& target, const Image* init) {
  std::optional<Image> init_from_flag;
  if (!f.init_image.empty()) {
    init_from_flag = pdmatch::load_image(f.init_image);
    init = &*init_from_flag;
  }
  if (cfg.init_mode == InitMode::provided_image && init == nullptr)
    throw std::runtime_error("init-mode=provided_image needs --init-image");

  std::optional<pdmatch::FrequencyMask> mask;
  if (!f.mask_path.empty()) {
    pdmatch::FrequencyMask m;
    m.map = pdmatch::load_image(f.mask_path);
    if (m.map.channels != 1) throw std::runtime_error("mask must be a grayscale image");
    for (double& v : m.map.data) v = v >= 0.0 ? 1.0 : 0.0;  // 0.5 in [0,1] is 0.0 in [-1,1]
    m.boost_factor = f.boost_factor;
    mask = std::move(m);
  }

  print_resolved_config(task, cfg, f);
  std::filesystem::create_directories(f.output_dir);
  for (int i = 0; i < f.num_outputs; ++i) {
    SynthesisConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(i);
    const Image out = pdmatch::synthesize(target, run_cfg, mask ? &*mask : nullptr, init, {}, f.threads);
    const std::filesystem::path path =
        std::filesystem::path(f.output_dir) / (task + "_seed" + std::to_string(run_cfg.seed) + ".png");
    pdmatch::save_image(out, path.string());
    std::cout << path.string() << "\n";
  }
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const int v = std::stoi(item);
    if (v < 1) throw std::runtime_error("bad size '" + item + "'");
    sizes.push_back(v);
  }
  if (sizes.empty()) throw std::runtime_error("--sizes is empty");
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdmatch: image synthesis by direct patch-distribution matching"};
  app.require_subcommand(1);

  std::string backend = "auto";
  app.add_option("--backend", backend, "kernel backend: auto | scalar | avx2 | neon");

  // --- synthesis tasks -------------------------------------------------
  struct TaskCmd {
    CLI::App* cmd = nullptr;
    TaskFlags flags;
    std::string input, target, content, style;
  };

  TaskCmd reshuffle_cmd, retarget_cmd, style_cmd, texture_cmd, edit_cmd;

  auto make_task = [&](TaskCmd& t, const char* name, const char* desc) {
    t.cmd = app.add_subcommand(name, desc);
    add_task_flags(t.cmd, t.flags);
  };

  make_task(reshuffle_cmd, "reshuffle", "generate a new layout with the same patch distribution");
  reshuffle_cmd.cmd->add_option("--input", reshuffle_cmd.input, "target image")->required();

  make_task(retarget_cmd, "retarget", "synthesize the same scene at a different aspect ratio");
  retarget_cmd.cmd->add_option("--input", retarget_cmd.input, "target image")->required();

  make_task(style_cmd, "style", "transfer the patch distribution of a style image onto a content image");
  style_cmd.cmd->add_option("--content", style_cmd.content, "content image")->required();
  style_cmd.cmd->add_option("--style", style_cmd.style, "style image")->required();

  make_task(texture_cmd, "texture", "synthesize a larger texture from a sample");
  texture_cmd.cmd->add_option("--input", texture_cmd.input, "texture sample")->required();

  make_task(edit_cmd, "edit", "harmonize a crudely edited image against a target");
  edit_cmd.cmd->add_option("--input", edit_cmd.input, "crudely edited image")->required();
  edit_cmd.cmd->add_option("--target", edit_cmd.target, "original target image")->required();

  // --- metrics ----------------------------------------------------------
  auto* metrics_cmd = app.add_subcommand("metrics", "distance report between two images");
  std::string metrics_a, metrics_b, metrics_format = "kv", metrics_output;
  int metrics_patch = 7, metrics_stride = 1;
  std::uint64_t metrics_seed = 0;
  metrics_cmd->add_option("--a", metrics_a, "reference image")->required();
  metrics_cmd->add_option("--b", metrics_b, "candidate image")->required();
  metrics_cmd->add_option("--patch-size", metrics_patch, "patch side");
  metrics_cmd->add_option("--stride", metrics_stride, "patch stride");
  metrics_cmd->add_option("--seed", metrics_seed, "seed for the fixed-filter SWD estimate");
  metrics_cmd->add_option("--format", metrics_format, "kv (one per line) | record (single line)")
      ->check(CLI::IsMember({"kv", "record"}));
  metrics_cmd->add_option("--output", metrics_output, "write the report to a file instead of stdout");

  // --- bench ------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "single-iteration scaling benchmark (CSV on stdout)");
  std::string bench_method = "both", bench_swd_sizes = "38,70,133,259,323",
              bench_nn_sizes = "38,70,102,134", bench_output;
  int bench_patch = 7, bench_k = 64, bench_reps = 5, bench_threads = 1;
  std::uint64_t bench_seed = 0, bench_cap = 1'000'000'000ull;
  bool bench_fit = false;
  bench_cmd->add_option("--method", bench_method, "swd | nn | both")
      ->check(CLI::IsMember({"swd", "nn", "both"}));
  bench_cmd->add_option("--swd-sizes", bench_swd_sizes, "square image sides for the SWD timings");
  bench_cmd->add_option("--nn-sizes", bench_nn_sizes, "square image sides for the exact-NN timings");
  bench_cmd->add_option("--patch-size", bench_patch, "patch side");
  bench_cmd->add_option("--num-projections", bench_k, "projections per SWD iteration");
  bench_cmd->add_option("--reps", bench_reps, "timed repetitions per size (median reported)")
      ->check(CLI::Range(5, 1000));
  bench_cmd->add_option("--seed", bench_seed, "seed for the benchmark images");
  bench_cmd->add_option("--max-pairs", bench_cap, "refuse NN sizes whose M^2 exceeds this");
  bench_cmd->add_option("--threads", bench_threads, "worker threads (recorded in the output)")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--fit", bench_fit, "also print log-log slopes to stderr");
  bench_cmd->add_option("--output", bench_output, "write CSV to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!pdmatch::kernels::select(backend))
      throw std::runtime_error("backend '" + backend + "' is not available on this machine");

    if (*reshuffle_cmd.cmd) {
      const Image target = pdmatch::load_image(reshuffle_cmd.input);
      run_synthesis_task("reshuffle", resolve_config(pdmatch::reshuffle_config(), reshuffle_cmd.flags),
                         reshuffle_cmd.flags, target, nullptr);
    } else if (*retarget_cmd.cmd) {
      const Image target = pdmatch::load_image(retarget_cmd.input);
      SynthesisConfig cfg = resolve_config(pdmatch::retarget_config(1.0, 1.0), retarget_cmd.flags);
      run_synthesis_task("retarget", cfg, retarget_cmd.flags, target, nullptr);
    } else if (*style_cmd.cmd) {
      const Image content = pdmatch::load_image(style_cmd.content);
      const Image style = pdmatch::load_image(style_cmd.style);
      SynthesisConfig cfg = resolve_config(pdmatch::style_transfer_config(), style_cmd.flags);
      cfg.coarse_dim = std::max(cfg.coarse_dim, cfg.patch_size);
      run_synthesis_task("style", cfg, style_cmd.flags, style, &content);
    } else if (*texture_cmd.cmd) {
      const Image target = pdmatch::load_image(texture_cmd.input);
      run_synthesis_task("texture", resolve_config(pdmatch::texture_config(), texture_cmd.flags),
                         texture_cmd.flags, target, nullptr);
    } else if (*edit_cmd.cmd) {
      const Image crude = pdmatch::load_image(edit_cmd.input);
      const Image target = pdmatch::load_image(edit_cmd.target);
      if (crude.height != target.height || crude.width != target.width)
        throw std::runtime_error("edit: --input and --target must share dimensions");
      run_synthesis_task("edit", resolve_config(pdmatch::edit_config(), edit_cmd.flags),
                         edit_cmd.flags, target, &crude);
    } else if (*metrics_cmd) {
      const Image a = pdmatch::load_image(metrics_a);
      const Image b = pdmatch::load_image(metrics_b);
      const pdmatch::DistanceReport report =
          pdmatch::distance_report(a, b, metrics_patch, metrics_stride, metrics_seed);
      std::cerr << "task=metrics\na=" << metrics_a << "\nb=" << metrics_b
                << "\npatch_size=" << metrics_patch << "\nstride=" << metrics_stride
                << "\nseed=" << metrics_seed << "\n";
      const std::string text =
          metrics_format == "kv" ? report.to_kv_text() : report.to_record_line() + "\n";
      if (metrics_output.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(metrics_output);
        if (!out) throw std::runtime_error("cannot write '" + metrics_output + "'");
        out << text;
      }
    } else if (*bench_cmd) {
      std::cerr << "task=bench\nmethod=" << bench_method << "\npatch_size=" << bench_patch
                << "\nnum_projections=" << bench_k << "\nreps=" << bench_reps
                << "\nthreads=" << bench_threads << "\nseed=" << bench_seed << "\n";
      std::vector<pdmatch::BenchRecord> swd_records, nn_records;
      if (bench_method != "nn")
        swd_records = pdmatch::bench_swd_iter(parse_sizes(bench_swd_sizes), bench_patch, bench_k,
                                              bench_seed, bench_reps, bench_threads);
      if (bench_method != "swd")
        nn_records = pdmatch::bench_nn_iter(parse_sizes(bench_nn_sizes), bench_patch, bench_seed,
                                            bench_reps, bench_cap, bench_threads);
      std::ostringstream csv;
      for (const auto& r : swd_records) csv << pdmatch::to_csv_line(r) << "\n";
      for (const auto& r : nn_records) csv << pdmatch::to_csv_line(r) << "\n";
      if (bench_output.empty()) {
        std::cout << csv.str();
      } else {
        std::ofstream out(bench_output);
        if (!out) throw std::runtime_error("cannot write '" + bench_output + "'");
        out << csv.str();
      }
      if (bench_fit) {
        if (swd_records.size() >= 4)
          std::cerr << "slope_swd=" << pdmatch::fit_loglog_slope(swd_records) << "\n";
        if (nn_records.size() >= 4)
          std::cerr << "slope_exact_nn=" << pdmatch::fit_loglog_slope(nn_records) << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "pdmatch: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
