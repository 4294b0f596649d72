#include "pdmatch/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdmatch {

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

Image threshold_mask(const Image& map) {
  Image out = map;
  for (double& v : out.data) v = v >= 0.5 ? 1.0 : 0.0;
  return out;
}

void validate(const SynthesisConfig& cfg) {
  if (cfg.pyramid_factor <= 0.0) throw std::invalid_argument("pyramid_factor must be positive");
  if (cfg.coarse_dim < 1) throw std::invalid_argument("coarse_dim must be >= 1");
  if (cfg.scale_h <= 0.0 || cfg.scale_w <= 0.0) throw std::invalid_argument("scale_factors must be positive");
  if (cfg.noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (cfg.patch_size < 1) throw std::invalid_argument("patch_size must be >= 1");
  if (cfg.patch_size > cfg.coarse_dim) throw std::invalid_argument("patch_size must be <= coarse_dim");
  if (cfg.stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (cfg.num_projections < 1) throw std::invalid_argument("num_projections must be >= 1");
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (cfg.num_steps < 0) throw std::invalid_argument("num_optimization_steps must be >= 0");
}

}  // namespace

DuplicationSpec apply_frequency_mask(const Image& target, const FrequencyMask& mask,
                                     int patch_size, int stride) {
  if (mask.map.height != target.height || mask.map.width != target.width)
    throw std::invalid_argument("frequency mask dimensions must match the target");
  if (mask.map.channels != 1) throw std::invalid_argument("frequency mask must be single-channel");
  if (mask.boost_factor < 1) throw std::invalid_argument("boost_factor must be >= 1");
  const int grid_h = (target.height - patch_size) / stride + 1;
  const int grid_w = (target.width - patch_size) / stride + 1;
  DuplicationSpec spec;
  spec.multiplicity.resize(static_cast<std::size_t>(grid_h) * grid_w, 1);
  const int center = patch_size / 2;
  for (int gy = 0; gy < grid_h; ++gy)
    for (int gx = 0; gx < grid_w; ++gx) {
      const bool masked = mask.map.at(gy * stride + center, gx * stride + center, 0) >= 0.5;
      if (masked)
        spec.multiplicity[static_cast<std::size_t>(gy) * grid_w + gx] = mask.boost_factor;
    }
  return spec;
}

Image synthesize(const Image& target, const SynthesisConfig& cfg,
                 const FrequencyMask* mask, const Image* init,
                 const StepObserver& observer, int threads) {
  validate(cfg);
  if (cfg.init_mode == InitMode::provided_image && init == nullptr)
    throw std::invalid_argument("init_mode=provided_image requires an init image");
  if (init && init->channels != target.channels)
    throw std::invalid_argument("init image channel count must match the target");

  std::vector<Image> levels;
  if (cfg.pyramid_factor < 1.0)
    levels = build_pyramid(target, {cfg.pyramid_factor, cfg.coarse_dim});
  else
    levels.push_back(target);  // single-scale configuration
  const int num_levels = static_cast<int>(levels.size());

  // With a provided init the output geometry follows the init image (style
  // transfer keeps the content dimensions); otherwise the configured scale
  // factors apply to the target's dimensions.
  double scale_h = cfg.scale_h;
  double scale_w = cfg.scale_w;
  if (cfg.init_mode == InitMode::provided_image) {
    scale_h = static_cast<double>(init->height) / target.height;
    scale_w = static_cast<double>(init->width) / target.width;
  }

  auto out_dims = [&](const Image& level) {
    return std::pair<int, int>{round_half_up(level.height * scale_h),
                               round_half_up(level.width * scale_w)};
  };
  for (int l = 0; l < num_levels; ++l) {
    const auto [oh, ow] = out_dims(levels[l]);
    if (std::min(oh, ow) < cfg.patch_size || levels[l].min_dim() < cfg.patch_size)
      throw std::invalid_argument("synthesize: level dimensions too small for patch_size");
  }

  Image thresholded_mask;
  if (mask) {
    if (mask->map.height != target.height || mask->map.width != target.width)
      throw std::invalid_argument("frequency mask dimensions must match the target");
    thresholded_mask = threshold_mask(mask->map);
  }

  const auto [coarse_h, coarse_w] = out_dims(levels[0]);
  Image current;
  switch (cfg.init_mode) {
    case InitMode::zeros:
      current = Image::zeros(coarse_h, coarse_w, target.channels);
      break;
    case InitMode::target:
      current = resize(levels[0], coarse_h, coarse_w);
      break;
    case InitMode::blurred_target: {
      current = resize(levels[0], coarse_h, coarse_w);
      const double diag = std::sqrt(static_cast<double>(coarse_h) * coarse_h +
                                    static_cast<double>(coarse_w) * coarse_w);
      const double sigma =
          cfg.pyramid_factor < 1.0 ? 2.0 * (1.0 / cfg.pyramid_factor - 1.0) * diag / 100.0 : 0.0;
      current = gaussian_blur(current, sigma);
      break;
    }
    case InitMode::provided_image: {
      // Walk the provided image down the same chain of per-level dims the
      // target pyramid uses, so an init equal to the target reproduces the
      // coarsest target level bit-exactly.
      current = *init;
      for (int l = num_levels - 1; l > 0; --l) {
        const auto [nh, nw] = out_dims(levels[l - 1]);
        current = resize(current, nh, nw);
      }
      if (current.height != coarse_h || current.width != coarse_w)
        current = resize(current, coarse_h, coarse_w);
      break;
    }
  }
  if (cfg.noise_sigma > 0.0) {
    Rng noise_rng(derive_seed(cfg.seed, 0x696e6974u, 0));  // init-noise stream
    current = add_noise(current, cfg.noise_sigma, noise_rng);
  }

  SwdParams params;
  params.patch_size = cfg.patch_size;
  params.stride = cfg.stride;
  params.num_projections = cfg.num_projections;

  for (int level = 0; level < num_levels; ++level) {
    const Image& level_target = levels[level];

    DuplicationSpec level_spec;
    const DuplicationSpec* spec_ptr = nullptr;
    if (mask && mask->boost_factor > 1) {
      FrequencyMask level_mask;
      level_mask.boost_factor = mask->boost_factor;
      level_mask.map = threshold_mask(
          resize(thresholded_mask, level_target.height, level_target.width));
      level_spec = apply_frequency_mask(level_target, level_mask, cfg.patch_size, cfg.stride);
      spec_ptr = &level_spec;
    }

    AdamState state = AdamState::for_image(current);
    for (int step = 0; step < cfg.num_steps; ++step) {
      const std::uint64_t global_step =
          static_cast<std::uint64_t>(level) * static_cast<std::uint64_t>(cfg.num_steps) + step;
      LossGrad lg = patch_swd_loss_and_grad(level_target, current, params, cfg.seed, global_step,
                                            spec_ptr, threads);
      adam_step(current, lg.grad, state, cfg.learning_rate);
      if (observer) observer(level, step, lg.loss);
    }
    current = clip(std::move(current));

    if (level + 1 < num_levels) {
      const auto [nh, nw] = out_dims(levels[level + 1]);
      current = resize(current, nh, nw);
    }
  }
  return current;
}

SynthesisConfig reshuffle_config() {
  SynthesisConfig cfg;
  cfg.pyramid_factor = 0.85;
  cfg.coarse_dim = 28;
  cfg.scale_h = 1.0;
  cfg.scale_w = 1.0;
  cfg.init_mode = InitMode::zeros;
  cfg.noise_sigma = 1.5;
  cfg.patch_size = 7;
  cfg.stride = 1;
  cfg.num_projections = 64;
  cfg.learning_rate = 0.05;
  cfg.num_steps = 300;
  return cfg;
}

SynthesisConfig retarget_config(double scale_h, double scale_w) {
  SynthesisConfig cfg = reshuffle_config();
  cfg.coarse_dim = 35;
  cfg.scale_h = scale_h;
  cfg.scale_w = scale_w;
  cfg.init_mode = InitMode::blurred_target;
  cfg.noise_sigma = 0.0;
  cfg.num_projections = 128;
  return cfg;
}

SynthesisConfig style_transfer_config() {
  SynthesisConfig cfg = reshuffle_config();
  cfg.pyramid_factor = 1.0;  // single scale
  cfg.init_mode = InitMode::provided_image;
  cfg.noise_sigma = 0.0;
  cfg.patch_size = 11;
  return cfg;
}

SynthesisConfig texture_config() {
  SynthesisConfig cfg = reshuffle_config();
  cfg.scale_h = 2.0;
  cfg.scale_w = 2.0;
  return cfg;
}

SynthesisConfig edit_config() {
  SynthesisConfig cfg = reshuffle_config();
  cfg.init_mode = InitMode::provided_image;
  cfg.noise_sigma = 0.0;
  return cfg;
}

Image reshuffle(const Image& target, std::uint64_t seed) {
  SynthesisConfig cfg = reshuffle_config();
  cfg.seed = seed;
  return synthesize(target, cfg);
}

Image retarget(const Image& target, double scale_h, double scale_w, std::uint64_t seed) {
  SynthesisConfig cfg = retarget_config(scale_h, scale_w);
  cfg.seed = seed;
  return synthesize(target, cfg);
}

Image style_transfer(const Image& content, const Image& style, std::uint64_t seed) {
  SynthesisConfig cfg = style_transfer_config();
  cfg.seed = seed;
  // coarse_dim is irrelevant in the single-scale configuration but must admit
  // the patch size.
  cfg.coarse_dim = std::max(cfg.coarse_dim, cfg.patch_size);
  return synthesize(style, cfg, nullptr, &content);
}

Image texture_synthesize(const Image& target, std::uint64_t seed) {
  SynthesisConfig cfg = texture_config();
  cfg.seed = seed;
  return synthesize(target, cfg);
}

Image edit_harmonize(const Image& crude_edit, const Image& target, std::uint64_t seed) {
  if (!crude_edit.same_shape(target))
    throw std::invalid_argument("edit_harmonize: edit and target must share dimensions");
  SynthesisConfig cfg = edit_config();
  cfg.seed = seed;
  return synthesize(target, cfg, nullptr, &crude_edit);
}

}  // namespace pdmatch
