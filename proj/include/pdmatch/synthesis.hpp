#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "pdmatch/image.hpp"
#include "pdmatch/swd.hpp"

namespace pdmatch {

enum class InitMode { zeros, target, blurred_target, provided_image };

struct SynthesisConfig {
  double pyramid_factor = 0.85;  // per-level downscale ratio; >= 1 means single scale
  int coarse_dim = 28;
  double scale_h = 1.0;  // output-size multipliers
  double scale_w = 1.0;
  InitMode init_mode = InitMode::zeros;
  double noise_sigma = 1.5;  // gaussian noise added to the coarsest initial guess
  int patch_size = 7;
  int stride = 1;
  int num_projections = 64;
  double learning_rate = 0.05;
  int num_steps = 300;  // Adam steps per level, same at every scale
  std::uint64_t seed = 0;
};

// Binary map aligned to the target image; patches whose center pixel is under
// the mask are duplicated boost_factor times in every projection.
struct FrequencyMask {
  Image map;  // C=1, values thresholded to {0, 1}
  int boost_factor = 1;
};

// Multiplicity 1 for unmasked patches, boost_factor for patches whose center
// pixel (top-left + patch/2) lies under the mask.
DuplicationSpec apply_frequency_mask(const Image& target, const FrequencyMask& mask,
                                     int patch_size, int stride);

using StepObserver = std::function<void(int level, int step, double loss)>;

// Coarse-to-fine synthesis: build the target pyramid, construct the initial
// guess at the coarsest level per init_mode (+ noise), run num_steps Adam
// steps per level against that level's target, clip at level end, upscale as
// the next init. Deterministic given (target, cfg, mask, init).
Image synthesize(const Image& target, const SynthesisConfig& cfg,
                 const FrequencyMask* mask = nullptr, const Image* init = nullptr,
                 const StepObserver& observer = {}, int threads = 1);

SynthesisConfig reshuffle_config();
SynthesisConfig retarget_config(double scale_h, double scale_w);
SynthesisConfig style_transfer_config();
SynthesisConfig texture_config();
SynthesisConfig edit_config();

Image reshuffle(const Image& target, std::uint64_t seed);
Image retarget(const Image& target, double scale_h, double scale_w, std::uint64_t seed);
Image style_transfer(const Image& content, const Image& style, std::uint64_t seed);
Image texture_synthesize(const Image& target, std::uint64_t seed);
Image edit_harmonize(const Image& crude_edit, const Image& target, std::uint64_t seed);

}  // namespace pdmatch
