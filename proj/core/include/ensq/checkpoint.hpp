#pragma once

#include <filesystem>

#include "ensq/net.hpp"

namespace ensq {

// Binary checkpoint, version 1, little-endian:
//   magic "ENSQCKPT", u32 version,
//   u32 input_dim, u32 shared count + widths, u32 head-width count + widths
//   (effective, final 1 included), u32 num_heads, u64 init seed,
//   f64 run_mean[M], f64 run_var[M],
//   then every parameter tensor as raw f64 in param_tensors() order
//   (trunk weights/biases, head stacks, shared output scale last).
// Doubles are stored bit-exactly, so save followed by load reproduces the
// parameter record exactly.
void save_checkpoint(const EnsembleParams& params, const std::filesystem::path& path);
EnsembleParams load_checkpoint(const std::filesystem::path& path);

}  // namespace ensq
