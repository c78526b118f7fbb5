#pragma once

#include <filesystem>

#include "lsteer/denoiser.hpp"
#include "lsteer/trainer.hpp"

namespace lsteer {

// Model checkpoint directory: one LSTN container per weight tensor plus
// manifest.json carrying the architecture, schedule parameters, training
// seed and corpus hash. Loading validates weight shapes against the
// declared architecture.
void save_checkpoint(const std::filesystem::path& dir, const Denoiser& model,
                     const TrainConfig& train_cfg, std::uint64_t corpus_hash);

struct LoadedCheckpoint {
    Denoiser model;
    TrainConfig train_cfg;
    std::uint64_t corpus_hash = 0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace lsteer
