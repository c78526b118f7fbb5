#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "lsteer/ddim.hpp"
#include "lsteer/pipeline.hpp"
#include "lsteer/trainer.hpp"

namespace lsteer {

// One JSON config drives every command. Unknown keys are rejected at every
// level; flag overrides happen after parsing.
struct RunConfig {
    std::filesystem::path corpus;
    std::filesystem::path checkpoint;
    std::filesystem::path out = "out";
    std::vector<std::uint64_t> seeds{0};
    std::uint32_t jobs = 1;

    TrainConfig train;  // height/width/conditions filled from the corpus
    DenoiserConfig model;
    struct {
        int steps = 100;
        double beta_start = 1e-4;
        double beta_end = 0.07;
    } schedule;
    SamplerOptions sampler;
    SteeringConfig steering;
    struct {
        std::uint32_t tile = 8;
        std::uint32_t stride = 4;
        double threshold = 0.1;
    } filter;
    AnchorStrategy strategy;
    std::vector<std::filesystem::path> desired_latent_files;
    int max_retries = 3;
    std::vector<int> conditions;  // empty = every corpus condition
    struct {
        std::optional<std::uint32_t> layer;  // default: penultimate
        std::optional<int> t_eval;           // default: steps / 2
    } embedding;
    struct {
        std::uint32_t bins = 24;
        double max_edge = 1.2;
    } audit;

    NoiseSchedule make_schedule() const {
        return NoiseSchedule::linear(schedule.steps, schedule.beta_start, schedule.beta_end);
    }
    std::uint32_t embedding_layer() const {
        return embedding.layer.value_or(model.hidden_layers - 1);
    }
    int embedding_t_eval() const { return embedding.t_eval.value_or(schedule.steps / 2); }
};

RunConfig parse_run_config(const std::filesystem::path& path);
RunConfig parse_run_config_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

}  // namespace lsteer
