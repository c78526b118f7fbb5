#include "lsteer/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "lsteer/tensor_io.hpp"
#include "lsteer/util.hpp"

namespace lsteer {

using nlohmann::json;

void save_checkpoint(const std::filesystem::path& dir, const Denoiser& model,
                     const TrainConfig& train_cfg, std::uint64_t corpus_hash) {
    std::filesystem::create_directories(dir);
    const auto& cfg = model.config();
    const auto& sched = model.schedule();
    const auto names = model.param_names();
    json weights = json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string file = names[i] + ".lstn";
        save_tensor(dir / file, model.params()[i]);
        weights.push_back(file);
    }
    json m{
        {"format", "lsteer-checkpoint"},
        {"version", 1},
        {"arch",
         {{"height", cfg.height},
          {"width", cfg.width},
          {"hidden_width", cfg.hidden_width},
          {"hidden_layers", cfg.hidden_layers},
          {"t_embed_dim", cfg.t_embed_dim},
          {"cond_embed_dim", cfg.cond_embed_dim},
          {"conditions", cfg.conditions}}},
        {"schedule",
         {{"steps", sched.steps}, {"beta_start", sched.beta_start}, {"beta_end", sched.beta_end}}},
        {"train",
         {{"lr", train_cfg.lr},
          {"batch", train_cfg.batch},
          {"epochs", train_cfg.epochs},
          {"seed", train_cfg.seed}}},
        {"init_seed", model.init_seed()},
        {"corpus_hash", hex_u64(corpus_hash)},
        {"weights", weights},
    };
    atomic_write_file(dir / "manifest.json", m.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
    json m;
    try {
        m = json::parse(read_file(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw Error("checkpoint manifest " + dir.string() + ": " + e.what());
    }
    try {
        if (m.at("format").get<std::string>() != "lsteer-checkpoint")
            throw Error("not a checkpoint manifest: " + dir.string());
        DenoiserConfig cfg;
        const auto& a = m.at("arch");
        cfg.height = a.at("height").get<std::uint32_t>();
        cfg.width = a.at("width").get<std::uint32_t>();
        cfg.hidden_width = a.at("hidden_width").get<std::uint32_t>();
        cfg.hidden_layers = a.at("hidden_layers").get<std::uint32_t>();
        cfg.t_embed_dim = a.at("t_embed_dim").get<std::uint32_t>();
        cfg.cond_embed_dim = a.at("cond_embed_dim").get<std::uint32_t>();
        cfg.conditions = a.at("conditions").get<std::uint32_t>();
        const auto& s = m.at("schedule");
        NoiseSchedule sched = NoiseSchedule::linear(s.at("steps").get<int>(),
                                                    s.at("beta_start").get<double>(),
                                                    s.at("beta_end").get<double>());
        LoadedCheckpoint out{Denoiser(cfg, sched, m.at("init_seed").get<std::uint64_t>()),
                             TrainConfig{}, 0};
        const auto& t = m.at("train");
        out.train_cfg.lr = t.at("lr").get<double>();
        out.train_cfg.batch = t.at("batch").get<std::uint32_t>();
        out.train_cfg.epochs = t.at("epochs").get<std::uint32_t>();
        out.train_cfg.seed = t.at("seed").get<std::uint64_t>();
        out.train_cfg.height = cfg.height;
        out.train_cfg.width = cfg.width;
        out.train_cfg.conditions = cfg.conditions;
        out.corpus_hash = std::stoull(m.at("corpus_hash").get<std::string>(), nullptr, 16);

        const auto names = out.model.param_names();
        const auto files = m.at("weights");
        if (files.size() != names.size())
            throw Error("checkpoint/architecture mismatch: wrong weight count in " + dir.string());
        std::vector<Tensor> params;
        for (std::size_t i = 0; i < names.size(); ++i)
            params.push_back(load_tensor(dir / files[i].get<std::string>()));
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].shape != out.model.params()[i].shape)
                throw Error("checkpoint/architecture mismatch: weight " + names[i] +
                            " has shape " + params[i].shape_str());
        out.model.set_params(std::move(params));
        return out;
    } catch (const json::exception& e) {
        throw Error("checkpoint manifest " + dir.string() + ": " + e.what());
    }
}

}  // namespace lsteer
