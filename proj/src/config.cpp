#include "lsteer/config.hpp"

#include <set>

#include "lsteer/util.hpp"

namespace lsteer {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
}

}  // namespace

RunConfig parse_run_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config_json(j, path.parent_path());
}

RunConfig parse_run_config_json(const json& j, const std::filesystem::path& base) {
    RunConfig c;
    try {
        reject_unknown(j, {"corpus", "checkpoint", "out", "seeds", "jobs", "train", "model",
                           "schedule", "sampler", "steering", "filter", "strategy", "max_retries",
                           "conditions", "embedding", "audit"},
                       "top level");
        auto respath = [&](const std::string& s) {
            std::filesystem::path p(s);
            return p.is_absolute() || base.empty() ? p : base / p;
        };
        if (j.contains("corpus")) c.corpus = respath(j.at("corpus").get<std::string>());
        if (j.contains("checkpoint")) c.checkpoint = respath(j.at("checkpoint").get<std::string>());
        if (j.contains("out")) c.out = respath(j.at("out").get<std::string>());
        if (j.contains("seeds")) {
            c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
            if (c.seeds.empty()) throw ConfigError("config: seeds must be non-empty");
        }
        if (j.contains("jobs")) {
            c.jobs = j.at("jobs").get<std::uint32_t>();
            if (c.jobs < 1) throw ConfigError("config: jobs must be >= 1");
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            reject_unknown(t, {"lr", "batch", "epochs", "seed"}, "train");
            if (t.contains("lr")) c.train.lr = t.at("lr").get<double>();
            if (t.contains("batch")) c.train.batch = t.at("batch").get<std::uint32_t>();
            if (t.contains("epochs")) c.train.epochs = t.at("epochs").get<std::uint32_t>();
            if (t.contains("seed")) c.train.seed = t.at("seed").get<std::uint64_t>();
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            reject_unknown(m, {"hidden_width", "hidden_layers", "t_embed_dim", "cond_embed_dim"},
                           "model");
            if (m.contains("hidden_width"))
                c.model.hidden_width = m.at("hidden_width").get<std::uint32_t>();
            if (m.contains("hidden_layers"))
                c.model.hidden_layers = m.at("hidden_layers").get<std::uint32_t>();
            if (m.contains("t_embed_dim"))
                c.model.t_embed_dim = m.at("t_embed_dim").get<std::uint32_t>();
            if (m.contains("cond_embed_dim"))
                c.model.cond_embed_dim = m.at("cond_embed_dim").get<std::uint32_t>();
        }
        if (j.contains("schedule")) {
            const auto& s = j.at("schedule");
            reject_unknown(s, {"steps", "beta_start", "beta_end"}, "schedule");
            if (s.contains("steps")) c.schedule.steps = s.at("steps").get<int>();
            if (s.contains("beta_start")) c.schedule.beta_start = s.at("beta_start").get<double>();
            if (s.contains("beta_end")) c.schedule.beta_end = s.at("beta_end").get<double>();
        }
        if (j.contains("sampler")) {
            const auto& s = j.at("sampler");
            reject_unknown(s, {"substeps", "clip_x0", "invert_fp_iters"}, "sampler");
            if (s.contains("substeps")) c.sampler.substeps = s.at("substeps").get<int>();
            if (s.contains("clip_x0")) c.sampler.clip_x0 = s.at("clip_x0").get<bool>();
            if (s.contains("invert_fp_iters"))
                c.sampler.invert_fp_iters = s.at("invert_fp_iters").get<int>();
        }
        if (j.contains("steering")) {
            const auto& s = j.at("steering");
            reject_unknown(
                s, {"alpha", "beta", "similarity", "reg", "reg_weight", "lr", "steps", "grad_clip"},
                "steering");
            if (s.contains("alpha")) c.steering.alpha = s.at("alpha").get<double>();
            if (s.contains("beta")) c.steering.beta = s.at("beta").get<double>();
            if (s.contains("similarity"))
                c.steering.similarity = similarity_from_string(s.at("similarity").get<std::string>());
            if (s.contains("reg")) c.steering.reg = reg_from_string(s.at("reg").get<std::string>());
            if (s.contains("reg_weight")) c.steering.reg_weight = s.at("reg_weight").get<double>();
            if (s.contains("lr")) c.steering.lr = s.at("lr").get<double>();
            if (s.contains("steps")) c.steering.steps = s.at("steps").get<std::uint32_t>();
            if (s.contains("grad_clip") && !s.at("grad_clip").is_null())
                c.steering.grad_clip = s.at("grad_clip").get<double>();
            c.steering.validate();
        }
        if (j.contains("filter")) {
            const auto& f = j.at("filter");
            reject_unknown(f, {"tile", "stride", "threshold"}, "filter");
            if (f.contains("tile")) c.filter.tile = f.at("tile").get<std::uint32_t>();
            if (f.contains("stride")) c.filter.stride = f.at("stride").get<std::uint32_t>();
            if (f.contains("threshold")) c.filter.threshold = f.at("threshold").get<double>();
        }
        if (j.contains("strategy")) {
            const auto& s = j.at("strategy");
            reject_unknown(s,
                           {"invert_matched_refs", "include_trigger_latent", "accumulate_matches",
                            "escalation", "desired_latents"},
                           "strategy");
            if (s.contains("invert_matched_refs"))
                c.strategy.invert_matched_refs = s.at("invert_matched_refs").get<bool>();
            if (s.contains("include_trigger_latent"))
                c.strategy.include_trigger_latent = s.at("include_trigger_latent").get<bool>();
            if (s.contains("accumulate_matches"))
                c.strategy.accumulate_matches = s.at("accumulate_matches").get<bool>();
            if (s.contains("escalation")) c.strategy.escalation = s.at("escalation").get<double>();
            if (s.contains("desired_latents"))
                for (const auto& p : s.at("desired_latents"))
                    c.desired_latent_files.push_back(respath(p.get<std::string>()));
            c.strategy.validate();
        }
        if (j.contains("max_retries")) {
            c.max_retries = j.at("max_retries").get<int>();
            if (c.max_retries < 0) throw ConfigError("config: max_retries must be >= 0");
        }
        if (j.contains("conditions")) c.conditions = j.at("conditions").get<std::vector<int>>();
        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            reject_unknown(e, {"layer", "t_eval"}, "embedding");
            if (e.contains("layer")) c.embedding.layer = e.at("layer").get<std::uint32_t>();
            if (e.contains("t_eval")) c.embedding.t_eval = e.at("t_eval").get<int>();
        }
        if (j.contains("audit")) {
            const auto& a = j.at("audit");
            reject_unknown(a, {"bins", "max_edge"}, "audit");
            if (a.contains("bins")) c.audit.bins = a.at("bins").get<std::uint32_t>();
            if (a.contains("max_edge")) c.audit.max_edge = a.at("max_edge").get<double>();
            if (c.audit.bins < 1) throw ConfigError("config: audit.bins must be >= 1");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

}  // namespace lsteer
