#include "lsteer/pipeline.hpp"

#include <set>

#include "lsteer/util.hpp"

namespace lsteer {

using nlohmann::json;

void AnchorStrategy::validate() const {
    if (!invert_matched_refs && !include_trigger_latent)
        throw ConfigError("anchor strategy: at least one undesired source must be enabled");
    if (!(escalation >= 1.0))
        throw ConfigError("anchor strategy: escalation must be >= 1");
}

std::string to_string(GenerationStatus s) {
    switch (s) {
        case GenerationStatus::CleanUnmodified: return "clean_unmodified";
        case GenerationStatus::CleanSteered: return "clean_steered";
        default: return "failed_after_budget";
    }
}

GenerationStatus generation_status_from_string(const std::string& s) {
    if (s == "clean_unmodified") return GenerationStatus::CleanUnmodified;
    if (s == "clean_steered") return GenerationStatus::CleanSteered;
    if (s == "failed_after_budget") return GenerationStatus::FailedAfterBudget;
    throw Error("unknown generation status: " + s);
}

static json tensor_to_json(const Tensor& t) {
    return json{{"shape", t.shape}, {"data", t.data}};
}

static Tensor tensor_from_json(const json& j) {
    return Tensor(j.at("shape").get<std::vector<std::uint32_t>>(),
                  j.at("data").get<std::vector<float>>());
}

static json steering_to_json(const SteeringConfig& c) {
    json j{{"alpha", c.alpha},       {"beta", c.beta},
           {"similarity", to_string(c.similarity)},
           {"reg", to_string(c.reg)}, {"reg_weight", c.reg_weight},
           {"lr", c.lr},             {"steps", c.steps}};
    if (c.grad_clip) j["grad_clip"] = *c.grad_clip;
    return j;
}

static SteeringConfig steering_from_json(const json& j) {
    SteeringConfig c;
    c.alpha = j.at("alpha").get<double>();
    c.beta = j.at("beta").get<double>();
    c.similarity = similarity_from_string(j.at("similarity").get<std::string>());
    c.reg = reg_from_string(j.at("reg").get<std::string>());
    c.reg_weight = j.at("reg_weight").get<double>();
    c.lr = j.at("lr").get<double>();
    c.steps = j.at("steps").get<std::uint32_t>();
    if (j.contains("grad_clip")) c.grad_clip = j.at("grad_clip").get<double>();
    return c;
}

json GenerationRecord::to_json() const {
    json ja = json::array();
    for (const auto& a : attempts) {
        json jv = json::array();
        for (const auto& v : a.verdicts) jv.push_back(v.to_json());
        json attempt{{"latent", tensor_to_json(a.latent)},
                     {"image", tensor_to_json(a.image)},
                     {"verdicts", jv},
                     {"displacement", a.displacement},
                     {"zero_gradient", a.zero_gradient}};
        if (a.steered) attempt["steering"] = steering_to_json(a.steering);
        ja.push_back(std::move(attempt));
    }
    return json{{"request",
                 {{"condition", request.condition},
                  {"seed", request.seed},
                  {"substeps", request.substeps}}},
                {"attempts", ja},
                {"status", to_string(status)}};
}

GenerationRecord GenerationRecord::from_json(const json& j) {
    GenerationRecord r;
    r.request.condition = j.at("request").at("condition").get<int>();
    r.request.seed = j.at("request").at("seed").get<std::uint64_t>();
    r.request.substeps = j.at("request").at("substeps").get<int>();
    for (const auto& ja : j.at("attempts")) {
        Attempt a;
        a.latent = tensor_from_json(ja.at("latent"));
        a.image = tensor_from_json(ja.at("image"));
        for (const auto& jv : ja.at("verdicts")) a.verdicts.push_back(FilterVerdict::from_json(jv));
        a.displacement = ja.at("displacement").get<double>();
        a.zero_gradient = ja.at("zero_gradient").get<bool>();
        if (ja.contains("steering")) {
            a.steered = true;
            a.steering = steering_from_json(ja.at("steering"));
        }
        r.attempts.push_back(std::move(a));
    }
    r.status = generation_status_from_string(j.at("status").get<std::string>());
    return r;
}

Tensor request_latent(const GenerationRequest& req, const std::vector<std::uint32_t>& shape) {
    RngState rng(req.seed);
    return gaussian(rng, shape);
}

GuardedGenerator::GuardedGenerator(const NoisePredictor& model, const NoiseSchedule& sched,
                                   std::shared_ptr<const Corpus> corpus,
                                   std::vector<std::shared_ptr<const Filter>> filters,
                                   AnchorStrategy strategy, SteeringConfig steer_cfg,
                                   int max_retries, SamplerOptions sampler)
    : model_(model),
      sched_(sched),
      corpus_(std::move(corpus)),
      filters_(std::move(filters)),
      strategy_(std::move(strategy)),
      steer_cfg_(steer_cfg),
      max_retries_(max_retries),
      sampler_(sampler) {
    if (filters_.empty()) throw ConfigError("guarded generator: no filters configured");
    if (max_retries_ < 0) throw ConfigError("guarded generator: max_retries must be >= 0");
    strategy_.validate();
    steer_cfg_.validate();
}

const Tensor& GuardedGenerator::inverted_reference(const std::string& id) const {
    auto it = inversion_cache_.find(id);
    if (it != inversion_cache_.end()) return it->second;
    const ImageRecord& rec = corpus_->at(id);
    SamplerOptions inv_opts = sampler_;
    inv_opts.substeps = sched_.steps;  // finest grid for anchor fidelity
    Tensor z = ddim_invert(rec.pixels, rec.condition, model_, sched_, inv_opts);
    return inversion_cache_.emplace(id, std::move(z)).first->second;
}

AnchorSets GuardedGenerator::build_anchors(const std::vector<FilterVerdict>& verdicts,
                                           const Tensor& trigger_latent) const {
    bool any = false;
    for (const auto& v : verdicts) any = any || v.triggered;
    if (!any) throw std::invalid_argument("build_anchors: no triggered verdict");
    AnchorSets anchors;
    if (strategy_.invert_matched_refs) {
        std::set<std::string> ids;
        for (const auto& v : verdicts)
            for (const auto& [id, dist] : v.matches) ids.insert(id);
        for (const auto& id : ids) anchors.undesired.push_back(inverted_reference(id));
    }
    if (strategy_.include_trigger_latent) anchors.undesired.push_back(trigger_latent);
    anchors.desired = strategy_.desired_latents;
    if (anchors.empty())
        throw Error("build_anchors: strategy produced no anchors");
    return anchors;
}

Tensor GuardedGenerator::baseline_image(const GenerationRequest& req) const {
    SamplerOptions opts = sampler_;
    opts.substeps = req.substeps;
    Tensor z = request_latent(req, model_.latent_shape());
    return to_image_range(ddim_sample(z, req.condition, model_, sched_, opts));
}

GenerationRecord GuardedGenerator::generate_guarded(const GenerationRequest& req) const {
    SamplerOptions opts = sampler_;
    opts.substeps = req.substeps;

    GenerationRecord rec;
    rec.request = req;
    SteeringConfig cur_cfg = steer_cfg_;
    Tensor z = request_latent(req, model_.latent_shape());

    // undesired anchors accumulated across retries (matched-reference
    // inversions by id, trigger latents in discovery order)
    std::vector<Tensor> acc_triggers;
    std::set<std::string> acc_ids;

    // steering outcome that produced this attempt's latent
    double pending_disp = 0.0;
    bool pending_zero = false;
    SteeringConfig pending_cfg = cur_cfg;

    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        Attempt a;
        a.latent = z;
        a.image = to_image_range(ddim_sample(z, req.condition, model_, sched_, opts));
        for (const auto& f : filters_) a.verdicts.push_back(f->scan(a.image));
        if (attempt > 0) {
            a.steered = true;
            a.steering = pending_cfg;
            a.displacement = pending_disp;
            a.zero_gradient = pending_zero;
        }
        bool triggered = false;
        for (const auto& v : a.verdicts) triggered = triggered || v.triggered;
        rec.attempts.push_back(std::move(a));

        if (!triggered) {
            rec.status = attempt == 0 ? GenerationStatus::CleanUnmodified
                                      : GenerationStatus::CleanSteered;
            return rec;
        }
        if (attempt == max_retries_) break;

        AnchorSets anchors = build_anchors(rec.attempts.back().verdicts, z);
        if (strategy_.accumulate_matches) {
            for (const auto& v : rec.attempts.back().verdicts)
                for (const auto& [id, dist] : v.matches) acc_ids.insert(id);
            if (strategy_.include_trigger_latent) acc_triggers.push_back(z);
            anchors.undesired.clear();
            if (strategy_.invert_matched_refs)
                for (const auto& id : acc_ids) anchors.undesired.push_back(inverted_reference(id));
            for (const auto& t : acc_triggers) anchors.undesired.push_back(t);
        }

        SteeringResult sr = refine_latent(z, anchors, cur_cfg);
        pending_disp = sr.displacement;
        pending_zero = sr.displacement == 0.0;
        pending_cfg = cur_cfg;
        z = std::move(sr.latent);
        cur_cfg.beta *= strategy_.escalation;  // next retry pushes harder
    }
    rec.status = GenerationStatus::FailedAfterBudget;
    return rec;
}

}  // namespace lsteer
