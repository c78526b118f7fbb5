#pragma once

#include <map>
#include <memory>

#include "lsteer/ddim.hpp"
#include "lsteer/filters.hpp"
#include "lsteer/steering.hpp"

namespace lsteer {

struct GenerationRequest {
    int condition = 0;  // caption surrogate; must be inside the model vocabulary
    std::uint64_t seed = 0;
    int substeps = 25;
};

// How undesired/desired anchors are assembled when a filter trips.
struct AnchorStrategy {
    bool invert_matched_refs = true;
    bool include_trigger_latent = true;
    // Matched-reference anchors discovered on earlier retries stay in I_U.
    bool accumulate_matches = true;
    std::vector<Tensor> desired_latents;  // optional pull anchors
    double escalation = 2.0;              // beta multiplier per retry, >= 1

    void validate() const;
};

enum class GenerationStatus { CleanUnmodified, CleanSteered, FailedAfterBudget };

std::string to_string(GenerationStatus s);
GenerationStatus generation_status_from_string(const std::string& s);

struct Attempt {
    Tensor latent;  // z_T used for this attempt
    Tensor image;   // sampled image in [0,1]
    std::vector<FilterVerdict> verdicts;
    bool steered = false;             // false only for attempt 0
    SteeringConfig steering;          // config applied to produce this latent
    double displacement = 0.0;        // |latent - previous latent|
    bool zero_gradient = false;       // steering moved nothing (recorded)
};

struct GenerationRecord {
    GenerationRequest request;
    std::vector<Attempt> attempts;
    GenerationStatus status = GenerationStatus::FailedAfterBudget;

    nlohmann::json to_json() const;
    static GenerationRecord from_json(const nlohmann::json& j);
};

// Fig.-2-style guard loop: generate, filter, and on trigger build anchors,
// steer the latent, regenerate. Non-triggering requests return the
// unguarded sampler output bit-exactly.
class GuardedGenerator {
  public:
    GuardedGenerator(const NoisePredictor& model, const NoiseSchedule& sched,
                     std::shared_ptr<const Corpus> corpus,
                     std::vector<std::shared_ptr<const Filter>> filters, AnchorStrategy strategy,
                     SteeringConfig steer_cfg, int max_retries, SamplerOptions sampler = {});

    GenerationRecord generate_guarded(const GenerationRequest& req) const;

    // I_U from the verdicts of one attempt (inversions of matched corpus
    // refs, plus the triggering latent when enabled); I_D from the strategy.
    AnchorSets build_anchors(const std::vector<FilterVerdict>& verdicts,
                             const Tensor& trigger_latent) const;

    // Unguarded baseline for the same request.
    Tensor baseline_image(const GenerationRequest& req) const;

    const Tensor& inverted_reference(const std::string& id) const;

  private:
    const NoisePredictor& model_;
    const NoiseSchedule& sched_;
    std::shared_ptr<const Corpus> corpus_;
    std::vector<std::shared_ptr<const Filter>> filters_;
    AnchorStrategy strategy_;
    SteeringConfig steer_cfg_;
    int max_retries_;
    SamplerOptions sampler_;
    mutable std::map<std::string, Tensor> inversion_cache_;
};

// z_T for a request: gaussian stream seeded by the request seed.
Tensor request_latent(const GenerationRequest& req, const std::vector<std::uint32_t>& shape);

}  // namespace lsteer
