#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trap/affine.hpp"
#include "trap/graph.hpp"
#include "trap/zoo.hpp"

namespace trap::attack {

/// All scalars of the two-phase procedure. epsilon is given on the
/// 0-255 scale and divided by 255 internally.
struct AttackConfig {
    int epsilon_255 = 16;
    int iterations = 10;  // T
    int t1 = 4;           // baseline-phase iterations
    float mu = 1.0f;      // momentum factor
    float p = 0.9f;       // transform probability
    float beta = 0.8f;    // guidance EMA weight
    float gamma = 0.8f;   // amplitude tradeoff
    std::string tap;      // intermediate layer id; empty = model default
    affine::RangeTable ranges;
    uint64_t seed = 0;
    bool transform_enabled = true;
    bool sample_per_item = true;  // false: one transform per step shared by the batch
    affine::ComposeOrder order = affine::ComposeOrder::ShearFirst;

    float epsilon() const { return static_cast<float>(epsilon_255) / 255.0f; }
    void validate() const;
};

enum class Preset { MiFgsm, AiMiFgsm, Ila, DgIla, Trap };

std::optional<Preset> preset_from_name(const std::string& name);
const char* preset_name(Preset p);

/// mi_fgsm: t1=T, p=0. ai_mi_fgsm: t1=T. ila: beta=1, p=0.
/// dg_ila: p=0. trap: everything on.
AttackConfig apply_preset(Preset preset, AttackConfig base);

/// The flattened hidden vectors driving the enhancement loss for one
/// batch item.
struct GuidanceState {
    std::vector<float> h_star;
    std::vector<float> h_x;
};

/// Cross-entropy of the logits, one value per batch item.
std::vector<float> loss_l1(const ComputeGraph<float>& graph, const Tensor<float>& x,
                           const std::vector<int>& y_true);

/// cos((h*-hx),(h_adv-hx)) + gamma*|h_adv-hx|/|h*-hx|; the cosine term
/// is zero when h_adv == hx. Throws on a zero guidance gap.
float loss_l2(const std::vector<float>& h_adv, const GuidanceState& state, float gamma);

/// h* <- (1-beta)*h_adv_prev + beta*h*.
void update_guidance(GuidanceState& state, const std::vector<float>& h_adv_prev, float beta);

/// g_next = mu*g_m + g_raw/|g_raw|_1, with the L1 norm per batch item
/// over all pixels; a zero gradient contributes nothing.
Tensor<float> momentum_normalize(const Tensor<float>& g_raw, const Tensor<float>& g_m, float mu);

/// X_next = clamp(clamp(X_t + alpha*sign(g), X_benign +- eps), 0, 1),
/// sign(0) = 0.
Tensor<float> step_and_clip(const Tensor<float>& x_t, const Tensor<float>& x_benign,
                            const Tensor<float>& g, float alpha, float epsilon);

struct TraceRecord {
    int step = 0;
    bool enhancement = false;
    float mean_loss = 0;
    float transform_rate = 0;
    float alpha = 0;
    float max_deviation = 0;  // max over items of |X_t - X|_inf after the step
    float min_pixel = 0, max_pixel = 0;
};

struct AttackTrace {
    std::vector<TraceRecord> records;       // exactly T
    std::vector<long> degenerate_items;     // zero guidance gap at the phase switch
};

/// The full two-phase procedure over a batch. Items are independent
/// and each owns an RNG stream derived from (seed, item index), so the
/// result does not depend on the parallel schedule.
std::pair<Tensor<float>, AttackTrace> run_trap(const ComputeGraph<float>& graph,
                                               const Tensor<float>& x,
                                               const std::vector<int>& y_true,
                                               const AttackConfig& cfg);

}  // namespace trap::attack
