#include "trap/attack.hpp"

#include <cmath>
#include <mutex>

#include "trap/parallel.hpp"

namespace trap::attack {

void AttackConfig::validate() const {
    if (epsilon_255 <= 0) throw std::invalid_argument("attack: epsilon_255 must be positive");
    if (iterations <= 0) throw std::invalid_argument("attack: iterations must be positive");
    if (t1 <= 0 || t1 > iterations) throw std::invalid_argument("attack: need 0 < t1 <= T");
    if (mu < 0) throw std::invalid_argument("attack: mu must be >= 0");
    if (p < 0 || p > 1) throw std::invalid_argument("attack: p outside [0,1]");
    if (beta < 0 || beta > 1) throw std::invalid_argument("attack: beta outside [0,1]");
    if (gamma < 0) throw std::invalid_argument("attack: gamma must be >= 0");
    if (!ranges.valid()) throw std::invalid_argument("attack: range table has lo > hi");
}

std::optional<Preset> preset_from_name(const std::string& name) {
    if (name == "mi_fgsm") return Preset::MiFgsm;
    if (name == "ai_mi_fgsm") return Preset::AiMiFgsm;
    if (name == "ila") return Preset::Ila;
    if (name == "dg_ila") return Preset::DgIla;
    if (name == "trap") return Preset::Trap;
    return std::nullopt;
}

const char* preset_name(Preset p) {
    switch (p) {
        case Preset::MiFgsm: return "mi_fgsm";
        case Preset::AiMiFgsm: return "ai_mi_fgsm";
        case Preset::Ila: return "ila";
        case Preset::DgIla: return "dg_ila";
        case Preset::Trap: return "trap";
    }
    return "?";
}

AttackConfig apply_preset(Preset preset, AttackConfig cfg) {
    switch (preset) {
        case Preset::MiFgsm:
            cfg.t1 = cfg.iterations;
            cfg.p = 0;
            break;
        case Preset::AiMiFgsm:
            cfg.t1 = cfg.iterations;
            break;
        case Preset::Ila:
            cfg.beta = 1;
            cfg.p = 0;
            break;
        case Preset::DgIla:
            cfg.p = 0;
            break;
        case Preset::Trap:
            break;
    }
    return cfg;
}

std::vector<float> loss_l1(const ComputeGraph<float>& graph, const Tensor<float>& x,
                           const std::vector<int>& y_true) {
    auto [logits, tap] = evaluate_graph(graph, x);
    (void)tap;
    const int n = logits.dim(0), k = logits.dim(1);
    std::vector<float> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Tensor<float> row({1, k});
        std::copy(&logits[static_cast<long>(i) * k], &logits[static_cast<long>(i + 1) * k],
                  row.data.begin());
        out[static_cast<size_t>(i)] =
            detail::cross_entropy_loss<float>(row, {y_true[static_cast<size_t>(i)]}, nullptr);
    }
    return out;
}

float loss_l2(const std::vector<float>& h_adv, const GuidanceState& state, float gamma) {
    if (h_adv.size() != state.h_star.size() || state.h_star.size() != state.h_x.size())
        throw std::invalid_argument("loss_l2: dimension mismatch");
    return detail::guidance_loss_item<float>(h_adv.data(), state.h_star, state.h_x, gamma, nullptr);
}

void update_guidance(GuidanceState& state, const std::vector<float>& h_adv_prev, float beta) {
    if (h_adv_prev.size() != state.h_star.size())
        throw std::invalid_argument("update_guidance: dimension mismatch");
    for (size_t i = 0; i < state.h_star.size(); ++i)
        state.h_star[i] = (1.0f - beta) * h_adv_prev[i] + beta * state.h_star[i];
}

Tensor<float> momentum_normalize(const Tensor<float>& g_raw, const Tensor<float>& g_m, float mu) {
    if (!g_raw.same_shape(g_m)) throw std::invalid_argument("momentum_normalize: shape mismatch");
    const int n = g_raw.dim(0);
    const long d = g_raw.numel() / n;
    Tensor<float> out(g_raw.shape);
    for (int i = 0; i < n; ++i) {
        float l1 = 0;
        const float* g = &g_raw[static_cast<long>(i) * d];
        for (long k = 0; k < d; ++k) l1 += std::abs(g[k]);
        float* o = &out[static_cast<long>(i) * d];
        const float* m = &g_m[static_cast<long>(i) * d];
        if (l1 == 0.0f) {
            for (long k = 0; k < d; ++k) o[k] = mu * m[k];
        } else {
            for (long k = 0; k < d; ++k) o[k] = mu * m[k] + g[k] / l1;
        }
    }
    return out;
}

Tensor<float> step_and_clip(const Tensor<float>& x_t, const Tensor<float>& x_benign,
                            const Tensor<float>& g, float alpha, float epsilon) {
    if (!x_t.same_shape(x_benign) || !x_t.same_shape(g))
        throw std::invalid_argument("step_and_clip: shape mismatch");
    if (alpha <= 0 || epsilon <= 0) throw std::invalid_argument("step_and_clip: alpha/epsilon <= 0");
    Tensor<float> out(x_t.shape);
    for (long i = 0; i < x_t.numel(); ++i) {
        const float s = g[i] > 0 ? 1.0f : (g[i] < 0 ? -1.0f : 0.0f);
        float v = x_t[i] + alpha * s;
        v = std::min(std::max(v, x_benign[i] - epsilon), x_benign[i] + epsilon);
        out[i] = std::min(std::max(v, 0.0f), 1.0f);
    }
    return out;
}

namespace {

struct StepTransform {
    bool applied = false;
    affine::AffineMatrix matrix;
};

StepTransform draw_transform(Rng& rng, const AttackConfig& cfg) {
    StepTransform st;
    if (!cfg.transform_enabled) return st;
    if (rng.bernoulli(cfg.p)) {
        st.applied = true;
        st.matrix = affine::multi_form_matrix(affine::sample_affine_params(rng, cfg.ranges), cfg.order);
    }
    return st;
}

std::vector<float> hidden_row(const ComputeGraph<float>& g, const std::string& tap,
                              const Tensor<float>& x1) {
    auto [logits, tapped] = evaluate_graph(g, x1, tap);
    (void)logits;
    return tapped->data;
}

}  // namespace

std::pair<Tensor<float>, AttackTrace> run_trap(const ComputeGraph<float>& graph,
                                               const Tensor<float>& x,
                                               const std::vector<int>& y_true,
                                               const AttackConfig& cfg) {
    cfg.validate();
    const int T = cfg.iterations, t1 = cfg.t1;
    const int n = x.dim(0);
    if (static_cast<int>(y_true.size()) != n)
        throw std::invalid_argument("run_trap: label count != batch size");
    const bool enhancement = t1 < T;
    if (enhancement && graph.find(cfg.tap) < 0)
        throw std::invalid_argument("run_trap: unknown tap '" + cfg.tap + "'");
    const float eps = cfg.epsilon();

    // Attack graph: the warp layer in front of the model gives the
    // gradient path through the transform.
    ComputeGraph<float> attack_graph = graph;
    Layer<float> warp_layer;
    warp_layer.id = "__warp";
    warp_layer.kind = LayerKind::WarpInput;
    attack_graph.layers.insert(attack_graph.layers.begin(), warp_layer);

    // Per-batch transform mode: one schedule shared by every item.
    std::vector<StepTransform> shared_schedule;
    if (!cfg.sample_per_item) {
        Rng rng(derive_seed(cfg.seed, "transform-schedule"));
        shared_schedule.reserve(static_cast<size_t>(T));
        for (int t = 0; t < T; ++t) shared_schedule.push_back(draw_transform(rng, cfg));
    }

    Tensor<float> result(x.shape);
    std::vector<float> loss_acc(static_cast<size_t>(T) * n, 0.0f);
    std::vector<float> dev_acc(static_cast<size_t>(T) * n, 0.0f);
    std::vector<float> min_acc(static_cast<size_t>(T) * n, 0.0f);
    std::vector<float> max_acc(static_cast<size_t>(T) * n, 0.0f);
    std::vector<unsigned char> applied_acc(static_cast<size_t>(T) * n, 0);
    std::vector<unsigned char> active_acc(static_cast<size_t>(T) * n, 0);
    std::vector<unsigned char> degenerate(static_cast<size_t>(n), 0);
    const long item_size = x.numel() / n;

    parallel_for(n, [&](long i) {
        ComputeGraph<float> ag = attack_graph;  // private warp matrix
        Rng rng(derive_seed(cfg.seed, "attack-item", static_cast<uint64_t>(i)));
        Tensor<float> x0({1, x.dim(1), x.dim(2), x.dim(3)});
        std::copy(x.data.begin() + i * item_size, x.data.begin() + (i + 1) * item_size,
                  x0.data.begin());
        Tensor<float> x_adv = x0;
        Tensor<float> g_m(x0.shape);
        std::vector<int> y1 = {y_true[static_cast<size_t>(i)]};

        std::vector<float> h_x, h_star;
        if (enhancement) h_x = hidden_row(graph, cfg.tap, x0);

        for (int t = 0; t < T; ++t) {
            if (t == t1) {
                double gap = 0;
                for (size_t k = 0; k < h_star.size(); ++k) {
                    const double d = static_cast<double>(h_star[k]) - h_x[k];
                    gap += d * d;
                }
                if (gap == 0.0) {
                    degenerate[static_cast<size_t>(i)] = 1;
                    break;  // keep the baseline-phase result
                }
                x_adv = x0;
                std::fill(g_m.data.begin(), g_m.data.end(), 0.0f);
            }
            StepTransform st = cfg.sample_per_item ? draw_transform(rng, cfg)
                                                   : shared_schedule[static_cast<size_t>(t)];
            ag.layers[0].warp = st.applied ? st.matrix : affine::AffineMatrix::identity();

            LossSpec<float> ls = t < t1 ? LossSpec<float>::cross_entropy(y1)
                                        : LossSpec<float>::tapped_guidance(cfg.tap, {h_star},
                                                                           {h_x}, cfg.gamma);
            auto [loss, grads] = backward_graph(ag, x_adv, ls);
            g_m = momentum_normalize(grads.input_grad, g_m, cfg.mu);
            const float alpha = t < t1 ? eps / static_cast<float>(t1)
                                       : eps / static_cast<float>(T - t1);
            Tensor<float> x_next = step_and_clip(x_adv, x0, g_m, alpha, eps);

            float dev = 0, lo = x_next[0], hi = x_next[0];
            for (long k = 0; k < x_next.numel(); ++k) {
                dev = std::max(dev, std::abs(x_next[k] - x0[k]));
                lo = std::min(lo, x_next[k]);
                hi = std::max(hi, x_next[k]);
            }
            dev_acc[static_cast<size_t>(t) * n + i] = dev;
            min_acc[static_cast<size_t>(t) * n + i] = lo;
            max_acc[static_cast<size_t>(t) * n + i] = hi;

            loss_acc[static_cast<size_t>(t) * n + i] = loss;
            applied_acc[static_cast<size_t>(t) * n + i] = st.applied ? 1 : 0;
            active_acc[static_cast<size_t>(t) * n + i] = 1;

            if (enhancement) {
                if (t < t1) {
                    h_star = hidden_row(graph, cfg.tap, x_next);
                } else {
                    // EMA against the hidden output of the pre-update,
                    // untransformed iterate
                    std::vector<float> h_adv_prev = hidden_row(graph, cfg.tap, x_adv);
                    for (size_t k = 0; k < h_star.size(); ++k)
                        h_star[k] = (1.0f - cfg.beta) * h_adv_prev[k] + cfg.beta * h_star[k];
                }
            }
            x_adv = std::move(x_next);
        }
        std::copy(x_adv.data.begin(), x_adv.data.end(), result.data.begin() + i * item_size);
    });

    AttackTrace trace;
    trace.records.resize(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
        TraceRecord& r = trace.records[static_cast<size_t>(t)];
        r.step = t;
        r.enhancement = t >= t1;
        r.alpha = t < t1 ? eps / static_cast<float>(t1) : eps / static_cast<float>(T - t1);
        double loss_sum = 0;
        long applied = 0, active = 0;
        for (int i = 0; i < n; ++i) {
            if (!active_acc[static_cast<size_t>(t) * n + i]) continue;
            const size_t ti = static_cast<size_t>(t) * n + i;
            if (!active) {
                r.min_pixel = min_acc[ti];
                r.max_pixel = max_acc[ti];
            } else {
                r.min_pixel = std::min(r.min_pixel, min_acc[ti]);
                r.max_pixel = std::max(r.max_pixel, max_acc[ti]);
            }
            r.max_deviation = std::max(r.max_deviation, dev_acc[ti]);
            ++active;
            loss_sum += loss_acc[ti];
            applied += applied_acc[ti];
        }
        r.mean_loss = active ? static_cast<float>(loss_sum / active) : 0.0f;
        r.transform_rate = active ? static_cast<float>(applied) / static_cast<float>(active) : 0.0f;
    }
    for (long i = 0; i < n; ++i)
        if (degenerate[static_cast<size_t>(i)]) trace.degenerate_items.push_back(i);
    return {std::move(result), std::move(trace)};
}

}  // namespace trap::attack
