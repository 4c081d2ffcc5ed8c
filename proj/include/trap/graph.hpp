#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trap/affine.hpp"
#include "trap/tensor.hpp"

namespace trap {

enum class LayerKind { Conv2d, Relu, MaxPool2d, Linear, Flatten, WarpInput };

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Relu: return "relu";
        case LayerKind::MaxPool2d: return "maxpool2d";
        case LayerKind::Linear: return "linear";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::WarpInput: return "warp-input";
    }
    return "?";
}

inline std::optional<LayerKind> layer_kind_from_name(const std::string& s) {
    if (s == "conv2d") return LayerKind::Conv2d;
    if (s == "relu") return LayerKind::Relu;
    if (s == "maxpool2d") return LayerKind::MaxPool2d;
    if (s == "linear") return LayerKind::Linear;
    if (s == "flatten") return LayerKind::Flatten;
    if (s == "warp-input") return LayerKind::WarpInput;
    return std::nullopt;
}

template <typename T>
struct Layer {
    std::string id;
    LayerKind kind = LayerKind::Relu;
    // conv2d: params = {weight (OC,IC,KH,KW), bias (OC)}
    // linear: params = {weight (O,I), bias (O)}
    std::vector<Tensor<T>> params;
    int stride = 1, pad = 0;              // conv2d
    int pool = 2, pool_stride = 2;        // maxpool2d
    affine::AffineMatrix warp;            // warp-input

    template <typename U>
    Layer<U> cast() const {
        Layer<U> out;
        out.id = id;
        out.kind = kind;
        for (const auto& p : params) out.params.push_back(p.template cast<U>());
        out.stride = stride;
        out.pad = pad;
        out.pool = pool;
        out.pool_stride = pool_stride;
        out.warp = warp;
        return out;
    }
};

/// An ordered list of named layers; the list order is the topological
/// order. Immutable during evaluation.
template <typename T>
struct ComputeGraph {
    std::vector<int> input_shape;  // (C,H,W)
    int num_classes = 0;
    std::vector<Layer<T>> layers;

    int find(const std::string& id) const {
        for (size_t i = 0; i < layers.size(); ++i)
            if (layers[i].id == id) return static_cast<int>(i);
        return -1;
    }

    Layer<T>& at(const std::string& id) {
        int i = find(id);
        if (i < 0) throw std::invalid_argument("graph: unknown layer '" + id + "'");
        return layers[static_cast<size_t>(i)];
    }

    template <typename U>
    ComputeGraph<U> cast() const {
        ComputeGraph<U> out;
        out.input_shape = input_shape;
        out.num_classes = num_classes;
        for (const auto& l : layers) out.layers.push_back(l.template cast<U>());
        return out;
    }
};

namespace detail {

inline int conv_out(int in, int k, int stride, int pad) {
    int o = (in + 2 * pad - k) / stride + 1;
    if (o <= 0) throw std::invalid_argument("conv/pool output size <= 0");
    return o;
}

}  // namespace detail

/// Output shape of each layer given the graph input shape; validates
/// parameter shapes along the way.
template <typename T>
std::vector<std::vector<int>> infer_shapes(const ComputeGraph<T>& g) {
    std::vector<std::vector<int>> shapes;
    std::vector<int> cur = g.input_shape;  // (C,H,W) or (D) after flatten
    for (const auto& l : g.layers) {
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("layer '" + l.id + "': " + why);
        };
        switch (l.kind) {
            case LayerKind::Conv2d: {
                if (cur.size() != 3) fail("conv2d needs a (C,H,W) input");
                if (l.params.size() != 2) fail("conv2d needs weight+bias");
                const auto& w = l.params[0];
                if (w.rank() != 4 || w.dim(1) != cur[0])
                    fail("weight shape " + shape_str(w.shape) + " does not match input channels " +
                         std::to_string(cur[0]));
                if (l.params[1].rank() != 1 || l.params[1].dim(0) != w.dim(0)) fail("bad bias shape");
                cur = {w.dim(0), detail::conv_out(cur[1], w.dim(2), l.stride, l.pad),
                       detail::conv_out(cur[2], w.dim(3), l.stride, l.pad)};
                break;
            }
            case LayerKind::Relu:
                break;
            case LayerKind::MaxPool2d:
                if (cur.size() != 3) fail("maxpool2d needs a (C,H,W) input");
                cur = {cur[0], detail::conv_out(cur[1], l.pool, l.pool_stride, 0),
                       detail::conv_out(cur[2], l.pool, l.pool_stride, 0)};
                break;
            case LayerKind::Linear: {
                if (l.params.size() != 2) fail("linear needs weight+bias");
                long d = 1;
                for (int x : cur) d *= x;
                const auto& w = l.params[0];
                if (cur.size() != 1) fail("linear needs a flattened input");
                if (w.rank() != 2 || w.dim(1) != d)
                    fail("weight shape " + shape_str(w.shape) + " does not match input dim " +
                         std::to_string(d));
                if (l.params[1].rank() != 1 || l.params[1].dim(0) != w.dim(0)) fail("bad bias shape");
                cur = {w.dim(0)};
                break;
            }
            case LayerKind::Flatten: {
                long d = 1;
                for (int x : cur) d *= x;
                cur = {static_cast<int>(d)};
                break;
            }
            case LayerKind::WarpInput:
                if (cur.size() != 3) fail("warp-input needs a (C,H,W) input");
                break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

template <typename T>
void validate_graph(const ComputeGraph<T>& g) {
    for (size_t i = 0; i < g.layers.size(); ++i)
        for (size_t j = i + 1; j < g.layers.size(); ++j)
            if (g.layers[i].id == g.layers[j].id)
                throw std::invalid_argument("graph: duplicate layer id '" + g.layers[i].id + "'");
    auto shapes = infer_shapes(g);
    if (shapes.empty() || shapes.back().size() != 1 || shapes.back()[0] != g.num_classes)
        throw std::invalid_argument("graph: final layer does not emit class-count logits");
}

/// All per-layer activations of one forward pass plus the bookkeeping
/// the backward pass needs.
template <typename T>
struct ForwardTrace {
    std::vector<Tensor<T>> acts;            // acts[0] = input, acts[i+1] = output of layer i
    std::vector<std::vector<long>> argmax;  // maxpool layers: source index per output element
};

namespace detail {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Layer<T>& l) {
    const auto& w = l.params[0];
    const auto& b = l.params[1];
    const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int oh = conv_out(h, kh, l.stride, l.pad), ow = conv_out(wd, kw, l.stride, l.pad);
    Tensor<T> y({n, oc, oh, ow});
    for (int ni = 0; ni < n; ++ni)
        for (int o = 0; o < oc; ++o) {
            T* yp = &y[((static_cast<long>(ni) * oc + o) * oh) * ow];
            for (int i = 0; i < oh; ++i)
                for (int j = 0; j < ow; ++j) {
                    T acc = b[o];
                    const int y0 = i * l.stride - l.pad, x0 = j * l.stride - l.pad;
                    for (int c = 0; c < ic; ++c) {
                        const T* xp = &x[((static_cast<long>(ni) * ic + c) * h) * wd];
                        const T* wp = &w[((static_cast<long>(o) * ic + c) * kh) * kw];
                        for (int ky = 0; ky < kh; ++ky) {
                            const int yy = y0 + ky;
                            if (yy < 0 || yy >= h) continue;
                            for (int kx = 0; kx < kw; ++kx) {
                                const int xx = x0 + kx;
                                if (xx < 0 || xx >= wd) continue;
                                acc += xp[static_cast<long>(yy) * wd + xx] * wp[ky * kw + kx];
                            }
                        }
                    }
                    yp[static_cast<long>(i) * ow + j] = acc;
                }
        }
    return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Layer<T>& l, const Tensor<T>& gy, Tensor<T>& gx,
                     Tensor<T>& gw, Tensor<T>& gb) {
    const auto& w = l.params[0];
    const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int oh = gy.dim(2), ow = gy.dim(3);
    for (int ni = 0; ni < n; ++ni)
        for (int o = 0; o < oc; ++o) {
            const T* gyp = &gy[((static_cast<long>(ni) * oc + o) * oh) * ow];
            for (int i = 0; i < oh; ++i)
                for (int j = 0; j < ow; ++j) {
                    const T g = gyp[static_cast<long>(i) * ow + j];
                    if (g == T(0)) continue;
                    gb[o] += g;
                    const int y0 = i * l.stride - l.pad, x0 = j * l.stride - l.pad;
                    for (int c = 0; c < ic; ++c) {
                        const T* xp = &x[((static_cast<long>(ni) * ic + c) * h) * wd];
                        T* gxp = &gx[((static_cast<long>(ni) * ic + c) * h) * wd];
                        const T* wp = &w[((static_cast<long>(o) * ic + c) * kh) * kw];
                        T* gwp = &gw[((static_cast<long>(o) * ic + c) * kh) * kw];
                        for (int ky = 0; ky < kh; ++ky) {
                            const int yy = y0 + ky;
                            if (yy < 0 || yy >= h) continue;
                            for (int kx = 0; kx < kw; ++kx) {
                                const int xx = x0 + kx;
                                if (xx < 0 || xx >= wd) continue;
                                gwp[ky * kw + kx] += g * xp[static_cast<long>(yy) * wd + xx];
                                gxp[static_cast<long>(yy) * wd + xx] += g * wp[ky * kw + kx];
                            }
                        }
                    }
                }
        }
}

template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& x, const Layer<T>& l, std::vector<long>& argmax) {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int oh = conv_out(h, l.pool, l.pool_stride, 0), ow = conv_out(wd, l.pool, l.pool_stride, 0);
    Tensor<T> y({n, c, oh, ow});
    argmax.assign(y.numel(), -1);
    long oi = 0;
    for (long nc = 0; nc < static_cast<long>(n) * c; ++nc) {
        const T* xp = &x[nc * h * wd];
        for (int i = 0; i < oh; ++i)
            for (int j = 0; j < ow; ++j, ++oi) {
                T best = -std::numeric_limits<T>::infinity();
                long bi = -1;
                // ties: first maximal element in row-major order
                for (int ky = 0; ky < l.pool; ++ky)
                    for (int kx = 0; kx < l.pool; ++kx) {
                        const int yy = i * l.pool_stride + ky, xx = j * l.pool_stride + kx;
                        if (yy >= h || xx >= wd) continue;
                        const long xi = static_cast<long>(yy) * wd + xx;
                        if (xp[xi] > best) {
                            best = xp[xi];
                            bi = xi;
                        }
                    }
                y[oi] = best;
                argmax[oi] = nc * h * wd + bi;
            }
    }
    return y;
}

template <typename T>
Tensor<T> linear_forward(const Tensor<T>& x, const Layer<T>& l) {
    const auto& w = l.params[0];
    const auto& b = l.params[1];
    const int n = x.dim(0), d = x.dim(1), o = w.dim(0);
    Tensor<T> y({n, o});
    for (int ni = 0; ni < n; ++ni)
        for (int oi = 0; oi < o; ++oi) {
            T acc = b[oi];
            const T* xp = &x[static_cast<long>(ni) * d];
            const T* wp = &w[static_cast<long>(oi) * d];
            for (int k = 0; k < d; ++k) acc += xp[k] * wp[k];
            y[static_cast<long>(ni) * o + oi] = acc;
        }
    return y;
}

}  // namespace detail

/// Runs the graph, recording every activation when `trace` is given.
/// Batch input is (N,C,H,W); logits come out as (N,num_classes).
template <typename T>
Tensor<T> forward_graph(const ComputeGraph<T>& g, const Tensor<T>& input, ForwardTrace<T>* trace) {
    if (input.rank() != 4 || input.dim(1) != g.input_shape[0] || input.dim(2) != g.input_shape[1] ||
        input.dim(3) != g.input_shape[2])
        throw std::invalid_argument("forward: input shape " + shape_str(input.shape) +
                                    " does not match graph input " + shape_str(g.input_shape));
    if (trace) {
        trace->acts.clear();
        trace->argmax.assign(g.layers.size(), {});
        trace->acts.push_back(input);
    }
    Tensor<T> cur = input;
    for (size_t li = 0; li < g.layers.size(); ++li) {
        const auto& l = g.layers[li];
        switch (l.kind) {
            case LayerKind::Conv2d:
                cur = detail::conv2d_forward(cur, l);
                break;
            case LayerKind::Relu: {
                Tensor<T> y(cur.shape);
                for (long i = 0; i < cur.numel(); ++i) y[i] = cur[i] > T(0) ? cur[i] : T(0);
                cur = std::move(y);
                break;
            }
            case LayerKind::MaxPool2d: {
                std::vector<long> am;
                cur = detail::maxpool_forward(cur, l, am);
                if (trace) trace->argmax[li] = std::move(am);
                break;
            }
            case LayerKind::Linear:
                cur = detail::linear_forward(cur, l);
                break;
            case LayerKind::Flatten: {
                long d = cur.numel() / cur.dim(0);
                Tensor<T> y({cur.dim(0), static_cast<int>(d)}, cur.data);
                cur = std::move(y);
                break;
            }
            case LayerKind::WarpInput:
                cur = affine::warp_bilinear(cur, l.warp);
                break;
        }
        if (trace) trace->acts.push_back(cur);
    }
    return cur;
}

/// Logits plus, when requested, the exact post-layer activation at the
/// named tap.
template <typename T>
std::pair<Tensor<T>, std::optional<Tensor<T>>> evaluate_graph(const ComputeGraph<T>& g,
                                                              const Tensor<T>& input,
                                                              const std::string& tap = "") {
    if (tap.empty())
        return {forward_graph(g, input, static_cast<ForwardTrace<T>*>(nullptr)), std::nullopt};
    int ti = g.find(tap);
    if (ti < 0) throw std::invalid_argument("evaluate: unknown tap '" + tap + "'");
    ForwardTrace<T> trace;
    Tensor<T> logits = forward_graph(g, input, &trace);
    return {std::move(logits), trace.acts[static_cast<size_t>(ti) + 1]};
}

/// What the backward pass differentiates. SumLogits exists for the
/// verification suites; CrossEntropy is the baseline-phase loss;
/// TappedGuidance is the enhancement-phase loss on the tap activation
/// against the constant vectors h_star / h_x.
template <typename T>
struct LossSpec {
    enum class Kind { SumLogits, CrossEntropy, TappedGuidance };
    Kind kind = Kind::SumLogits;
    std::vector<int> labels;  // CrossEntropy: per batch item
    std::string tap;          // TappedGuidance
    std::vector<std::vector<T>> h_star, h_x;  // TappedGuidance: per batch item
    T gamma = 0;

    static LossSpec sum_logits() { return {}; }
    static LossSpec cross_entropy(std::vector<int> y) {
        LossSpec s;
        s.kind = Kind::CrossEntropy;
        s.labels = std::move(y);
        return s;
    }
    static LossSpec tapped_guidance(std::string tap_id, std::vector<std::vector<T>> hs,
                                    std::vector<std::vector<T>> hx, T gamma_) {
        LossSpec s;
        s.kind = Kind::TappedGuidance;
        s.tap = std::move(tap_id);
        s.h_star = std::move(hs);
        s.h_x = std::move(hx);
        s.gamma = gamma_;
        return s;
    }
};

template <typename T>
struct GradientBundle {
    Tensor<T> input_grad;
    std::map<std::string, std::vector<Tensor<T>>> param_grads;
};

namespace detail {

/// Stabilized softmax cross-entropy, summed over the batch; fills the
/// logit gradient.
template <typename T>
T cross_entropy_loss(const Tensor<T>& logits, const std::vector<int>& labels, Tensor<T>* glogits) {
    const int n = logits.dim(0), k = logits.dim(1);
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("cross_entropy: label count != batch size");
    T total = 0;
    for (int i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= k) throw std::invalid_argument("cross_entropy: label out of range");
        const T* z = &logits[static_cast<long>(i) * k];
        T zmax = z[0];
        for (int j = 1; j < k; ++j) zmax = std::max(zmax, z[j]);
        T sum = 0;
        for (int j = 0; j < k; ++j) sum += std::exp(z[j] - zmax);
        total += std::log(sum) + zmax - z[labels[i]];
        if (glogits) {
            T* gz = &(*glogits)[static_cast<long>(i) * k];
            for (int j = 0; j < k; ++j) gz[j] = std::exp(z[j] - zmax) / sum;
            gz[labels[i]] -= T(1);
        }
    }
    return total;
}

/// Guidance loss on the flattened tap activation of one batch item:
/// cos((h*-hx),(h-hx)) + gamma*|h-hx|/|h*-hx|. At h == hx the value is
/// zero by convention and the gradient follows the guidance direction
/// (u/|u|), which is what lets the enhancement phase leave its reset
/// point.
template <typename T>
T guidance_loss_item(const T* h, const std::vector<T>& h_star, const std::vector<T>& h_x, T gamma,
                     T* gh) {
    const size_t d = h_star.size();
    if (h_x.size() != d) throw std::invalid_argument("guidance loss: h_star/h_x dim mismatch");
    T uu = 0, vv = 0, uv = 0;
    for (size_t i = 0; i < d; ++i) {
        const T u = h_star[i] - h_x[i];
        const T v = h[i] - h_x[i];
        uu += u * u;
        vv += v * v;
        uv += u * v;
    }
    const T un = std::sqrt(uu);
    if (un <= T(0)) throw std::domain_error("guidance loss: zero guidance gap");
    const T vn = std::sqrt(vv);
    if (vn == T(0)) {
        if (gh)
            for (size_t i = 0; i < d; ++i) gh[i] = (h_star[i] - h_x[i]) / un;
        return T(0);
    }
    const T cosv = uv / (un * vn);
    if (gh) {
        const T a = T(1) / (un * vn);
        const T b = cosv / (vn * vn);
        const T c = gamma / (un * vn);
        for (size_t i = 0; i < d; ++i) {
            const T u = h_star[i] - h_x[i];
            const T v = h[i] - h_x[i];
            gh[i] = a * u - b * v + c * v;
        }
    }
    return cosv + gamma * vn / un;
}

}  // namespace detail

/// Reverse-mode pass: loss value plus exact gradients with respect to
/// the input and every parameter. Layers above the loss attachment
/// point keep zero parameter gradients.
template <typename T>
std::pair<T, GradientBundle<T>> backward_graph(const ComputeGraph<T>& g, const Tensor<T>& input,
                                               const LossSpec<T>& loss) {
    ForwardTrace<T> trace;
    forward_graph(g, input, &trace);

    GradientBundle<T> out;
    for (const auto& l : g.layers) {
        std::vector<Tensor<T>> zs;
        for (const auto& p : l.params) zs.emplace_back(p.shape);
        out.param_grads[l.id] = std::move(zs);
    }

    int attach = static_cast<int>(g.layers.size()) - 1;
    if (loss.kind == LossSpec<T>::Kind::TappedGuidance) {
        attach = g.find(loss.tap);
        if (attach < 0) throw std::invalid_argument("backward: unknown tap '" + loss.tap + "'");
    }

    const Tensor<T>& attach_act = trace.acts[static_cast<size_t>(attach) + 1];
    Tensor<T> grad(attach_act.shape);
    T loss_value = 0;
    switch (loss.kind) {
        case LossSpec<T>::Kind::SumLogits:
            for (long i = 0; i < attach_act.numel(); ++i) {
                loss_value += attach_act[i];
                grad[i] = T(1);
            }
            break;
        case LossSpec<T>::Kind::CrossEntropy:
            loss_value = detail::cross_entropy_loss(attach_act, loss.labels, &grad);
            break;
        case LossSpec<T>::Kind::TappedGuidance: {
            const int n = attach_act.dim(0);
            const long d = attach_act.numel() / n;
            if (static_cast<int>(loss.h_star.size()) != n || static_cast<int>(loss.h_x.size()) != n)
                throw std::invalid_argument("backward: guidance vectors do not match batch size");
            for (int i = 0; i < n; ++i) {
                if (static_cast<long>(loss.h_star[i].size()) != d)
                    throw std::invalid_argument("backward: guidance dim != tap dim");
                loss_value += detail::guidance_loss_item(&attach_act[i * d], loss.h_star[i],
                                                         loss.h_x[i], loss.gamma, &grad[i * d]);
            }
            break;
        }
    }

    for (int li = attach; li >= 0; --li) {
        const auto& l = g.layers[static_cast<size_t>(li)];
        const Tensor<T>& x = trace.acts[static_cast<size_t>(li)];
        Tensor<T> gx(x.shape);
        switch (l.kind) {
            case LayerKind::Conv2d:
                detail::conv2d_backward(x, l, grad, gx, out.param_grads[l.id][0],
                                        out.param_grads[l.id][1]);
                break;
            case LayerKind::Relu:
                for (long i = 0; i < x.numel(); ++i) gx[i] = x[i] > T(0) ? grad[i] : T(0);
                break;
            case LayerKind::MaxPool2d: {
                const auto& am = trace.argmax[static_cast<size_t>(li)];
                for (long i = 0; i < grad.numel(); ++i) gx[am[i]] += grad[i];
                break;
            }
            case LayerKind::Linear: {
                const auto& w = l.params[0];
                const int n = x.dim(0), d = x.dim(1), o = w.dim(0);
                auto& gw = out.param_grads[l.id][0];
                auto& gb = out.param_grads[l.id][1];
                for (int ni = 0; ni < n; ++ni)
                    for (int oi = 0; oi < o; ++oi) {
                        const T gy = grad[static_cast<long>(ni) * o + oi];
                        if (gy == T(0)) continue;
                        gb[oi] += gy;
                        const T* xp = &x[static_cast<long>(ni) * d];
                        const T* wp = &w[static_cast<long>(oi) * d];
                        T* gwp = &gw[static_cast<long>(oi) * d];
                        T* gxp = &gx[static_cast<long>(ni) * d];
                        for (int k = 0; k < d; ++k) {
                            gwp[k] += gy * xp[k];
                            gxp[k] += gy * wp[k];
                        }
                    }
                break;
            }
            case LayerKind::Flatten:
                gx.data = grad.data;
                break;
            case LayerKind::WarpInput: {
                Tensor<T> go(x.shape, grad.data);
                gx = affine::warp_bilinear_backward(go, l.warp);
                break;
            }
        }
        grad = std::move(gx);
    }
    out.input_grad = std::move(grad);
    for (long i = 0; i < out.input_grad.numel(); ++i)
        if (!std::isfinite(static_cast<double>(out.input_grad[i])))
            throw std::runtime_error("backward: non-finite input gradient at coordinate " +
                                     std::to_string(i));
    return {loss_value, std::move(out)};
}

/// Central-difference verification of the input gradient. Coordinates
/// sitting on a kink (the two one-sided slopes disagree) are excluded.
/// Meant for double graphs.
template <typename T>
double finite_difference_check(const ComputeGraph<T>& g, const Tensor<T>& input,
                               const LossSpec<T>& loss, double step) {
    if (step <= 0) throw std::invalid_argument("finite_difference_check: step <= 0");
    auto [l0, grads] = backward_graph(g, input, loss);
    (void)l0;
    auto eval = [&](const Tensor<T>& x) {
        auto [lv, gb] = backward_graph(g, x, loss);
        (void)gb;
        return static_cast<double>(lv);
    };
    double f0 = eval(input);
    double max_rel = 0;
    Tensor<T> x = input;
    for (long i = 0; i < x.numel(); ++i) {
        const T orig = x[i];
        x[i] = orig + static_cast<T>(step);
        double fp = eval(x);
        x[i] = orig - static_cast<T>(step);
        double fm = eval(x);
        x[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_difference_check: non-finite value at coordinate " +
                                     std::to_string(i));
        const double dplus = (fp - f0) / step;
        const double dminus = (f0 - fm) / step;
        if (std::abs(dplus - dminus) > 1e-3 * std::max({1.0, std::abs(dplus), std::abs(dminus)}))
            continue;  // kink
        const double central = (fp - fm) / (2 * step);
        const double analytic = static_cast<double>(grads.input_grad[i]);
        // below the cancellation noise floor of the difference quotient
        if (std::abs(analytic - central) < 1e-9 * std::max(1.0, std::abs(f0))) continue;
        const double rel = std::abs(analytic - central) / std::max(std::abs(analytic), 1e-12);
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace trap
