#include "trap/eval.hpp"

#include <cmath>

namespace trap::eval {

double attack_success_rate(const ComputeGraph<float>& graph, const Tensor<float>& x,
                           const Tensor<float>& x_adv, const std::vector<int>& y_true,
                           bool subtract_benign) {
    const int n = x_adv.dim(0);
    if (n == 0 || static_cast<size_t>(n) != y_true.size() || x.dim(0) != n)
        throw std::invalid_argument("attack_success_rate: empty or misaligned batch");
    auto adv_pred = zoo::predict(graph, x_adv);
    long adv_wrong = 0;
    for (int i = 0; i < n; ++i)
        if (adv_pred[static_cast<size_t>(i)] != y_true[static_cast<size_t>(i)]) ++adv_wrong;
    double rate = static_cast<double>(adv_wrong) / n;
    if (subtract_benign) {
        auto ben_pred = zoo::predict(graph, x);
        long ben_wrong = 0;
        for (int i = 0; i < n; ++i)
            if (ben_pred[static_cast<size_t>(i)] != y_true[static_cast<size_t>(i)]) ++ben_wrong;
        rate = std::max(0.0, rate - static_cast<double>(ben_wrong) / n);
    }
    return rate;
}

std::optional<double> destruction_rate(const ComputeGraph<float>& graph, const Tensor<float>& x,
                                       const Tensor<float>& x_adv, const std::vector<int>& y_true,
                                       const Corruption& corruption, long* counted) {
    const int n = x.dim(0);
    auto ben_pred = zoo::predict(graph, x);
    auto adv_pred = zoo::predict(graph, x_adv);
    auto cor_pred = zoo::predict(graph, corruption(x_adv));
    long denom = 0, recovered = 0;
    for (int i = 0; i < n; ++i) {
        const int y = y_true[static_cast<size_t>(i)];
        if (ben_pred[static_cast<size_t>(i)] != y) continue;
        if (adv_pred[static_cast<size_t>(i)] == y) continue;
        ++denom;
        if (cor_pred[static_cast<size_t>(i)] == y) ++recovered;
    }
    if (counted) *counted = denom;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(recovered) / static_cast<double>(denom);
}

Tensor<float> corrupt_gaussian_noise(const Tensor<float>& image, double sigma, Rng& rng) {
    if (sigma < 0) throw std::invalid_argument("corrupt_gaussian_noise: sigma < 0");
    if (sigma == 0) return image;
    Tensor<float> out(image.shape);
    for (long i = 0; i < image.numel(); ++i) {
        const double v = image[i] + sigma * rng.normal();
        out[i] = static_cast<float>(std::min(std::max(v, 0.0), 1.0));
    }
    return out;
}

std::vector<double> gaussian_blur_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<size_t>(2 * radius + 1));
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
        k[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

namespace {

inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

}  // namespace

Tensor<float> corrupt_gaussian_blur(const Tensor<float>& image, double sigma) {
    if (sigma < 0) throw std::invalid_argument("corrupt_gaussian_blur: sigma < 0");
    if (sigma == 0) return image;
    if (image.rank() != 4) throw std::invalid_argument("corrupt_gaussian_blur: expected (N,C,H,W)");
    const auto kernel = gaussian_blur_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int n = image.dim(0), c = image.dim(1), h = image.dim(2), w = image.dim(3);
    const long plane = static_cast<long>(h) * w;
    Tensor<float> tmp(image.shape), out(image.shape);
    for (long nc = 0; nc < static_cast<long>(n) * c; ++nc) {
        const float* src = image.data.data() + nc * plane;
        float* mid = tmp.data.data() + nc * plane;
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                double acc = 0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kernel[static_cast<size_t>(k + radius)] *
                           src[static_cast<long>(i) * w + reflect_index(j + k, w)];
                mid[static_cast<long>(i) * w + j] = static_cast<float>(acc);
            }
        float* dst = out.data.data() + nc * plane;
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                double acc = 0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kernel[static_cast<size_t>(k + radius)] *
                           mid[static_cast<long>(reflect_index(i + k, h)) * w + j];
                dst[static_cast<long>(i) * w + j] = static_cast<float>(acc);
            }
    }
    return out;
}

double relative_feature_difference(const ComputeGraph<float>& graph, const std::string& layer_id,
                                   const Tensor<float>& x, const Tensor<float>& x_adv,
                                   long* excluded) {
    auto hb = zoo::hidden_output(graph, layer_id, x);
    auto ha = zoo::hidden_output(graph, layer_id, x_adv);
    const int n = hb.dim(0);
    const long d = hb.dim(1);
    double sum = 0;
    long used = 0, skip = 0;
    for (int i = 0; i < n; ++i) {
        double nb = 0, nd = 0;
        for (long k = 0; k < d; ++k) {
            const double b = hb[static_cast<long>(i) * d + k];
            const double diff = static_cast<double>(ha[static_cast<long>(i) * d + k]) - b;
            nb += b * b;
            nd += diff * diff;
        }
        if (nb == 0) {
            ++skip;
            continue;
        }
        sum += std::sqrt(nd) / std::sqrt(nb);
        ++used;
    }
    if (excluded) *excluded = skip;
    if (used == 0) throw std::domain_error("relative_feature_difference: all benign features zero");
    return sum / static_cast<double>(used);
}

}  // namespace trap::eval
