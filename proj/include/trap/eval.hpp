#pragma once

#include <functional>
#include <optional>
#include <string>

#include "trap/graph.hpp"
#include "trap/rng.hpp"
#include "trap/zoo.hpp"

namespace trap::eval {

/// Fraction of items misclassified on X_adv; with subtract_benign the
/// benign error rate is subtracted and the result floored at 0.
double attack_success_rate(const ComputeGraph<float>& graph, const Tensor<float>& x,
                           const Tensor<float>& x_adv, const std::vector<int>& y_true,
                           bool subtract_benign);

using Corruption = std::function<Tensor<float>(const Tensor<float>&)>;

/// Over items that are benign-correct and adversarially misclassified,
/// the fraction recovered by corrupting X_adv. Empty denominator gives
/// an absent value, not zero.
std::optional<double> destruction_rate(const ComputeGraph<float>& graph, const Tensor<float>& x,
                                       const Tensor<float>& x_adv, const std::vector<int>& y_true,
                                       const Corruption& corruption, long* counted = nullptr);

/// i.i.d. zero-mean Gaussian noise with standard deviation sigma in
/// [0,1] pixel units, clamped back to [0,1].
Tensor<float> corrupt_gaussian_noise(const Tensor<float>& image, double sigma, Rng& rng);

/// Separable Gaussian blur, radius ceil(3*sigma), kernel normalized to
/// sum 1, reflect padding; sigma = 0 is the identity.
Tensor<float> corrupt_gaussian_blur(const Tensor<float>& image, double sigma);

std::vector<double> gaussian_blur_kernel(double sigma);

/// |F(X_adv)-F(X)|_2 / |F(X)|_2 at the named layer, averaged over the
/// batch; zero-norm benign items are excluded and counted.
double relative_feature_difference(const ComputeGraph<float>& graph, const std::string& layer_id,
                                   const Tensor<float>& x, const Tensor<float>& x_adv,
                                   long* excluded = nullptr);

}  // namespace trap::eval
