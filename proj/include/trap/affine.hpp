#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "trap/rng.hpp"
#include "trap/tensor.hpp"

namespace trap::affine {

/// The seven scalar parameters of the four basic transforms.
/// Translation offsets are fractions of the half-extent in the
/// normalized [-1,1] frame; the rotation angle is in degrees; scale
/// and shear factors enter the matrices as written.
struct AffineParams {
    double t_x = 0, t_y = 0;
    double theta_rot = 0;
    double s_x = 1, s_y = 1;
    double d_x = 0, d_y = 0;
};

/// 3x3 homogeneous matrix, row-major. Bottom row stays (0,0,1) for
/// every constructor and product in this module.
struct AffineMatrix {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static AffineMatrix identity() { return {}; }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    AffineMatrix inverse() const {
        double d = det();
        if (std::abs(d) < 1e-12) throw std::domain_error("affine: singular matrix");
        AffineMatrix r;
        r.m = {(m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
               (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
               (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
               (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
               (m[0] * m[4] - m[1] * m[3]) / d};
        return r;
    }

    /// Apply to a homogeneous point (x, y, 1).
    std::array<double, 2> apply(double x, double y) const {
        return {m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]};
    }
};

inline AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix& b) {
    AffineMatrix r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += a.m[i * 3 + k] * b.m[k * 3 + j];
            r.m[i * 3 + j] = s;
        }
    return r;
}

enum class TransformKind { Translate, Rotate, Scale, Shear };

inline AffineMatrix basic_matrix(TransformKind kind, const AffineParams& p) {
    AffineMatrix r;
    switch (kind) {
        case TransformKind::Translate:
            r.m = {1, 0, p.t_x, 0, 1, p.t_y, 0, 0, 1};
            break;
        case TransformKind::Rotate: {
            double a = p.theta_rot * 3.14159265358979323846 / 180.0;
            double c = std::cos(a), s = std::sin(a);
            r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
            break;
        }
        case TransformKind::Scale:
            r.m = {p.s_x, 0, 0, 0, p.s_y, 0, 0, 0, 1};
            break;
        case TransformKind::Shear:
            r.m = {1, p.d_x, 0, p.d_y, 1, 0, 0, 0, 1};
            break;
    }
    return r;
}

/// Left-to-right product: the composed map applies the last matrix in
/// the list first.
inline AffineMatrix compose_affine(const std::vector<AffineMatrix>& ms) {
    if (ms.empty()) throw std::invalid_argument("compose_affine: empty list");
    AffineMatrix r = ms.front();
    for (size_t i = 1; i < ms.size(); ++i) r = r * ms[i];
    return r;
}

struct Interval {
    double lo = 0, hi = 0;
    bool valid() const { return lo <= hi; }
};

/// Uniform sampling intervals for the transform parameters.
struct RangeTable {
    Interval translate{-0.1, 0.1};
    Interval rotate_deg{-90, 90};
    Interval scale{0.5, 1.5};
    Interval shear{-30, 30};

    bool valid() const {
        return translate.valid() && rotate_deg.valid() && scale.valid() && shear.valid();
    }
};

/// Fresh independent draw for every parameter; a degenerate interval
/// returns its constant.
inline AffineParams sample_affine_params(Rng& rng, const RangeTable& r) {
    if (!r.valid()) throw std::invalid_argument("sample_affine_params: lo > hi");
    AffineParams p;
    p.t_x = rng.uniform(r.translate.lo, r.translate.hi);
    p.t_y = rng.uniform(r.translate.lo, r.translate.hi);
    p.theta_rot = rng.uniform(r.rotate_deg.lo, r.rotate_deg.hi);
    p.s_x = rng.uniform(r.scale.lo, r.scale.hi);
    p.s_y = rng.uniform(r.scale.lo, r.scale.hi);
    p.d_x = rng.uniform(r.shear.lo, r.shear.hi);
    p.d_y = rng.uniform(r.shear.lo, r.shear.hi);
    return p;
}

enum class ComposeOrder {
    ShearFirst,      // translate last: T * R * S * D (function-composition reading)
    TranslateFirst,  // reversed application order
};

inline AffineMatrix multi_form_matrix(const AffineParams& p,
                                      ComposeOrder order = ComposeOrder::ShearFirst) {
    std::vector<AffineMatrix> ms = {
        basic_matrix(TransformKind::Translate, p), basic_matrix(TransformKind::Rotate, p),
        basic_matrix(TransformKind::Scale, p), basic_matrix(TransformKind::Shear, p)};
    if (order == ComposeOrder::TranslateFirst) std::reverse(ms.begin(), ms.end());
    return compose_affine(ms);
}

/// One bilinear sample in the inverse-mapped, center-normalized frame.
/// Indices of the four source neighbors (-1 when out of bounds) and
/// their weights; shared between forward warp and its backward pass.
struct SampleTap {
    int idx[4] = {-1, -1, -1, -1};
    double w[4] = {0, 0, 0, 0};
};

/// Precomputes the sampling pattern for an HxW grid under the inverse
/// of `matrix`. Coordinates that land within 1e-6 of an exact grid
/// point are snapped, so identity and whole-pixel translations sample
/// exactly.
inline std::vector<SampleTap> sampling_pattern(const AffineMatrix& matrix, int height, int width) {
    AffineMatrix inv = matrix.inverse();
    std::vector<SampleTap> taps(static_cast<size_t>(height) * width);
    for (int i = 0; i < height; ++i) {
        double yn = height > 1 ? 2.0 * i / (height - 1) - 1.0 : 0.0;
        for (int j = 0; j < width; ++j) {
            double xn = width > 1 ? 2.0 * j / (width - 1) - 1.0 : 0.0;
            auto src = inv.apply(xn, yn);
            double px = width > 1 ? (src[0] + 1.0) * (width - 1) / 2.0 : 0.0;
            double py = height > 1 ? (src[1] + 1.0) * (height - 1) / 2.0 : 0.0;
            if (std::abs(px - std::round(px)) < 1e-6) px = std::round(px);
            if (std::abs(py - std::round(py)) < 1e-6) py = std::round(py);
            double fx = std::floor(px), fy = std::floor(py);
            int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
            double wx = px - fx, wy = py - fy;
            SampleTap& t = taps[static_cast<size_t>(i) * width + j];
            const int xs[2] = {x0, x0 + 1};
            const int ys[2] = {y0, y0 + 1};
            const double wxs[2] = {1.0 - wx, wx};
            const double wys[2] = {1.0 - wy, wy};
            int k = 0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b, ++k) {
                    if (ys[a] >= 0 && ys[a] < height && xs[b] >= 0 && xs[b] < width &&
                        wys[a] * wxs[b] != 0.0) {
                        t.idx[k] = ys[a] * width + xs[b];
                        t.w[k] = wys[a] * wxs[b];
                    }
                }
        }
    }
    return taps;
}

/// Inverse-mapped bilinear warp of an (N,C,H,W) batch; out-of-bounds
/// samples are zero.
template <typename T>
Tensor<T> warp_bilinear(const Tensor<T>& image, const AffineMatrix& matrix) {
    if (image.rank() != 4) throw std::invalid_argument("warp_bilinear: expected (N,C,H,W)");
    const int n = image.dim(0), c = image.dim(1), h = image.dim(2), w = image.dim(3);
    auto taps = sampling_pattern(matrix, h, w);
    Tensor<T> out(image.shape);
    const long plane = static_cast<long>(h) * w;
    for (long nc = 0; nc < static_cast<long>(n) * c; ++nc) {
        const T* src = image.data.data() + nc * plane;
        T* dst = out.data.data() + nc * plane;
        for (long p = 0; p < plane; ++p) {
            const SampleTap& t = taps[static_cast<size_t>(p)];
            T acc = 0;
            for (int k = 0; k < 4; ++k)
                if (t.idx[k] >= 0) acc += static_cast<T>(t.w[k]) * src[t.idx[k]];
            dst[p] = acc;
        }
    }
    return out;
}

/// Adjoint of warp_bilinear with respect to image values.
template <typename T>
Tensor<T> warp_bilinear_backward(const Tensor<T>& grad_out, const AffineMatrix& matrix) {
    if (grad_out.rank() != 4) throw std::invalid_argument("warp_bilinear_backward: expected (N,C,H,W)");
    const int n = grad_out.dim(0), c = grad_out.dim(1), h = grad_out.dim(2), w = grad_out.dim(3);
    auto taps = sampling_pattern(matrix, h, w);
    Tensor<T> grad_in(grad_out.shape);
    const long plane = static_cast<long>(h) * w;
    for (long nc = 0; nc < static_cast<long>(n) * c; ++nc) {
        const T* go = grad_out.data.data() + nc * plane;
        T* gi = grad_in.data.data() + nc * plane;
        for (long p = 0; p < plane; ++p) {
            const SampleTap& t = taps[static_cast<size_t>(p)];
            for (int k = 0; k < 4; ++k)
                if (t.idx[k] >= 0) gi[t.idx[k]] += static_cast<T>(t.w[k]) * go[p];
        }
    }
    return grad_in;
}

/// With probability p warps with a freshly sampled multi-form
/// transform, otherwise passes the image through. The Bernoulli draw
/// always consumes the stream; parameter draws only when it fires.
template <typename T>
std::pair<Tensor<T>, bool> apply_random_affine(const Tensor<T>& image, double p, Rng& rng,
                                               const RangeTable& ranges,
                                               ComposeOrder order = ComposeOrder::ShearFirst) {
    if (p < 0 || p > 1) throw std::invalid_argument("apply_random_affine: p outside [0,1]");
    bool fire = rng.bernoulli(p);
    if (!fire) return {image, false};
    AffineParams params = sample_affine_params(rng, ranges);
    return {warp_bilinear(image, multi_form_matrix(params, order)), true};
}

}  // namespace trap::affine
