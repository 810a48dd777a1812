#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sseg/errors.hpp"
#include "sseg/tensor.hpp"

// Forward and backward kernels for the operator set the network needs.
// Valid (unpadded) convolutions only; pooling is 2x2x2; upconvolution is a
// stride-2 transposed convolution with a 2x2x2 kernel. All loops keep the
// x axis innermost so they vectorize over contiguous rows, and reduction
// order is fixed so results are bit-reproducible.

namespace sseg::ops {

template <typename T>
TensorT<T> conv3d_valid(const TensorT<T>& input, const TensorT<T>& kernel,
                        const TensorT<T>& bias) {
    if (input.rank() != 4 || kernel.rank() != 5)
        throw ConfigError("conv3d_valid: expected 4-D input and 5-D kernel");
    const std::size_t cin = input.extent(0);
    const std::size_t cout = kernel.extent(0);
    const std::size_t k = kernel.extent(2);
    if (kernel.extent(1) != cin)
        throw ConfigError("conv3d_valid: kernel expects " + std::to_string(kernel.extent(1)) +
                          " input channels, got " + std::to_string(cin));
    if (kernel.extent(3) != k || kernel.extent(4) != k || (k != 1 && k != 3))
        throw ConfigError("conv3d_valid: kernel must be cubic with extent 1 or 3");
    if (bias.numel() != cout) throw ConfigError("conv3d_valid: bias/out-channel mismatch");
    const std::size_t D = input.extent(1), H = input.extent(2), W = input.extent(3);
    if (D < k || H < k || W < k)
        throw GeometryError("conv3d_valid: input " + input.shape_str() +
                            " smaller than kernel extent " + std::to_string(k));
    const std::size_t oD = D - k + 1, oH = H - k + 1, oW = W - k + 1;

    TensorT<T> out({cout, oD, oH, oW});
    for (std::size_t co = 0; co < cout; ++co) {
        T* out_c = out.data() + co * oD * oH * oW;
        std::fill(out_c, out_c + oD * oH * oW, bias[co]);
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const T* in_c = input.data() + ci * D * H * W;
            const T* w_base = kernel.data() + (co * cin + ci) * k * k * k;
            for (std::size_t kz = 0; kz < k; ++kz)
                for (std::size_t ky = 0; ky < k; ++ky)
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        const T w = w_base[(kz * k + ky) * k + kx];
                        for (std::size_t z = 0; z < oD; ++z)
                            for (std::size_t y = 0; y < oH; ++y) {
                                const T* in_row = in_c + ((z + kz) * H + (y + ky)) * W + kx;
                                T* out_row = out_c + (z * oH + y) * oW;
                                for (std::size_t x = 0; x < oW; ++x)
                                    out_row[x] += w * in_row[x];
                            }
                    }
        }
    }
    return out;
}

template <typename T>
void conv3d_valid_backward(const TensorT<T>& input, const TensorT<T>& kernel,
                           const TensorT<T>& grad_out, TensorT<T>& grad_input,
                           TensorT<T>& grad_kernel, TensorT<T>& grad_bias) {
    const std::size_t cin = input.extent(0);
    const std::size_t cout = kernel.extent(0);
    const std::size_t k = kernel.extent(2);
    const std::size_t D = input.extent(1), H = input.extent(2), W = input.extent(3);
    const std::size_t oD = grad_out.extent(1), oH = grad_out.extent(2), oW = grad_out.extent(3);

    for (std::size_t co = 0; co < cout; ++co) {
        const T* go_c = grad_out.data() + co * oD * oH * oW;
        T bias_sum = 0;
        for (std::size_t i = 0; i < oD * oH * oW; ++i) bias_sum += go_c[i];
        grad_bias[co] += bias_sum;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const T* in_c = input.data() + ci * D * H * W;
            T* gi_c = grad_input.data() + ci * D * H * W;
            const T* w_base = kernel.data() + (co * cin + ci) * k * k * k;
            T* gw_base = grad_kernel.data() + (co * cin + ci) * k * k * k;
            for (std::size_t kz = 0; kz < k; ++kz)
                for (std::size_t ky = 0; ky < k; ++ky)
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        const T w = w_base[(kz * k + ky) * k + kx];
                        T gw = 0;
                        for (std::size_t z = 0; z < oD; ++z)
                            for (std::size_t y = 0; y < oH; ++y) {
                                const T* in_row = in_c + ((z + kz) * H + (y + ky)) * W + kx;
                                T* gi_row = gi_c + ((z + kz) * H + (y + ky)) * W + kx;
                                const T* go_row = go_c + (z * oH + y) * oW;
                                for (std::size_t x = 0; x < oW; ++x) {
                                    gi_row[x] += w * go_row[x];
                                    gw += in_row[x] * go_row[x];
                                }
                            }
                        gw_base[(kz * k + ky) * k + kx] += gw;
                    }
        }
    }
}

// 2x2x2 non-overlapping max pooling. argmax (flat index into the input
// channel slab) is recorded for the backward pass; ties go to the first
// voxel in scan order.
template <typename T>
TensorT<T> maxpool3d(const TensorT<T>& input, std::vector<std::size_t>* argmax = nullptr) {
    const std::size_t C = input.extent(0);
    const std::size_t D = input.extent(1), H = input.extent(2), W = input.extent(3);
    const char* axis_names[3] = {"z", "y", "x"};
    const std::size_t extents[3] = {D, H, W};
    for (int a = 0; a < 3; ++a)
        if (extents[a] % 2 != 0)
            throw GeometryError(std::string("maxpool3d: odd extent ") +
                                std::to_string(extents[a]) + " on axis " + axis_names[a]);
    const std::size_t oD = D / 2, oH = H / 2, oW = W / 2;
    TensorT<T> out({C, oD, oH, oW});
    if (argmax) argmax->resize(out.numel());
    for (std::size_t c = 0; c < C; ++c) {
        const T* in_c = input.data() + c * D * H * W;
        for (std::size_t z = 0; z < oD; ++z)
            for (std::size_t y = 0; y < oH; ++y)
                for (std::size_t x = 0; x < oW; ++x) {
                    T best = in_c[(2 * z * H + 2 * y) * W + 2 * x];
                    std::size_t best_idx = (2 * z * H + 2 * y) * W + 2 * x;
                    for (std::size_t dz = 0; dz < 2; ++dz)
                        for (std::size_t dy = 0; dy < 2; ++dy)
                            for (std::size_t dx = 0; dx < 2; ++dx) {
                                const std::size_t idx =
                                    ((2 * z + dz) * H + (2 * y + dy)) * W + 2 * x + dx;
                                if (in_c[idx] > best) {
                                    best = in_c[idx];
                                    best_idx = idx;
                                }
                            }
                    const std::size_t o = ((c * oD + z) * oH + y) * oW + x;
                    out[o] = best;
                    if (argmax) (*argmax)[o] = c * D * H * W + best_idx;
                }
    }
    return out;
}

template <typename T>
void maxpool3d_backward(const std::vector<std::size_t>& argmax, const TensorT<T>& grad_out,
                        TensorT<T>& grad_input) {
    for (std::size_t o = 0; o < grad_out.numel(); ++o)
        grad_input[argmax[o]] += grad_out[o];
}

// Transposed convolution, kernel 2, stride 2: every input voxel scatters a
// 2x2x2 patch, output extents double exactly.
template <typename T>
TensorT<T> upconv3d(const TensorT<T>& input, const TensorT<T>& kernel, const TensorT<T>& bias) {
    const std::size_t cin = input.extent(0);
    if (kernel.rank() != 5 || kernel.extent(0) != cin)
        throw ConfigError("upconv3d: kernel expects " + std::to_string(kernel.extent(0)) +
                          " input channels, got " + std::to_string(cin));
    const std::size_t cout = kernel.extent(1);
    if (kernel.extent(2) != 2 || kernel.extent(3) != 2 || kernel.extent(4) != 2)
        throw ConfigError("upconv3d: kernel spatial extent must be 2");
    if (bias.numel() != cout) throw ConfigError("upconv3d: bias/out-channel mismatch");
    const std::size_t D = input.extent(1), H = input.extent(2), W = input.extent(3);
    const std::size_t oD = 2 * D, oH = 2 * H, oW = 2 * W;
    TensorT<T> out({cout, oD, oH, oW});
    for (std::size_t co = 0; co < cout; ++co) {
        T* out_c = out.data() + co * oD * oH * oW;
        std::fill(out_c, out_c + oD * oH * oW, bias[co]);
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const T* in_c = input.data() + ci * D * H * W;
            const T* w_base = kernel.data() + (ci * cout + co) * 8;
            for (std::size_t dz = 0; dz < 2; ++dz)
                for (std::size_t dy = 0; dy < 2; ++dy)
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        const T w = w_base[(dz * 2 + dy) * 2 + dx];
                        for (std::size_t z = 0; z < D; ++z)
                            for (std::size_t y = 0; y < H; ++y) {
                                const T* in_row = in_c + (z * H + y) * W;
                                T* out_row =
                                    out_c + ((2 * z + dz) * oH + (2 * y + dy)) * oW + dx;
                                for (std::size_t x = 0; x < W; ++x)
                                    out_row[2 * x] += w * in_row[x];
                            }
                    }
        }
    }
    return out;
}

template <typename T>
void upconv3d_backward(const TensorT<T>& input, const TensorT<T>& kernel,
                       const TensorT<T>& grad_out, TensorT<T>& grad_input,
                       TensorT<T>& grad_kernel, TensorT<T>& grad_bias) {
    const std::size_t cin = input.extent(0);
    const std::size_t cout = kernel.extent(1);
    const std::size_t D = input.extent(1), H = input.extent(2), W = input.extent(3);
    const std::size_t oD = 2 * D, oH = 2 * H, oW = 2 * W;
    for (std::size_t co = 0; co < cout; ++co) {
        const T* go_c = grad_out.data() + co * oD * oH * oW;
        T bias_sum = 0;
        for (std::size_t i = 0; i < oD * oH * oW; ++i) bias_sum += go_c[i];
        grad_bias[co] += bias_sum;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const T* in_c = input.data() + ci * D * H * W;
            T* gi_c = grad_input.data() + ci * D * H * W;
            const T* w_base = kernel.data() + (ci * cout + co) * 8;
            T* gw_base = grad_kernel.data() + (ci * cout + co) * 8;
            for (std::size_t dz = 0; dz < 2; ++dz)
                for (std::size_t dy = 0; dy < 2; ++dy)
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        const T w = w_base[(dz * 2 + dy) * 2 + dx];
                        T gw = 0;
                        for (std::size_t z = 0; z < D; ++z)
                            for (std::size_t y = 0; y < H; ++y) {
                                const T* in_row = in_c + (z * H + y) * W;
                                T* gi_row = gi_c + (z * H + y) * W;
                                const T* go_row =
                                    go_c + ((2 * z + dz) * oH + (2 * y + dy)) * oW + dx;
                                for (std::size_t x = 0; x < W; ++x) {
                                    gi_row[x] += w * go_row[2 * x];
                                    gw += in_row[x] * go_row[2 * x];
                                }
                            }
                        gw_base[(dz * 2 + dy) * 2 + dx] += gw;
                    }
        }
    }
}

template <typename T>
TensorT<T> relu(const TensorT<T>& input) {
    TensorT<T> out(input.shape());
    for (std::size_t i = 0; i < input.numel(); ++i) out[i] = input[i] > T(0) ? input[i] : T(0);
    return out;
}

template <typename T>
void relu_backward(const TensorT<T>& input, const TensorT<T>& grad_out,
                   TensorT<T>& grad_input) {
    for (std::size_t i = 0; i < input.numel(); ++i)
        if (input[i] > T(0)) grad_input[i] += grad_out[i];
}

// Softmax over the channel axis, stabilized by per-voxel max subtraction.
template <typename T>
TensorT<T> softmax_channel(const TensorT<T>& input) {
    const std::size_t C = input.extent(0);
    if (C < 2) throw ConfigError("softmax_channel: need at least 2 channels");
    const std::size_t V = input.numel() / C;
    TensorT<T> out(input.shape());
    for (std::size_t v = 0; v < V; ++v) {
        T m = input[v];
        for (std::size_t c = 1; c < C; ++c) m = std::max(m, input[c * V + v]);
        T sum = 0;
        for (std::size_t c = 0; c < C; ++c) {
            const T e = std::exp(input[c * V + v] - m);
            out[c * V + v] = e;
            sum += e;
        }
        for (std::size_t c = 0; c < C; ++c) out[c * V + v] /= sum;
    }
    return out;
}

template <typename T>
void softmax_channel_backward(const TensorT<T>& probs, const TensorT<T>& grad_out,
                              TensorT<T>& grad_input) {
    const std::size_t C = probs.extent(0);
    const std::size_t V = probs.numel() / C;
    for (std::size_t v = 0; v < V; ++v) {
        T dot = 0;
        for (std::size_t c = 0; c < C; ++c) dot += grad_out[c * V + v] * probs[c * V + v];
        for (std::size_t c = 0; c < C; ++c)
            grad_input[c * V + v] += probs[c * V + v] * (grad_out[c * V + v] - dot);
    }
}

// Center-crop the skip tensor to the up tensor's spatial extent, then
// concatenate channels (skip first).
template <typename T>
TensorT<T> concat_crop(const TensorT<T>& skip, const TensorT<T>& up) {
    const std::size_t S = skip.extent(1), U = up.extent(1);
    if (skip.extent(2) != S || skip.extent(3) != S || up.extent(2) != U || up.extent(3) != U)
        throw GeometryError("concat_crop: expects cubic spatial extents");
    if (S < U) throw GeometryError("concat_crop: skip extent " + std::to_string(S) +
                                   " smaller than up extent " + std::to_string(U));
    if ((S - U) % 2 != 0)
        throw GeometryError("concat_crop: odd crop margin between extents " +
                            std::to_string(S) + " and " + std::to_string(U));
    const std::size_t margin = (S - U) / 2;
    const std::size_t c1 = skip.extent(0), c2 = up.extent(0);
    TensorT<T> out({c1 + c2, U, U, U});
    for (std::size_t c = 0; c < c1; ++c)
        for (std::size_t z = 0; z < U; ++z)
            for (std::size_t y = 0; y < U; ++y) {
                const T* src = skip.data() +
                               ((c * S + z + margin) * S + y + margin) * S + margin;
                T* dst = out.data() + ((c * U + z) * U + y) * U;
                std::copy(src, src + U, dst);
            }
    std::copy(up.data(), up.data() + up.numel(), out.data() + c1 * U * U * U);
    return out;
}

template <typename T>
void concat_crop_backward(const TensorT<T>& grad_out, std::size_t skip_extent,
                          TensorT<T>& grad_skip, TensorT<T>& grad_up) {
    const std::size_t U = grad_out.extent(1);
    const std::size_t S = skip_extent;
    const std::size_t margin = (S - U) / 2;
    const std::size_t c1 = grad_skip.extent(0), c2 = grad_up.extent(0);
    for (std::size_t c = 0; c < c1; ++c)
        for (std::size_t z = 0; z < U; ++z)
            for (std::size_t y = 0; y < U; ++y) {
                const T* src = grad_out.data() + ((c * U + z) * U + y) * U;
                T* dst = grad_skip.data() +
                         ((c * S + z + margin) * S + y + margin) * S + margin;
                for (std::size_t x = 0; x < U; ++x) dst[x] += src[x];
            }
    const T* src = grad_out.data() + c1 * U * U * U;
    for (std::size_t i = 0; i < c2 * U * U * U; ++i) grad_up[i] += src[i];
}

}  // namespace sseg::ops
