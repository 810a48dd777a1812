#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sseg/errors.hpp"

namespace sseg {

// Dense multi-dimensional array, contiguous, channel-major. Activations are
// [c, z, y, x]; conv kernels are [c_out, c_in, kz, ky, kx]; upconv kernels
// are [c_in, c_out, kz, ky, kx].
template <typename T>
class TensorT {
public:
    TensorT() = default;

    explicit TensorT(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
        data_.assign(check_numel(shape_), T(0));
    }

    TensorT(std::initializer_list<std::size_t> shape)
        : TensorT(std::vector<std::size_t>(shape)) {}

    static TensorT zeros_like(const TensorT& other) { return TensorT(other.shape_); }

    static TensorT full(std::vector<std::size_t> shape, T value) {
        TensorT t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), value);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_[axis]; }
    std::size_t numel() const { return data_.size(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& raw() { return data_; }
    const std::vector<T>& raw() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // 4-D accessors (c, z, y, x); used by the spatial kernels.
    T& at(std::size_t c, std::size_t z, std::size_t y, std::size_t x) {
        return data_[((c * shape_[1] + z) * shape_[2] + y) * shape_[3] + x];
    }
    T at(std::size_t c, std::size_t z, std::size_t y, std::size_t x) const {
        return data_[((c * shape_[1] + z) * shape_[2] + y) * shape_[3] + x];
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) os << 'x';
            os << shape_[i];
        }
        os << ']';
        return os.str();
    }

private:
    static std::size_t check_numel(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t e : shape) {
            if (e < 1) throw ConfigError("tensor extent must be >= 1");
            n *= e;
        }
        return n;
    }

    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

}  // namespace sseg
