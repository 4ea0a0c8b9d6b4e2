#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lek/core/error.hpp"

namespace lek::core {

// Dense row-major double tensor, rank 0..4. Small by design: everything in
// this project fits comfortably in memory, so there are no views or strides.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<long> shape) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(count(shape_)), 0.0);
    }

    static Tensor zeros(std::vector<long> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<long> shape, double v) {
        Tensor t(std::move(shape));
        t.fill(v);
        return t;
    }

    static Tensor scalar(double v) { return full({1}, v); }

    static Tensor from(std::vector<long> shape, std::vector<double> data) {
        if (count(shape) != static_cast<long>(data.size()))
            throw ShapeError("Tensor::from: shape does not match data length");
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        return t;
    }

    long size() const { return static_cast<long>(data_.size()); }
    int rank() const { return static_cast<int>(shape_.size()); }
    long dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
    const std::vector<long>& shape() const { return shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    double& at(long i) { return data_[static_cast<size_t>(i)]; }
    double at(long i) const { return data_[static_cast<size_t>(i)]; }
    double& at2(long i, long j) { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
    double at2(long i, long j) const { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
    double& at3(long i, long j, long k) {
        return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
    }
    double at3(long i, long j, long k) const {
        return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) {
        for (auto& x : data_) x = v;
    }

    Tensor reshaped(std::vector<long> shape) const {
        if (count(shape) != size()) throw ShapeError("reshape: element count mismatch");
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = data_;
        return t;
    }

    static std::string shape_str(const std::vector<long>& s) {
        std::string r = "(";
        for (size_t i = 0; i < s.size(); ++i) {
            if (i) r += ",";
            r += std::to_string(s[i]);
        }
        return r + ")";
    }

private:
    static long count(const std::vector<long>& shape) {
        long n = 1;
        for (long d : shape) {
            if (d < 0) throw ShapeError("negative dimension");
            n *= d;
        }
        return n;
    }

    std::vector<long> shape_;
    std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(where) + ": shape mismatch " +
                         Tensor::shape_str(a.shape()) + " vs " + Tensor::shape_str(b.shape()));
}

} // namespace lek::core
