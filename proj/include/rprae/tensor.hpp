#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "rprae/errors.hpp"

namespace rprae {

using Shape = std::vector<int>;

// Dense fp64 tensor, row-major. Checked construction rejects non-positive
// dims, shape/data length mismatch, and non-finite values; zeros() skips the
// finiteness scan since zeros are finite by construction.
class Tensor {
  public:
    Tensor() = default;

    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value) { return Tensor({1}, {value}); }
    static Tensor vec(std::vector<double> data);
    static Tensor matrix(int rows, int cols, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int size() const { return static_cast<int>(data_.size()); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    double operator[](int i) const { return data_[static_cast<size_t>(i)]; }
    double& operator[](int i) { return data_[static_cast<size_t>(i)]; }
    double at2(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool bit_equal(const Tensor& o) const;

    std::string shape_str() const;

  private:
    struct Unchecked {};
    Tensor(Unchecked, Shape shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {}

    Shape shape_;
    std::vector<double> data_;
};

int shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

}  // namespace rprae
