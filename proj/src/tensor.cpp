#include "rprae/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace rprae {

int shape_size(const Shape& shape) {
    int n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.empty()) throw ShapeError("tensor shape must have at least one dim");
    long long n = 1;
    for (int d : shape_) {
        if (d <= 0) throw ShapeError("tensor dims must be positive, got " + shape_to_string(shape_));
        n *= d;
    }
    if (n != static_cast<long long>(data_.size()))
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_to_string(shape_));
    for (double v : data_) {
        if (!std::isfinite(v)) throw NumericError("non-finite value in tensor " + shape_to_string(shape_));
    }
}

Tensor Tensor::zeros(Shape shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dim");
    long long n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dims must be positive, got " + shape_to_string(shape));
        n *= d;
    }
    return Tensor(Unchecked{}, std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t = zeros(std::move(shape));
    if (!std::isfinite(value)) throw NumericError("non-finite fill value");
    for (double& v : t.data_) v = value;
    return t;
}

Tensor Tensor::vec(std::vector<double> data) {
    int n = static_cast<int>(data.size());
    return Tensor({n}, std::move(data));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
}

bool Tensor::bit_equal(const Tensor& o) const {
    if (shape_ != o.shape_) return false;
    if (data_.empty()) return o.data_.empty();
    return std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(double)) == 0;
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

}  // namespace rprae
