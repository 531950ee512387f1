#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace trpkgc {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Named view over one parameter tensor, row-major. Vectors have rows == 1.
struct TensorRef {
    std::string name;
    std::span<double> values;
    Index rows;
    Index cols;
};

struct ConstTensorRef {
    std::string name;
    std::span<const double> values;
    Index rows;
    Index cols;
};

inline TensorRef tensor_ref(std::string name, Mat& m) {
    return {std::move(name), {m.data(), static_cast<std::size_t>(m.size())}, m.rows(), m.cols()};
}

inline TensorRef tensor_ref(std::string name, Vec& v) {
    return {std::move(name), {v.data(), static_cast<std::size_t>(v.size())}, 1, v.size()};
}

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace trpkgc
