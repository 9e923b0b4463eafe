#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace fedbht {

using Index = std::int64_t;

template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

/// Shape-function gradients of an N-node element, one column per node.
template <typename Scalar, int N> using ShapeGradient = Eigen::Matrix<Scalar, 3, N>;
template <typename Scalar, int N> using NodalVector = Eigen::Matrix<Scalar, N, 1>;
template <typename Scalar, int N> using ElementMatrix = Eigen::Matrix<Scalar, N, N>;

using Vec3 = Vector3<double>;
using Mat3 = Matrix3<double>;
using VectorX = Eigen::VectorXd;

using Tet4 = std::array<Index, 4>;
using Hex8 = std::array<Index, 8>;

enum class ElementType { Tet4, Hex8 };

/// Global element handle: tets are numbered first, then hexes.
struct ElementRef {
  ElementType type;
  Index local;  // index within its own connectivity list
};

}  // namespace fedbht
