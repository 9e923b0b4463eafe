#pragma once

// Element conduction loads f_e = K_e T_e, with K_e positive semidefinite.
// The integrator subtracts these loads, so pure conduction is dissipative.

#include "fedbht/deformation.hpp"

namespace fedbht {

/// Pulled-back conduction loads of an N-node element under deformation F:
///   f = (w det F) B^T D B T,   B = F^-T grad0,
/// where grad0 holds reference shape-function gradients (one column per node)
/// and w is the one-point integration weight of the reference element.
template <typename Scalar, int N>
NodalVector<Scalar, N> element_loads_deformed(const ShapeGradient<Scalar, N>& grad0, Scalar weight,
                                              const Matrix3<Scalar>& f, const Matrix3<Scalar>& d,
                                              const NodalVector<Scalar, N>& temperatures) {
  const InverseAndDet<Scalar> inv = inverse_and_det(f);
  const ShapeGradient<Scalar, N> b = inv.inverse.transpose() * grad0;
  const Eigen::Matrix<Scalar, N, 3> weighted = (weight * inv.det) * b.transpose();
  return weighted * (d * (b * temperatures));
}

template <typename Scalar>
NodalVector<Scalar, 4> element_loads_tet_deformed(const ShapeGradient<Scalar, 4>& grad0, Scalar ref_volume,
                                                  const Matrix3<Scalar>& f, const Matrix3<Scalar>& d,
                                                  const NodalVector<Scalar, 4>& temperatures) {
  return element_loads_deformed<Scalar, 4>(grad0, ref_volume, f, d, temperatures);
}

/// One-point (center) rule: the weight is 8 det(J0).
template <typename Scalar>
NodalVector<Scalar, 8> element_loads_hex_deformed(const ShapeGradient<Scalar, 8>& grad0, Scalar ref_jacobian_det,
                                                  const Matrix3<Scalar>& f, const Matrix3<Scalar>& d,
                                                  const NodalVector<Scalar, 8>& temperatures) {
  return element_loads_deformed<Scalar, 8>(grad0, Scalar(8) * ref_jacobian_det, f, d, temperatures);
}

// Classical (undeformed) paths. Each takes the factor it precomputes.

/// Anisotropic paths: `weighted_grad_t` is w grad0^T, precomputed once.
template <typename Scalar, int N>
NodalVector<Scalar, N> element_loads_weighted_gradient(const Eigen::Matrix<Scalar, N, 3>& weighted_grad_t,
                                                       const ShapeGradient<Scalar, N>& grad0,
                                                       const Matrix3<Scalar>& d,
                                                       const NodalVector<Scalar, N>& temperatures) {
  return weighted_grad_t * (d * (grad0 * temperatures));
}

/// Isotropic temperature-dependent path: k times the precomputed w grad0^T grad0.
template <typename Scalar, int N>
NodalVector<Scalar, N> element_loads_scaled_stiffness(Scalar k, const ElementMatrix<Scalar, N>& geometric,
                                                      const NodalVector<Scalar, N>& temperatures) {
  return k * (geometric * temperatures);
}

/// Fully precomputed stiffness k0 w grad0^T grad0.
template <typename Scalar, int N>
NodalVector<Scalar, N> element_loads_stiffness(const ElementMatrix<Scalar, N>& stiffness,
                                               const NodalVector<Scalar, N>& temperatures) {
  return stiffness * temperatures;
}

}  // namespace fedbht
