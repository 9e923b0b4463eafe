#pragma once

#include <atomic>
#include <optional>
#include <string_view>

#include "fedbht/element_kernels.hpp"
#include "fedbht/material.hpp"

namespace fedbht {

/// Element-load formulations, from the full pulled-back form to the fully
/// precomputed isotropic constant-conductivity form.
enum class FormulationVariant {
  DeformedAnisoTempDep,     // (i)   w (grad0 F^-1)^T D(T) (grad0 F^-1) det F
  ClassicalAnisoTempDep,    // (ii)  [w grad0^T] D(T) grad0
  ClassicalAnisoTempIndep,  // (iii) [w grad0^T] D0 grad0
  ClassicalIsoTempDep,      // (iv)  k(T) [w grad0^T grad0]
  ClassicalIsoTempIndep,    // (v)   [k0 w grad0^T grad0]
};

inline constexpr std::array<FormulationVariant, 5> kAllVariants{
    FormulationVariant::DeformedAnisoTempDep, FormulationVariant::ClassicalAnisoTempDep,
    FormulationVariant::ClassicalAnisoTempIndep, FormulationVariant::ClassicalIsoTempDep,
    FormulationVariant::ClassicalIsoTempIndep};

std::string_view to_string(FormulationVariant variant);
/// Short roman label "i".."v".
std::string_view roman(FormulationVariant variant);
/// Accepts roman labels and the enumerator names in snake_case or CamelCase.
std::optional<FormulationVariant> parse_variant(std::string_view text);

/// Matrix-free global conduction operator: scatters element loads into
/// nodal loads K T without forming K.
///
/// Conductivity is evaluated per element at the mean of its nodal
/// `property_field` values. Temperature-independent variants evaluate it
/// once, at `reference_temperature`, during construction.
///
/// Element loads are staged per element and gathered per node in a fixed
/// order, so results do not depend on the thread count. A single instance
/// must not be applied concurrently from several threads. The mesh,
/// precomputation and material are referenced and must outlive it.
class ConductionOperator {
 public:
  ConductionOperator(const Mesh& mesh, const ElementPrecomp& precomp, const MaterialModel& material,
                     FormulationVariant variant, double reference_temperature = 37.0);

  FormulationVariant variant() const { return variant_; }

  /// out = K(property_field, F) x. `deformation` is only read by the
  /// deformed variant; nullptr means F = I.
  void apply(const VectorX& x, const VectorX& property_field, const DeformationState* deformation,
             VectorX& out) const;

  /// Conduction loads for temperature field `temperatures`.
  VectorX loads(const VectorX& temperatures, const DeformationState* deformation = nullptr) const {
    VectorX out;
    apply(temperatures, temperatures, deformation, out);
    return out;
  }

  /// Loads of one global element (tets first), for inspection and tests.
  Eigen::VectorXd element_loads(Index element, const VectorX& temperatures,
                                const DeformationState* deformation = nullptr) const;

  /// Number of conductivity evaluations performed since construction,
  /// including those made while precomputing.
  std::size_t conductivity_evaluations() const { return evaluations_.load(); }

  const Mesh& mesh() const { return mesh_; }
  const ElementPrecomp& precomp() const { return precomp_; }
  const MaterialModel& material() const { return material_; }

 private:
  template <int N>
  struct Block {
    std::vector<Eigen::Matrix<double, N, 3>> weighted_grad_t;  // (ii), (iii)
    std::vector<ElementMatrix<double, N>> stiffness;           // (iv) geometric, (v) full
  };

  template <int N>
  void precompute_block(const std::vector<ShapeGradient<double, N>>& grads, const std::vector<double>& weights,
                        Block<N>& block);

  template <int N>
  NodalVector<double, N> compute_element(Index local, const std::array<Index, N>& conn,
                                         const ShapeGradient<double, N>& grad, double weight, const Block<N>& block,
                                         const VectorX& x, const VectorX& property_field,
                                         const DeformationState* deformation, std::size_t& evaluations) const;

  const Mesh& mesh_;
  const ElementPrecomp& precomp_;
  const MaterialModel& material_;
  FormulationVariant variant_;

  Mat3 constant_d_ = Mat3::Identity();
  Block<4> tet_block_;
  Block<8> hex_block_;
  std::vector<double> hex_weights_;

  // Node -> offsets into the staged element-load buffer.
  std::vector<Index> gather_start_;
  std::vector<Index> gather_offsets_;
  mutable std::vector<double> staged_;
  mutable std::atomic<std::size_t> evaluations_{0};
};

/// Convenience wrapper building a one-shot operator.
VectorX accumulate_global_loads(FormulationVariant variant, const Mesh& mesh, const ElementPrecomp& precomp,
                                const VectorX& temperatures, const DeformationState* deformation,
                                const MaterialModel& material);

}  // namespace fedbht
