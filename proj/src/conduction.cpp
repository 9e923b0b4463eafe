#include "fedbht/conduction.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <string>

#include "fedbht/parallel.hpp"

namespace fedbht {

std::string_view to_string(FormulationVariant variant) {
  switch (variant) {
    case FormulationVariant::DeformedAnisoTempDep: return "deformed_aniso_temp_dep";
    case FormulationVariant::ClassicalAnisoTempDep: return "classical_aniso_temp_dep";
    case FormulationVariant::ClassicalAnisoTempIndep: return "classical_aniso_temp_indep";
    case FormulationVariant::ClassicalIsoTempDep: return "classical_iso_temp_dep";
    case FormulationVariant::ClassicalIsoTempIndep: return "classical_iso_temp_indep";
  }
  return "unknown";
}

std::string_view roman(FormulationVariant variant) {
  static constexpr std::array<std::string_view, 5> labels{"i", "ii", "iii", "iv", "v"};
  return labels[static_cast<std::size_t>(variant)];
}

std::optional<FormulationVariant> parse_variant(std::string_view text) {
  std::string norm;
  for (char c : text) {
    if (std::isupper(static_cast<unsigned char>(c)) && !norm.empty()) norm.push_back('_');
    norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (FormulationVariant v : kAllVariants)
    if (norm == roman(v) || norm == to_string(v)) return v;
  return std::nullopt;
}

namespace {

template <int N>
std::vector<Index> nodes_of(const std::vector<std::array<Index, N>>& conn) {
  std::vector<Index> out;
  out.reserve(conn.size() * N);
  for (const auto& c : conn) out.insert(out.end(), c.begin(), c.end());
  return out;
}

bool uses_deformation(FormulationVariant v) { return v == FormulationVariant::DeformedAnisoTempDep; }

}  // namespace

template <int N>
void ConductionOperator::precompute_block(const std::vector<ShapeGradient<double, N>>& grads,
                                          const std::vector<double>& weights, Block<N>& block) {
  switch (variant_) {
    case FormulationVariant::DeformedAnisoTempDep:
      break;
    case FormulationVariant::ClassicalAnisoTempDep:
    case FormulationVariant::ClassicalAnisoTempIndep:
      block.weighted_grad_t.resize(grads.size());
      for (std::size_t e = 0; e < grads.size(); ++e) block.weighted_grad_t[e] = weights[e] * grads[e].transpose();
      break;
    case FormulationVariant::ClassicalIsoTempDep:
    case FormulationVariant::ClassicalIsoTempIndep: {
      const double scale = variant_ == FormulationVariant::ClassicalIsoTempIndep ? constant_d_(0, 0) : 1.0;
      block.stiffness.resize(grads.size());
      for (std::size_t e = 0; e < grads.size(); ++e)
        block.stiffness[e] = (scale * weights[e]) * (grads[e].transpose() * grads[e]);
      break;
    }
  }
}

ConductionOperator::ConductionOperator(const Mesh& mesh, const ElementPrecomp& precomp,
                                       const MaterialModel& material, FormulationVariant variant,
                                       double reference_temperature)
    : mesh_(mesh), precomp_(precomp), material_(material), variant_(variant) {
  if ((variant == FormulationVariant::ClassicalIsoTempDep || variant == FormulationVariant::ClassicalIsoTempIndep) &&
      !material.isotropic()) {
    throw Error("isotropic formulation " + std::string(roman(variant)) + " needs an isotropic material");
  }
  if (variant == FormulationVariant::ClassicalAnisoTempIndep || variant == FormulationVariant::ClassicalIsoTempIndep) {
    constant_d_ = conductivity_matrix(material, reference_temperature);
    ++evaluations_;
  }

  hex_weights_.resize(mesh.hexes.size());
  for (std::size_t h = 0; h < mesh.hexes.size(); ++h) hex_weights_[h] = precomp.hex_weight(static_cast<Index>(h));
  precompute_block<4>(precomp.tet_gradients, precomp.tet_volumes, tet_block_);
  precompute_block<8>(precomp.hex_gradients, hex_weights_, hex_block_);

  // Staged buffer layout: 4 slots per tet, then 8 per hex. Each node gathers
  // its slots in ascending element order.
  const auto tet_nodes = nodes_of<4>(mesh.tets);
  const auto hex_nodes = nodes_of<8>(mesh.hexes);
  std::vector<Index> all(tet_nodes);
  all.insert(all.end(), hex_nodes.begin(), hex_nodes.end());
  staged_.assign(all.size(), 0.0);

  gather_start_.assign(static_cast<std::size_t>(mesh.node_count()) + 1, 0);
  for (Index v : all) ++gather_start_[static_cast<std::size_t>(v) + 1];
  for (std::size_t i = 1; i < gather_start_.size(); ++i) gather_start_[i] += gather_start_[i - 1];
  gather_offsets_.resize(all.size());
  std::vector<Index> fill(gather_start_.begin(), gather_start_.end() - 1);
  for (std::size_t slot = 0; slot < all.size(); ++slot)
    gather_offsets_[static_cast<std::size_t>(fill[static_cast<std::size_t>(all[slot])]++)] = static_cast<Index>(slot);
}

template <int N>
NodalVector<double, N> ConductionOperator::compute_element(Index local, const std::array<Index, N>& conn,
                                                           const ShapeGradient<double, N>& grad, double weight,
                                                           const Block<N>& block, const VectorX& x,
                                                           const VectorX& property_field,
                                                           const DeformationState* deformation,
                                                           std::size_t& evaluations) const {
  NodalVector<double, N> xe;
  for (int a = 0; a < N; ++a) xe[a] = x[conn[static_cast<std::size_t>(a)]];
  const auto e = static_cast<std::size_t>(local);

  auto mean_property_temperature = [&] {
    double sum = 0;
    for (int a = 0; a < N; ++a) sum += property_field[conn[static_cast<std::size_t>(a)]];
    return sum / N;
  };

  switch (variant_) {
    case FormulationVariant::DeformedAnisoTempDep: {
      const Mat3 d = conductivity_matrix(material_, mean_property_temperature());
      ++evaluations;
      const Mat3 f = deformation ? deformation_gradient<double, N>(deformation->displacements, conn, grad)
                                 : Mat3::Identity();
      return element_loads_deformed<double, N>(grad, weight, f, d, xe);
    }
    case FormulationVariant::ClassicalAnisoTempDep: {
      const Mat3 d = conductivity_matrix(material_, mean_property_temperature());
      ++evaluations;
      return element_loads_weighted_gradient<double, N>(block.weighted_grad_t[e], grad, d, xe);
    }
    case FormulationVariant::ClassicalAnisoTempIndep:
      return element_loads_weighted_gradient<double, N>(block.weighted_grad_t[e], grad, constant_d_, xe);
    case FormulationVariant::ClassicalIsoTempDep: {
      const double k = material_.scalar_conductivity(mean_property_temperature());
      ++evaluations;
      if (!(k > 0)) throw NotSpdError("isotropic conductivity is not positive");
      return element_loads_scaled_stiffness<double, N>(k, block.stiffness[e], xe);
    }
    case FormulationVariant::ClassicalIsoTempIndep:
      return element_loads_stiffness<double, N>(block.stiffness[e], xe);
  }
  return NodalVector<double, N>::Zero();
}

void ConductionOperator::apply(const VectorX& x, const VectorX& property_field, const DeformationState* deformation,
                               VectorX& out) const {
  const Index n_nodes = mesh_.node_count();
  if (x.size() != n_nodes || property_field.size() != n_nodes)
    throw Error("conduction operator: field size does not match node count");
  if (deformation && uses_deformation(variant_) && static_cast<Index>(deformation->displacements.size()) != n_nodes)
    throw Error("conduction operator: displacement count does not match node count");

  const auto n_tets = static_cast<Index>(mesh_.tets.size());
  const auto n_elements = mesh_.element_count();
  const int threads = thread_count();

  std::size_t evaluations = 0;
  Index first_failure = std::numeric_limits<Index>::max();
  std::string failure_message;
  bool failure_singular = false;

#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1) reduction(+ : evaluations)
  for (Index e = 0; e < n_elements; ++e) {
    try {
      if (e < n_tets) {
        const auto t = static_cast<std::size_t>(e);
        const auto loads = compute_element<4>(e, mesh_.tets[t], precomp_.tet_gradients[t], precomp_.tet_volumes[t],
                                              tet_block_, x, property_field, deformation, evaluations);
        std::copy(loads.data(), loads.data() + 4, staged_.begin() + static_cast<std::ptrdiff_t>(4 * t));
      } else {
        const auto h = static_cast<std::size_t>(e - n_tets);
        const auto loads =
            compute_element<8>(e - n_tets, mesh_.hexes[h], precomp_.hex_gradients[h], hex_weights_[h], hex_block_,
                               x, property_field, deformation, evaluations);
        std::copy(loads.data(), loads.data() + 8,
                  staged_.begin() + static_cast<std::ptrdiff_t>(4 * static_cast<std::size_t>(n_tets) + 8 * h));
      }
    } catch (const Error& err) {
#pragma omp critical(fedbht_conduction_failure)
      if (e < first_failure) {
        first_failure = e;
        failure_message = err.what();
        failure_singular = dynamic_cast<const SingularDeformationError*>(&err) != nullptr;
      }
    }
  }
  evaluations_ += evaluations;

  if (first_failure != std::numeric_limits<Index>::max()) {
    const std::string msg = "element " + std::to_string(first_failure) + ": " + failure_message;
    if (failure_singular) throw SingularDeformationError(msg, first_failure);
    throw NotSpdError(msg);
  }

  out.resize(n_nodes);
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
  for (Index v = 0; v < n_nodes; ++v) {
    double sum = 0.0;
    const auto begin = gather_start_[static_cast<std::size_t>(v)], end = gather_start_[static_cast<std::size_t>(v) + 1];
    for (Index s = begin; s < end; ++s) sum += staged_[static_cast<std::size_t>(gather_offsets_[static_cast<std::size_t>(s)])];
    out[v] = sum;
  }
}

Eigen::VectorXd ConductionOperator::element_loads(Index element, const VectorX& temperatures,
                                                  const DeformationState* deformation) const {
  std::size_t evaluations = 0;
  const auto n_tets = static_cast<Index>(mesh_.tets.size());
  Eigen::VectorXd result;
  if (element < n_tets) {
    const auto t = static_cast<std::size_t>(element);
    result = compute_element<4>(element, mesh_.tets[t], precomp_.tet_gradients[t], precomp_.tet_volumes[t],
                                tet_block_, temperatures, temperatures, deformation, evaluations);
  } else {
    const auto h = static_cast<std::size_t>(element - n_tets);
    result = compute_element<8>(element - n_tets, mesh_.hexes[h], precomp_.hex_gradients[h], hex_weights_[h],
                                hex_block_, temperatures, temperatures, deformation, evaluations);
  }
  evaluations_ += evaluations;
  return result;
}

VectorX accumulate_global_loads(FormulationVariant variant, const Mesh& mesh, const ElementPrecomp& precomp,
                                const VectorX& temperatures, const DeformationState* deformation,
                                const MaterialModel& material) {
  const ConductionOperator op(mesh, precomp, material, variant);
  return op.loads(temperatures, deformation);
}

}  // namespace fedbht
