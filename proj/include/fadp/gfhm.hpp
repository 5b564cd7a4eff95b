#pragma once

#include <vector>

#include <Eigen/Dense>

namespace fadp {

// Generalized fuzzy hyperbolic critic
//
//   V(e) = theta^T tanh(Phi * ebar),   ebar_k = e_z - d_zj,
//
// where each error component z owns a list of translations d_zj and the
// generalized inputs are laid out in (z, j) lexicographic order. Phi is a
// fixed positive diagonal (identity by default) so the model stays linear in
// theta. The constant offset is pinned to zero so that V(0) = 0 when d = 0.
class GfhmCritic {
 public:
  GfhmCritic(std::vector<std::vector<double>> translations, Eigen::VectorXd phi,
             Eigen::VectorXd weights);

  // One zero translation per component, Phi = I.
  static GfhmCritic identity(int error_dim);
  static GfhmCritic identity(int error_dim, Eigen::VectorXd weights);

  int error_dim() const { return static_cast<int>(translations_.size()); }
  int basis_size() const { return static_cast<int>(phi_.size()); }
  const std::vector<std::vector<double>>& translations() const { return translations_; }
  const Eigen::VectorXd& phi() const { return phi_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  GfhmCritic with_weights(Eigen::VectorXd weights) const;

  Eigen::VectorXd generalized_inputs(const Eigen::VectorXd& e) const;
  // tanh(Phi * ebar)
  Eigen::VectorXd basis(const Eigen::VectorXd& e) const;
  double value(const Eigen::VectorXd& e) const;
  // Lambda(ebar), n x m: entry (z, k) = phi_k sech^2(phi_k ebar_k) when input k
  // translates component z, zero otherwise. Independent of theta.
  Eigen::MatrixXd gradient_matrix(const Eigen::VectorXd& e) const;
  // Lambda(ebar) * theta
  Eigen::VectorXd value_gradient(const Eigen::VectorXd& e) const;

 private:
  std::vector<std::vector<double>> translations_;
  // Owning error component of each generalized input.
  std::vector<int> component_of_;
  Eigen::VectorXd phi_;
  Eigen::VectorXd weights_;
};

}  // namespace fadp
