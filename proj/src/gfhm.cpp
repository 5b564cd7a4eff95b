#include "fadp/gfhm.hpp"

#include <cmath>
#include <string>

#include "fadp/errors.hpp"

namespace fadp {

GfhmCritic::GfhmCritic(std::vector<std::vector<double>> translations, Eigen::VectorXd phi,
                       Eigen::VectorXd weights)
    : translations_(std::move(translations)), phi_(std::move(phi)), weights_(std::move(weights)) {
  if (translations_.empty()) throw ValidationError("critic: at least one error component required");
  for (int z = 0; z < error_dim(); ++z) {
    if (translations_[z].empty()) {
      throw ValidationError("critic: error component " + std::to_string(z + 1) +
                            " has no translations");
    }
    for (double d : translations_[z]) {
      if (!std::isfinite(d)) throw ValidationError("critic: non-finite translation");
      component_of_.push_back(z);
    }
  }
  const auto m = static_cast<Eigen::Index>(component_of_.size());
  if (phi_.size() != m) {
    throw ValidationError("critic: phi has length " + std::to_string(phi_.size()) + ", expected " +
                          std::to_string(m));
  }
  if (!(phi_.array() > 0.0).all()) throw ValidationError("critic: phi entries must be positive");
  if (weights_.size() != m) {
    throw ValidationError("critic: weight vector has length " + std::to_string(weights_.size()) +
                          ", expected " + std::to_string(m));
  }
  if (!weights_.allFinite()) throw ValidationError("critic: non-finite weight");
}

GfhmCritic GfhmCritic::identity(int error_dim) {
  return identity(error_dim, Eigen::VectorXd::Zero(error_dim));
}

GfhmCritic GfhmCritic::identity(int error_dim, Eigen::VectorXd weights) {
  return GfhmCritic(std::vector<std::vector<double>>(error_dim, std::vector<double>{0.0}),
                    Eigen::VectorXd::Ones(error_dim), std::move(weights));
}

GfhmCritic GfhmCritic::with_weights(Eigen::VectorXd weights) const {
  return GfhmCritic(translations_, phi_, std::move(weights));
}

Eigen::VectorXd GfhmCritic::generalized_inputs(const Eigen::VectorXd& e) const {
  if (e.size() != error_dim()) {
    throw ValidationError("critic: error vector has dimension " + std::to_string(e.size()) +
                          ", expected " + std::to_string(error_dim()));
  }
  Eigen::VectorXd ebar(basis_size());
  int k = 0;
  for (int z = 0; z < error_dim(); ++z) {
    for (double d : translations_[z]) ebar(k++) = e(z) - d;
  }
  return ebar;
}

Eigen::VectorXd GfhmCritic::basis(const Eigen::VectorXd& e) const {
  return (phi_.array() * generalized_inputs(e).array()).tanh().matrix();
}

double GfhmCritic::value(const Eigen::VectorXd& e) const { return weights_.dot(basis(e)); }

Eigen::MatrixXd GfhmCritic::gradient_matrix(const Eigen::VectorXd& e) const {
  const Eigen::ArrayXd t = basis(e).array();
  const Eigen::ArrayXd slope = phi_.array() * (1.0 - t * t);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(error_dim(), basis_size());
  for (int k = 0; k < basis_size(); ++k) lambda(component_of_[k], k) = slope(k);
  return lambda;
}

Eigen::VectorXd GfhmCritic::value_gradient(const Eigen::VectorXd& e) const {
  return gradient_matrix(e) * weights_;
}

}  // namespace fadp
