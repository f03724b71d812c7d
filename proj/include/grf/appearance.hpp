#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "grf/fields.hpp"
#include "grf/grid_model.hpp"

namespace grf {

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// p(x_t | y_t = k) as a Gaussian mixture per label.
struct AppearanceModel {
  int channels = 1;
  /// Lower bound on every covariance eigenvalue.
  double regularization = 1e-6;
  std::vector<std::vector<GaussianComponent>> mixtures;

  int labels() const { return static_cast<int>(mixtures.size()); }
};

/// Throws when weights, shapes or covariances are inconsistent.
void validate_appearance(const AppearanceModel& app);

double pixel_loglik(const AppearanceModel& app, int label, std::span<const double> colour);

/// Per-node, per-label log-likelihoods, node-major (t * K + k).
struct LikelihoodField {
  int width = 0;
  int height = 0;
  int labels = 0;
  std::vector<double> values;

  std::span<const double> node(std::size_t t) const {
    return std::span<const double>(values).subspan(t * static_cast<std::size_t>(labels),
                                                   static_cast<std::size_t>(labels));
  }
  double at(std::size_t t, int k) const { return values[t * static_cast<std::size_t>(labels) + static_cast<std::size_t>(k)]; }
};

LikelihoodField likelihood_field(const AppearanceModel& app, const Image& image);

/// log p(x | y) = sum_t field[t][y_t].
double image_loglik(const LikelihoodField& field, const Labelling& y);

/// One image together with labellings sampled for it.
struct AppearanceData {
  const Image* image = nullptr;
  std::span<const Labelling> labellings;
};

struct AppearanceUpdate {
  AppearanceModel model;
  /// Labels that received no pixels; their mixtures are left unchanged.
  std::vector<int> empty_labels;
};

/// One responsibility-weighted EM step per label on the pixels assigned to it,
/// blended into the current parameters with factor step in [0,1].
AppearanceUpdate update_appearance(const AppearanceModel& app, std::span<const AppearanceData> data,
                                   double step);
AppearanceUpdate update_appearance(const AppearanceModel& app, const Image& image,
                                   std::span<const Labelling> labellings, double step);

/// Means drawn from random pixels, covariance = global image covariance +
/// regularization, equal weights.  Regularization is 1e-4 of the mean channel
/// variance, floored at 1e-6.
AppearanceModel init_appearance(const Image& image, const LabelSet& labels, int components_per_label,
                                std::uint64_t seed);

/// Same single mixture for every label (appearance carries no information).
AppearanceModel uniform_appearance(int labels, int channels);

/// One Gaussian per label with diagonal covariance sigma^2 I.
AppearanceModel gaussian_appearance(const std::vector<std::vector<double>>& means, double sigma);

/// Sum over pixels with label k of log p(x_t | k).
double label_data_loglik(const AppearanceModel& app, const Image& image, const Labelling& y, int label);

}  // namespace grf
