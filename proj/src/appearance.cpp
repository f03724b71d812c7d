#include "grf/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "grf/rng.hpp"

namespace grf {
namespace {

constexpr double kMinWeight = 1e-8;

struct PreparedComponent {
  double log_norm = 0.0;  // log w - 0.5 (C log 2pi + log det)
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol_lower;
};

std::vector<std::vector<PreparedComponent>> prepare(const AppearanceModel& app) {
  std::vector<std::vector<PreparedComponent>> out(app.mixtures.size());
  const double c = static_cast<double>(app.channels);
  for (std::size_t k = 0; k < app.mixtures.size(); ++k) {
    for (const auto& g : app.mixtures[k]) {
      Eigen::LLT<Eigen::MatrixXd> llt(g.covariance);
      if (llt.info() != Eigen::Success)
        throw Error(Errc::InvalidArgument, "covariance of label " + std::to_string(k) + " is not positive definite");
      const Eigen::MatrixXd l = llt.matrixL();
      double log_det = 0.0;
      for (int i = 0; i < app.channels; ++i) log_det += 2.0 * std::log(l(i, i));
      out[k].push_back({std::log(g.weight) - 0.5 * (c * std::log(2.0 * std::numbers::pi) + log_det), g.mean, l});
    }
  }
  return out;
}

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (const double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (const double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void component_logs(const std::vector<PreparedComponent>& mix, std::span<const double> colour,
                    std::vector<double>& out) {
  out.resize(mix.size());
  Eigen::Map<const Eigen::VectorXd> x(colour.data(), static_cast<Eigen::Index>(colour.size()));
  for (std::size_t m = 0; m < mix.size(); ++m) {
    const Eigen::VectorXd z = mix[m].chol_lower.triangularView<Eigen::Lower>().solve(x - mix[m].mean);
    out[m] = mix[m].log_norm - 0.5 * z.squaredNorm();
  }
}

Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& cov, double floor) {
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() >= floor) return sym;
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::max(ev[i], floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void check_label(const AppearanceModel& app, int label) {
  if (label < 0 || label >= app.labels())
    throw Error(Errc::InvalidLabel, "label " + std::to_string(label) + " has no appearance mixture");
}

}  // namespace

void validate_appearance(const AppearanceModel& app) {
  if (app.channels < 1) throw Error(Errc::InvalidArgument, "appearance needs at least one channel");
  for (std::size_t k = 0; k < app.mixtures.size(); ++k) {
    const auto& mix = app.mixtures[k];
    if (mix.empty()) throw Error(Errc::InvalidArgument, "label " + std::to_string(k) + " has an empty mixture");
    double total = 0.0;
    for (const auto& g : mix) {
      if (!(g.weight > 0.0)) throw Error(Errc::InvalidArgument, "mixture weights must be positive");
      if (g.mean.size() != app.channels || g.covariance.rows() != app.channels || g.covariance.cols() != app.channels)
        throw Error(Errc::ChannelMismatch, "component shape does not match channel count");
      total += g.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error(Errc::InvalidArgument, "mixture weights of label " + std::to_string(k) + " do not sum to 1");
  }
}

double pixel_loglik(const AppearanceModel& app, int label, std::span<const double> colour) {
  check_label(app, label);
  if (static_cast<int>(colour.size()) != app.channels)
    throw Error(Errc::ChannelMismatch, "colour has " + std::to_string(colour.size()) + " channels, model has " +
                                           std::to_string(app.channels));
  const auto prepared = prepare(app);
  std::vector<double> logs;
  component_logs(prepared[static_cast<std::size_t>(label)], colour, logs);
  return log_sum_exp(logs);
}

LikelihoodField likelihood_field(const AppearanceModel& app, const Image& image) {
  if (image.channels != app.channels)
    throw Error(Errc::ChannelMismatch, "image has " + std::to_string(image.channels) + " channels, model has " +
                                           std::to_string(app.channels));
  const auto prepared = prepare(app);
  LikelihoodField field{image.width, image.height, app.labels(), {}};
  const std::size_t n = image.pixels();
  const auto k = static_cast<std::size_t>(app.labels());
  field.values.resize(n * k);
  std::vector<double> logs;
  for (std::size_t t = 0; t < n; ++t) {
    const auto colour = image.pixel(t);
    for (std::size_t j = 0; j < k; ++j) {
      component_logs(prepared[j], colour, logs);
      field.values[t * k + j] = log_sum_exp(logs);
    }
  }
  return field;
}

double image_loglik(const LikelihoodField& field, const Labelling& y) {
  double s = 0.0;
  for (std::size_t t = 0; t < y.labels.size(); ++t) s += field.at(t, y.labels[t]);
  return s;
}

AppearanceUpdate update_appearance(const AppearanceModel& app, std::span<const AppearanceData> data,
                                   double step) {
  if (!(step >= 0.0 && step <= 1.0)) throw Error(Errc::InvalidArgument, "appearance step must lie in [0,1]");
  for (const auto& d : data) {
    if (d.image == nullptr) throw Error(Errc::InvalidArgument, "appearance data without image");
    if (d.image->channels != app.channels) throw Error(Errc::ChannelMismatch, "image channel count differs from model");
    for (const auto& y : d.labellings)
      if (y.width != d.image->width || y.height != d.image->height)
        throw Error(Errc::DimensionMismatch, "labelling does not match its image");
  }

  AppearanceUpdate result{app, {}};
  const auto prepared = prepare(app);
  const int c = app.channels;
  std::vector<double> logs;

  for (int label = 0; label < app.labels(); ++label) {
    const auto& mix = app.mixtures[static_cast<std::size_t>(label)];
    const std::size_t m_count = mix.size();
    std::vector<double> mass(m_count, 0.0);
    std::vector<Eigen::VectorXd> first(m_count, Eigen::VectorXd::Zero(c));
    std::vector<Eigen::MatrixXd> second(m_count, Eigen::MatrixXd::Zero(c, c));
    double total = 0.0;

    for (const auto& d : data)
      for (const auto& y : d.labellings)
        for (std::size_t t = 0; t < y.labels.size(); ++t) {
          if (y.labels[t] != label) continue;
          const auto colour = d.image->pixel(t);
          component_logs(prepared[static_cast<std::size_t>(label)], colour, logs);
          const double lse = log_sum_exp(logs);
          Eigen::Map<const Eigen::VectorXd> x(colour.data(), c);
          for (std::size_t m = 0; m < m_count; ++m) {
            const double r = std::exp(logs[m] - lse);
            mass[m] += r;
            first[m] += r * x;
            second[m] += r * (x * x.transpose());
          }
          total += 1.0;
        }

    if (total == 0.0) {
      result.empty_labels.push_back(label);
      continue;
    }
    if (step == 0.0) continue;

    auto& out = result.model.mixtures[static_cast<std::size_t>(label)];
    std::vector<double> new_w(m_count);
    double wsum = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      new_w[m] = std::max(mass[m] / total, kMinWeight);
      wsum += new_w[m];
    }
    for (std::size_t m = 0; m < m_count; ++m) {
      GaussianComponent fresh = mix[m];
      fresh.weight = new_w[m] / wsum;
      if (mass[m] > 1e-12) {
        fresh.mean = first[m] / mass[m];
        Eigen::MatrixXd cov = second[m] / mass[m] - fresh.mean * fresh.mean.transpose();
        fresh.covariance = floor_eigenvalues(cov, app.regularization);
      }
      out[m].weight = (1.0 - step) * mix[m].weight + step * fresh.weight;
      out[m].mean = (1.0 - step) * mix[m].mean + step * fresh.mean;
      out[m].covariance = floor_eigenvalues((1.0 - step) * mix[m].covariance + step * fresh.covariance,
                                            app.regularization);
    }
    double norm = 0.0;
    for (const auto& g : out) norm += g.weight;
    for (auto& g : out) g.weight /= norm;
  }
  return result;
}

AppearanceUpdate update_appearance(const AppearanceModel& app, const Image& image,
                                   std::span<const Labelling> labellings, double step) {
  const AppearanceData d{&image, labellings};
  return update_appearance(app, std::span<const AppearanceData>(&d, 1), step);
}

AppearanceModel init_appearance(const Image& image, const LabelSet& labels, int components_per_label,
                                std::uint64_t seed) {
  if (components_per_label < 1) throw Error(Errc::InvalidArgument, "components_per_label must be >= 1");
  const int c = image.channels;
  const std::size_t n = image.pixels();
  if (n == 0) throw Error(Errc::InvalidArgument, "empty image");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(c);
  for (std::size_t t = 0; t < n; ++t) mean += Eigen::Map<const Eigen::VectorXd>(image.pixel(t).data(), c);
  mean /= static_cast<double>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(c, c);
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(image.pixel(t).data(), c) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);

  AppearanceModel app;
  app.channels = c;
  app.regularization = std::max(1e-4 * cov.trace() / static_cast<double>(c), 1e-6);
  const Eigen::MatrixXd init_cov = cov + app.regularization * Eigen::MatrixXd::Identity(c, c);

  Rng rng(derive_seed(seed, 0));
  app.mixtures.resize(static_cast<std::size_t>(labels.count));
  for (auto& mix : app.mixtures)
    for (int m = 0; m < components_per_label; ++m) {
      const auto t = static_cast<std::size_t>(rng.below(n));
      mix.push_back({1.0 / components_per_label, Eigen::Map<const Eigen::VectorXd>(image.pixel(t).data(), c), init_cov});
    }
  return app;
}

AppearanceModel uniform_appearance(int labels, int channels) {
  AppearanceModel app;
  app.channels = channels;
  const GaussianComponent g{1.0, Eigen::VectorXd::Constant(channels, 0.5), Eigen::MatrixXd::Identity(channels, channels)};
  app.mixtures.assign(static_cast<std::size_t>(labels), {g});
  return app;
}

AppearanceModel gaussian_appearance(const std::vector<std::vector<double>>& means, double sigma) {
  if (means.empty()) throw Error(Errc::InvalidArgument, "need at least one label");
  AppearanceModel app;
  app.channels = static_cast<int>(means.front().size());
  app.regularization = std::min(1e-6, sigma * sigma);
  for (const auto& mu : means) {
    if (static_cast<int>(mu.size()) != app.channels) throw Error(Errc::ChannelMismatch, "mean sizes differ");
    app.mixtures.push_back({GaussianComponent{
        1.0, Eigen::Map<const Eigen::VectorXd>(mu.data(), app.channels),
        sigma * sigma * Eigen::MatrixXd::Identity(app.channels, app.channels)}});
  }
  return app;
}

double label_data_loglik(const AppearanceModel& app, const Image& image, const Labelling& y, int label) {
  check_label(app, label);
  const auto prepared = prepare(app);
  std::vector<double> logs;
  double s = 0.0;
  for (std::size_t t = 0; t < y.labels.size(); ++t) {
    if (y.labels[t] != label) continue;
    component_logs(prepared[static_cast<std::size_t>(label)], image.pixel(t), logs);
    s += log_sum_exp(logs);
  }
  return s;
}

}  // namespace grf
