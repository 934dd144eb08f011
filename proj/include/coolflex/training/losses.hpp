#pragma once

#include <span>
#include <vector>

#include "coolflex/models/forward.hpp"
#include "coolflex/models/weights.hpp"
#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::training {

/// Loss terms in normalized units. The data term compares normalized
/// temperatures; the physics term is the residual expressed in normalized
/// temperature per minute, i.e. f * 60 / (T_b_max - T_b_min).
struct LossTerms {
  double data = 0.0;     ///< mean squared temperature error
  double physics = 0.0;  ///< mean squared scaled residual, 0 for black-box kinds
  double l2 = 0.0;       ///< lambda / N * sum(theta^2)
  double total() const { return data + physics + l2; }
};

/// Residual scale: K/s -> normalized temperature per minute.
inline double residual_scale(const models::Normalizer& norm) { return 60.0 / norm.range(); }

/// Full-batch training objective for one model kind.
///
/// Dense kinds use every sample (N = B). Recurrent kinds split the batch
/// into C = floor(B / K) consecutive windows, drop the remainder and
/// average over N = C * K steps; the feedback kind is teacher-forced.
class Objective {
 public:
  Objective(models::ModelSpec spec, models::Normalizer norm, std::vector<models::Sample> batch,
            whitebox::TowerParams params, double lambda, std::size_t chunk_columns = 64);

  std::size_t dimension() const { return dimension_; }
  /// Samples that enter the loss (N).
  std::size_t used_samples() const { return used_; }
  /// Number of windows C, or 0 for dense kinds.
  std::size_t windows() const { return windows_; }

  /// Loss value; fills `grad` (resized to dimension()).
  double operator()(std::span<const double> theta, std::vector<double>& grad) const;
  /// Loss terms without a gradient.
  LossTerms terms(std::span<const double> theta) const;

 private:
  LossTerms evaluate(std::span<const double> theta, std::vector<double>* grad) const;
  LossTerms evaluate_dense(std::span<const double> theta, std::vector<double>* grad) const;
  LossTerms evaluate_recurrent(std::span<const double> theta, std::vector<double>* grad) const;

  models::ModelSpec spec_;
  models::Normalizer norm_;
  std::vector<models::Sample> batch_;
  whitebox::TowerParams params_;
  double lambda_;
  std::size_t chunk_columns_;
  std::size_t dimension_ = 0;
  std::size_t used_ = 0;
  std::size_t windows_ = 0;
};

/// Black-box feed-forward loss on the weights' own kind layout.
double loss_nn(const models::ModelWeights& w, std::span<const models::Sample> batch, double lambda);
/// loss_nn plus the mean squared residual.
double loss_phynn(const models::ModelWeights& w, std::span<const models::Sample> batch,
                  const whitebox::TowerParams& params, double lambda);
/// Windowed loss for the recurrent kinds; the black-box LSTM has no physics term.
double loss_phylstm(const models::ModelWeights& w, std::span<const models::Sample> batch,
                    const whitebox::TowerParams& params, double lambda);

}  // namespace coolflex::training
