#pragma once

#include <optional>
#include <span>
#include <vector>

#include "coolflex/datagen/dataset.hpp"
#include "coolflex/models/networks.hpp"
#include "coolflex/models/weights.hpp"
#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::models {

/// One timeslot as seen by the networks.
struct Sample {
  double p_f1 = 0.0;     ///< [W]
  double p_f2 = 0.0;     ///< [W]
  double hours = 0.0;    ///< unwrapped time, 24 * day + t_n [h]
  whitebox::WeatherSample weather;
  double target = 0.0;   ///< basin temperature to fit or compare against [K]
  double previous = 0.0; ///< measured basin temperature one slot earlier [K]

  double total_power() const { return p_f1 + p_f2; }
};

/// Builds samples from consecutive records. Targets are the noisy
/// measurements when `noisy_target`, else the true T_b. `previous` always
/// uses the measured (noisy) value of the preceding record; for the first
/// record it uses `before` when given, else the record itself.
std::vector<Sample> make_samples(std::span<const datagen::SimRecord> records, bool noisy_target,
                                 const datagen::SimRecord* before = nullptr);

/// Throws ContractError unless hours increase by exactly one minute per step.
void check_window(std::span<const Sample> window);

/// Input matrix (3 x n): P_F1, P_F2 scaled, then the time-of-day fraction.
numcore::Matrix input_matrix(std::span<const Sample> samples, const Normalizer& norm);

struct PhysicsOutput {
  double T_b = 0.0;      ///< estimated basin temperature [K]
  double dT_dt = 0.0;    ///< time derivative of the estimate [K/s]
  double residual = 0.0; ///< dT_dt - H(T_b, W) [K/s]
};

/// Feed-forward pass, normalized output (dense kinds only).
double nn_forward_normalized(const ModelWeights& w, double p_f1, double p_f2, double t_enc);
/// Same pass de-normalized to kelvin.
double nn_forward(const ModelWeights& w, double p_f1, double p_f2, double t_enc);
/// Normalized output and its derivative with respect to t_enc.
numcore::Dual<double> nn_forward_dual(const ModelWeights& w, double p_f1, double p_f2, double t_enc);

/// Estimate, its time derivative and the physics residual for one sample.
PhysicsOutput phynn_forward(const ModelWeights& w, const Sample& s, const whitebox::TowerParams& params);

/// Estimated T_b [K] at the final step of a window (LSTM and WOF kinds).
double lstm_forward(const ModelWeights& w, std::span<const Sample> window);
/// Estimated T_b [K] at every step of a window.
std::vector<double> lstm_forward_sequence(const ModelWeights& w, std::span<const Sample> window);

/// Per-step estimates, derivatives and residuals over one window. For the
/// feedback kind, teacher forcing feeds each step the measured previous
/// temperature; otherwise step 0 uses window[0].previous and later steps
/// use the model's own estimate. `feedback0` overrides window[0].previous.
std::vector<PhysicsOutput> phylstm_forward(const ModelWeights& w, std::span<const Sample> window,
                                           const whitebox::TowerParams& params, bool teacher_forcing,
                                           std::optional<double> feedback0 = std::nullopt);

/// Predictions over a contiguous slice with no access to measured
/// temperatures beyond samples[0].previous.
struct Prediction {
  std::vector<double> T_b;    ///< [K]
  std::vector<double> dT_dt;  ///< [K/s]
};

/// Dense kinds evaluate every sample independently. Recurrent kinds split
/// the slice into consecutive windows of seq_len (the last may be shorter);
/// the feedback kind runs free, carrying its last estimate across windows.
Prediction predict(const ModelWeights& w, std::span<const Sample> samples);

}  // namespace coolflex::models
