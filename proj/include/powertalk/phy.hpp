/*
 * Copyright 2026 the powertalk authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <span>

#include "powertalk/grid.hpp"
#include "powertalk/rng.hpp"

namespace powertalk::phy {

/// Which voltage a power talk transceiver observes each slot.
enum class Observe { kTerminal, kBus };

struct PhyConfig {
  double gamma = 0.01;     // reference deviation amplitude [V]
  double t_pt = 0.005;     // power talk slot duration [s]
  double tau = 0.00235;    // transient settling time, samples discarded [s]
  double nu = 50.0e6;      // ADC sampling frequency [Hz]
  double eta = 8.58e-2;    // per-sample noise standard deviation [V]
  int m_blank = 4;         // blank slots after a detected load change
  int s_slots = 1;         // power talk slots per secondary period
  Observe observe = Observe::kTerminal;
  bool repetition_code = false;  // rate-1/3 repetition with majority vote

  /// Valid samples per slot; the first tau seconds contribute none. The tiny
  /// nudge keeps exact products like 50 MHz * 7.65 ms from flooring down.
  std::int64_t n_samples() const {
    return static_cast<std::int64_t>(std::floor(nu * (t_pt - tau) + 1e-6));
  }

  /// Standard deviation of the slot sample average.
  double sigma_mean() const {
    return eta / std::sqrt(static_cast<double>(n_samples()));
  }

  /// Throws ConfigError naming the offending field. `min_x` is the smallest
  /// VSC reference voltage; gamma must stay a small fraction of it.
  void validate(double min_x) const;
};

/// Sample average a receiver forms over one power talk slot.
struct SlotObservation {
  double mean_v = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t slot_index = 0;
};

/// Threshold detector for one transceiver. The expected levels are
/// threshold - dv_bit0 and threshold + dv_bit1; the threshold sits strictly
/// between them whenever both separations are positive.
struct DetectorState {
  double threshold = 0.0;
  double dv_bit0 = 0.0;
  double dv_bit1 = 0.0;
  bool calibrated = false;

  double level0() const { return threshold - dv_bit0; }
  double level1() const { return threshold + dv_bit1; }
};

DetectorState make_detector(double threshold, double dv_bit0, double dv_bit1);

/// Bit to reference-voltage deviation: 0 -> -gamma, 1 -> +gamma.
double modulate(int bit, const PhyConfig& config);

/// Noisy sample average for a slot whose settled voltage is `true_v`.
SlotObservation sample_slot(double true_v, const PhyConfig& config, Rng& rng,
                            std::uint64_t slot_index = 0);

/// Threshold decision; an observation exactly on the threshold decides 0.
int detect(const SlotObservation& obs, const DetectorState& det);

/// True when the observation sits farther than
///   kappa = 4*sigma_mean + min(dv0, dv1)/2
/// from BOTH expected levels, i.e. the operating point moved.
bool detect_load_change(const SlotObservation& obs, const DetectorState& det,
                        const PhyConfig& config);

/// Margin used by detect_load_change.
double load_change_margin(const DetectorState& det, const PhyConfig& config);

/// New detector from M blank-slot observations: the threshold is the mean of
/// the blank sample averages; the expected separations come from the grid
/// model at the new operating point.
DetectorState recalibrate(std::span<const SlotObservation> blanks,
                          int m_required, double dv_bit0, double dv_bit1);

/// Bit error probability, closed forms.
/// ber_paper evaluates 1 - erf(dv1/(sigma sqrt 2))/2 - erf(dv0/(sigma sqrt 2))/2
/// verbatim; note it yields 1 (not 1/2) at zero separation and twice the
/// detector's actual error for symmetric levels.
double ber_paper(double delta_v0, double delta_v1, double sigma);

/// Exact error probability of the threshold detector with equiprobable bits:
/// (Q(dv1/sigma) + Q(dv0/sigma)) / 2.
double ber_standard(double delta_v0, double delta_v1, double sigma);

struct BerEstimate {
  double ber = 0.0;
  double stderr_ = 0.0;  // binomial standard error
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
};

/// End-to-end Monte Carlo over random bits: solver levels -> noisy slot
/// average -> threshold decision. Deterministic for a fixed seed.
BerEstimate ber_monte_carlo(std::span<const grid::DerUnit> units,
                            const grid::LoadModel& load, grid::Offsets offsets,
                            const PhyConfig& config, int tx_id, int rx_id,
                            std::uint64_t n_trials, std::uint64_t seed);

/// Average handshake completion time model, evaluated verbatim:
///   (D + R) * S * T^pt * (1 - e^{-lambda} + e^{lambda*M}).
double mu_closed_form(std::int64_t d_periods, std::int64_t r_periods,
                      std::int64_t s_slots, double t_pt, double lambda,
                      std::int64_t m_blank);

}  // namespace powertalk::phy
