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
#include "powertalk/phy.hpp"

#include <algorithm>
#include <cmath>

#include "powertalk/errors.hpp"

namespace powertalk::phy {

void PhyConfig::validate(double min_x) const {
  if (!(gamma > 0.0)) throw ConfigError("phy.gamma", "must be > 0");
  if (!(gamma < 0.05 * min_x)) {
    throw ConfigError("phy.gamma", "must stay below 5% of the smallest VSC "
                                   "reference voltage");
  }
  if (!(t_pt > 0.0)) throw ConfigError("phy.t_pt", "must be > 0");
  if (!(tau >= 0.0)) throw ConfigError("phy.tau", "must be >= 0");
  if (!(t_pt > tau)) {
    throw ConfigError("phy.t_pt", "slot must be longer than the settling "
                                  "time tau");
  }
  if (!(nu > 0.0)) throw ConfigError("phy.nu", "must be > 0");
  if (n_samples() < 1) {
    throw ConfigError("phy.nu", "nu*(t_pt - tau) must yield at least one "
                                "sample per slot");
  }
  if (eta < 0.0) throw ConfigError("phy.eta", "must be >= 0");
  if (m_blank < 0) throw ConfigError("phy.m_blank", "must be >= 0");
  if (s_slots < 1) throw ConfigError("phy.s_slots", "must be >= 1");
}

DetectorState make_detector(double threshold, double dv_bit0, double dv_bit1) {
  if (!(dv_bit0 > 0.0) || !(dv_bit1 > 0.0)) {
    throw NotCalibratedError(
        "detector needs positive level separations on both sides");
  }
  return DetectorState{threshold, dv_bit0, dv_bit1, true};
}

double modulate(int bit, const PhyConfig& config) {
  return bit ? +config.gamma : -config.gamma;
}

SlotObservation sample_slot(double true_v, const PhyConfig& config, Rng& rng,
                            std::uint64_t slot_index) {
  SlotObservation obs;
  obs.n_samples = config.n_samples();
  obs.slot_index = slot_index;
  // One draw per slot even when eta == 0 keeps the stream position, and thus
  // every downstream decision, independent of the noise setting.
  const double z = rng.gaussian();
  obs.mean_v = config.eta > 0.0 ? true_v + z * config.sigma_mean() : true_v;
  return obs;
}

int detect(const SlotObservation& obs, const DetectorState& det) {
  if (!det.calibrated) {
    throw NotCalibratedError("detect called before calibration");
  }
  return obs.mean_v > det.threshold ? 1 : 0;
}

double load_change_margin(const DetectorState& det, const PhyConfig& config) {
  return 4.0 * config.sigma_mean() + 0.5 * std::min(det.dv_bit0, det.dv_bit1);
}

bool detect_load_change(const SlotObservation& obs, const DetectorState& det,
                        const PhyConfig& config) {
  if (!det.calibrated) {
    throw NotCalibratedError("detect_load_change called before calibration");
  }
  const double kappa = load_change_margin(det, config);
  return std::abs(obs.mean_v - det.level0()) > kappa &&
         std::abs(obs.mean_v - det.level1()) > kappa;
}

DetectorState recalibrate(std::span<const SlotObservation> blanks,
                          int m_required, double dv_bit0, double dv_bit1) {
  if (static_cast<int>(blanks.size()) < m_required) {
    throw InsufficientBlanksError(
        "recalibration needs " + std::to_string(m_required) +
        " blank observations, got " + std::to_string(blanks.size()));
  }
  double mean = 0.0;
  for (const SlotObservation& b : blanks) mean += b.mean_v;
  mean /= static_cast<double>(blanks.size());
  return make_detector(mean, dv_bit0, dv_bit1);
}

double ber_paper(double delta_v0, double delta_v1, double sigma) {
  const double root2 = std::sqrt(2.0);
  return 1.0 - 0.5 * std::erf(delta_v1 / (sigma * root2)) -
         0.5 * std::erf(delta_v0 / (sigma * root2));
}

namespace {
double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
}  // namespace

double ber_standard(double delta_v0, double delta_v1, double sigma) {
  return 0.5 * q_function(delta_v1 / sigma) + 0.5 * q_function(delta_v0 / sigma);
}

BerEstimate ber_monte_carlo(std::span<const grid::DerUnit> units,
                            const grid::LoadModel& load, grid::Offsets offsets,
                            const PhyConfig& config, int tx_id, int rx_id,
                            std::uint64_t n_trials, std::uint64_t seed) {
  std::vector<grid::DerUnit> work(units.begin(), units.end());
  std::size_t tx = work.size(), rx = work.size();
  for (std::size_t k = 0; k < work.size(); ++k) {
    if (work[k].id == tx_id) tx = k;
    if (work[k].id == rx_id) rx = k;
  }
  if (tx >= work.size() || rx >= work.size() || tx == rx) {
    throw ConfigError("ber.tx/rx", "transmitter and receiver must be distinct "
                                   "units present in the grid");
  }

  const auto observed = [&](const grid::GridSteadyState& s) {
    return config.observe == Observe::kBus ? s.v_bus : s.v[rx];
  };

  work[tx].gamma_offset = 0.0;
  const double threshold = observed(grid::solve_steady_state(work, load, offsets));
  work[tx].gamma_offset = modulate(0, config);
  const double level0 = observed(grid::solve_steady_state(work, load, offsets));
  work[tx].gamma_offset = modulate(1, config);
  const double level1 = observed(grid::solve_steady_state(work, load, offsets));

  const DetectorState det =
      make_detector(threshold, threshold - level0, level1 - threshold);

  Rng rng(seed);
  std::uint64_t errors = 0;
  for (std::uint64_t t = 0; t < n_trials; ++t) {
    const int bit = rng.bit() ? 1 : 0;
    const SlotObservation obs =
        sample_slot(bit ? level1 : level0, config, rng, t);
    if (detect(obs, det) != bit) ++errors;
  }

  BerEstimate est;
  est.errors = errors;
  est.trials = n_trials;
  est.ber = n_trials ? static_cast<double>(errors) / static_cast<double>(n_trials)
                     : 0.0;
  est.stderr_ =
      n_trials ? std::sqrt(est.ber * (1.0 - est.ber) /
                           static_cast<double>(n_trials))
               : 0.0;
  return est;
}

double mu_closed_form(std::int64_t d_periods, std::int64_t r_periods,
                      std::int64_t s_slots, double t_pt, double lambda,
                      std::int64_t m_blank) {
  if (d_periods < 1 || r_periods < 1 || s_slots < 1) {
    throw ConfigError("mu", "D, R and S must all be >= 1");
  }
  if (lambda < 0.0) throw ConfigError("mu.lambda", "must be >= 0");
  if (m_blank < 0) throw ConfigError("mu.m_blank", "must be >= 0");
  return static_cast<double>(d_periods + r_periods) *
         static_cast<double>(s_slots) * t_pt *
         (1.0 - std::exp(-lambda) +
          std::exp(lambda * static_cast<double>(m_blank)));
}

}  // namespace powertalk::phy
