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
#include "powertalk/sweep.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "powertalk/errors.hpp"
#include "powertalk/event_log.hpp"
#include "powertalk/phy.hpp"
#include "powertalk/rng.hpp"
#include "powertalk/sim.hpp"

namespace powertalk::sim {

using nlohmann::json;

namespace {

std::vector<double> axis_values(const json& ja, const std::string& param) {
  std::vector<double> values;
  if (ja.contains("values")) {
    for (const json& v : ja.at("values")) {
      if (!v.is_number()) {
        throw ConfigError("axes." + param + ".values", "expected numbers");
      }
      values.push_back(v.get<double>());
    }
  } else if (ja.contains("log_range")) {
    const json& lr = ja.at("log_range");
    if (!lr.is_array() || lr.size() != 3) {
      throw ConfigError("axes." + param + ".log_range",
                        "expected [lo, hi, count]");
    }
    const double lo = lr[0].get<double>();
    const double hi = lr[1].get<double>();
    const int n = lr[2].get<int>();
    if (!(lo > 0.0) || !(hi >= lo) || n < 1) {
      throw ConfigError("axes." + param + ".log_range",
                        "needs 0 < lo <= hi and count >= 1");
    }
    for (int k = 0; k < n; ++k) {
      const double f = n == 1 ? 0.0
                              : static_cast<double>(k) /
                                    static_cast<double>(n - 1);
      values.push_back(lo * std::pow(hi / lo, f));
    }
  } else {
    throw ConfigError("axes." + param, "needs 'values' or 'log_range'");
  }
  if (values.empty()) {
    throw ConfigError("axes." + param, "must not be empty");
  }
  return values;
}

void check_axes(const SweepSpec& spec, const std::set<std::string>& allowed,
                const std::string& what) {
  if (spec.axes.empty() || spec.axes.size() > 2) {
    throw ConfigError("axes", "expected one or two axes");
  }
  std::set<std::string> seen;
  for (const SweepAxis& a : spec.axes) {
    if (!allowed.count(a.param)) {
      throw ConfigError("axes", "'" + a.param + "' is not sweepable in a " +
                                    what + " sweep");
    }
    if (!seen.insert(a.param).second) {
      throw ConfigError("axes", "duplicate axis '" + a.param + "'");
    }
  }
  if (spec.trials < 1) throw ConfigError("trials", "must be >= 1");
}

/// Axis grid in row-major order (first axis outer); a single axis yields a
/// second, degenerate axis so every point still carries both values.
std::vector<std::pair<double, double>> grid_points(const SweepSpec& spec,
                                                   const std::string& first,
                                                   double first_default,
                                                   double second_default) {
  std::vector<double> a{first_default};
  std::vector<double> b{second_default};
  for (const SweepAxis& axis : spec.axes) {
    if (axis.param == first) {
      a = axis.values;
    } else {
      b = axis.values;
    }
  }
  std::vector<std::pair<double, double>> points;
  for (double va : a) {
    for (double vb : b) {
      points.emplace_back(va, vb);
    }
  }
  return points;
}

void run_pool(std::size_t n_points, int workers,
              const std::function<void(std::size_t)>& body) {
  const int n_workers =
      std::max(1, std::min<int>(workers, static_cast<int>(n_points)));
  if (n_workers == 1) {
    for (std::size_t k = 0; k < n_points; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n_points) break;
      body(k);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

}  // namespace

SweepSpec SweepSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("json", e.what());
  }
  SweepSpec spec;
  if (j.contains("base_path")) {
    spec.base = ScenarioConfig::load_file(j.at("base_path").get<std::string>());
  } else if (j.contains("base")) {
    spec.base = ScenarioConfig::from_json_text(j.at("base").dump());
  } else {
    throw ConfigError("base", "sweep needs 'base' or 'base_path'");
  }
  if (!j.contains("axes") || !j.at("axes").is_array()) {
    throw ConfigError("axes", "expected an array");
  }
  for (const json& ja : j.at("axes")) {
    SweepAxis axis;
    if (!ja.contains("param") || !ja.at("param").is_string()) {
      throw ConfigError("axes.param", "expected a string");
    }
    axis.param = ja.at("param").get<std::string>();
    axis.values = axis_values(ja, axis.param);
    spec.axes.push_back(std::move(axis));
  }
  if (j.contains("trials")) spec.trials = j.at("trials").get<std::uint64_t>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("tx_unit")) spec.tx_unit = j.at("tx_unit").get<int>();
  if (j.contains("rx_unit")) spec.rx_unit = j.at("rx_unit").get<int>();
  return spec;
}

SweepSpec SweepSpec::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("sweep", "cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

void SweepSpec::validate_for_ber() const {
  check_axes(*this, {"gamma", "t_pt_s"}, "BER");
}

void SweepSpec::validate_for_mu() const {
  check_axes(*this, {"lambda_per_slot", "m_blank"}, "completion-time");
  if (!base.incoming) {
    throw ConfigError("base.incoming",
                      "a completion-time sweep needs an incoming unit");
  }
}

namespace {

std::pair<int, int> resolve_tx_rx(const SweepSpec& spec) {
  int tx = spec.tx_unit;
  if (tx < 0) tx = spec.base.control.cc_unit;
  int rx = spec.rx_unit;
  if (rx < 0) {
    if (spec.base.incoming) {
      rx = spec.base.incoming->id;
      // The incoming unit is only on the grid after arrival; BER points use
      // the initial grid, so fall back to a present unit.
      bool present = false;
      for (const grid::DerUnit& u : spec.base.units) {
        present = present || u.id == rx;
      }
      if (!present) rx = -1;
    }
    if (rx < 0) {
      for (const grid::DerUnit& u : spec.base.units) {
        if (u.id != tx) {
          rx = u.id;
          break;
        }
      }
    }
  }
  if (rx < 0 || rx == tx) {
    throw ConfigError("rx_unit", "no receiver unit available");
  }
  return {tx, rx};
}

}  // namespace

std::vector<BerRow> run_ber_sweep(const SweepSpec& spec, int workers) {
  spec.validate_for_ber();
  const auto [tx, rx] = resolve_tx_rx(spec);
  const auto points =
      grid_points(spec, "gamma", spec.base.phy.gamma, spec.base.phy.t_pt);

  std::vector<BerRow> rows(points.size());
  run_pool(points.size(), workers, [&](std::size_t k) {
    const auto [gamma, t_pt] = points[k];
    phy::PhyConfig cfg = spec.base.phy;
    cfg.gamma = gamma;
    cfg.t_pt = t_pt;
    double min_x = std::numeric_limits<double>::infinity();
    for (const grid::DerUnit& u : spec.base.units) {
      if (u.mode == grid::Mode::kVsc) min_x = std::min(min_x, u.x);
    }
    cfg.validate(min_x);

    const grid::LoadModel load{spec.base.r_load};
    const grid::DeviationReport dev =
        grid::voltage_deviation(spec.base.units, load, {}, tx, gamma);
    double dv0 = dev.dv_bus_bit0;
    double dv1 = dev.dv_bus_bit1;
    if (cfg.observe == phy::Observe::kTerminal) {
      for (const grid::ReceiverDeviation& r : dev.receivers) {
        if (r.unit_id == rx) {
          dv0 = r.dv_bit0;
          dv1 = r.dv_bit1;
        }
      }
    }
    const double sigma = cfg.sigma_mean();

    BerRow row;
    row.gamma = gamma;
    row.t_pt = t_pt;
    row.nu = cfg.nu;
    row.ber_paper = phy::ber_paper(dv0, dv1, sigma);
    row.ber_standard = phy::ber_standard(dv0, dv1, sigma);
    const phy::BerEstimate mc =
        phy::ber_monte_carlo(spec.base.units, load, {}, cfg, tx, rx,
                             spec.trials, derive_seed(spec.seed, 0xbe5, k));
    row.ber_mc = mc.ber;
    row.mc_stderr = mc.stderr_;
    row.n_trials = mc.trials;
    rows[k] = row;
  });
  return rows;
}

std::vector<MuRow> run_mu_sweep(const SweepSpec& spec, int workers) {
  spec.validate_for_mu();
  const auto points = grid_points(spec, "lambda_per_slot",
                                  spec.base.poisson.lambda_per_slot,
                                  static_cast<double>(spec.base.phy.m_blank));

  std::vector<MuRow> rows(points.size());
  run_pool(points.size(), workers, [&](std::size_t k) {
    const auto [lambda, m_raw] = points[k];
    const auto m_blank = static_cast<std::int64_t>(std::llround(m_raw));
    if (lambda < 0.0) {
      throw ConfigError("axes.lambda_per_slot", "must be >= 0");
    }
    if (m_blank < 0) throw ConfigError("axes.m_blank", "must be >= 0");

    ScenarioConfig cfg = spec.base;
    cfg.poisson.lambda_per_slot = lambda;
    cfg.phy.m_blank = static_cast<int>(m_blank);
    cfg.validate();

    MuRow row;
    row.lambda = lambda;
    row.m_blank = m_blank;
    row.mu_closed_form = phy::mu_closed_form(
        cfg.resolved_d_periods(), cfg.resolved_r_periods(), cfg.phy.s_slots,
        cfg.phy.t_pt, lambda, m_blank);
    const MuEstimate est =
        estimate_mu(cfg, spec.trials, derive_seed(spec.seed, 0x6d5, k), 1);
    row.mu_empirical = est.mean_s;
    row.stderr_ = est.stderr_s;
    row.n_runs = est.runs;
    row.completed = est.completed;
    rows[k] = row;
  });
  return rows;
}

const char* kBerCsvHeader =
    "gamma,t_pt,nu,ber_paper,ber_standard,ber_mc,mc_stderr,n_trials";
const char* kMuCsvHeader =
    "lambda,m_blank,mu_closed_form,mu_empirical,stderr,n_runs";

std::string ber_rows_to_csv(const std::vector<BerRow>& rows) {
  std::ostringstream out;
  out << kBerCsvHeader << '\n';
  for (const BerRow& r : rows) {
    out << fmt_g17(r.gamma) << ',' << fmt_g17(r.t_pt) << ',' << fmt_g17(r.nu)
        << ',' << fmt_g17(r.ber_paper) << ',' << fmt_g17(r.ber_standard) << ','
        << fmt_g17(r.ber_mc) << ',' << fmt_g17(r.mc_stderr) << ','
        << r.n_trials << '\n';
  }
  return out.str();
}

std::string mu_rows_to_csv(const std::vector<MuRow>& rows) {
  std::ostringstream out;
  out << kMuCsvHeader << '\n';
  for (const MuRow& r : rows) {
    out << fmt_g17(r.lambda) << ',' << r.m_blank << ','
        << fmt_g17(r.mu_closed_form) << ',' << fmt_g17(r.mu_empirical) << ','
        << fmt_g17(r.stderr_) << ',' << r.n_runs << '\n';
  }
  return out.str();
}

}  // namespace powertalk::sim
