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
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "powertalk/errors.hpp"
#include "powertalk/grid.hpp"
#include "powertalk/phy.hpp"
#include "powertalk/prf.hpp"
#include "powertalk/protocol.hpp"
#include "powertalk/sim.hpp"
#include "powertalk/sweep.hpp"

namespace py = pybind11;
using namespace powertalk;

namespace {

py::dict metrics_to_dict(const sim::RunMetrics& m) {
  py::dict d;
  d["handshake_attempted"] = m.handshake_attempted;
  d["handshake_completed"] = m.handshake_completed;
  d["handshake_failed"] = m.handshake_failed;
  d["failure_reason"] = m.failure_reason;
  d["attempts"] = m.attempts;
  d["bit_errors"] = m.bit_errors;
  d["load_changes"] = m.load_changes;
  d["recalibrations"] = m.recalibrations;
  d["window_extension_slots"] = m.window_extension_slots;
  if (m.access_slot) d["access_slot"] = *m.access_slot;
  if (m.completion_slot) d["completion_slot"] = *m.completion_slot;
  if (m.completion_time_s) d["completion_time_s"] = *m.completion_time_s;
  d["trace_t_s"] = m.trace_t_s;
  d["trace_v_bus"] = m.trace_v_bus;
  d["trace_unit_ids"] = m.trace_unit_ids;
  d["trace_currents"] = m.trace_currents;
  return d;
}

}  // namespace

PYBIND11_MODULE(_powertalk, m) {
  m.doc() = "DC microgrid power talk authentication simulator (C++ core)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<grid::Mode>(m, "Mode")
      .value("VSC", grid::Mode::kVsc)
      .value("CSC", grid::Mode::kCsc);

  py::class_<grid::DerUnit>(m, "DerUnit")
      .def(py::init<>())
      .def(py::init([](int id, grid::Mode mode, double x, double r,
                       double r_line, double i_csc, double gamma_offset) {
             return grid::DerUnit{id, mode, x, r, r_line, i_csc, gamma_offset};
           }),
           py::arg("id"), py::arg("mode") = grid::Mode::kVsc,
           py::arg("x") = 48.0, py::arg("r") = 0.2, py::arg("r_line") = 0.2,
           py::arg("i_csc") = 0.0, py::arg("gamma_offset") = 0.0)
      .def_readwrite("id", &grid::DerUnit::id)
      .def_readwrite("mode", &grid::DerUnit::mode)
      .def_readwrite("x", &grid::DerUnit::x)
      .def_readwrite("r", &grid::DerUnit::r)
      .def_readwrite("r_line", &grid::DerUnit::r_line)
      .def_readwrite("i_csc", &grid::DerUnit::i_csc)
      .def_readwrite("gamma_offset", &grid::DerUnit::gamma_offset);

  py::class_<grid::GridSteadyState>(m, "GridSteadyState")
      .def_readonly("v_bus", &grid::GridSteadyState::v_bus)
      .def_readonly("v", &grid::GridSteadyState::v)
      .def_readonly("i", &grid::GridSteadyState::i);

  m.def(
      "solve_steady_state",
      [](const std::vector<grid::DerUnit>& units, double r_load,
         const std::vector<double>& offsets) {
        return grid::solve_steady_state(units, grid::LoadModel{r_load},
                                        offsets);
      },
      py::arg("units"), py::arg("r_load"),
      py::arg("offsets") = std::vector<double>{});

  m.def(
      "solve_steady_state_dense",
      [](const std::vector<grid::DerUnit>& units, double r_load,
         const std::vector<double>& offsets) {
        return grid::solve_steady_state_dense(units, grid::LoadModel{r_load},
                                              offsets);
      },
      py::arg("units"), py::arg("r_load"),
      py::arg("offsets") = std::vector<double>{});

  m.def(
      "voltage_deviation",
      [](const std::vector<grid::DerUnit>& units, double r_load, int tx_id,
         double gamma) {
        const grid::DeviationReport rep =
            grid::voltage_deviation(units, grid::LoadModel{r_load}, {}, tx_id,
                                    gamma);
        py::dict d;
        py::dict receivers;
        for (const grid::ReceiverDeviation& r : rep.receivers) {
          receivers[py::int_(r.unit_id)] =
              py::make_tuple(r.dv_bit0, r.dv_bit1);
        }
        d["receivers"] = receivers;
        d["dv_bus"] = py::make_tuple(rep.dv_bus_bit0, rep.dv_bus_bit1);
        return d;
      },
      py::arg("units"), py::arg("r_load"), py::arg("tx_id"), py::arg("gamma"));

  m.def("ber_paper", &phy::ber_paper, py::arg("delta_v0"), py::arg("delta_v1"),
        py::arg("sigma"));
  m.def("ber_standard", &phy::ber_standard, py::arg("delta_v0"),
        py::arg("delta_v1"), py::arg("sigma"));
  m.def("mu_closed_form", &phy::mu_closed_form, py::arg("d_periods"),
        py::arg("r_periods"), py::arg("s_slots"), py::arg("t_pt"),
        py::arg("lambda_"), py::arg("m_blank"));

  m.def(
      "ber_monte_carlo",
      [](const std::vector<grid::DerUnit>& units, double r_load, double gamma,
         double t_pt, double tau, double nu, double eta, int tx_id, int rx_id,
         std::uint64_t n_trials, std::uint64_t seed) {
        phy::PhyConfig cfg;
        cfg.gamma = gamma;
        cfg.t_pt = t_pt;
        cfg.tau = tau;
        cfg.nu = nu;
        cfg.eta = eta;
        const phy::BerEstimate est = phy::ber_monte_carlo(
            units, grid::LoadModel{r_load}, {}, cfg, tx_id, rx_id, n_trials,
            seed);
        py::dict d;
        d["ber"] = est.ber;
        d["stderr"] = est.stderr_;
        d["errors"] = est.errors;
        d["trials"] = est.trials;
        return d;
      },
      py::arg("units"), py::arg("r_load"), py::arg("gamma"), py::arg("t_pt"),
      py::arg("tau") = 0.00235, py::arg("nu") = 50.0e6,
      py::arg("eta") = 8.58e-2, py::arg("tx_id") = 0, py::arg("rx_id") = 1,
      py::arg("n_trials") = 100000, py::arg("seed") = 1);

  m.def(
      "derive_ptk",
      [](py::bytes pmk, py::bytes anonce, py::bytes snonce, py::bytes sta_mac,
         py::bytes cc_mac) {
        const auto as_vec = [](py::bytes b) {
          const std::string s = b;
          return proto::Bytes(s.begin(), s.end());
        };
        const proto::Ptk ptk =
            proto::derive_ptk(as_vec(pmk), as_vec(anonce), as_vec(snonce),
                              as_vec(sta_mac), as_vec(cc_mac));
        proto::Bytes raw(ptk.kck.begin(), ptk.kck.end());
        raw.insert(raw.end(), ptk.kek.begin(), ptk.kek.end());
        return py::bytes(reinterpret_cast<const char*>(raw.data()), raw.size());
      },
      py::arg("pmk"), py::arg("anonce"), py::arg("snonce"), py::arg("sta_mac"),
      py::arg("cc_mac"));

  m.def("total_exchange_bits", &proto::total_exchange_bits,
        py::arg("repetition_code") = false);

  m.def(
      "run_scenario",
      [](const std::string& config_json, bool record_detail) {
        const sim::ScenarioConfig cfg =
            sim::ScenarioConfig::from_json_text(config_json);
        const sim::RunResult result = sim::run(cfg, record_detail);
        py::dict d = metrics_to_dict(result.metrics);
        d["events"] = result.log.to_string();
        return d;
      },
      py::arg("config_json"), py::arg("record_detail") = true);

  m.def(
      "estimate_mu",
      [](const std::string& config_json, std::uint64_t n_runs,
         std::uint64_t seed, int workers) {
        const sim::ScenarioConfig cfg =
            sim::ScenarioConfig::from_json_text(config_json);
        const sim::MuEstimate est =
            sim::estimate_mu(cfg, n_runs, seed, workers);
        py::dict d;
        d["mean_s"] = est.mean_s;
        d["stderr_s"] = est.stderr_s;
        d["completed"] = est.completed;
        d["runs"] = est.runs;
        d["completion_times_s"] = est.completion_times_s;
        return d;
      },
      py::arg("config_json"), py::arg("n_runs"), py::arg("seed") = 1,
      py::arg("workers") = 1);
}
