# Copyright 2026 the powertalk authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""DC microgrid power talk authentication simulator."""

try:
    from . import _powertalk as _core  # wheel layout
except ImportError:  # in-tree builds put the extension on sys.path directly
    import _powertalk as _core

ConfigError = _core.ConfigError
DerUnit = _core.DerUnit
GridSteadyState = _core.GridSteadyState
Mode = _core.Mode
ber_monte_carlo = _core.ber_monte_carlo
ber_paper = _core.ber_paper
ber_standard = _core.ber_standard
derive_ptk = _core.derive_ptk
estimate_mu = _core.estimate_mu
mu_closed_form = _core.mu_closed_form
run_scenario = _core.run_scenario
solve_steady_state = _core.solve_steady_state
solve_steady_state_dense = _core.solve_steady_state_dense
total_exchange_bits = _core.total_exchange_bits
voltage_deviation = _core.voltage_deviation

__all__ = [
    "ConfigError",
    "DerUnit",
    "GridSteadyState",
    "Mode",
    "ber_monte_carlo",
    "ber_paper",
    "ber_standard",
    "derive_ptk",
    "estimate_mu",
    "mu_closed_form",
    "run_scenario",
    "solve_steady_state",
    "solve_steady_state_dense",
    "total_exchange_bits",
    "voltage_deviation",
]

__version__ = "0.1.0"
