# Copyright 2026 The mib Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#         https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Variational mutual-information bounds with analytic toy problems."""

import json as _json

from ._mib import (
    ConfigError,
    DomainError,
    NumericError,
    ShapeError,
    bound,
    config_hash,
    default_config,
    estimators,
    gradient_sweep,
    optimal_sweep,
    rho_for_mi,
    selfcheck,
    true_mi,
)
from ._mib import run_experiment as _run_experiment

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericError",
    "ShapeError",
    "bound",
    "config_hash",
    "default_config",
    "estimators",
    "gradient_sweep",
    "optimal_sweep",
    "rho_for_mi",
    "run_experiment",
    "selfcheck",
    "true_mi",
]


def run_experiment(config, out_dir, workers=1, hex=False):
    """Run an experiment. `config` is a JSON string or a dict."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_experiment(config, str(out_dir), workers=workers, hex=hex)
