# Copyright (c) 2026 The dbls Authors. All Rights Reserved.
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

import json as _json

from ._core import (
    CLASS_CODES,
    ArgumentError,
    ConfigurationError,
    Error,
    IngestionError,
    PersistenceError,
    TrainingError,
    blend_label,
    calibrate_vote_accuracy,
    evaluate,
    generate_synthetic as _generate_synthetic,
    metrics,
    normalize_config as _normalize_config,
    one_hot,
    run_experiment as _run_experiment,
    smooth as _smooth,
    tokenize,
    train as _train,
    uniform_smooth,
)


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def load_config(config, base_dir=""):
    """Validated experiment config as a dict, with every default filled in."""
    return _json.loads(_normalize_config(_text(config), str(base_dir)))


def generate_synthetic(synthetic=None):
    return _generate_synthetic(_text(synthetic or {}))


def run_experiment(config, base_dir=""):
    return _run_experiment(_text(config), str(base_dir))


def train(config, condition="hard", seed=1, out_dir="model"):
    return _train(_text(config), condition, seed, str(out_dir))


def smooth(config, condition="bayesian_0.1", seed=1):
    return _smooth(_text(config), condition, seed)


__all__ = [
    "CLASS_CODES",
    "ArgumentError",
    "ConfigurationError",
    "Error",
    "IngestionError",
    "PersistenceError",
    "TrainingError",
    "blend_label",
    "calibrate_vote_accuracy",
    "evaluate",
    "generate_synthetic",
    "load_config",
    "metrics",
    "one_hot",
    "run_experiment",
    "smooth",
    "tokenize",
    "train",
    "uniform_smooth",
]
