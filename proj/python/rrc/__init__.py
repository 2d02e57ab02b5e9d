"""Python access to the rrc inference engine."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Mapping

from . import _rrc
from ._rrc import Config, Error, __version__, schema_version

__all__ = [
    "Config",
    "Error",
    "__version__",
    "schema_version",
    "load_config",
    "infer",
    "choice_probabilities",
    "info_gains",
    "run_experiment",
]


def _coerce_config(config) -> Config:
    if isinstance(config, Config):
        return config
    if isinstance(config, Mapping):
        return Config(json.dumps(config, indent=2))
    return Config(str(config))


def _events_text(events) -> str:
    if events is None:
        return ""
    if isinstance(events, str):
        return events
    return "".join(json.dumps(e) + "\n" for e in events)


def load_config(path) -> Config:
    p = Path(path)
    return Config(p.read_text(), str(p))


def infer(config, events: Iterable[Mapping] | str | None = None, mode: str = "bayes") -> dict:
    """Posterior (bayes) or feasible set (constraint) report as a dict."""
    return json.loads(_rrc.infer(_coerce_config(config), _events_text(events), mode))


def choice_probabilities(config, channel: str, theta) -> list[float]:
    return _rrc.choice_probabilities(_coerce_config(config), channel, list(theta))


def info_gains(config, events=None) -> dict[str, float]:
    """Expected information gain of each channel under the posterior after `events`."""
    return dict(_rrc.info_gains(_coerce_config(config), _events_text(events)))


def run_experiment(config, seed: int | None = None) -> tuple[dict[str, list[dict]], dict]:
    """Runs the configured experiment. Returns ({table: rows}, metadata)."""
    tables, metadata = _rrc.run_experiment(_coerce_config(config), seed)
    rows = {name: list(csv.DictReader(io.StringIO(text))) for name, text in tables}
    return rows, json.loads(metadata)
