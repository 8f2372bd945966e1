"""Durable store shared by the CLI and the HTTP service.

State lives in a data directory: ``hierarchy.json`` (the semantic index with
shapes, descriptions and images) and an optional ``config.txt`` with weights
and sensitivities. Mutations run on a snapshot under a writer lock and swap
it in atomically, so concurrent readers always see a consistent hierarchy.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Callable, TypeVar, Union

from .config import SensitivityConfig, Weights, load_config
from .hierarchy import Hierarchy
from .shapes import standard_shapes

T = TypeVar("T")

HIERARCHY_FILE = "hierarchy.json"
CONFIG_FILE = "config.txt"


class Store:
    def __init__(
        self,
        data_dir: Union[str, Path],
        config_path: Union[str, Path, None] = None,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.hierarchy_path = self.data_dir / HIERARCHY_FILE

        cfg_file = Path(config_path) if config_path else self.data_dir / CONFIG_FILE
        if cfg_file.exists():
            self.weights, self.cfg = load_config(cfg_file)
        else:
            self.weights, self.cfg = Weights(), SensitivityConfig()

        if self.hierarchy_path.exists():
            self.hierarchy = Hierarchy.load(self.hierarchy_path)
        else:
            self.hierarchy = Hierarchy(standard_shapes())
            self.save()
        self._write_lock = threading.Lock()

    def save(self) -> None:
        self.hierarchy.save(self.hierarchy_path)

    def mutate(self, fn: Callable[[Hierarchy], T]) -> T:
        """Apply a mutation on a snapshot, swap it in, and persist."""
        with self._write_lock:
            snapshot = self.hierarchy.clone()
            result = fn(snapshot)
            self.hierarchy = snapshot
            self.save()
            return result
