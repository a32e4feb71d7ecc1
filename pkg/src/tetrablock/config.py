"""Run configuration and instance specifications."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

CONFIG_ENV = "TETRABLOCK_CONFIG"

KINDS = ("scalar", "diagonal", "unitary", "compressed-isometry", "polynomial", "file")


@dataclass(frozen=True)
class RunConfig:
    """Tolerances and sample sizes for one verification run."""

    tol: float = 1e-9
    rank_tol: float = 1e-10
    K_max: int = 4
    samples: int = 200
    angular_grid: int = 720
    depth: int = 4
    z_samples: int = 16
    uniqueness_depth: int = 6
    unitary_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "seed":
                if v < 0:
                    raise ValueError("seed must be non-negative")
            elif not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v!r}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | os.PathLike | None = None) -> "RunConfig":
        """Read a JSON config; falls back to ``$TETRABLOCK_CONFIG`` then defaults."""
        path = path or os.environ.get(CONFIG_ENV)
        if not path:
            return cls()
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for a test instance.

    ``params`` depends on ``kind``:

    * ``scalar``: ``point`` as ``[[re, im], [re, im], [re, im]]``
    * ``diagonal``: ``points``, a list of such triples
    * ``unitary``: ``n``
    * ``compressed-isometry``: ``G1``, ``G2`` (matrix JSON) and ``levels``
    * ``polynomial``: ``n``, ``point`` (coefficients of ``(c T, d T, e T^2)``)
    * ``file``: ``path`` to a triple JSON file

    Random families draw everything from ``seed``, so a spec fully
    determines its instance.
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    note: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}; expected one of {KINDS}")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": self.params, "seed": self.seed, "note": self.note}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "InstanceSpec":
        return cls(d["kind"], dict(d.get("params", {})), int(d.get("seed", 0)), d.get("note", ""))
