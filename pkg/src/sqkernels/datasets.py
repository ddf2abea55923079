"""Seeded two-class synthetic datasets in the plane.

Random numbers come from ``numpy.random.default_rng(seed)`` (PCG64); normal
deviates use its ``normal`` method. Class +1 receives ceil(n/2) points and
class -1 floor(n/2). Points are returned class +1 first; use :func:`split`
for a shuffled partition.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULTS = {
    "blobs": {"center_box": 8.0, "std": 1.5},
    "circles": {"factor": 0.5, "noise": 0.25},
    "moons": {"noise": 0.1},
    "spiral": {"turns_start": math.pi / 4, "turns_end": 4 * math.pi, "pitch": 0.25, "noise": 0.05},
    "sine": {"x_max": 4 * math.pi, "y_max": 2.0, "freq": 1.0, "margin": 0.05},
}
NAMES = tuple(DEFAULTS)


@dataclass(eq=False)
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray
    name: str = "custom"
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2) if len(self.points) else np.zeros((0, 2))
        self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
        if self.points.shape[0] != self.labels.shape[0]:
            raise ValueError("points and labels differ in length")
        if not np.all((self.labels == 1) | (self.labels == -1)):
            raise ValueError("labels must be -1 or +1")

    def __len__(self):
        return self.labels.size

    def header(self) -> dict:
        return {"name": self.name, "seed": self.seed, "n": len(self), "params": self.params}


def _params(name: str, params: dict | None) -> dict:
    if name not in DEFAULTS:
        raise ValueError(f"unknown dataset {name!r}; expected one of {NAMES}")
    merged = dict(DEFAULTS[name])
    for k, v in (params or {}).items():
        if k not in merged:
            raise ValueError(f"unknown parameter {k!r} for dataset {name!r}")
        merged[k] = float(v)
    for k in ("noise", "std", "margin"):
        if k in merged and merged[k] < 0:
            raise ValueError(f"{k} must be nonnegative")
    return merged


def _blobs(rng, n_pos, n_neg, p):
    box = p["center_box"]
    centers = rng.uniform(-box, box, size=(2, 2))
    pos = centers[0] + p["std"] * rng.normal(size=(n_pos, 2))
    neg = centers[1] + p["std"] * rng.normal(size=(n_neg, 2))
    return pos, neg


def _circles(rng, n_pos, n_neg, p):
    def ring(radius, m):
        t = rng.uniform(0.0, 2 * math.pi, size=m)
        pts = radius * np.column_stack([np.cos(t), np.sin(t)])
        return pts + p["noise"] * rng.normal(size=(m, 2))

    return ring(1.0, n_pos), ring(p["factor"], n_neg)


def _moons(rng, n_pos, n_neg, p):
    # upper arc: unit half circle about the origin; lower arc: the same arc
    # flipped and centred on (1, 0.5)
    t = rng.uniform(0.0, math.pi, size=n_pos)
    pos = np.column_stack([np.cos(t), np.sin(t)])
    t = rng.uniform(0.0, math.pi, size=n_neg)
    neg = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    pos = pos + p["noise"] * rng.normal(size=pos.shape)
    neg = neg + p["noise"] * rng.normal(size=neg.shape)
    return pos, neg


def _spiral(rng, n_pos, n_neg, p):
    def arm(m, offset):
        phi = rng.uniform(p["turns_start"], p["turns_end"], size=m)
        r = p["pitch"] * phi
        pts = np.column_stack([r * np.cos(phi + offset), r * np.sin(phi + offset)])
        return pts + p["noise"] * rng.normal(size=(m, 2))

    return arm(n_pos, 0.0), arm(n_neg, math.pi)


def _sine(rng, n_pos, n_neg, p):
    def draw(m, above):
        out = np.empty((0, 2))
        while out.shape[0] < m:
            x = rng.uniform(0.0, p["x_max"], size=2 * m)
            y = rng.uniform(-p["y_max"], p["y_max"], size=2 * m)
            gap = y - np.sin(p["freq"] * x)
            keep = gap > p["margin"] if above else gap < -p["margin"]
            out = np.vstack([out, np.column_stack([x, y])[keep]])
        return out[:m]

    return draw(n_pos, True), draw(n_neg, False)


_GENERATORS = {"blobs": _blobs, "circles": _circles, "moons": _moons, "spiral": _spiral, "sine": _sine}


def generate(name: str, n: int, seed: int, params: dict | None = None) -> LabeledDataset:
    """Draw ``n`` labelled points from the named generator."""
    p = _params(name, params)
    if int(n) != n or n < 4:
        raise ValueError(f"n must be an integer >= 4, got {n!r}")
    n = int(n)
    n_pos, n_neg = (n + 1) // 2, n // 2
    rng = np.random.default_rng(seed)
    pos, neg = _GENERATORS[name](rng, n_pos, n_neg, p)
    points = np.vstack([pos, neg])
    labels = np.concatenate([np.ones(n_pos, dtype=int), -np.ones(n_neg, dtype=int)])
    return LabeledDataset(points, labels, name=name, seed=int(seed), params=p)


def split(d: LabeledDataset, train_fraction: float = 0.5, seed: int = 0):
    """Seeded random partition into (train, valid)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n_train = int(round(train_fraction * len(d)))
    if n_train == 0 or n_train == len(d):
        raise ValueError("split would leave one side empty")
    order = np.random.default_rng(seed).permutation(len(d))
    tr, va = order[:n_train], order[n_train:]

    def part(idx):
        return LabeledDataset(d.points[idx], d.labels[idx], name=d.name, seed=d.seed, params=dict(d.params))

    return part(tr), part(va)


def permuted_labels(d: LabeledDataset, seed: int) -> LabeledDataset:
    """Copy of ``d`` with labels shuffled (a chance-level control)."""
    labels = np.random.default_rng(seed).permutation(d.labels)
    return LabeledDataset(d.points.copy(), labels, name=d.name, seed=d.seed, params=dict(d.params))


# -- text format: '# {json header}' then 'x1,x2,label' rows -----------------

def dumps(d: LabeledDataset) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(d.header(), sort_keys=True) + "\n")
    buf.write("x1,x2,label\n")
    for (x1, x2), lab in zip(d.points, d.labels):
        buf.write(f"{float(x1)!r},{float(x2)!r},{'+1' if lab > 0 else '-1'}\n")
    return buf.getvalue()


def loads(text: str) -> LabeledDataset:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("dataset file must start with a '# {header}' line")
    header = json.loads(lines[0][1:])
    if len(lines) < 2 or lines[1].strip() != "x1,x2,label":
        raise ValueError("dataset file is missing the 'x1,x2,label' column line")
    points, labels = [], []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(fields)}")
        points.append((float(fields[0]), float(fields[1])))
        labels.append(int(fields[2]))
    return LabeledDataset(
        np.array(points).reshape(-1, 2), labels,
        name=header.get("name", "custom"), seed=header.get("seed"), params=header.get("params", {}),
    )
