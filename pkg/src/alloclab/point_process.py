"""Samplers for center configurations: Poisson, Palm augmentation, renewal
Palm processes, and the superposition coupling of nested intensities.

Every sampler is a pure function of (parameters, seed); replicate seeds are
derived with one splitmix64 step so streams are independent and replayable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import Domain

__all__ = [
    "CenterSet",
    "splitmix64",
    "derive_seed",
    "sample_poisson",
    "palm_augment",
    "sample_renewal_palm",
    "sample_coupled",
    "INCREMENT_LAWS",
]

_MASK = (1 << 64) - 1


def splitmix64(z: int) -> int:
    """One splitmix64 step (Steele-Lea-Flood finalizer)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(base_seed: int, replicate: int) -> int:
    """Seed for replicate i of base seed s: splitmix64(s XOR i)."""
    return splitmix64((base_seed & _MASK) ^ (replicate & _MASK))


@dataclass
class CenterSet:
    """A finite configuration of centers in [0, L)^d with intensity metadata.

    If ``palm`` is set the origin is present exactly once, as points[0].
    """

    points: np.ndarray  # (n, d) float64
    d: int
    L: float
    lam: float
    palm: bool = False
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, self.d)
        if self.points.size and (self.points.min() < 0 or self.points.max() >= self.L):
            raise ValueError("center coordinates must lie in [0, L)")
        if self.palm:
            if self.n == 0 or np.any(self.points[0] != 0.0):
                raise ValueError("palm CenterSet must have the origin as its first point")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def to_json(self) -> str:
        doc = {
            "d": self.d,
            "L": self.L,
            "lambda": self.lam,
            "palm": self.palm,
            "seed": self.seed,
            "points": self.points.tolist(),
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CenterSet":
        doc = json.loads(text)
        return cls(
            points=np.asarray(doc["points"], dtype=float),
            d=doc["d"],
            L=doc["L"],
            lam=doc["lambda"],
            palm=doc["palm"],
            seed=doc["seed"],
        )


def sample_poisson(dom: Domain, lam: float, seed: int) -> CenterSet:
    """Homogeneous Poisson sample on the torus window: Poisson(lam * L^d)
    points, i.i.d. uniform."""
    if lam <= 0:
        raise ValueError(f"intensity must be positive, got {lam}")
    rng = np.random.default_rng(seed)
    n = rng.poisson(lam * dom.L**dom.d)
    pts = rng.random((n, dom.d)) * dom.L
    return CenterSet(points=pts, d=dom.d, L=dom.L, lam=lam, palm=False, seed=seed)


def palm_augment(cs: CenterSet) -> CenterSet:
    """Add an extra center at the origin (Palm version for Poisson input)."""
    if cs.n and np.any(np.all(cs.points == 0.0, axis=1)):
        raise ValueError("origin already present; cannot palm-augment twice")
    pts = np.vstack([np.zeros((1, cs.d)), cs.points])
    return CenterSet(points=pts, d=cs.d, L=cs.L, lam=cs.lam, palm=True, seed=cs.seed, meta=dict(cs.meta))


def _gamma_increments(shape: float):
    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.gamma(shape, 1.0 / shape, size)

    return draw


def _draw_exponential(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.exponential(1.0, size)


def _draw_uniform02(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.random(size) * 2.0


def _draw_deterministic(rng: np.random.Generator, size: int) -> np.ndarray:
    return np.ones(size)


# Unit-mean increment laws for the renewal sampler.  "deterministic(1)" is
# degenerate (zero variance) and gets flagged in the sample metadata.
INCREMENT_LAWS: dict[str, Callable[[np.random.Generator, int], np.ndarray]] = {
    "exponential(1)": _draw_exponential,
    "uniform(0,2)": _draw_uniform02,
    "gamma(2,1/2)": _gamma_increments(2.0),
    "gamma(4,1/4)": _gamma_increments(4.0),
    "deterministic(1)": _draw_deterministic,
}


def sample_renewal_palm(window: float, increment_law: str, seed: int) -> CenterSet:
    """Palm renewal configuration on [-window, window), center at 0, mapped
    onto a torus of side 2*window (seam at +-window, maximally far from 0).

    The two-sided walk uses i.i.d. unit-mean increments on each side of the
    origin; the arc across the seam is not a renewal gap and its length is
    recorded as meta["seam_gap"].
    """
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    if increment_law not in INCREMENT_LAWS:
        raise ValueError(
            f"unknown increment law {increment_law!r}; expected one of {sorted(INCREMENT_LAWS)}"
        )
    draw = INCREMENT_LAWS[increment_law]
    rng = np.random.default_rng(seed)
    L = 2.0 * window

    def one_side(sign: float) -> list[float]:
        out, pos = [], 0.0
        while True:
            chunk = draw(rng, 256)
            for inc in chunk:
                if inc <= 0:
                    raise ValueError("renewal increments must be positive")
                pos += inc
                if pos >= window:
                    return out
                out.append(sign * pos)

    right = one_side(+1.0)
    left = one_side(-1.0)
    line = np.array(left[::-1] + [0.0] + right)
    # torus coords in [0, L): origin stays at 0, negative side wraps.
    pts = np.where(line < 0, line + L, line).reshape(-1, 1)
    order = np.argsort(line, kind="stable")
    origin_idx = int(np.where(order == len(left))[0][0])
    # origin first, remaining points in line order
    rest = np.concatenate([order[:origin_idx], order[origin_idx + 1 :]])
    pts = np.vstack([pts[len(left)], pts[rest]])
    seam_gap = (window - (right[-1] if right else 0.0)) + (window - (-left[-1] if left else 0.0))
    meta = {
        "increment_law": increment_law,
        "window": window,
        "seam_gap": seam_gap,
        "degenerate_variance": increment_law == "deterministic(1)",
    }
    return CenterSet(points=pts, d=1, L=L, lam=1.0, palm=True, seed=seed, meta=meta)


def sample_coupled(dom: Domain, lam: float, seed: int) -> tuple[CenterSet, CenterSet]:
    """Superposition coupling (Pi_1, Pi_lam) with Pi_1 subset of Pi_lam:
    Pi_lam = Pi_1 + independent Poisson of intensity lam - 1."""
    if lam <= 1:
        raise ValueError(f"coupled sampler needs lam > 1, got {lam}")
    base = sample_poisson(dom, 1.0, seed)
    rng = np.random.default_rng(derive_seed(seed, 0x5EED))
    n_extra = rng.poisson((lam - 1.0) * dom.L**dom.d)
    extra = rng.random((n_extra, dom.d)) * dom.L
    sup = CenterSet(
        points=np.vstack([base.points, extra]) if n_extra else base.points.copy(),
        d=dom.d,
        L=dom.L,
        lam=lam,
        palm=False,
        seed=seed,
    )
    return base, sup
