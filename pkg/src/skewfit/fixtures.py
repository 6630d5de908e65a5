"""Seeded synthesis of ground-truth samples.

Fixtures plant a skew-symmetric linear operator on a random k-dimensional
subspace of R^n, sample its graph at random domain points, optionally hang
several dual branches off each point by adding components orthogonal to the
subspace (which preserves bimonotonicity), and optionally inject in-span
noise (which destroys it).  The planted operator, offset, and subspace are
returned alongside the graph so recovery can be checked against the truth.

All randomness flows from a counter-based generator seeded by the spec, so
identical specs produce bit-identical fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .graphs import (
    GraphPoint,
    OperatorGraph,
    ParseError,
    ValidationError,
)
from .recovery import InternalInconsistencyError, OrthonormalBasis

__all__ = [
    "Fixture",
    "FixtureSpec",
    "FixtureTruth",
    "make_fixture",
    "perturb",
    "random_skew",
]

_SPEC_KEYS = {
    "n",
    "k",
    "m",
    "branches",
    "offset_norm",
    "noise_in_span",
    "noise_orthogonal",
    "seed",
    "zero_operator",
}


@dataclass(frozen=True)
class FixtureSpec:
    """Recipe for one synthetic sample.

    n: ambient dimension; k: dimension of the planted subspace (k <= n);
    m: number of domain points; branches: dual points per domain point;
    offset_norm: norm of the constant offset added to every dual;
    noise_in_span: amplitude of in-span noise on each dual (breaks
    bimonotonicity when positive); noise_orthogonal: norm of the orthogonal
    component added per branch (harmless to bimonotonicity, ignored when
    k = n since the complement is trivial); zero_operator: plant the zero
    matrix instead of a random skew one, making the sample constant.
    """

    n: int
    k: int
    m: int
    branches: int = 1
    offset_norm: float = 0.0
    noise_in_span: float = 0.0
    noise_orthogonal: float = 0.0
    seed: int = 0
    zero_operator: bool = False

    def __post_init__(self) -> None:
        for name in ("n", "k", "m", "branches", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer")
            object.__setattr__(self, name, int(value))
        if self.n < 1:
            raise ValidationError("n must be positive")
        if not 0 <= self.k <= self.n:
            raise ValidationError(f"k must lie in [0, n]; got k={self.k}, n={self.n}")
        if self.m < 1:
            raise ValidationError("m must be positive")
        if self.branches < 1:
            raise ValidationError("branches must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValidationError("seed must be a 64-bit nonnegative integer")
        for name in ("offset_norm", "noise_in_span", "noise_orthogonal"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and nonnegative")
            object.__setattr__(self, name, value)
        if not isinstance(self.zero_operator, bool):
            raise ValidationError("zero_operator must be a boolean")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "branches": self.branches,
            "offset_norm": self.offset_norm,
            "noise_in_span": self.noise_in_span,
            "noise_orthogonal": self.noise_orthogonal,
            "seed": self.seed,
            "zero_operator": self.zero_operator,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FixtureSpec":
        if not isinstance(doc, dict):
            raise ParseError("fixture spec must be an object")
        unknown = sorted(set(doc) - _SPEC_KEYS)
        if unknown:
            raise ParseError(f"unknown key {unknown[0]!r} in fixture spec")
        for required in ("n", "k", "m"):
            if required not in doc:
                raise ParseError(f"fixture spec is missing key {required!r}")
        return cls(**doc)

    def with_seed(self, seed: int) -> "FixtureSpec":
        return replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class FixtureTruth:
    """What was planted: the n x n skew operator (supported on the planted
    subspace), the constant offset, and the subspace basis."""

    operator: np.ndarray
    offset: np.ndarray
    basis: OrthonormalBasis

    def to_dict(self) -> dict:
        return {
            "operator": self.operator.tolist(),
            "offset": self.offset.tolist(),
            "basis": self.basis.q.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Fixture:
    graph: OperatorGraph
    truth: FixtureTruth


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InternalInconsistencyError("cannot normalize a zero vector")
    return v / norm


def random_skew(k: int, seed: int) -> np.ndarray:
    """Exactly antisymmetric k x k matrix with seeded Gaussian entries.

    k = 0 gives the empty matrix and k = 1 the zero matrix, since a 1 x 1
    skew matrix is zero.
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
        raise ValidationError("k must be a nonnegative integer")
    if k == 0:
        return np.zeros((0, 0))
    b = _rng(seed).standard_normal((k, k))
    return (b - b.T) / 2.0


def make_fixture(spec: FixtureSpec) -> Fixture:
    """Synthesize the sample described by ``spec`` along with its truth.

    Draw order (fixed for determinism): subspace basis, operator core,
    offset direction, domain coordinates (with one redraw if they fail to
    span), then per point and branch the orthogonal and in-span noise.
    """
    rng = _rng(spec.seed)
    n, k, m = spec.n, spec.k, spec.m
    if k > 0:
        q0, _ = np.linalg.qr(rng.standard_normal((n, k)))
    else:
        q0 = np.zeros((n, 0))
    core = np.zeros((k, k))
    if k > 0 and not spec.zero_operator:
        b = rng.standard_normal((k, k))
        core = (b - b.T) / 2.0
    operator = q0 @ core @ q0.T
    offset = np.zeros(n)
    if spec.offset_norm > 0:
        offset = spec.offset_norm * _unit(rng.standard_normal(n))
    coords = rng.standard_normal((m, k))
    if 0 < k <= m and np.linalg.matrix_rank(coords) < k:
        coords = rng.standard_normal((m, k))
        if np.linalg.matrix_rank(coords) < k:
            raise InternalInconsistencyError(
                "domain sample failed to span the planted subspace twice in a row"
            )
    primal = coords @ q0.T
    points: list[GraphPoint] = []
    for i in range(m):
        base = operator @ primal[i] + offset
        for _ in range(spec.branches):
            dual = base
            if spec.noise_orthogonal > 0 and k < n:
                raw = rng.standard_normal(n)
                perp = raw - q0 @ (q0.T @ raw)
                dual = dual + spec.noise_orthogonal * _unit(perp)
            if spec.noise_in_span > 0 and k > 0:
                dual = dual + spec.noise_in_span * (q0 @ _unit(rng.standard_normal(k)))
            points.append(GraphPoint(primal[i], dual))
    graph = OperatorGraph(n, tuple(points))
    truth = FixtureTruth(operator=operator, offset=offset, basis=OrthonormalBasis(q0))
    return Fixture(graph=graph, truth=truth)


def perturb(
    g: OperatorGraph,
    index: int,
    direction: str,
    amplitude: float,
    basis: OrthonormalBasis,
    seed: int,
) -> OperatorGraph:
    """Return a copy of ``g`` with one dual point nudged by ``amplitude``.

    ``direction`` selects where the nudge lives relative to ``basis``:
    "in_span" draws a random unit vector inside the span (this breaks
    bimonotonicity of a planted sample), "orthogonal" draws one in the
    orthogonal complement (this never affects it).  Amplitude zero returns
    an unchanged copy.
    """
    if not 0 <= index < len(g.points):
        raise ValidationError(f"index {index} out of range for {len(g.points)} points")
    if direction not in ("in_span", "orthogonal"):
        raise ValidationError(
            f"direction must be 'in_span' or 'orthogonal', got {direction!r}"
        )
    amplitude = float(amplitude)
    if not np.isfinite(amplitude) or amplitude < 0:
        raise ValidationError("amplitude must be finite and nonnegative")
    points = list(g.points)
    if amplitude == 0.0:
        return OperatorGraph(g.dimension, tuple(points))
    if basis.ambient_dimension != g.dimension:
        raise ValidationError(
            f"basis lives in R^{basis.ambient_dimension}, graph in R^{g.dimension}"
        )
    rng = _rng(seed)
    q = basis.q
    if direction == "in_span":
        if basis.rank == 0:
            raise ValidationError("span is trivial; there is no in-span direction")
        step = amplitude * (q @ _unit(rng.standard_normal(basis.rank)))
    else:
        raw = rng.standard_normal(g.dimension)
        perp = raw - q @ (q.T @ raw)
        if float(np.linalg.norm(perp)) <= 1e-9 * float(np.linalg.norm(raw)):
            raise ValidationError("orthogonal complement of the span is trivial")
        step = amplitude * _unit(perp)
    target = points[index]
    points[index] = GraphPoint(target.x, target.xstar + step)
    return OperatorGraph(g.dimension, tuple(points))
