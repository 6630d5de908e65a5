"""Constructive recovery of the linear skew representation of a sample.

A bimonotone sample, once translated so that one of its pairs sits at
(0, 0), is single-valued in the coordinates of the span of its primal
points, and the map from reduced primal to reduced dual coordinates is
linear and skew-symmetric.  This module extracts that span, performs the
coordinate reduction, builds the representing matrix from a
well-conditioned subset of points, and reassembles the affine offset of
the untranslated sample.

Components of the dual points orthogonal to the span are invisible to the
reduction and do not affect bimonotonicity; they are deliberately
discarded, and all residuals are measured after projection onto the span.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .classify import ClassificationReport, bimonotone_check, _Worst, _row_chunks
from .graphs import (
    DEFAULT_TOLERANCE,
    GraphPoint,
    OperatorGraph,
    SkewfitError,
    ToleranceConfig,
    ValidationError,
    domain,
    translate,
    vectors_close,
)

__all__ = [
    "InternalInconsistencyError",
    "NotBimonotoneError",
    "OrthonormalBasis",
    "ReconstructionReport",
    "ReducedGraph",
    "SkewDecomposition",
    "build_skew_operator",
    "decompose",
    "reduce",
    "single_valued_check",
    "span_basis",
    "verify_reconstruction",
]

_EPS = float(np.finfo(np.float64).eps)


class NotBimonotoneError(SkewfitError):
    """The input sample is not bimonotone at the working tolerance."""

    def __init__(
        self,
        message: str,
        report: ClassificationReport | None = None,
        worst_index: int | None = None,
        residual: float | None = None,
    ) -> None:
        super().__init__(message)
        self.report = report
        self.worst_index = worst_index
        self.residual = residual


class InternalInconsistencyError(SkewfitError, RuntimeError):
    """Two internal views of the same data disagree; indicates a tolerance
    miscalibration rather than a property of the input."""


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Column-orthonormal matrix whose columns span a subspace of R^n.

    Zero columns (an empty basis for the trivial subspace) are allowed.
    """

    q: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", _as_matrix(self.q, "q"))
        n, k = self.q.shape
        if k > n:
            raise ValidationError(f"basis has {k} columns but only {n} rows")
        gram_defect = _max_abs(self.q.T @ self.q - np.eye(k))
        if gram_defect > 1e-12:
            raise ValidationError(
                f"basis columns are not orthonormal (defect {gram_defect:.3e})"
            )

    @property
    def ambient_dimension(self) -> int:
        return self.q.shape[0]

    @property
    def rank(self) -> int:
        return self.q.shape[1]


@dataclass(frozen=True, eq=False)
class ReducedGraph:
    """A sample expressed in span coordinates; dimension may be zero."""

    dimension: int
    points: tuple[GraphPoint, ...]

    def __post_init__(self) -> None:
        if isinstance(self.dimension, bool) or not isinstance(self.dimension, (int, np.integer)):
            raise ValidationError("dimension must be an integer")
        object.__setattr__(self, "dimension", int(self.dimension))
        if self.dimension < 0:
            raise ValidationError("dimension must be nonnegative")
        pts = tuple(self.points)
        if not pts:
            raise ValidationError("a reduced graph must contain at least one point")
        for i, p in enumerate(pts):
            if not isinstance(p, GraphPoint):
                raise ValidationError(f"points[{i}] is not a GraphPoint")
            if p.dimension != self.dimension:
                raise ValidationError(
                    f"points[{i}] has dimension {p.dimension}, expected {self.dimension}"
                )
        object.__setattr__(self, "points", pts)

    @property
    def primal_matrix(self) -> np.ndarray:
        return np.stack([p.x for p in self.points])

    @property
    def dual_matrix(self) -> np.ndarray:
        return np.stack([p.xstar for p in self.points])


def span_basis(
    vectors,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
    dimension: int | None = None,
) -> OrthonormalBasis:
    """Orthonormal basis of the linear span of the given vectors.

    Rank is decided by singular values: anything at or below
    max(rows, cols) * eps * sigma_max is treated as zero.  An empty input or
    all-zero vectors yield a rank-zero basis (pass ``dimension`` to fix the
    ambient dimension in that case).  ``tol`` is accepted for signature
    uniformity; the rank cutoff is machine-precision based.
    """
    vecs = [np.asarray(v, dtype=np.float64) for v in vectors]
    if not vecs:
        return OrthonormalBasis(np.zeros((dimension or 0, 0)))
    n = vecs[0].size
    for i, v in enumerate(vecs):
        if v.ndim != 1 or v.size != n:
            raise ValidationError(f"vectors[{i}] has shape {v.shape}, expected ({n},)")
    if dimension is not None and dimension != n:
        raise ValidationError(f"vectors live in R^{n}, expected R^{dimension}")
    stacked = np.stack(vecs)
    if not np.any(stacked):
        return OrthonormalBasis(np.zeros((n, 0)))
    _, sing, vt = np.linalg.svd(stacked, full_matrices=False)
    cutoff = max(stacked.shape) * _EPS * sing[0]
    k = int(np.count_nonzero(sing > cutoff))
    return OrthonormalBasis(vt[:k].T.copy())


def reduce(
    g: OperatorGraph,
    basis: OrthonormalBasis,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> ReducedGraph:
    """Express every pair in the coordinates of ``basis``.

    Primal points must lie in the span of the basis within vector
    tolerance.  Dual points are projected without such a requirement: their
    orthogonal components carry no pairing information and are dropped.
    """
    if basis.ambient_dimension != g.dimension:
        raise ValidationError(
            f"basis lives in R^{basis.ambient_dimension}, graph in R^{g.dimension}"
        )
    q = basis.q
    x = g.primal_matrix
    s = g.dual_matrix
    x_hat = x @ q
    s_hat = s @ q
    residual = np.linalg.norm(x - x_hat @ q.T, axis=1)
    allowed = tol.abs_tol + tol.rel_tol * np.linalg.norm(x, axis=1)
    bad = np.nonzero(residual > allowed)[0]
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"points[{i}].x lies outside the span of the basis "
            f"(out-of-span residual {residual[i]:.6e})"
        )
    points = tuple(GraphPoint(x_hat[i], s_hat[i]) for i in range(x_hat.shape[0]))
    return ReducedGraph(basis.rank, points)


def single_valued_check(
    rg: ReducedGraph, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> ClassificationReport:
    """Points sharing a reduced primal must agree in their reduced dual."""
    x = rg.primal_matrix
    s = rg.dual_matrix
    m = x.shape[0]
    nx = np.linalg.norm(x, axis=1)
    ns = np.linalg.norm(s, axis=1)
    cols = np.arange(m)
    worst = _Worst()
    for i0, i1 in _row_chunks(m, max(1, rg.dimension)):
        gap_x = np.linalg.norm(x[i0:i1, None, :] - x[None, :, :], axis=2)
        same = gap_x / tol.margin(np.maximum(nx[i0:i1, None], nx[None, :])) <= 1.0
        gap_s = np.linalg.norm(s[i0:i1, None, :] - s[None, :, :], axis=2)
        viol = gap_s / tol.margin(np.maximum(ns[i0:i1, None], ns[None, :]))
        viol[~same] = -np.inf
        viol[cols[None, :] <= np.arange(i0, i1)[:, None]] = -np.inf
        worst.update(viol, i0)
    return worst.report()


def build_skew_operator(
    rg: ReducedGraph, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> np.ndarray:
    """Representing matrix of a reduced sample, from a pivot subset of points.

    Expects a reduced graph that contains (0, 0), is single-valued at
    tolerance, and whose primal points span the reduced space.  A
    column-pivoted QR factorization of all reduced primal points selects k
    well-conditioned ones; solving against their duals gives the matrix,
    which is then verified against every point and checked for skewness.
    The returned matrix is the raw solve result; callers wanting an exactly
    antisymmetric matrix should take its antisymmetric part.
    """
    k = rg.dimension
    if k == 0:
        return np.zeros((0, 0))
    zero = np.zeros(k)
    if not any(
        vectors_close(p.x, zero, tol) and vectors_close(p.xstar, zero, tol)
        for p in rg.points
    ):
        raise ValidationError(
            "reduced graph does not contain (0, 0); translate by a graph point first"
        )
    cols_primal = rg.primal_matrix.T  # k x m, columns are reduced primal points
    cols_dual = rg.dual_matrix.T
    _, r, piv = scipy.linalg.qr(cols_primal, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    cutoff = max(cols_primal.shape) * _EPS * (float(diag[0]) if diag.size else 0.0)
    rank = int(np.count_nonzero(diag > cutoff))
    if rank < k:
        raise InternalInconsistencyError(
            f"reduced primal points span only {rank} of {k} directions; "
            "basis and reduction disagree"
        )
    sel = piv[:k]
    pivot_primal = cols_primal[:, sel]
    pivot_dual = cols_dual[:, sel]
    fitted = np.linalg.solve(pivot_primal.T, pivot_dual.T).T
    predicted = rg.primal_matrix @ fitted.T
    residual = np.linalg.norm(rg.dual_matrix - predicted, axis=1)
    scale = np.maximum(
        np.linalg.norm(rg.dual_matrix, axis=1), np.linalg.norm(predicted, axis=1)
    )
    normalized = residual / tol.margin(scale)
    worst = int(np.argmax(normalized))
    if normalized[worst] > 1.0:
        raise NotBimonotoneError(
            f"reduced pair {worst} is not consistent with a linear map at "
            f"tolerance (residual {residual[worst]:.6e}); the sample is not "
            "bimonotone at this tolerance",
            worst_index=worst,
            residual=float(residual[worst]),
        )
    defect = _max_abs(fitted + fitted.T)
    if defect > float(tol.margin(_max_abs(fitted))):
        raise NotBimonotoneError(
            f"fitted matrix is not skew-symmetric at tolerance (defect {defect:.6e}); "
            "the sample is not bimonotone at this tolerance"
        )
    return fitted


@dataclass(frozen=True, eq=False)
class SkewDecomposition:
    """Affine skew representation of a sample: on the span of the basis,
    dual = basis (a_hat (basis^T x) + v_hat) up to components orthogonal to
    the span.

    ``a_hat`` is exactly antisymmetric (the antisymmetric part of the raw
    fit); ``skewness_defect`` records how far the raw fit was from skew.
    ``max_residual`` is the largest reconstruction residual over the source
    graph, measured after projection onto the span.
    """

    basis: OrthonormalBasis
    a_hat: np.ndarray
    v_hat: np.ndarray
    basepoint: GraphPoint
    max_residual: float
    skewness_defect: float

    def __post_init__(self) -> None:
        if not isinstance(self.basis, OrthonormalBasis):
            raise ValidationError("basis must be an OrthonormalBasis")
        object.__setattr__(self, "a_hat", _as_matrix(self.a_hat, "a_hat"))
        k = self.basis.rank
        if self.a_hat.shape != (k, k):
            raise ValidationError(
                f"a_hat has shape {self.a_hat.shape}, expected ({k}, {k})"
            )
        v = np.array(self.v_hat, dtype=np.float64)
        if v.shape != (k,):
            raise ValidationError(f"v_hat has shape {v.shape}, expected ({k},)")
        if not np.all(np.isfinite(v)):
            raise ValidationError("v_hat contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "v_hat", v)
        if not isinstance(self.basepoint, GraphPoint):
            raise ValidationError("basepoint must be a GraphPoint")
        if self.basepoint.dimension != self.basis.ambient_dimension:
            raise ValidationError("basepoint dimension does not match the basis")
        object.__setattr__(self, "max_residual", float(self.max_residual))
        object.__setattr__(self, "skewness_defect", float(self.skewness_defect))

    @property
    def rank(self) -> int:
        return self.basis.rank

    def to_dict(self) -> dict:
        return {
            "basis": self.basis.q.tolist(),
            "a_hat": self.a_hat.tolist(),
            "v_hat": self.v_hat.tolist(),
            "basepoint": {
                "x": self.basepoint.x.tolist(),
                "xstar": self.basepoint.xstar.tolist(),
            },
            "max_residual": self.max_residual,
            "skewness_defect": self.skewness_defect,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SkewDecomposition":
        if not isinstance(doc, dict):
            raise ValidationError("decomposition document must be an object")
        keys = {"basis", "a_hat", "v_hat", "basepoint", "max_residual", "skewness_defect"}
        unknown = sorted(set(doc) - keys)
        if unknown:
            raise ValidationError(f"unknown key {unknown[0]!r} in decomposition document")
        missing = sorted(keys - set(doc))
        if missing:
            raise ValidationError(f"decomposition document is missing key {missing[0]!r}")
        basis_raw = np.array(doc["basis"], dtype=np.float64)
        if basis_raw.ndim != 2:
            raise ValidationError("basis must be a 2-D array")
        basis = OrthonormalBasis(basis_raw)
        k = basis.rank
        try:
            a_hat = np.array(doc["a_hat"], dtype=np.float64).reshape(k, k)
            v_hat = np.array(doc["v_hat"], dtype=np.float64).reshape(k)
        except ValueError as exc:
            raise ValidationError(f"decomposition arrays have wrong shapes: {exc}") from exc
        bp = doc["basepoint"]
        if not isinstance(bp, dict) or set(bp) != {"x", "xstar"}:
            raise ValidationError("basepoint must be an object with keys x and xstar")
        basepoint = GraphPoint(np.array(bp["x"]), np.array(bp["xstar"]))
        return cls(
            basis=basis,
            a_hat=a_hat,
            v_hat=v_hat,
            basepoint=basepoint,
            max_residual=float(doc["max_residual"]),
            skewness_defect=float(doc["skewness_defect"]),
        )


def decompose(
    g: OperatorGraph,
    basepoint: int | None = None,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> SkewDecomposition:
    """Recover the affine skew representation of a bimonotone sample.

    Pipeline: certify bimonotonicity, translate the chosen basepoint (the
    first point by default) to (0, 0), extract the span of the translated
    domain, reduce to span coordinates, build the representing matrix, and
    reassemble the offset so that basis^T xstar = a_hat basis^T x + v_hat
    holds over the original graph.

    Raises NotBimonotoneError (with the report attached) when the input
    fails the bimonotone check, and InternalInconsistencyError when the
    certified sample still reduces to something multivalued, which signals
    tolerance miscalibration rather than bad input.
    """
    report = bimonotone_check(g, tol)
    if not report.verdict:
        raise NotBimonotoneError(
            f"sample is not bimonotone at tolerance "
            f"(worst_violation {report.worst_violation:.6e} at pair {report.witness})",
            report=report,
        )
    idx = 0 if basepoint is None else basepoint
    if not isinstance(idx, (int, np.integer)) or isinstance(idx, bool):
        raise ValidationError("basepoint must be a point index")
    if not 0 <= idx < len(g.points):
        raise ValidationError(
            f"basepoint index {idx} out of range for {len(g.points)} points"
        )
    base = g.points[idx]
    shifted = translate(g, base.x, base.xstar)
    basis = span_basis(domain(shifted, tol), tol, dimension=g.dimension)
    reduced = reduce(shifted, basis, tol)
    valued = single_valued_check(reduced, tol)
    if not valued.verdict:
        raise InternalInconsistencyError(
            "bimonotone sample reduced to a multivalued map "
            f"(worst_violation {valued.worst_violation:.6e} at pair {valued.witness}); "
            "tolerances are inconsistent"
        )
    raw = build_skew_operator(reduced, tol)
    defect = _max_abs(raw + raw.T)
    a_hat = (raw - raw.T) / 2.0
    q = basis.q
    v_hat = q.T @ base.xstar - a_hat @ (q.T @ base.x)
    projected = g.dual_matrix @ q
    predicted = (g.primal_matrix @ q) @ a_hat.T + v_hat
    residuals = np.linalg.norm(projected - predicted, axis=1)
    return SkewDecomposition(
        basis=basis,
        a_hat=a_hat,
        v_hat=v_hat,
        basepoint=base,
        max_residual=float(residuals.max()),
        skewness_defect=defect,
    )


@dataclass(frozen=True)
class ReconstructionReport:
    """Per-point residuals of a decomposition against a graph, measured in
    span coordinates.  Components orthogonal to the basis never contribute."""

    verdict: bool
    max_residual: float
    worst_index: int
    residuals: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "max_residual": self.max_residual,
            "worst_index": self.worst_index,
            "residuals": list(self.residuals),
        }


def verify_reconstruction(
    dec: SkewDecomposition,
    g: OperatorGraph,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> ReconstructionReport:
    """Check basis^T xstar = a_hat basis^T x + v_hat for every pair of ``g``."""
    if g.dimension != dec.basis.ambient_dimension:
        raise ValidationError(
            f"graph lives in R^{g.dimension}, decomposition in "
            f"R^{dec.basis.ambient_dimension}"
        )
    q = dec.basis.q
    projected = g.dual_matrix @ q
    predicted = (g.primal_matrix @ q) @ dec.a_hat.T + dec.v_hat
    residuals = np.linalg.norm(projected - predicted, axis=1)
    scale = np.maximum(
        np.linalg.norm(projected, axis=1), np.linalg.norm(predicted, axis=1)
    )
    normalized = residuals / tol.margin(scale)
    worst = int(np.argmax(normalized))
    return ReconstructionReport(
        verdict=bool(normalized[worst] <= 1.0),
        max_residual=float(residuals.max()),
        worst_index=worst,
        residuals=tuple(float(r) for r in residuals),
    )
