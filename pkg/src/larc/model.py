"""Hamiltonian models H(u) with arbitrary control dependence.

A model maps a control vector u in R^m to an n x n Hermitian matrix, either
through a multivariate polynomial with Hermitian coefficients or through an
explicit table of (control point, matrix) pairs.  Tabulated models never
interpolate: only values of H at chosen control points matter, and
interpolation would silently change the generated algebra.

Sign convention, fixed once for the whole toolkit: the dynamical generator
is ``A(u) = -i H(u)``.  The real span of ``{-i H(u)}`` equals the real span
of ``{i H(u)}`` (closed under scalar -1), so rank decisions are unaffected.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .matrixcore import (
    OrthonormalSpan,
    check_hermitian,
    fro_norm,
)

DEFAULT_RANK_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Sample a box control set on a regular grid."""

    points_per_axis: int = 5


@dataclass(frozen=True)
class Random:
    """Sample the control set uniformly at random (seeded)."""

    count: int = 512


@dataclass(frozen=True)
class Exhaustive:
    """Evaluate every point of a finite control set."""


class HamiltonianModel:
    """Control-to-Hamiltonian map, polynomial or tabulated.

    Polynomial terms are (exponent multi-index, Hermitian coefficient)
    pairs; H(u) = sum_a C_a * prod_k u_k^{a_k}.  Real monomials times
    Hermitian coefficients keep every value Hermitian.
    """

    def __init__(self, n, m, kind, terms):
        if kind not in ("polynomial", "tabulated"):
            raise ValueError(f"unknown model kind {kind!r}")
        self.n = int(n)
        self.m = int(m)
        self.kind = kind
        self.terms = []
        if self.m < 1:
            raise ValueError("model needs at least one control")
        seen = set()
        for key, M in terms:
            key = tuple(int(k) for k in key) if kind == "polynomial" else tuple(float(x) for x in key)
            if len(key) != self.m:
                raise ValueError(f"term key {key} has arity {len(key)}, expected {self.m}")
            if kind == "polynomial" and any(k < 0 for k in key):
                raise ValueError(f"negative exponent in multi-index {key}")
            if key in seen:
                what = "multi-index" if kind == "polynomial" else "control point"
                raise ValueError(f"duplicate {what} {key}")
            seen.add(key)
            M = check_hermitian(M)
            if M.shape[0] != self.n:
                raise ValueError(f"coefficient for {key} has dimension {M.shape[0]}, expected {self.n}")
            self.terms.append((key, M))
        if not self.terms:
            raise ValueError("model has no terms")

    @classmethod
    def polynomial(cls, m, terms):
        n = np.asarray(terms[0][1]).shape[0]
        return cls(n, m, "polynomial", terms)

    @classmethod
    def tabulated(cls, m, table):
        n = np.asarray(table[0][1]).shape[0]
        return cls(n, m, "tabulated", table)


@dataclass(frozen=True)
class ControlSet:
    """Admissible control values: a coordinate box or a finite point list."""

    kind: str
    lower: np.ndarray = None
    upper: np.ndarray = None
    points: tuple = None
    sampler_seed: int = 0

    @classmethod
    def box(cls, lower, upper, sampler_seed=0):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("box bounds must be equal-length vectors")
        if np.any(lower > upper):
            raise ValueError("box lower bound exceeds upper bound")
        return cls(kind="box", lower=lower, upper=upper, sampler_seed=int(sampler_seed))

    @classmethod
    def finite(cls, points, sampler_seed=0):
        pts = tuple(tuple(float(x) for x in p) for p in points)
        if not pts:
            raise ValueError("finite control set is empty")
        if len(set(pts)) != len(pts):
            raise ValueError("finite control set has duplicate points")
        if len({len(p) for p in pts}) != 1:
            raise ValueError("finite control points have mixed arity")
        return cls(kind="finite", points=pts, sampler_seed=int(sampler_seed))

    @property
    def m(self):
        return len(self.lower) if self.kind == "box" else len(self.points[0])


@dataclass
class GeneratorSet:
    """Dynamical generators sampled from a model.

    ``generators[k] * scales[k] == -i H(control_points[k])``; sampling
    emits unit scales, :func:`select_independent` folds the normalization
    into ``scales`` so that durations can be unwound later.
    """

    generators: list
    control_points: list
    span_dimension: int
    scales: list = field(default_factory=list)
    all_zero: bool = False
    stabilization_window: int = None

    def __post_init__(self):
        if not self.scales:
            self.scales = [1.0] * len(self.generators)
        if len(self.generators) != len(self.control_points) or len(self.generators) != len(self.scales):
            raise ValueError("generators, control points and scales must align")
        if self.span_dimension != len(self.generators):
            raise ValueError("span_dimension must equal the number of stored generators")

    @property
    def n(self):
        return self.generators[0].shape[0] if self.generators else 0


def _check_arity(model, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (model.m,):
        raise ValueError(f"control vector has arity {u.shape}, expected ({model.m},)")
    return u


def evaluate_model(model, u) -> np.ndarray:
    """H(u) for a single control vector.

    Tabulated models require u to be one of the stored points.
    """
    u = _check_arity(model, u)
    if model.kind == "polynomial":
        H = np.zeros((model.n, model.n), dtype=complex)
        for exponents, C in model.terms:
            H += C * np.prod(u ** np.asarray(exponents, dtype=float))
        return H
    key = tuple(float(x) for x in u)
    for point, H in model.terms:
        if point == key:
            return H.copy()
    raise ValueError(f"control point {key} is not in the tabulated model (no interpolation)")


def evaluate_model_batch(model, U) -> np.ndarray:
    """H(u) for a (K, m) stack of control vectors, vectorized."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[1] != model.m:
        raise ValueError(f"control batch must have shape (K, {model.m})")
    if model.kind == "polynomial":
        coeffs = np.stack([C for _, C in model.terms])
        expo = np.stack([np.asarray(e, dtype=float) for e, _ in model.terms])
        monomials = np.prod(U[:, None, :] ** expo[None, :, :], axis=2)
        return np.einsum("kt,tij->kij", monomials, coeffs)
    return np.stack([evaluate_model(model, u) for u in U])


def _iter_control_points(controls, strategy, rng):
    if isinstance(strategy, Exhaustive):
        if controls.kind != "finite":
            raise ValueError("exhaustive sampling requires a finite control set")
        for p in controls.points:
            yield np.asarray(p, dtype=float)
    elif isinstance(strategy, Grid):
        if controls.kind != "box":
            raise ValueError("grid sampling requires a box control set")
        if strategy.points_per_axis < 1:
            raise ValueError("grid needs at least one point per axis")
        axes = [np.linspace(lo, hi, strategy.points_per_axis)
                for lo, hi in zip(controls.lower, controls.upper)]
        for combo in itertools.product(*axes):
            yield np.asarray(combo, dtype=float)
    elif isinstance(strategy, Random):
        if strategy.count < 1:
            raise ValueError("random sampling needs a positive count")
        for _ in range(strategy.count):
            if controls.kind == "box":
                yield rng.uniform(controls.lower, controls.upper)
            else:
                yield np.asarray(controls.points[rng.integers(0, len(controls.points))], dtype=float)
    else:
        raise ValueError(f"unknown sampling strategy {strategy!r}")


def sample_generators(model, controls, strategy, rank_tol=DEFAULT_RANK_TOL,
                      stabilization_window=None) -> GeneratorSet:
    """Evaluate A(u) = -i H(u) over the control set and keep a spanning set.

    Greedy: a sample is kept iff its residual after projection onto the
    current span exceeds ``rank_tol`` times its norm.  Random sampling
    stops once the span has not grown for ``stabilization_window``
    consecutive samples (default 2 n^2, a heuristic stopping rule recorded
    in reports); grid and exhaustive sampling always run all points.
    """
    if controls.m != model.m:
        raise ValueError(f"control set arity {controls.m} does not match model arity {model.m}")
    n = model.n
    window = stabilization_window if stabilization_window is not None else 2 * n * n
    rng = np.random.default_rng(controls.sampler_seed)
    span = OrthonormalSpan()
    kept, points = [], []
    stale = 0
    for u in _iter_control_points(controls, strategy, rng):
        A = -1j * evaluate_model(model, u)
        if span.try_add(A, rank_tol):
            kept.append(A)
            points.append(u)
            stale = 0
        else:
            stale += 1
            if isinstance(strategy, Random) and stale >= window:
                break
        if len(kept) >= n * n:
            break
    return GeneratorSet(
        generators=kept,
        control_points=points,
        span_dimension=len(kept),
        scales=[1.0] * len(kept),
        all_zero=(len(kept) == 0),
        stabilization_window=window if isinstance(strategy, Random) else None,
    )


def select_independent(gens, rank_tol=DEFAULT_RANK_TOL) -> GeneratorSet:
    """Maximal linearly independent sublist, unit-normalized, first-seen order.

    Idempotent; the dropped samples are exactly those inside the span of
    earlier ones.  Normalization factors multiply into ``scales``.
    """
    span = OrthonormalSpan()
    kept, points, scales = [], [], []
    for A, u, c in zip(gens.generators, gens.control_points, gens.scales):
        nrm = fro_norm(A)
        if nrm == 0.0 or not span.try_add(A, rank_tol):
            continue
        kept.append(A / nrm)
        points.append(u)
        scales.append(c * nrm)
    return GeneratorSet(
        generators=kept,
        control_points=points,
        span_dimension=len(kept),
        scales=scales,
        all_zero=(len(kept) == 0),
        stabilization_window=gens.stabilization_window,
    )
