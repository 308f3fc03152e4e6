"""Constructive reachability: recurrence, charts, and global continuation.

The pipeline realizes group elements as control programs with nonnegative
durations only:

* negative-time exponentials are traded for positive times by the
  almost-periodic recurrence of one-parameter subgroups of a compact group
  (:func:`positive_time_recurrence`);
* a local chart around a product point U0 is built from the independent
  generators plus conjugated copies, with interleaving matrices realized as
  reachable words (:func:`build_chart`);
* targets near the identity are reached by combining a power of U0 with a
  damped-Newton solve in the chart (:func:`reach_near_identity`);
* arbitrary certified targets are split along a one-parameter path into
  identity-neighborhood steps (:func:`synthesize`).

Ordering convention, fixed once: propagation multiplies the newest factor
on the left, X <- exp(-i H(u) tau) X, while reachable words store factors
in left-to-right product order.  word_to_program reverses accordingly.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .closure import project_to_algebra
from .errors import (
    BoundaryHit,
    BranchCut,
    BudgetExceeded,
    ChartFailure,
    MembershipRejected,
    NoConvergence,
)
from .matrixcore import (
    BRANCH_TOL,
    REUNITARIZE_EVERY,
    OrthonormalSpan,
    as_unitary,
    fro_norm,
    matexp,
    matlog_unitary,
    polar_unitary,
    skew_eigensystem,
)
from .model import evaluate_model, evaluate_model_batch

DEFAULT_EPS_V = 1e-6
DEFAULT_JAC_TOL = 1e-6
DEFAULT_RECURRENCE_BUDGET = 10_000_000
DEFAULT_POWER_BUDGET = 1_000_000
DEFAULT_NEWTON_ITERS = 100
DEFAULT_CONJUGATOR_TRIES = 1000
DEFAULT_MEMBERSHIP_TOL = 1e-8
DEFAULT_SAFETY = 0.5
CONJUGATOR_MAX_FACTORS = 8
CONJUGATOR_TIME_CAP = 2.0 * math.pi

_RATIONAL_TOL = 5e-14          # ratio test for the commensurate shortcut
_MAX_DENOMINATOR = 10 ** 6


class BudgetMeter:
    """Counters for search effort, echoed into synthesis reports."""

    def __init__(self):
        self.counts = {}

    def add(self, key, k=1):
        self.counts[key] = self.counts.get(key, 0) + int(k)

    def snapshot(self):
        return {k: self.counts[k] for k in sorted(self.counts)}


# ---------------------------------------------------------------------------
# Control programs


@dataclass
class ControlProgram:
    """Piecewise-constant control: ordered (control vector, duration) segments.

    Durations must be nonnegative -- time runs forward.  This is the class
    of admissible controls the whole toolkit emits.
    """

    segments: list

    def __post_init__(self):
        cleaned = []
        for u, tau in self.segments:
            tau = float(tau)
            if tau < 0.0 or not math.isfinite(tau):
                raise ValueError(f"segment duration {tau} is not a nonnegative real")
            cleaned.append((np.asarray(u, dtype=float), tau))
        self.segments = cleaned

    @property
    def total_duration(self) -> float:
        return float(sum(tau for _, tau in self.segments))

    def to_obj(self) -> dict:
        return {"segments": [{"u": [float(x) for x in u], "tau": tau} for u, tau in self.segments]}

    @classmethod
    def from_obj(cls, obj):
        if not isinstance(obj, dict) or "segments" not in obj:
            raise ValueError('program object must have a "segments" field')
        segs = []
        for i, seg in enumerate(obj["segments"]):
            if "u" not in seg or "tau" not in seg:
                raise ValueError(f'segment {i} must have "u" and "tau" fields')
            segs.append((np.asarray(seg["u"], dtype=float), float(seg["tau"])))
        return cls(segments=segs)


def propagate_program(model, program) -> np.ndarray:
    """Endpoint of the controlled flow: exp(-iH(u_K)tau_K) ... exp(-iH(u_1)tau_1).

    Constant-control segments compose by left multiplication of the newest
    factor.  Eigendecompositions are cached per distinct control, and the
    running product is re-unitarized every 32 factors so drift cannot
    accumulate over long programs.
    """
    n = model.n
    X = np.eye(n, dtype=complex)
    cache = {}
    for count, (u, tau) in enumerate(program.segments, start=1):
        key = u.tobytes()
        if key not in cache:
            lam, V = np.linalg.eigh(evaluate_model(model, u))
            cache[key] = (lam, V)
        lam, V = cache[key]
        X = (V * np.exp(-1j * lam * tau)) @ V.conj().T @ X
        if count % REUNITARIZE_EVERY == 0:
            X = polar_unitary(X)
    return as_unitary(X)


# ---------------------------------------------------------------------------
# Reachable words


@dataclass
class ReachableWord:
    """Product of generator exponentials with nonnegative times.

    ``factors`` holds (generator index, time >= 0) pairs in left-to-right
    product order; ``cached_value`` is the evaluated product.
    """

    factors: tuple
    cached_value: np.ndarray

    def __post_init__(self):
        self.factors = tuple((int(i), float(t)) for i, t in self.factors)
        for i, t in self.factors:
            if t < 0.0:
                raise ValueError(f"factor time {t} is negative; words live in the reachable set")


def word_value(gens, factors) -> np.ndarray:
    n = gens.n
    X = np.eye(n, dtype=complex)
    for count, (idx, t) in enumerate(factors, start=1):
        X = X @ matexp(gens.generators[idx], t)
        if count % REUNITARIZE_EVERY == 0:
            X = polar_unitary(X)
    return as_unitary(X)


def make_word(gens, factors) -> ReachableWord:
    return ReachableWord(factors=tuple(factors), cached_value=word_value(gens, factors))


def word_to_program(word, gens) -> ControlProgram:
    """Convert a reachable word into a control program.

    Each factor exp(A_j t) with A_j = -i H(u_j) / c_j is the flow under
    constant control u_j for duration t / c_j.  Segments are emitted in
    reverse factor order so that propagation (newest factor on the left)
    reproduces the word value.
    """
    segments = []
    for idx, t in reversed(word.factors):
        if idx < 0 or idx >= len(gens.generators):
            raise ValueError(f"generator index {idx} out of range")
        segments.append((np.asarray(gens.control_points[idx], dtype=float), t / gens.scales[idx]))
    return ControlProgram(segments=segments)


# ---------------------------------------------------------------------------
# Positive-time recurrence


def _phase_error(theta, delta_t) -> float:
    """Exact |exp(A a) - exp(A t)|_F from the eigenphases, a - t = delta_t."""
    return float(np.sqrt(np.sum(4.0 * np.sin(theta * delta_t / 2.0) ** 2)))


def positive_time_recurrence(A, t, eps, budget=DEFAULT_RECURRENCE_BUDGET, meter=None) -> float:
    """Nonnegative alpha with |exp(A alpha) - exp(A t)|_F < eps.

    For t >= 0 the answer is t itself.  Otherwise, if all eigenphase ratios
    are rational with denominators <= 10^6 (continued-fraction test), the
    one-parameter subgroup is periodic and the exact recurrence
    ``t + ceil(-t/T) T`` is returned.  In the general case candidates
    ``alpha = t + m delta`` with ``delta = eps / (sqrt(2n) max|theta|)``
    are tried in increasing order; grid points that provably fail the bound
    (the fastest phase alone already exceeds eps) are skipped without being
    charged to the budget, since the accepted candidate is the same either
    way.  Existence is guaranteed by almost-periodicity, but not within any
    a priori bound, hence the explicit budget.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if t >= 0:
        return float(t)
    theta, _ = skew_eigensystem(A)
    scale = np.max(np.abs(theta)) if len(theta) else 0.0
    nz = theta[np.abs(theta) > 1e-14 * max(1.0, scale)]
    if len(nz) == 0:
        return 0.0  # exp(A t) = I for every t

    ref = nz[int(np.argmax(np.abs(nz)))]
    ratios = nz / ref
    fracs = [Fraction(r).limit_denominator(_MAX_DENOMINATOR) for r in ratios]
    if all(abs(r - f) <= _RATIONAL_TOL * max(1.0, abs(r)) for r, f in zip(ratios, fracs)):
        L = math.lcm(*[f.denominator for f in fracs])
        period = 2.0 * math.pi * L / abs(ref)
        alpha = t + math.ceil(-t / period) * period
        if alpha < 0.0:
            alpha += period
        if meter is not None:
            meter.add("recurrence_candidates", 1)
        if _phase_error(theta, alpha - t) < eps:
            return float(alpha)
        # fell through: ratios only looked rational at the tested tolerance

    n = len(theta)
    th_max = float(np.max(np.abs(theta)))
    delta = eps / (math.sqrt(2.0 * n) * th_max)
    half_width = 2.0 * math.asin(min(1.0, eps / 2.0)) / th_max  # window where the fastest phase can pass
    m_min = math.ceil(-t / delta)
    q = 0
    tried = 0
    best_alpha, best_err = None, math.inf
    window_chunk = 4096
    while tried < budget:
        qs = np.arange(q, q + window_chunk, dtype=float)
        centers = 2.0 * math.pi * qs / th_max
        m_lo = np.maximum(np.ceil((centers - half_width) / delta).astype(np.int64), m_min)
        m_hi = np.floor((centers + half_width) / delta).astype(np.int64)
        ms_parts = [np.arange(a, b + 1) for a, b in zip(m_lo, m_hi) if b >= a]
        q += window_chunk
        if not ms_parts:
            continue
        ms = np.unique(np.concatenate(ms_parts))
        if ms.size > budget - tried:
            ms = ms[: budget - tried]
        deltas = ms * delta
        errs = np.sqrt(np.sum(4.0 * np.sin(np.outer(deltas, theta) / 2.0) ** 2, axis=1))
        tried += ms.size
        if meter is not None:
            meter.add("recurrence_candidates", ms.size)
        k = int(np.argmin(errs))
        if errs[k] < best_err:
            best_alpha, best_err = float(t + ms[k] * delta), float(errs[k])
        hit = np.nonzero(errs < eps)[0]
        if hit.size:
            i = int(hit[0])
            return float(t + ms[i] * delta)
    raise BudgetExceeded(
        f"recurrence search exhausted {budget} candidates (best error {best_err:.3e})",
        best=best_alpha,
        best_error=best_err,
        tried=tried,
    )


def approx_inverse_word(word, gens, eps, budget=DEFAULT_RECURRENCE_BUDGET, meter=None) -> ReachableWord:
    """Inverse of a reachable word using positive times only.

    Reverses the factor order and replaces each exp(A t) with
    exp(A alpha), alpha from the recurrence at -t; per-factor accuracy is
    eps split evenly across factors.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    k = max(1, len(word.factors))
    factors = [
        (idx, positive_time_recurrence(gens.generators[idx], -t, eps / k, budget=budget, meter=meter))
        for idx, t in reversed(word.factors)
    ]
    return make_word(gens, factors)


# ---------------------------------------------------------------------------
# Chart construction


@dataclass
class ChartConstruction:
    """Local chart Phi around U0 built from generator exponentials and words.

    Slot k of Phi carries exp(G_k j_k) V_k where G_k runs through the
    independent generators followed by the repeated ones being conjugated;
    each V_k is a reachable word.  The Jacobian is taken at j = (1,...,1)
    in algebra coordinates, right-translated to the identity.
    """

    gens: object
    basis: object
    s: int
    d: int
    conjugators: list          # ReachableWord, one per conjugated slot
    abar_indices: list         # indices into gens for the repeated generators
    exponent_indices: list     # generator index of each of the d exponential slots
    V: list                    # ReachableWord, one per slot
    U0: np.ndarray
    jacobian: np.ndarray
    jacobian_abs_det: float
    jacobian_residual: float   # worst algebra-membership residual of a tangent column
    local_radius: float
    eps_V: float
    gram_min_eig: float
    _kbar_cache: dict = field(default_factory=dict)

    def phi(self, j) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        X = np.eye(self.gens.n, dtype=complex)
        count = 0
        for k in range(self.d):
            X = X @ matexp(self.gens.generators[self.exponent_indices[k]], j[k]) @ self.V[k].cached_value
            count += 2
            if count % REUNITARIZE_EVERY == 0:
                X = polar_unitary(X)
        return as_unitary(X)

    def jacobian_at(self, j):
        """Columns: algebra coordinates of P_k G_k P_k^{-1}, P_k the prefix of slot k."""
        j = np.asarray(j, dtype=float)
        J = np.zeros((self.basis.d, self.d))
        worst = 0.0
        P = np.eye(self.gens.n, dtype=complex)
        for k in range(self.d):
            G = self.gens.generators[self.exponent_indices[k]]
            coords, resid = project_to_algebra(self.basis, P @ G @ P.conj().T)
            J[:, k] = coords
            worst = max(worst, resid)
            P = P @ matexp(G, j[k]) @ self.V[k].cached_value
        return J, worst

    def word_factors_at(self, j) -> list:
        j = np.asarray(j, dtype=float)
        factors = []
        for k in range(self.d):
            factors.append((self.exponent_indices[k], float(j[k])))
            factors.extend(self.V[k].factors)
        return factors

    def word_at(self, j) -> ReachableWord:
        return ReachableWord(factors=tuple(self.word_factors_at(j)), cached_value=self.phi(j))

    def ensure_kbar(self, rho, budget=DEFAULT_POWER_BUDGET, meter=None) -> int:
        key = float(rho)
        if key not in self._kbar_cache:
            self._kbar_cache[key] = invert_via_powers(self.U0, key, budget=budget, meter=meter)
        return self._kbar_cache[key]


def _random_word_factors(s, rng, max_factors=CONJUGATOR_MAX_FACTORS, time_cap=CONJUGATOR_TIME_CAP):
    k = int(rng.integers(1, max_factors + 1))
    return [(int(rng.integers(0, s)), float(rng.uniform(0.0, time_cap))) for _ in range(k)]


def _recurrence_word_factor(gens, idx, eps, budget, meter):
    """Word factor realizing exp(-A_idx) with a positive time."""
    alpha = positive_time_recurrence(gens.generators[idx], -1.0, eps, budget=budget, meter=meter)
    return (idx, alpha)


def build_chart(gens, basis, eps_V=DEFAULT_EPS_V, seed=0,
                jac_tol=DEFAULT_JAC_TOL,
                conjugator_tries=DEFAULT_CONJUGATOR_TRIES,
                recurrence_budget=DEFAULT_RECURRENCE_BUDGET,
                newton_iters=DEFAULT_NEWTON_ITERS,
                radius_probes=50,
                probe_tol=1e-9,
                meter=None) -> ChartConstruction:
    """Build and validate the local chart around U0 = Phi(1, ..., 1).

    (i) a seeded greedy search over short random reachable words finds
    conjugator/generator pairs whose conjugates extend the generator span
    to a basis of the algebra; (ii) the interleaving words V_k are chosen
    so that, up to realization accuracy ``eps_V``, every tangent direction
    at (1,...,1) collapses onto one basis element; (iii) the Jacobian is
    assembled in algebra coordinates and must clear ``jac_tol``; (iv) the
    chart radius is validated by probing, halving from 0.5 until 50 random
    targets at that distance all solve.
    """
    s = gens.span_dimension
    d = basis.d
    if s < 1:
        raise ValueError("chart needs at least one generator")
    rng = np.random.default_rng(seed)
    A = gens.generators

    span = OrthonormalSpan()
    for a in A:
        span.try_add(a, 1e-12)
    if len(span) != s:
        raise ChartFailure("generators are not independent at chart tolerance")

    basis_candidates = list(A)
    conjugators, abar_indices = [], []
    tries = 0
    while len(span) < d:
        if tries >= conjugator_tries:
            raise ChartFailure(
                f"conjugator search exhausted after {tries} tries with span {len(span)} < {d}"
            )
        factors = _random_word_factors(s, rng)
        tries += 1
        if meter is not None:
            meter.add("conjugator_tries", 1)
        W = word_value(gens, factors)
        found = None
        for ab in range(s):
            C = W @ A[ab] @ W.conj().T
            if span.try_add(C, 0.05):
                found = ab
                basis_candidates.append(C)
                break
        if found is not None:
            conjugators.append(make_word(gens, factors))
            abar_indices.append(found)

    gram = np.array([[float(np.real(np.sum(x.conj() * y))) for y in basis_candidates]
                     for x in basis_candidates])
    gram_min_eig = float(np.linalg.eigvalsh(gram)[0])
    if gram_min_eig <= 1e-6:
        raise ChartFailure(f"candidate basis is ill-conditioned (Gram min eig {gram_min_eig:.3e})")

    # V words; a slot with both a recurrence factor and an inverse word
    # splits its accuracy budget between them.
    exponent_indices = list(range(s)) + list(abar_indices)
    V = []
    if d == s:
        for k in range(s):
            V.append(make_word(gens, [_recurrence_word_factor(gens, k, eps_V, recurrence_budget, meter)]))
    else:
        r = d - s
        for k in range(s - 1):
            V.append(make_word(gens, [_recurrence_word_factor(gens, k, eps_V, recurrence_budget, meter)]))
        V.append(make_word(
            gens,
            [_recurrence_word_factor(gens, s - 1, eps_V, recurrence_budget, meter)]
            + list(conjugators[0].factors),
        ))
        for jj in range(r - 1):
            inv = approx_inverse_word(conjugators[jj], gens, eps_V / 2.0,
                                      budget=recurrence_budget, meter=meter)
            V.append(make_word(
                gens,
                [_recurrence_word_factor(gens, abar_indices[jj], eps_V / 2.0, recurrence_budget, meter)]
                + list(inv.factors) + list(conjugators[jj + 1].factors),
            ))
        inv = approx_inverse_word(conjugators[r - 1], gens, eps_V / 2.0,
                                  budget=recurrence_budget, meter=meter)
        V.append(make_word(
            gens,
            [_recurrence_word_factor(gens, abar_indices[r - 1], eps_V / 2.0, recurrence_budget, meter)]
            + list(inv.factors),
        ))

    chart = ChartConstruction(
        gens=gens, basis=basis, s=s, d=d,
        conjugators=conjugators, abar_indices=abar_indices,
        exponent_indices=exponent_indices, V=V,
        U0=np.eye(gens.n, dtype=complex), jacobian=np.zeros((d, d)),
        jacobian_abs_det=0.0, jacobian_residual=0.0,
        local_radius=0.0, eps_V=eps_V, gram_min_eig=gram_min_eig,
    )
    chart.U0 = chart.phi(np.ones(d))
    chart.jacobian, chart.jacobian_residual = chart.jacobian_at(np.ones(d))
    chart.jacobian_abs_det = float(abs(np.linalg.det(chart.jacobian)))
    if chart.jacobian_abs_det <= jac_tol:
        raise ChartFailure(
            f"Jacobian at (1,...,1) is numerically singular (|det| = {chart.jacobian_abs_det:.3e})"
        )
    chart.local_radius = _probe_local_radius(chart, rng, probes=radius_probes,
                                             probe_tol=probe_tol, newton_iters=newton_iters,
                                             meter=meter)
    return chart


def _probe_local_radius(chart, rng, probes=50, probe_tol=1e-9, newton_iters=DEFAULT_NEWTON_ITERS,
                        meter=None, max_halvings=14) -> float:
    """Largest dyadic radius at which all random probe targets solve."""
    rho = 0.5
    for _ in range(max_halvings):
        ok = True
        for _ in range(probes):
            c = rng.standard_normal(chart.d)
            c *= rho / np.linalg.norm(c)
            xi = np.zeros((chart.gens.n, chart.gens.n), dtype=complex)
            for ck, E in zip(c, chart.basis.elements):
                xi += ck * E
            target = matexp(xi, 1.0) @ chart.U0
            try:
                local_solve(chart, target, probe_tol, max_iters=newton_iters,
                            enforce_radius=False, meter=meter)
            except (NoConvergence, BoundaryHit, BranchCut):
                ok = False
                break
        if ok:
            return rho
        rho /= 2.0
    raise ChartFailure("no probe-validated chart radius found")


def local_solve(chart, target, tol, max_iters=DEFAULT_NEWTON_ITERS,
                enforce_radius=True, meter=None) -> np.ndarray:
    """Damped Newton in chart coordinates; returns j with |Phi(j) - target| < tol.

    Iterates are clipped to the box [0, 2]^d, which keeps every exponent
    time nonnegative.  The residual is the algebra coordinate vector of
    log(target Phi(j)^-1) and the chart Jacobian is recomputed at each
    iterate.
    """
    target = as_unitary(target)
    if enforce_radius and fro_norm(target - chart.U0) > chart.local_radius:
        raise ValueError("target outside the validated chart radius")
    j = np.ones(chart.d)
    Pj = chart.phi(j)
    err = fro_norm(Pj - target)
    for _ in range(max_iters):
        if err < tol:
            return j
        if meter is not None:
            meter.add("newton_iterations", 1)
        residual_vec, _ = project_to_algebra(chart.basis, matlog_unitary(target @ Pj.conj().T))
        J, _ = chart.jacobian_at(j)
        try:
            step = np.linalg.solve(J, residual_vec)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular chart Jacobian during Newton: {exc}") from exc
        lam = 1.0
        improved = False
        while lam >= 1e-14:
            jn = np.clip(j + lam * step, 0.0, 2.0)
            Pn = chart.phi(jn)
            en = fro_norm(Pn - target)
            if en < err:
                j, Pj, err = jn, Pn, en
                improved = True
                break
            lam *= 0.5
        if not improved:
            if np.any(j <= 0.0):
                raise BoundaryHit(
                    f"nonnegativity bound binding with error {err:.3e} > tol {tol:.3e}"
                )
            raise NoConvergence(f"Newton stagnated at error {err:.3e} > tol {tol:.3e}")
    if err < tol:
        return j
    raise NoConvergence(f"Newton used {max_iters} iterations, error {err:.3e} > tol {tol:.3e}")


# ---------------------------------------------------------------------------
# Powers, identity neighborhood, global continuation


def invert_via_powers(U0, eps, budget=DEFAULT_POWER_BUDGET, meter=None) -> int:
    """Smallest k with |U0^k - U0^-1|_F < eps/2, by incremental powering."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    U0 = as_unitary(U0)
    Uinv = U0.conj().T
    P = U0.copy()
    best_k, best_err = None, math.inf
    for k in range(1, budget + 1):
        err = fro_norm(P - Uinv)
        if meter is not None:
            meter.add("power_iterations", 1)
        if err < best_err:
            best_k, best_err = k, err
        if err < eps / 2.0:
            return k
        P = P @ U0
        if k % REUNITARIZE_EVERY == 0:
            P = polar_unitary(P)
    raise BudgetExceeded(
        f"power inversion exhausted {budget} iterations (best error {best_err:.3e} at k={best_k})",
        best=best_k,
        best_error=best_err,
        tried=budget,
    )


def _unitary_power(U, k) -> np.ndarray:
    P = np.eye(U.shape[0], dtype=complex)
    for i in range(1, k + 1):
        P = P @ U
        if i % REUNITARIZE_EVERY == 0:
            P = polar_unitary(P)
    return P


def reach_near_identity(chart, gens, F, eps, power_budget=DEFAULT_POWER_BUDGET,
                        newton_iters=DEFAULT_NEWTON_ITERS, safety=DEFAULT_SAFETY,
                        meter=None) -> ReachableWord:
    """Word within eps of a target F close to the identity.

    Writes F = U0^kbar X with |U0^kbar - U0^-1| < rho/2; the triangle
    inequality then puts X within rho of U0, inside the validated chart,
    and the word is the U0 word repeated kbar times followed by the chart
    word at the solved coordinates.
    """
    n = gens.n
    eye = np.eye(n, dtype=complex)
    rho = chart.local_radius * safety
    if fro_norm(F - eye) >= rho / 2.0:
        raise ValueError("target is not within rho/2 of the identity")
    kbar = chart.ensure_kbar(rho, budget=power_budget, meter=meter)
    X = _unitary_power(chart.U0.conj().T, kbar) @ F
    j = local_solve(chart, X, eps, max_iters=newton_iters, meter=meter)
    u0_factors = chart.word_factors_at(np.ones(chart.d))
    factors = u0_factors * kbar + chart.word_factors_at(j)
    value = _unitary_power(chart.U0, kbar) @ chart.phi(j)
    return ReachableWord(factors=tuple(factors), cached_value=value)


def _branch_safe_sqrt(basis, U, membership_tol, branch_tol=BRANCH_TOL):
    """Square root by halved eigenphases, certified to stay in the algebra.

    Eigenvalues at the branch cut leave the halving sign ambiguous; the
    sign pattern is searched so that the log of the root projects into the
    algebra (e.g. -I in SU(2) needs phases (+pi/2, -pi/2), not the raw
    principal choice).
    """
    import scipy.linalg

    T, Z = scipy.linalg.schur(as_unitary(U), output="complex")
    phases = np.angle(np.diag(T))
    cut = [k for k in range(len(phases)) if math.pi - abs(phases[k]) < branch_tol]
    if len(cut) > 12:
        raise MembershipRejected("too many branch-cut eigenvalues to disambiguate")
    best_resid = math.inf
    for pattern in itertools.product((1.0, -1.0), repeat=len(cut)):
        half = phases / 2.0
        for k, sign in zip(cut, pattern):
            half[k] = sign * abs(phases[k]) / 2.0
        L = (Z * (1j * half)) @ Z.conj().T
        L = (L - L.conj().T) / 2.0
        _, resid = project_to_algebra(basis, L)
        if resid <= membership_tol * max(1.0, fro_norm(L)):
            return polar_unitary((Z * np.exp(1j * half)) @ Z.conj().T)
        best_resid = min(best_resid, resid)
    raise MembershipRejected(
        f"no square-root branch lies in the algebra (best residual {best_resid:.3e})",
        residual=best_resid,
    )


def certify_membership(basis, target, membership_tol=DEFAULT_MEMBERSHIP_TOL, max_splits=6):
    """Certify target in the connected group of the algebra via its log.

    Returns ``(S, reps, L, residual)`` with ``S^reps = target`` (up to
    branch tolerance), ``L = log S`` certified inside the algebra.  Branch
    cuts are handled by repeated square-root splitting, at most
    ``max_splits`` times.
    """
    S = as_unitary(target)
    reps = 1
    for _ in range(max_splits + 1):
        try:
            L = matlog_unitary(S)
        except BranchCut:
            S = _branch_safe_sqrt(basis, S, membership_tol)
            reps *= 2
            continue
        _, resid = project_to_algebra(basis, L)
        if resid <= membership_tol * max(1.0, fro_norm(L)):
            return S, reps, L, resid
        raise MembershipRejected(
            f"log-coordinates residual {resid:.3e} exceeds membership tolerance",
            residual=resid,
        )
    raise MembershipRejected(f"branch-cut splitting exhausted after {max_splits} splits")


@dataclass
class SynthesisResult:
    target: np.ndarray
    achieved: np.ndarray
    program: ControlProgram
    error: float
    steps: int
    budget_spent: dict


def synthesize(model, gens, basis, chart, target, eps=1e-6,
               power_budget=DEFAULT_POWER_BUDGET,
               newton_iters=DEFAULT_NEWTON_ITERS,
               membership_tol=DEFAULT_MEMBERSHIP_TOL,
               safety=DEFAULT_SAFETY,
               max_splits=6,
               meter=None) -> SynthesisResult:
    """Control program reaching any certified target in the connected group.

    The certified log is split into the fewest identity-neighborhood steps
    that fit the chart (the group is connected, so the one-parameter path
    stays inside), each step is realized by :func:`reach_near_identity`,
    and the concatenation is converted to a program and re-verified by
    propagation.  Per-step accuracy is eps / (2 * steps) so the aggregate
    error stays below eps.
    """
    if meter is None:
        meter = BudgetMeter()
    n = model.n
    eye = np.eye(n, dtype=complex)
    target = as_unitary(target)

    direct = fro_norm(target - eye)
    if direct < eps:
        program = ControlProgram(segments=[])
        achieved = propagate_program(model, program)
        return SynthesisResult(target=target, achieved=achieved, program=program,
                               error=fro_norm(achieved - target), steps=0,
                               budget_spent=meter.snapshot())

    S, reps, L, _ = certify_membership(basis, target, membership_tol, max_splits)
    theta_L, _ = skew_eigensystem(L)
    rho = chart.local_radius * safety
    N = 1
    while _phase_error(theta_L, 1.0 / N) >= rho / 2.0:
        N += 1
        if N > 10 ** 6:
            raise NoConvergence("path splitting failed to fit the chart radius")
    total_steps = N * reps
    eps_step = eps / (2.0 * total_steps)

    step_target = matexp(L, 1.0 / N)
    step_word = reach_near_identity(chart, gens, step_target, eps_step,
                                    power_budget=power_budget, newton_iters=newton_iters,
                                    safety=safety, meter=meter)
    factors = list(step_word.factors) * total_steps
    value = _unitary_power(step_word.cached_value, total_steps)
    word = ReachableWord(factors=tuple(factors), cached_value=value)

    program = word_to_program(word, gens)
    achieved = propagate_program(model, program)
    return SynthesisResult(
        target=target,
        achieved=achieved,
        program=program,
        error=fro_norm(achieved - target),
        steps=total_steps,
        budget_spent=meter.snapshot(),
    )


# ---------------------------------------------------------------------------
# Density of the reachable set


def sample_random_endpoints(model, controls, count, horizon, rng, segment_cap=16) -> np.ndarray:
    """Endpoints of seeded random programs, batched.

    Draws are per-program in a fixed order, so for one generator state the
    first k programs of a longer run coincide with a shorter run: sample
    sets grow monotonically with count.
    """
    m = model.m
    n = model.n
    counts = np.empty(count, dtype=int)
    ctrl_parts, tau_parts = [], []
    pts = np.asarray(controls.points, dtype=float) if controls.kind == "finite" else None
    for i in range(count):
        k = int(rng.integers(1, segment_cap + 1))
        counts[i] = k
        if controls.kind == "box":
            ctrl_parts.append(rng.uniform(controls.lower, controls.upper, size=(k, m)))
        else:
            ctrl_parts.append(pts[rng.integers(0, len(pts), size=k)])
        tau_parts.append(rng.uniform(0.0, horizon, size=k) if horizon > 0 else np.zeros(k))
    U = np.vstack(ctrl_parts)
    taus = np.concatenate(tau_parts)

    H = evaluate_model_batch(model, U)
    lam, V = np.linalg.eigh(H)
    phases = np.exp(-1j * lam * taus[:, None])
    segs = np.einsum("kij,kj,klj->kil", V, phases, V.conj())

    ends = np.broadcast_to(np.eye(n, dtype=complex), (count, n, n)).copy()
    offsets = np.concatenate([[0], np.cumsum(counts)])
    for pos in range(segment_cap):
        alive = np.nonzero(counts > pos)[0]
        if alive.size == 0:
            break
        rows = offsets[alive] + pos
        ends[alive] = np.einsum("kij,kjl->kil", segs[rows], ends[alive])
    return ends


def density_sampler(model, controls, basis, num_samples, horizon, seed,
                    num_probes=100, segment_cap=16) -> dict:
    """Covering statistics of random programs against probe targets.

    Probes are drawn in the group of the algebra from a stream independent
    of the sample stream, so the same seed compares fairly across sample
    counts.  Reports min/mean/max over probes of the Frobenius distance to
    the nearest sample endpoint.
    """
    if num_samples < 1:
        raise ValueError("need at least one sample")
    ss = np.random.SeedSequence(seed)
    rng_samples, rng_probes = [np.random.default_rng(c) for c in ss.spawn(2)]

    ends = sample_random_endpoints(model, controls, num_samples, horizon, rng_samples,
                                   segment_cap=segment_cap)
    n = model.n
    flat = ends.reshape(num_samples, n * n)

    nearest = np.empty(num_probes)
    for i in range(num_probes):
        c = rng_probes.standard_normal(basis.d)
        xi = np.zeros((n, n), dtype=complex)
        for ck, E in zip(c, basis.elements):
            xi += ck * E
        probe = matexp(xi, 1.0).reshape(n * n)
        nearest[i] = float(np.min(np.linalg.norm(flat - probe, axis=1)))

    return {
        "num_samples": int(num_samples),
        "num_probes": int(num_probes),
        "segment_cap": int(segment_cap),
        "horizon": float(horizon),
        "seed": int(seed),
        "min_distance": float(np.min(nearest)),
        "mean_distance": float(np.mean(nearest)),
        "max_distance": float(np.max(nearest)),
    }
