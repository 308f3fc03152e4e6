"""Dense complex-matrix kernels and Frobenius geometry.

All values are plain ``numpy`` arrays of complex128; the ``as_*`` helpers
are the constructors that enforce the class invariants (unitary within
tolerance, Hermitian / skew-Hermitian within tolerance).  Everything here
is a pure function of its inputs, so values are safe to share across
threads.

Exponentials and logarithms go through the unitary eigendecomposition
rather than scaling-and-squaring: the eigenphases are needed directly by
the positive-time recurrence search, and re-unitarizing the result is
exact by construction.
"""

import math

import numpy as np
import scipy.linalg

from .errors import BranchCut, EigendecompositionError, InvariantViolation
from .jsonutil import load_json, write_json

# Dimensions beyond this are out of scope (dense kernels only).
MAX_DIM = 64

UNITARY_TOL = 1e-10          # * n, acceptance defect for U+U - I
UNITARY_REPAIR_TOL = 1e-6    # * n, polar projection applies below this
HERMITIAN_TOL = 1e-12        # * max(1, |A|_F)
BRANCH_TOL = 1e-8            # angular distance to the -1 eigenvalue
REUNITARIZE_EVERY = 32       # factors between polar projections in long products


def require_square(M) -> np.ndarray:
    """Validate and return *M* as a finite square complex matrix."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {A.shape[0]} outside supported range 1..{MAX_DIM}")
    if not np.all(np.isfinite(A.view(float))):
        raise ValueError("matrix contains non-finite entries")
    return A


def fro_norm(A) -> float:
    return float(np.linalg.norm(A))


def frobenius_inner(A, B) -> float:
    """Real inner product Re tr(A+ B) making u(n) a real Euclidean space."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return float(np.real(np.sum(A.conj() * B)))


def check_hermitian(H, tol=HERMITIAN_TOL) -> np.ndarray:
    H = require_square(H)
    defect = fro_norm(H - H.conj().T)
    if defect > tol * max(1.0, fro_norm(H)):
        raise InvariantViolation(f"matrix is not Hermitian (defect {defect:.3e})")
    return H


def check_skew_hermitian(A, tol=HERMITIAN_TOL) -> np.ndarray:
    A = require_square(A)
    defect = fro_norm(A + A.conj().T)
    if defect > tol * max(1.0, fro_norm(A)):
        raise InvariantViolation(f"matrix is not skew-Hermitian (defect {defect:.3e})")
    return A


def polar_unitary(M) -> np.ndarray:
    """Closest unitary to *M* (unitary factor of the polar decomposition)."""
    W, _, Vh = np.linalg.svd(M)
    return W @ Vh


def as_unitary(U, tol=UNITARY_TOL, repair_tol=UNITARY_REPAIR_TOL) -> np.ndarray:
    """Accept *U* as unitary, re-unitarizing small drift, rejecting large.

    Defect |U+U - I|_F up to ``tol * n`` is accepted as-is, up to
    ``repair_tol * n`` is repaired by polar projection, anything larger is
    rejected.
    """
    U = require_square(U)
    n = U.shape[0]
    defect = fro_norm(U.conj().T @ U - np.eye(n))
    if defect <= tol * n:
        return U
    if defect <= repair_tol * n:
        return polar_unitary(U)
    raise InvariantViolation(f"matrix is not unitary (defect {defect:.3e} > {repair_tol * n:.3e})")


def skew_eigensystem(A, tol=HERMITIAN_TOL):
    """Eigenphases and eigenvectors of a skew-Hermitian matrix.

    Returns ``(theta, V)`` with ``A = V diag(i theta) V+`` and theta real
    ascending.
    """
    A = check_skew_hermitian(A, tol=tol)
    try:
        theta, V = np.linalg.eigh(-1j * A)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(f"eigh failed on skew-Hermitian input: {exc}") from exc
    return theta, V


def matexp(A, t=1.0, tol=HERMITIAN_TOL) -> np.ndarray:
    """exp(A t) for skew-Hermitian A, exactly re-unitarized.

    Negative t is fine here; nonnegativity of durations is a property of
    control programs, not of this kernel.
    """
    theta, V = skew_eigensystem(A, tol=tol)
    U = (V * np.exp(1j * theta * t)) @ V.conj().T
    return polar_unitary(U)


def matlog_unitary(U, branch_tol=BRANCH_TOL) -> np.ndarray:
    """Principal logarithm of a unitary, skew-Hermitian with phases in (-pi, pi).

    Raises :class:`BranchCut` when an eigenvalue sits within ``branch_tol``
    (angular) of -1; callers must split the target instead.
    """
    U = as_unitary(U)
    try:
        T, Z = scipy.linalg.schur(U, output="complex")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:  # pragma: no cover
        raise EigendecompositionError(f"schur failed on unitary input: {exc}") from exc
    phases = np.angle(np.diag(T))
    if np.min(np.pi - np.abs(phases)) < branch_tol:
        raise BranchCut("eigenvalue within tolerance of -1; principal log undefined")
    L = (Z * (1j * phases)) @ Z.conj().T
    return (L - L.conj().T) / 2.0


def unitary_sqrt(U, branch_tol=BRANCH_TOL) -> np.ndarray:
    """Square root of a unitary by halving its eigenphases.

    Eigenvalues at the branch cut are halved toward +pi/2; the result is
    always branch-safe (its phases lie in (-pi/2, pi/2]).
    """
    U = as_unitary(U)
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.angle(np.diag(T))
    S = (Z * np.exp(1j * phases / 2.0)) @ Z.conj().T
    return polar_unitary(S)


def haar_unitary(n, rng) -> np.ndarray:
    """Haar-distributed element of U(n) (Ginibre + QR with phase fix)."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def haar_special_unitary(n, rng) -> np.ndarray:
    U = haar_unitary(n, rng)
    det = np.linalg.det(U)
    return U * det ** (-1.0 / n)


class OrthonormalSpan:
    """Incrementally grown orthonormal set under the Frobenius inner product.

    Modified Gram-Schmidt with one re-orthogonalization pass; a candidate
    whose residual after projection stays below ``rel_tol`` times its norm
    does not enlarge the span and is rejected.  Rank decisions everywhere
    in the toolkit go through this class so they share one tolerance
    convention.
    """

    def __init__(self):
        self.elements = []

    def __len__(self):
        return len(self.elements)

    @property
    def dimension(self):
        return len(self.elements)

    def coordinates(self, M) -> np.ndarray:
        return np.array([frobenius_inner(E, M) for E in self.elements])

    def project(self, M):
        """Coordinates of *M* on the span and the Frobenius residual."""
        coords = self.coordinates(M)
        R = M.astype(complex, copy=True)
        for c, E in zip(coords, self.elements):
            R -= c * E
        return coords, fro_norm(R)

    def _orthogonalize(self, M) -> np.ndarray:
        R = M.astype(complex, copy=True)
        for _ in range(2):  # MGS + re-orthogonalization
            for E in self.elements:
                R -= frobenius_inner(E, R) * E
        return R

    def residual_norm(self, M) -> float:
        return fro_norm(self._orthogonalize(M))

    def try_add(self, M, rel_tol) -> bool:
        """Add the new direction of *M* if it enlarges the span."""
        nrm = fro_norm(M)
        if nrm == 0.0:
            return False
        R = self._orthogonalize(M)
        r = fro_norm(R)
        if r <= rel_tol * nrm:
            return False
        self.elements.append(R / r)
        return True


# ---------------------------------------------------------------------------
# Matrix file format: {"n": int, "entries": [[[re, im], ...], ...]} row-major.

def matrix_to_obj(M) -> dict:
    M = require_square(M)
    n = M.shape[0]
    entries = [[[float(M[i, j].real), float(M[i, j].imag)] for j in range(n)] for i in range(n)]
    return {"n": n, "entries": entries}


def matrix_from_obj(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "n" not in obj or "entries" not in obj:
        raise ValueError('matrix object must have "n" and "entries" fields')
    n = obj["n"]
    if not isinstance(n, int) or n < 1 or n > MAX_DIM:
        raise ValueError(f'invalid matrix dimension "n": {n!r}')
    entries = obj["entries"]
    if len(entries) != n or any(len(row) != n for row in entries):
        raise ValueError("entries are not an n x n table")
    M = np.empty((n, n), dtype=complex)
    for i, row in enumerate(entries):
        for j, pair in enumerate(row):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ValueError(f"entry ({i},{j}) is not a [re, im] pair")
            re, im = pair
            M[i, j] = complex(float(re), float(im))
    if not np.all(np.isfinite(M.view(float))):
        raise ValueError("matrix contains non-finite entries")
    return M


def write_matrix(path, M) -> None:
    write_json(path, matrix_to_obj(M))


def read_matrix(path) -> np.ndarray:
    return matrix_from_obj(load_json(path))
