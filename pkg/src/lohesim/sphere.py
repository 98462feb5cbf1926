"""Linear algebra on C^d and the unit Hermitian sphere.

States are plain complex128 numpy arrays: one vector is shape ``(d,)``, an
ensemble of N particles is shape ``(N, d)``. The inner product is linear in the
second slot and conjugate-linear in the first, ``<w, z> = sum(conj(w) * z)``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .validation import (
    NORM_TOL,
    ValidationError,
    check_adjacency,
    check_scalar,
    check_skew_hermitian,
    check_states,
    check_vector,
)

MAX_RETRIES = 1000


def inner(w, z):
    """Sesquilinear inner product ``sum_a conj(w_a) z_a``.

    Both arguments may be batched along leading axes; the sum runs over the
    last axis only. Shapes must agree.
    """
    w = np.asarray(w, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    if w.shape != z.shape:
        raise ValidationError(f"dimension mismatch: {w.shape} vs {z.shape}")
    return np.sum(w.conj() * z, axis=-1)


def norm(z):
    return np.linalg.norm(np.asarray(z, dtype=np.complex128), axis=-1)


def gram(Z, W=None):
    """Gram matrix ``G[i, j] = <Z_i, W_j>`` (``W`` defaults to ``Z``)."""
    Z = np.asarray(Z)
    W = Z if W is None else np.asarray(W)
    return Z.conj() @ W.T


def frobenius_apply_bound(A, v):
    """Return ``(||A v||, ||A||_F ||v||)``; the first never exceeds the second."""
    A = np.asarray(A, dtype=np.complex128)
    v = check_vector(v)
    if A.ndim != 2 or A.shape[1] != v.shape[0]:
        raise ValidationError(f"cannot apply a {A.shape} matrix to a vector of length {v.shape[0]}")
    return float(np.linalg.norm(A @ v)), float(np.linalg.norm(A, "fro") * np.linalg.norm(v))


def inf_norm(M):
    """Operator infinity-norm: maximum absolute row sum."""
    M = np.asarray(M)
    return float(np.abs(M).sum(axis=-1).max()) if M.size else 0.0


def omega_diameter(omegas):
    """``max_{i,j} ||O_i - O_j||_inf`` over a stack of free-flow matrices."""
    omegas = np.asarray(omegas)
    diff = omegas[:, None, :, :] - omegas[None, :, :, :]
    return float(np.abs(diff).sum(axis=-1).max()) if len(omegas) else 0.0


def adjacency_max(A):
    """``||A||_inf`` in the entrywise sense used for network bounds: ``max a_ij``."""
    return float(np.max(A))


def adjacency_diameter(A):
    """Row-spread of the coupling matrix, ``max_{i,j} max_k |a_ik - a_jk|``."""
    A = np.asarray(A, dtype=float)
    return float(np.abs(A[:, None, :] - A[None, :, :]).max())


def random_skew_hermitian(rng, d, scale=1.0, *, real=False):
    """Draw a skew-Hermitian matrix and rescale it to ``||O||_inf == scale``.

    Entries of B are uniform on the unit square of C (or on [0, 1] when
    ``real``); ``(B - B^H) / 2`` is skew-Hermitian by construction.
    """
    B = rng.uniform(size=(d, d))
    if not real:
        B = B + 1j * rng.uniform(size=(d, d))
    omega = (B - B.conj().T) / 2
    n = inf_norm(omega)
    if n == 0.0:
        return np.zeros((d, d), dtype=np.complex128)
    return (omega * (scale / n)).astype(np.complex128)


def rotation_generator(nu):
    """2x2 real rotation generator ``[[0, -nu], [nu, 0]]``."""
    return np.array([[0.0, -nu], [nu, 0.0]], dtype=np.complex128)


def complete_adjacency(N):
    return np.ones((N, N))


def ring_with_chords(N, base=1.0, ring=0.3, chord=0.15, diagonal=None):
    """Weighted ring plus antipodal chords on top of a uniform all-to-all weight.

    ``a_jk = base + ring`` for ring neighbours, ``base + chord`` for the
    antipodal partner(s) ``k = j + N // 2``, ``base`` otherwise. The diagonal
    defaults to ``base``.
    """
    A = np.full((N, N), float(base))
    for j in range(N):
        A[j, (j + 1) % N] = A[(j + 1) % N, j] = base + ring
    if N >= 4:
        for j in range(N):
            k = (j + N // 2) % N
            if k not in ((j + 1) % N, (j - 1) % N):
                A[j, k] = A[k, j] = base + chord
    np.fill_diagonal(A, base if diagonal is None else diagonal)
    return A


@dataclass(frozen=True)
class Ensemble:
    """N particle states on the Hermitian unit sphere at a given time."""

    time: float
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        Z = check_states(self.states, norm_tol=None)
        Z.setflags(write=False)
        object.__setattr__(self, "states", Z)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def on_sphere(cls, states, time=0.0, norm_tol=NORM_TOL):
        """Construct and require every state to be unit-norm within ``norm_tol``."""
        return cls(time, check_states(states, norm_tol=norm_tol))

    @property
    def N(self):
        return self.states.shape[0]

    @property
    def d(self):
        return self.states.shape[1]

    def norm_deviation(self):
        return float(np.abs(norm(self.states) - 1.0).max())


def _random_unit(rng, d, real):
    v = rng.standard_normal(d)
    if not real:
        v = v + 1j * rng.standard_normal(d)
    return (v / np.linalg.norm(v)).astype(np.complex128)


def _diameter(Z):
    return float(np.linalg.norm(Z[:, None, :] - Z[None, :, :], axis=-1).max())


def random_ensemble(seed, N, d, spread, *, real=False, time=0.0):
    """Seeded unit-norm ensemble whose diameter does not exceed ``spread``.

    A base point is perturbed inside a ball of radius ``0.45 * spread`` and
    each perturbed point is projected back to the sphere; whole draws whose
    diameter still exceeds ``spread`` are rejected.
    """
    N = int(N)
    d = int(d)
    if N < 1 or d < 1:
        raise ValidationError(f"need N >= 1 and d >= 1, got N={N}, d={d}")
    spread = check_scalar(spread, "spread", min_val=0.0, max_val=2.0)
    rng = np.random.default_rng(seed)
    base = _random_unit(rng, d, real)
    if spread == 0.0:
        return Ensemble(time, np.tile(base, (N, 1)))
    if spread >= 2.0:
        return Ensemble(time, np.array([_random_unit(rng, d, real) for _ in range(N)]))
    radius = 0.45 * spread
    dim = d if real else 2 * d
    for _ in range(MAX_RETRIES):
        dirs = np.array([_random_unit(rng, d, real) for _ in range(N)])
        r = radius * rng.uniform(size=(N, 1)) ** (1.0 / dim)
        Z = base + r * dirs
        Z /= np.linalg.norm(Z, axis=1, keepdims=True)
        if _diameter(Z) <= spread:
            return Ensemble(time, Z)
    raise ValidationError(f"could not draw an ensemble with diameter <= {spread} in {MAX_RETRIES} tries")


def _max_gram_defect(Z):
    G = gram(Z)
    return float(np.abs(1.0 - G).max())


def ensemble_with_gram_defect(seed, N, d, target, *, real=False, time=0.0):
    """Seeded ensemble with ``max_{i,j} |1 - <z_i, z_j>|`` equal to ``target``.

    Fixed random directions are scaled by a common factor that is solved for
    with Brent's method, so the result is deterministic for a given seed.
    """
    target = check_scalar(target, "target", min_val=0.0, max_val=1.9)
    rng = np.random.default_rng(seed)
    base = _random_unit(rng, d, real)
    dirs = np.array([_random_unit(rng, d, real) for _ in range(N)])
    if target == 0.0 or N == 1:
        return Ensemble(time, np.tile(base, (N, 1)))

    def build(s):
        Z = base + s * dirs
        return Z / np.linalg.norm(Z, axis=1, keepdims=True)

    hi = 0.1
    while _max_gram_defect(build(hi)) < target:
        hi *= 2.0
        if hi > 1e6:
            raise ValidationError(f"gram defect {target} unreachable for this draw")
    s = brentq(lambda s: _max_gram_defect(build(s)) - target, 0.0, hi, xtol=1e-15, rtol=1e-15)
    return Ensemble(time, build(s))


def check_omegas(omegas, N, d):
    """Normalize a free-flow specification into an ``(N, d, d)`` complex stack.

    ``None``/"zero" gives zero flows; a single ``(d, d)`` matrix is shared by
    every particle; otherwise one matrix per particle is expected.
    """
    if omegas is None or (isinstance(omegas, str) and omegas == "zero"):
        return np.zeros((N, d, d), dtype=np.complex128)
    arr = np.asarray(omegas, dtype=np.complex128)
    if arr.ndim == 2:
        check_skew_hermitian(arr, d)
        return np.broadcast_to(arr, (N, d, d)).copy()
    if arr.ndim != 3 or arr.shape[0] != N:
        raise ValidationError(f"expected {N} free-flow matrices, got array of shape {arr.shape}")
    for om in arr:
        check_skew_hermitian(om, d)
    return arr.copy()


def resolve_adjacency(adjacency, N):
    if adjacency is None or (isinstance(adjacency, str) and adjacency == "complete"):
        return complete_adjacency(N)
    return check_adjacency(adjacency, N)
