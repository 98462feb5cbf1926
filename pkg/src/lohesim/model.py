"""Right-hand sides of the delayed Lohe Hermitian sphere system and its reductions.

All evaluators take the current states ``Z`` and the tau-delayed states ``W``
as ``(N, d)`` arrays (or :class:`~lohesim.sphere.Ensemble` objects) and return
the time derivative with the same shape. Coupling sums skip the diagonal
``k == j`` exactly as in the model; the diagonal of the adjacency is still
kept because the network constants in :mod:`lohesim.theorems` use it.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .sphere import Ensemble, check_omegas, resolve_adjacency
from .validation import ValidationError, check_same_shape, check_scalar

FORMS = ("general", "sl", "close_sl", "ls_real", "kuramoto")
REAL_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Validated model parameters.

    ``omegas`` is always materialized as an ``(N, d, d)`` stack and
    ``adjacency`` as an ``(N, N)`` array; use :meth:`build` to expand the
    "zero"/"complete" shorthands.
    """

    kappa0: float
    kappa1: float
    tau: float
    omegas: np.ndarray = field(repr=False)
    adjacency: np.ndarray = field(repr=False)
    form: str = "general"

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValidationError(f"unknown model form {self.form!r}; expected one of {FORMS}")
        check_scalar(self.kappa0, "kappa0")
        check_scalar(self.kappa1, "kappa1")
        check_scalar(self.tau, "tau", min_val=0.0)
        N, d = self.N, self.d
        if self.adjacency.shape != (N, N):
            raise ValidationError(f"adjacency shape {self.adjacency.shape} does not match N={N}")
        # kappa0 != 0 keeps the sl endpoint meaningful; the exact relation is enforced in build()
        if self.form == "sl" and self.kappa1 != -self.kappa0 / 2:
            raise ValidationError("form 'sl' requires kappa1 == -kappa0/2")
        if self.form == "ls_real" and np.abs(self.omegas.imag).max(initial=0.0) > 0:
            raise ValidationError("form 'ls_real' requires real skew-symmetric free flows")
        if self.form == "kuramoto":
            if d != 2:
                raise ValidationError("form 'kuramoto' requires d == 2")
            om = self.omegas
            shaped = (
                np.all(om.imag == 0)
                and np.all(om[:, 0, 0] == 0)
                and np.all(om[:, 1, 1] == 0)
                and np.allclose(om[:, 0, 1], -om[:, 1, 0], rtol=0, atol=1e-15)
            )
            if not shaped:
                raise ValidationError("form 'kuramoto' requires rotation generators [[0,-nu],[nu,0]]")
        for arr in (self.omegas, self.adjacency):
            arr.setflags(write=False)

    @classmethod
    def build(cls, N, d, kappa0, kappa1=None, tau=0.0, omegas=None, adjacency=None,
              form="general", kappa_tilde=None):
        """Construct parameters, deriving ``kappa1`` for the sl and close_sl forms."""
        kappa0 = check_scalar(kappa0, "kappa0")
        if form == "sl":
            if kappa1 is not None and kappa1 != -kappa0 / 2:
                raise ValidationError(f"form 'sl' needs kappa1 = -kappa0/2 = {-kappa0 / 2}, got {kappa1}")
            kappa1 = -kappa0 / 2
        elif form == "close_sl" and kappa_tilde is not None:
            kappa1 = check_scalar(kappa_tilde, "kappa_tilde") - kappa0 / 2
        if kappa1 is None:
            kappa1 = 0.0
        return cls(
            kappa0=kappa0,
            kappa1=float(kappa1),
            tau=float(tau),
            omegas=check_omegas(omegas, int(N), int(d)),
            adjacency=resolve_adjacency(adjacency, int(N)),
            form=form,
        )

    @property
    def N(self):
        return self.omegas.shape[0]

    @property
    def d(self):
        return self.omegas.shape[1]

    @property
    def kappa_tilde(self):
        return tilde_kappa(self)

    @property
    def is_complete(self):
        return bool(np.all(self.adjacency == 1.0))

    @property
    def has_zero_flow(self):
        return not np.any(self.omegas)

    @property
    def has_common_flow(self):
        return bool(np.all(self.omegas == self.omegas[0]))

    @property
    def frequencies(self):
        """Kuramoto natural frequencies read off rotation-shaped free flows."""
        return self.omegas[:, 1, 0].real.copy()

    @cached_property
    def coupling(self):
        """Adjacency with the diagonal removed (sums skip ``k == j``)."""
        A = _offdiag(self.adjacency)
        A.setflags(write=False)
        return A

    @cached_property
    def _flow_active(self):
        return bool(np.any(self.omegas))

    def with_(self, **changes):
        return replace(self, **changes)


def tilde_kappa(p):
    """Distance of the gain pair from the Stuart-Landau pair, ``kappa0/2 + kappa1``."""
    return p.kappa0 / 2 + p.kappa1


def _states(x):
    return x.states if isinstance(x, Ensemble) else np.asarray(x)


def _prepare(current, delayed, p):
    Z = _states(current)
    W = _states(delayed)
    check_same_shape(Z, W)
    if Z.shape != (p.N, p.d):
        raise ValidationError(f"ensemble shape {Z.shape} does not match parameters (N={p.N}, d={p.d})")
    return Z, W


def _offdiag(A):
    A = np.array(A, dtype=float)
    np.fill_diagonal(A, 0.0)
    return A


def _free_flow(p, Z):
    if not p._flow_active:
        return 0.0
    return np.einsum("jab,jb->ja", p.omegas, Z)


def _require(p, form):
    forms = (form,) if isinstance(form, str) else form
    if p.form not in forms:
        raise ValidationError(f"this right-hand side needs form {forms}, params have {p.form!r}")


def _require_sl_setting(p):
    if not p.is_complete or not p.has_zero_flow:
        raise ValidationError("the SL reformulations assume a complete graph and zero free flow")


def rhs_general(current, delayed, p):
    """Full model with free flow, weighted network and both coupling gains.

    ``M[j, k] = <w_k, z_j>`` holds the delayed cross Gram entries; the kappa1
    bracket ``<z_j, w_k> - <w_k, z_j>`` is ``conj(M) - M``.
    """
    Z, W = _prepare(current, delayed, p)
    Z = Z.astype(np.complex128, copy=False)
    A = p.coupling
    M = Z @ W.conj().T
    nz = np.einsum("ja,ja->j", Z.conj(), Z).real
    pull = A @ W
    kappa0_term = nz[:, None] * pull - (A * M).sum(axis=1)[:, None] * Z
    kappa1_term = (A * (M.conj() - M)).sum(axis=1)[:, None] * Z
    return _free_flow(p, Z) + (p.kappa0 / p.N) * kappa0_term + (p.kappa1 / p.N) * kappa1_term


def rhs_sl(current, delayed, p):
    """Stuart-Landau pair: ``(kappa0/N) sum_k (w_k - Re<w_k, z_j> z_j)``."""
    _require(p, "sl")
    _require_sl_setting(p)
    Z, W = _prepare(current, delayed, p)
    A = p.coupling
    M = Z @ W.conj().T
    return (p.kappa0 / p.N) * (A @ W - (A * M.real).sum(axis=1)[:, None] * Z)


def rhs_close_sl(current, delayed, p):
    """Close-to-SL reparameterization in terms of ``kappa0`` and ``kappa_tilde``."""
    _require(p, ("close_sl", "sl"))
    _require_sl_setting(p)
    Z, W = _prepare(current, delayed, p)
    A = p.coupling
    M = Z @ W.conj().T
    nz = np.einsum("ja,ja->j", Z.conj(), Z).real
    sl_part = nz[:, None] * (A @ W) - (A * M.real).sum(axis=1)[:, None] * Z
    twist = (A * (M.conj() - M)).sum(axis=1)[:, None] * Z
    return (p.kappa0 / p.N) * sl_part + (tilde_kappa(p) / p.N) * twist


def rhs_ls_real(current, delayed, p):
    """Real Lohe sphere model; inputs must be real to within ``1e-9``."""
    Z, W = _prepare(current, delayed, p)
    for name, arr in (("current", Z), ("delayed", W)):
        if np.iscomplexobj(arr) and np.abs(arr.imag).max(initial=0.0) > REAL_TOL:
            raise ValidationError(f"{name} states are not real-valued")
    if np.abs(p.omegas.imag).max(initial=0.0) > 0:
        raise ValidationError("free flows must be real skew-symmetric")
    X = np.real(Z).astype(float)
    Y = np.real(W).astype(float)
    A = p.coupling
    M = X @ Y.T
    nx = np.einsum("ja,ja->j", X, X)
    flow = np.einsum("jab,jb->ja", p.omegas.real, X)
    return flow + (p.kappa0 / p.N) * (nx[:, None] * (A @ Y) - (A * M).sum(axis=1)[:, None] * X)


def rhs_kuramoto(theta, theta_delayed, p):
    """Phase model ``nu_j + (kappa0/N) sum_k a_jk sin(theta_k^tau - theta_j)``."""
    _require(p, "kuramoto")
    theta = np.asarray(theta, dtype=float)
    theta_delayed = np.asarray(theta_delayed, dtype=float)
    if theta.shape != (p.N,) or theta_delayed.shape != (p.N,):
        raise ValidationError(f"expected {p.N} phases, got {theta.shape} and {theta_delayed.shape}")
    A = p.coupling
    return p.frequencies + (p.kappa0 / p.N) * (A * np.sin(theta_delayed[None, :] - theta[:, None])).sum(axis=1)


def rhs_centroid_frame(W, p):
    """Zero-delay system with the common free flow factored out.

    ``w_j' = kappa0 (w_c <w_j, w_j> - w_j <w_c, w_j>) + kappa1 (<w_j, w_c> - <w_c, w_j>) w_j``
    with ``w_c`` the ensemble mean.
    """
    W = np.asarray(W, dtype=np.complex128)
    wc = W.mean(axis=0)
    nw = np.einsum("ja,ja->j", W.conj(), W).real
    c = W @ wc.conj()  # <w_c, w_j>
    return p.kappa0 * (nw[:, None] * wc - c[:, None] * W) + p.kappa1 * (c.conj() - c)[:, None] * W


RHS_BY_FORM = {
    "general": rhs_general,
    "sl": rhs_sl,
    "close_sl": rhs_close_sl,
    "ls_real": rhs_ls_real,
}


def rhs(current, delayed, p):
    """Dispatch on ``p.form`` (not valid for the scalar Kuramoto form)."""
    if p.form == "kuramoto":
        raise ValidationError("the kuramoto form evolves phases; call rhs_kuramoto")
    return RHS_BY_FORM[p.form](current, delayed, p)


def lift_angles(theta):
    """Embed phases on the unit circle of R^2 as complex ``(N, 2)`` states."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1).astype(np.complex128)


def angles_of(Z):
    Z = np.real(_states(Z))
    return np.arctan2(Z[..., 1], Z[..., 0])
