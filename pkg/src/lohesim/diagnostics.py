"""Scalar emergence functionals on ensembles and trajectories."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .sphere import Ensemble
from .validation import ValidationError

CHUNK = 2048


def _Z(e):
    return e.states if isinstance(e, Ensemble) else np.asarray(e)


def diameter(e):
    """``max_{i,j} ||z_i - z_j||``."""
    Z = _Z(e)
    if Z.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(Z[:, None, :] - Z[None, :, :], axis=-1).max())


def order_parameter(e):
    """Norm of the ensemble centroid."""
    return float(np.linalg.norm(_Z(e).mean(axis=0)))


@dataclass(frozen=True)
class GramDefect:
    L: np.ndarray = field(repr=False)
    Lmax: float
    pair: tuple

    @property
    def real(self):
        return float(self.L[self.pair].real)

    @property
    def imag(self):
        return float(self.L[self.pair].imag)


def gram_defect(e):
    """Matrix ``L_ij = 1 - <z_i, z_j>`` and its largest modulus.

    ``pair`` is the lexicographically smallest ``(i, j)`` attaining the maximum.
    """
    Z = _Z(e)
    L = 1.0 - Z.conj() @ Z.T
    mod = np.abs(L)
    flat = int(np.argmax(mod))  # first occurrence in row-major order
    pair = divmod(flat, mod.shape[1])
    return GramDefect(L, float(mod[pair]), (int(pair[0]), int(pair[1])))


def modified_diameter(traj, t):
    """``max_{i,j} ||z_i(t) - z_j(t - tau)||`` (the ``i == j`` terms included)."""
    Z = traj.state_at(t)
    W = traj.state_at(t - traj.tau)
    return float(np.linalg.norm(Z[:, None, :] - W[None, :, :], axis=-1).max())


def delta_tau(traj, t, j):
    """Displacement of particle ``j`` over one delay, ``||z_j(t) - z_j(t - tau)||``."""
    if traj.tau == 0:
        return 0.0
    return float(np.linalg.norm(traj.state_at(t)[j] - traj.state_at(t - traj.tau)[j]))


def _separation_sq(Y, i, j):
    return np.sum(np.abs(Y[..., i, :] - Y[..., j, :]) ** 2, axis=-1)


def _history_grid(traj):
    """History states on the grid ``-tau + k h`` (k < m) and at their midpoints."""
    m, h = traj.delay_steps, traj.h
    nodes = np.array([traj.history(-traj.tau + k * h) for k in range(m)])
    mids = np.array([traj.history(-traj.tau + (k + 0.5) * h) for k in range(m)])
    return nodes, mids


def lyapunov_series(traj, i, j, gamma, _hist=None):
    """``||z_i - z_j||^2 + gamma * int_{t-tau}^t ||z_i - z_j||^2`` at every grid node.

    The window integral is composite Simpson with one panel per step, the
    midpoints taken from the Hermite dense output (or the history).
    """
    s_nodes = _separation_sq(traj.states, i, j)
    if i == j:
        return np.zeros_like(s_nodes)
    if traj.tau == 0:
        return s_nodes
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    m, h = traj.delay_steps, traj.h
    hn, hm = _history_grid(traj) if _hist is None else _hist
    ext_nodes = np.concatenate([_separation_sq(hn, i, j), s_nodes])
    ext_mids = np.concatenate([_separation_sq(hm, i, j), _separation_sq(traj.midpoints(), i, j)])
    panels = (h / 6) * (ext_nodes[:-1] + 4 * ext_mids + ext_nodes[1:])
    S = np.concatenate([[0.0], np.cumsum(panels)])
    n = np.arange(len(s_nodes))
    return s_nodes + gamma * (S[n + m] - S[n])


def lyapunov(traj, t, i, j, gamma):
    """The pair functional at time ``t`` (interpolated linearly between nodes)."""
    if t < traj.times[0] or t > traj.times[-1]:
        raise ValidationError(f"t={t} outside the trajectory")
    if i == j:
        return 0.0
    series = lyapunov_series(traj, i, j, gamma)
    return float(np.interp(t, traj.times, series))


def tail_sup(series, window_fraction=0.2, times=None):
    """Maximum of ``series`` over the last ``window_fraction`` of the horizon."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValidationError("tail_sup of an empty series")
    if not 0 < window_fraction <= 1:
        raise ValidationError(f"window_fraction must lie in (0, 1], got {window_fraction}")
    if times is None:
        k = max(1, int(np.ceil(window_fraction * series.size)))
        return float(series[-k:].max())
    times = np.asarray(times, dtype=float)
    start = times[-1] - window_fraction * (times[-1] - times[0])
    return float(series[times >= start - 1e-12].max())


@dataclass
class DiagnosticsSeries:
    times: np.ndarray
    D: np.ndarray
    D0tau: np.ndarray
    rho: np.ndarray
    Lmax: np.ndarray
    norm_dev: np.ndarray
    E: dict = field(default_factory=dict)
    gamma: float = None

    def check(self, tol=1e-9):
        arrays = [self.D, self.D0tau, self.rho, self.Lmax, self.norm_dev, *self.E.values()]
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValidationError("non-finite diagnostics")
        for name, a, hi in (("rho", self.rho, 1.0), ("D", self.D, 2.0), ("Lmax", self.Lmax, 2.0)):
            if a.min() < 0 or a.max() > hi + tol:
                raise ValidationError(f"{name} outside [0, {hi}]")

    def to_csv(self, path):
        pairs = sorted(self.E)
        header = ["t", "D", "D0tau", "rho", "Lmax", "norm_dev"] + [f"E_{i}_{j}" for i, j in pairs]
        cols = [self.times, self.D, self.D0tau, self.rho, self.Lmax, self.norm_dev] + [self.E[p] for p in pairs]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in zip(*cols):
                w.writerow([format(float(x), ".17g") for x in row])


def _delayed_stack(traj, idx):
    m = traj.delay_steps
    out = np.empty((len(idx),) + traj.states.shape[1:], dtype=traj.states.dtype)
    idx = np.asarray(idx)
    late = idx >= m
    out[late] = traj.states[idx[late] - m]
    for r in np.flatnonzero(~late):
        out[r] = traj.delayed_node(idx[r])
    return out


def compute_series(traj, stride=1, lyapunov_pairs=(), gamma=None):
    """Evaluate every scalar diagnostic on the grid nodes ``0, stride, 2 stride, ...``."""
    idx = np.arange(0, len(traj.times), stride)
    if idx[-1] != len(traj.times) - 1:
        idx = np.append(idx, len(traj.times) - 1)
    out = {k: np.empty(len(idx)) for k in ("D", "D0tau", "rho", "Lmax", "norm_dev")}
    for s in range(0, len(idx), CHUNK):
        sl = idx[s : s + CHUNK]
        Z = traj.states[sl]
        W = _delayed_stack(traj, sl)
        r = slice(s, s + len(sl))
        out["D"][r] = np.linalg.norm(Z[:, :, None, :] - Z[:, None, :, :], axis=-1).max(axis=(1, 2))
        out["D0tau"][r] = np.linalg.norm(Z[:, :, None, :] - W[:, None, :, :], axis=-1).max(axis=(1, 2))
        out["rho"][r] = np.linalg.norm(Z.mean(axis=1), axis=-1)
        G = np.einsum("nia,nja->nij", Z.conj(), Z)
        out["Lmax"][r] = np.abs(1.0 - G).max(axis=(1, 2))
        out["norm_dev"][r] = np.abs(np.linalg.norm(Z, axis=-1) - 1.0).max(axis=1)
    E = {}
    if lyapunov_pairs:
        hist = _history_grid(traj) if traj.tau > 0 else None
        for i, j in lyapunov_pairs:
            E[(i, j)] = lyapunov_series(traj, i, j, gamma, _hist=hist)[idx]
    return DiagnosticsSeries(traj.times[idx], gamma=gamma, E=E, **out)


def delta_tau_series(traj):
    """``max_j ||z_j(t) - z_j(t - tau)||`` at every node."""
    if traj.tau == 0:
        return np.zeros(len(traj.times))
    W = _delayed_stack(traj, np.arange(len(traj.times)))
    return np.linalg.norm(traj.states - W, axis=-1).max(axis=1)


def gram_delay_series(traj):
    """``max_{i,j} |L_ij(t) - L_ij^tau(t)|`` with ``L^tau_ij = 1 - <z_i(t - tau), z_j(t)>``."""
    if traj.tau == 0:
        return np.zeros(len(traj.times))
    res = np.empty(len(traj.times))
    for s in range(0, len(traj.times), CHUNK):
        idx = np.arange(s, min(s + CHUNK, len(traj.times)))
        Z = traj.states[idx]
        W = _delayed_stack(traj, idx)
        res[idx] = np.abs(np.einsum("nia,nja->nij", (Z - W).conj(), Z)).max(axis=(1, 2))
    return res
