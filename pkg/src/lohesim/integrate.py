"""Fixed-step method-of-steps integration for systems with one constant delay.

The step ``h`` always divides the delay ``tau`` so that the propagated
derivative breakpoints ``t = k * tau`` fall on grid nodes. Delayed arguments of
the RK4 stages are read from the initial history for ``t <= 0`` and from the
already computed grid otherwise: node values for the ``c = 0`` and ``c = 1``
stages, the cubic Hermite midpoint for the two ``c = 1/2`` stages.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .model import ModelParams, rhs, rhs_kuramoto
from .sphere import Ensemble, random_ensemble
from .validation import ValidationError, check_scalar, check_states

HISTORY_NORM_TOL = 1e-9
MAX_STEPS_PER_DELAY = 10**7
MAX_TOTAL_STEPS = 10**8


class ConfigError(ValueError):
    """Raised for integrator settings that cannot be honoured."""


class DriftError(RuntimeError):
    """Raised when the modulus drifts beyond the budget with projection off.

    Carries the offending deviation, the time it was observed and the partial
    trajectory computed up to (and including) that node.
    """

    def __init__(self, max_deviation, time, trajectory=None):
        super().__init__(f"norm drift {max_deviation:.3e} exceeds budget at t={time:.6g}")
        self.max_deviation = max_deviation
        self.time = time
        self.trajectory = trajectory


# ---------------------------------------------------------------------------
# initial history


@dataclass(frozen=True)
class History:
    """Initial data on ``[-tau, 0]``.

    ``kind`` is one of ``constant``, ``sampled``, ``generator`` (a seeded random
    constant ensemble) or ``function`` (any callable of ``t``). Unit-norm states
    are required unless ``on_sphere=False`` (phase histories for the Kuramoto
    form are plain real vectors).
    """

    kind: str
    states: np.ndarray = field(default=None, repr=False)
    times: np.ndarray = field(default=None, repr=False)
    fn: object = field(default=None, repr=False)
    seed: int = None
    spread: float = None
    on_sphere: bool = True
    _spline: object = field(default=None, repr=False, compare=False)

    @classmethod
    def constant(cls, states, on_sphere=True):
        if on_sphere:
            states = check_states(states, norm_tol=HISTORY_NORM_TOL)
        else:
            states = np.array(states, dtype=float)
        states.setflags(write=False)
        return cls("constant", states=states, on_sphere=on_sphere)

    @classmethod
    def generator(cls, seed, N, d, spread, real=False):
        Z = random_ensemble(seed, N, d, spread, real=real).states
        return cls("generator", states=Z, seed=int(seed), spread=float(spread))

    @classmethod
    def sampled(cls, times, states, on_sphere=True):
        """Cubic-spline interpolation of samples, projected back to the sphere."""
        times = np.asarray(times, dtype=float)
        states = np.asarray(states)
        if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
            raise ValidationError("history sample times must be strictly increasing (>= 2 samples)")
        if states.shape[0] != len(times):
            raise ValidationError("one history sample per time is required")
        if times[-1] != 0.0:
            raise ValidationError("sampled history must end at t = 0")
        if on_sphere:
            for Z in states:
                check_states(Z, norm_tol=HISTORY_NORM_TOL)
            states = states.astype(np.complex128)
        spline = CubicSpline(times, states, axis=0)
        return cls("sampled", states=states, times=times, on_sphere=on_sphere, _spline=spline)

    @classmethod
    def function(cls, fn, on_sphere=True):
        return cls("function", fn=fn, on_sphere=on_sphere)

    @property
    def t_min(self):
        return self.times[0] if self.kind == "sampled" else -math.inf

    def __call__(self, t):
        if t > 0:
            raise ValidationError(f"history queried at t={t} > 0")
        if t < self.t_min - 1e-12:
            raise ValidationError(f"history queried at t={t}, covers only t >= {self.t_min}")
        if self.kind in ("constant", "generator"):
            return self.states
        if self.kind == "sampled":
            Z = self._spline(min(max(t, self.times[0]), 0.0))
            if self.on_sphere:
                Z = Z / np.linalg.norm(Z, axis=-1, keepdims=True)
            return Z
        Z = np.asarray(self.fn(t))
        if self.on_sphere:
            check_states(Z, norm_tol=HISTORY_NORM_TOL, copy=False)
        return Z

    def initial(self):
        return np.array(self(0.0))

    def sup_diameter(self, tau, samples=64):
        """Largest ensemble diameter over ``[-tau, 0]`` (sampled for non-constant kinds)."""
        from .diagnostics import diameter

        if self.kind in ("constant", "generator") or tau == 0:
            return diameter(self(0.0))
        ts = np.linspace(-tau, 0.0, samples + 1)
        if self.kind == "sampled":
            ts = np.union1d(ts, self.times[self.times >= -tau])
        return max(diameter(self(t)) for t in ts)


# ---------------------------------------------------------------------------
# configuration and trajectory


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 1e-3
    t_end: float = 1.0
    projection: str = "off"
    norm_budget: float = 1e-7
    scheme: str = "rk4"
    requested_h: float = None

    def __post_init__(self):
        check_scalar(self.h, "h", min_val=0.0, include_min=False)
        check_scalar(self.t_end, "t_end", min_val=0.0, include_min=False)
        check_scalar(self.norm_budget, "norm_budget", min_val=0.0, include_min=False)
        if self.projection not in ("off", "every_step"):
            raise ConfigError(f"projection must be 'off' or 'every_step', got {self.projection!r}")
        if self.scheme not in ("rk4", "euler"):
            raise ConfigError(f"scheme must be 'rk4' or 'euler', got {self.scheme!r}")

    def for_delay(self, tau):
        """Return a copy whose step divides ``tau`` (shrinking ``h`` if needed)."""
        if tau == 0:
            return self
        ratio = tau / self.h
        m = round(ratio)
        if m < 1 or abs(ratio - m) > 1e-9 * max(1.0, ratio):
            m = math.ceil(ratio)
        if m > MAX_STEPS_PER_DELAY:
            raise ConfigError(f"tau/h = {ratio:.3g} exceeds the supported {MAX_STEPS_PER_DELAY} steps per delay")
        h = tau / m
        if h == self.h:
            return self
        return replace(self, h=h, requested_h=self.requested_h or self.h)

    @property
    def adjusted(self):
        return self.requested_h is not None and self.requested_h != self.h


@dataclass(frozen=True)
class Trajectory:
    """Grid solution with stored derivatives for Hermite dense output."""

    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    derivs: np.ndarray = field(repr=False)
    history: History = field(repr=False)
    tau: float = 0.0
    h: float = 1e-3
    params: ModelParams = field(default=None, repr=False)
    config: IntegratorConfig = None

    @property
    def n_steps(self):
        return len(self.times) - 1

    @property
    def t_end(self):
        return float(self.times[-1])

    @property
    def delay_steps(self):
        return int(round(self.tau / self.h)) if self.tau > 0 else 0

    def ensemble(self, n):
        return Ensemble(self.times[n], self.states[n])

    def _hermite(self, i, theta):
        y0, y1 = self.states[i], self.states[i + 1]
        f0, f1 = self.derivs[i], self.derivs[i + 1]
        t2 = theta * theta
        t3 = t2 * theta
        h = self.h
        return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * h * f0
                + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1)

    def state_at(self, t):
        """States at time ``t`` in ``[-tau, t_end]`` (history for ``t <= 0``)."""
        if t < 0:
            if t < -self.tau - 1e-12 * max(1.0, self.tau):
                raise ValidationError(f"t={t} precedes the history window [-{self.tau}, 0]")
            return np.asarray(self.history(t))
        if t > self.times[-1] * (1 + 1e-14) + 1e-14:
            raise ValidationError(f"t={t} beyond trajectory end {self.times[-1]}")
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), self.n_steps)
        if self.times[i] == t:
            return self.states[i]
        if i == self.n_steps:
            i -= 1
        theta = (t - self.times[i]) / self.h
        return self._hermite(i, theta)

    def delayed_node(self, n):
        """States at ``t_n - tau`` for grid node ``n`` (exact node lookup when possible)."""
        m = self.delay_steps
        if self.tau == 0:
            return self.states[n]
        if n - m >= 0:
            return self.states[n - m]
        return np.asarray(self.history(self.times[n] - self.tau))

    def midpoints(self):
        """Hermite midpoint of every step, shape ``(n_steps, ...)``."""
        y0, y1 = self.states[:-1], self.states[1:]
        f0, f1 = self.derivs[:-1], self.derivs[1:]
        return 0.5 * (y0 + y1) + (self.h / 8) * (f0 - f1)


def dense_eval(traj, t):
    """Ensemble at ``t`` in ``[t_0, t_end]`` by cubic Hermite interpolation.

    Grid nodes return the stored states unchanged.
    """
    if t < traj.times[0] or t > traj.times[-1] * (1 + 1e-14) + 1e-14:
        raise ValidationError(f"t={t} outside [{traj.times[0]}, {traj.times[-1]}]")
    return Ensemble(t, traj.state_at(t))


# ---------------------------------------------------------------------------
# the solver


def _unit_rows(Y):
    return Y / np.linalg.norm(Y, axis=-1, keepdims=True)


def _norm_dev(Y):
    return float(np.abs(np.linalg.norm(Y, axis=-1) - 1.0).max())


def solve_dde(f, history, tau, cfg, *, on_sphere=True, params=None):
    """Integrate ``y' = f(y(t), y(t - tau))`` from the history up to ``cfg.t_end``.

    ``f`` takes the current and delayed state arrays. With ``tau == 0`` the
    delayed argument is the current stage value. Returns a :class:`Trajectory`.
    """
    tau = check_scalar(tau, "tau", min_val=0.0)
    cfg = cfg.for_delay(tau)
    h = cfg.h
    n_steps = max(1, math.ceil(cfg.t_end / h - 1e-9))
    if n_steps > MAX_TOTAL_STEPS:
        raise ConfigError(f"t_end/h = {cfg.t_end / h:.3g} steps exceeds the supported {MAX_TOTAL_STEPS}")
    m = int(round(tau / h)) if tau > 0 else 0
    times = np.arange(n_steps + 1) * h

    y0 = np.array(history(0.0))
    dtype = np.complex128 if np.iscomplexobj(y0) or on_sphere else float
    Y = np.empty((n_steps + 1,) + y0.shape, dtype=dtype)
    F = np.empty_like(Y)
    Y[0] = y0
    check_norm = on_sphere and cfg.projection == "off"
    project = on_sphere and cfg.projection == "every_step"

    def past(n, c):
        # delayed state for stage time t_n + c*h
        if tau == 0:
            return None
        i = n - m
        if c == 0.0:
            return Y[i] if i >= 0 else history(times[n] - tau)
        if c == 1.0:
            return Y[i + 1] if i + 1 >= 0 else history(times[n] + h - tau)
        if i >= 0:
            return 0.5 * (Y[i] + Y[i + 1]) + (h / 8) * (F[i] - F[i + 1])
        return history(times[n] + 0.5 * h - tau)

    def ev(y, w):
        return f(y, y if w is None else w)

    def partial(n):
        return Trajectory(times[: n + 1], Y[: n + 1], F[: n + 1], history, tau, h, params, cfg)

    F[0] = ev(Y[0], past(0, 0.0))
    for n in range(n_steps):
        y = Y[n]
        k1 = F[n]
        if cfg.scheme == "euler":
            y_next = y + h * k1
        else:
            w_mid = past(n, 0.5)
            k2 = ev(y + 0.5 * h * k1, w_mid)
            k3 = ev(y + 0.5 * h * k2, w_mid)
            k4 = ev(y + h * k3, past(n, 1.0))
            y_next = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if project:
            y_next = _unit_rows(y_next)
        Y[n + 1] = y_next
        if check_norm:
            dev = _norm_dev(y_next)
            if not dev <= cfg.norm_budget:
                F[n + 1] = ev(y_next, past(n + 1, 0.0))
                raise DriftError(dev, float(times[n + 1]), partial(n + 1))
        F[n + 1] = ev(y_next, past(n + 1, 0.0))
    return Trajectory(times, Y, F, history, tau, h, params, cfg)


def integrate(history, p, cfg):
    """Integrate the model selected by ``p.form`` from ``history``.

    The Kuramoto form evolves an ``(N,)`` phase vector; every other form an
    ``(N, d)`` ensemble on the Hermitian sphere.
    """
    if p.form == "kuramoto":
        return solve_dde(lambda y, w: rhs_kuramoto(y, w, p), history, p.tau, cfg, on_sphere=False, params=p)
    y0 = history.initial()
    if y0.shape != (p.N, p.d):
        raise ValidationError(f"history shape {y0.shape} does not match parameters (N={p.N}, d={p.d})")
    return solve_dde(lambda y, w: rhs(y, w, p), history, p.tau, cfg, params=p)


def write_trajectory_csv(traj, path, stride=1):
    """One row per (time, particle): ``t, j, re_z0.., im_z0..`` with 17 significant digits."""
    S = traj.states
    if S.ndim == 2:
        S = S[:, :, None]
    d = S.shape[-1]
    header = ["t", "j"] + [f"re_z{a}" for a in range(d)] + [f"im_z{a}" for a in range(d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for n in range(0, len(traj.times), stride):
            t = format(traj.times[n], ".17g")
            for j, z in enumerate(S[n]):
                z = np.asarray(z, dtype=np.complex128)
                w.writerow([t, j] + [format(x, ".17g") for x in z.real] + [format(x, ".17g") for x in z.imag])


def read_trajectory_csv(path):
    """Inverse of :func:`write_trajectory_csv`: returns ``(times, states)``."""
    rows = list(csv.reader(open(path, newline="")))
    header, body = rows[0], rows[1:]
    d = (len(header) - 2) // 2
    times = []
    states = {}
    for r in body:
        t = float(r[0])
        if not times or times[-1] != t:
            times.append(t)
        vals = np.array(r[2:], dtype=float)
        states.setdefault(t, []).append(vals[:d] + 1j * vals[d:])
    return np.array(times), np.array([states[t] for t in times])


# ---------------------------------------------------------------------------
# qualification


@dataclass(frozen=True)
class Scenario:
    """Canned problem used to measure empirical convergence order."""

    name: str
    history: History
    params: ModelParams
    t_end: float
    exact: object = None  # callable t -> states, or None for self-reference
    scheme: str = "rk4"


def rotation_scenario(scheme="rk4", t_end=2.0):
    om = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=np.complex128)
    p = ModelParams.build(1, 2, kappa0=0.0, omegas=[om])

    def exact(t):
        return np.array([[math.cos(t), math.sin(t)]], dtype=np.complex128)

    return Scenario("rotation", History.constant([[1.0, 0.0]]), p, t_end, exact, scheme)


def delayed_sl_scenario(t_end=2.0):
    p = ModelParams.build(4, 2, kappa0=1.0, tau=0.1, form="sl")
    return Scenario("delayed_sl", History.generator(3, 4, 2, 0.5), p, t_end, None)


SCENARIOS = {
    "rotation": rotation_scenario,
    "rotation_euler": lambda: rotation_scenario("euler"),
    "delayed_sl": delayed_sl_scenario,
}


def convergence_order(problem, steps, reference_divisor=64):
    """Least-squares slope of ``log(error)`` against ``log(h)`` at ``t_end``.

    ``problem`` is a :class:`Scenario` or a key of :data:`SCENARIOS`. Without a
    closed form, the reference is the same scenario at ``min(steps) / reference_divisor``.
    """
    sc = SCENARIOS[problem]() if isinstance(problem, str) else problem
    steps = sorted(float(h) for h in steps)

    def final(h):
        cfg = IntegratorConfig(h=h, t_end=sc.t_end, scheme=sc.scheme, projection="off", norm_budget=1.0)
        traj = integrate(sc.history, sc.params, cfg)
        return traj.state_at(sc.t_end)

    if sc.exact is not None:
        ref = sc.exact(sc.t_end)
    else:
        ref = final(steps[0] / reference_divisor)
    errs = np.array([np.abs(final(h) - ref).max() for h in steps])
    slope, _ = np.polyfit(np.log(steps), np.log(errs), 1)
    return float(slope)
