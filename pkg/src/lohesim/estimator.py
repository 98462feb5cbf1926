"""scikit-learn style front end.

:class:`LoheSphereSimulator` takes its model and integrator settings as
constructor hyper-parameters, so ``get_params``/``set_params``/``clone`` work
and parameter sweeps are just cloned estimators. ``fit`` integrates from an
initial ensemble (or a :class:`~lohesim.integrate.History`), ``predict`` gives
dense states at arbitrary times and ``transform`` maps times to diagnostic
features.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .diagnostics import compute_series, diameter, gram_defect, order_parameter, tail_sup
from .integrate import History, IntegratorConfig, Trajectory, integrate
from .model import ModelParams, lift_angles
from .theorems import lyapunov_rates

FEATURES = ("D", "D0tau", "rho", "Lmax")


def default_step(tau):
    """``min(1e-3, tau / 10)``; the integrator then snaps it to divide ``tau``."""
    return min(1e-3, tau / 10) if tau > 0 else 1e-3


def default_horizon(kappa0):
    return 100.0 / kappa0 if kappa0 > 0 else 100.0


def lift_trajectory(traj):
    """Phase trajectory mapped onto the unit circle of R^2 (derivatives by the chain rule)."""
    th = traj.states.real
    dth = traj.derivs.real
    states = lift_angles(th)
    derivs = np.stack([-np.sin(th) * dth, np.cos(th) * dth], axis=-1).astype(np.complex128)
    hist = History.function(lambda t: lift_angles(traj.history(t)))
    return Trajectory(traj.times, states, derivs, hist, traj.tau, traj.h, traj.params, traj.config)


class LoheSphereSimulator(BaseEstimator):
    """Delayed Lohe Hermitian sphere dynamics as an estimator.

    Parameters
    ----------
    kappa0, kappa1 : float
        Coupling gains. ``form="sl"`` derives ``kappa1 = -kappa0/2``.
    tau : float
        Uniform delay.
    form : str
        One of ``general``, ``sl``, ``close_sl``, ``ls_real``, ``kuramoto``.
    omegas, adjacency : array-like or None
        Free flows (``None`` means zero) and weights (``None`` means complete graph).
    h, t_end : float or None
        Step and horizon; ``None`` selects ``min(1e-3, tau/10)`` and ``100/kappa0``.
    projection, norm_budget, scheme
        Passed to :class:`~lohesim.integrate.IntegratorConfig`.
    stride : int
        Diagnostics are evaluated on every ``stride``-th grid node.
    lyapunov_pairs, gamma
        Pairs whose delay functional is tracked; ``gamma=None`` uses the
        close-to-SL rate ``(kappa0 + 2|kappa_tilde|)/N``.
    tail_fraction : float
        Window used by :meth:`score` to estimate ``limsup``.
    """

    def __init__(self, kappa0=1.0, kappa1=0.0, tau=0.0, form="general", omegas=None, adjacency=None,
                 kappa_tilde=None, h=None, t_end=None, projection="off", norm_budget=1e-7,
                 scheme="rk4", stride=1, lyapunov_pairs=(), gamma=None, tail_fraction=0.2):
        self.kappa0 = kappa0
        self.kappa1 = kappa1
        self.tau = tau
        self.form = form
        self.omegas = omegas
        self.adjacency = adjacency
        self.kappa_tilde = kappa_tilde
        self.h = h
        self.t_end = t_end
        self.projection = projection
        self.norm_budget = norm_budget
        self.scheme = scheme
        self.stride = stride
        self.lyapunov_pairs = lyapunov_pairs
        self.gamma = gamma
        self.tail_fraction = tail_fraction

    def _history(self, X):
        if isinstance(X, History):
            return X
        if self.form == "kuramoto":
            return History.constant(np.asarray(X, dtype=float).ravel(), on_sphere=False)
        return History.constant(X)

    def build_params(self, N, d):
        return ModelParams.build(
            N, d, self.kappa0, None if self.form == "sl" else self.kappa1, self.tau,
            omegas=self.omegas, adjacency=self.adjacency, form=self.form, kappa_tilde=self.kappa_tilde,
        )

    def build_config(self):
        return IntegratorConfig(
            h=self.h if self.h is not None else default_step(self.tau),
            t_end=self.t_end if self.t_end is not None else default_horizon(self.kappa0),
            projection=self.projection,
            norm_budget=self.norm_budget,
            scheme=self.scheme,
        ).for_delay(self.tau)

    def fit(self, X, y=None):
        """Integrate from initial data ``X``.

        ``X`` is an ``(N, d)`` ensemble (held constant on ``[-tau, 0]``), an
        ``(N,)`` phase vector for the Kuramoto form, or a ``History``.
        """
        hist = self._history(X)
        x0 = hist.initial()
        N, d = (x0.shape[0], 2) if self.form == "kuramoto" else x0.shape
        self.params_ = self.build_params(N, d)
        self.config_ = self.build_config()
        self.history_ = hist
        self.trajectory_ = integrate(hist, self.params_, self.config_)
        self.sphere_trajectory_ = (
            lift_trajectory(self.trajectory_) if self.form == "kuramoto" else self.trajectory_
        )
        gamma = self.gamma
        if gamma is None and self.lyapunov_pairs:
            gamma = lyapunov_rates(self.params_)[1]
        self.diagnostics_ = compute_series(
            self.sphere_trajectory_, stride=self.stride,
            lyapunov_pairs=[tuple(pr) for pr in self.lyapunov_pairs], gamma=gamma,
        )
        self.n_features_in_ = d
        return self

    def predict(self, T):
        """States at times ``T`` (scalar or 1-D), shape ``(len(T), N, d)``."""
        check_is_fitted(self, "trajectory_")
        T = np.atleast_1d(np.asarray(T, dtype=float))
        return np.array([self.sphere_trajectory_.state_at(t) for t in T])

    def transform(self, T):
        """Diagnostic features ``D, D0tau, rho, Lmax`` at times ``T``."""
        check_is_fitted(self, "trajectory_")
        traj = self.sphere_trajectory_
        rows = []
        for t in np.atleast_1d(np.asarray(T, dtype=float)):
            Z = traj.state_at(t)
            W = traj.state_at(t - traj.tau)
            d0 = float(np.linalg.norm(Z[:, None, :] - W[None, :, :], axis=-1).max())
            rows.append([diameter(Z), d0, order_parameter(Z), gram_defect(Z).Lmax])
        return np.array(rows)

    def score(self, X=None, y=None):
        """Negative tail maximum of ``L(t)``: larger means tighter aggregation."""
        check_is_fitted(self, "diagnostics_")
        return -tail_sup(self.diagnostics_.Lmax, self.tail_fraction, self.diagnostics_.times)
