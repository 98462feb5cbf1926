"""Sufficient-condition gates: evaluate hypotheses, derive constants, predict behaviour.

Each ``check_*`` function is pure and never raises for violated hypotheses;
failures surface as ``prediction == "no_guarantee"``. Strict inequalities are
compared exactly, without slack.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import gram_defect, order_parameter
from .model import tilde_kappa
from .sphere import adjacency_diameter, adjacency_max, inf_norm, omega_diameter

COMPLETE = "complete_aggregation"
PRACTICAL = "practical_bound"
NO_GUARANTEE = "no_guarantee"


@dataclass
class HypothesisCheck:
    name: str
    relation: str
    lhs: float
    rhs: float
    passed: bool


@dataclass
class TheoremReport:
    theorem: str
    checks: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    prediction: str = NO_GUARANTEE
    bound: float = None
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def require(self, name, lhs, relation, rhs):
        lhs, rhs = float(lhs), float(rhs)
        ops = {
            "<": lambda a, b: a < b,
            "<=": lambda a, b: a <= b,
            ">": lambda a, b: a > b,
            ">=": lambda a, b: a >= b,
            "==": lambda a, b: a == b,
        }
        ok = bool(ops[relation](lhs, rhs))
        self.checks.append(HypothesisCheck(name, relation, lhs, rhs, ok))
        return ok

    def flag(self, name, ok, detail=""):
        """Record a structural (boolean) precondition as a hypothesis check."""
        self.checks.append(HypothesisCheck(name, detail or "holds", float(ok), 1.0, bool(ok)))
        return ok

    def conclude(self, prediction, bound=None):
        if self.passed:
            self.prediction = prediction
            self.bound = None if bound is None else float(bound)
        else:
            self.prediction = NO_GUARANTEE
            self.bound = None
        return self

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self, **kw):
        return json.dumps(_jsonable(self.to_dict()), **kw)

    def to_text(self):
        """Flat ``key=value`` lines with stable field names."""
        lines = [f"theorem={self.theorem}", f"prediction={self.prediction}"]
        lines.append(f"bound={'' if self.bound is None else repr(self.bound)}")
        for c in self.checks:
            lines.append(f"check.{c.name}={'pass' if c.passed else 'fail'} ({c.lhs!r} {c.relation} {c.rhs!r})")
        for k, v in self.constants.items():
            lines.append(f"const.{k}={v!r}")
        for i, n in enumerate(self.notes):
            lines.append(f"note.{i}={n}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("passed", None)
        d["checks"] = [HypothesisCheck(**c) for c in d.get("checks", [])]
        return cls(**d)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def quadratic_roots(a, b, c):
    """Real roots ``(lo, hi)`` of ``a x^2 + b x + c`` with positive discriminant, else ``None``.

    Uses the cancellation-free form ``q = -(b + sign(b) sqrt(disc)) / 2``.
    """
    disc = b * b - 4 * a * c
    if not disc > 0 or a == 0:
        return None
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1 = q / a
    r2 = c / q if q != 0 else -r1
    return (min(r1, r2), max(r1, r2))


def _safe_inv(x):
    return 1.0 / x if x > 0 else float("nan")


def _setting_complete_zero_flow(rep, p):
    rep.flag("complete_graph", p.is_complete, "a_jk == 1")
    rep.flag("zero_free_flow", p.has_zero_flow, "Omega_j == 0")


# ---------------------------------------------------------------------------


def check_thm31(p, diam0):
    """Complete aggregation for the Stuart-Landau gain pair."""
    rep = TheoremReport("thm31")
    k0, N = p.kappa0, p.N
    tau_max = _safe_inv(16 * k0)
    rep.constants.update(kappa_tilde=tilde_kappa(p), tau_threshold=tau_max)
    rep.flag("sl_gain_pair", p.kappa1 == -k0 / 2, "kappa1 == -kappa0/2")
    _setting_complete_zero_flow(rep, p)
    rep.require("kappa0_positive", k0, ">", 0.0)
    rep.require("N_at_least_3", N, ">=", 3)
    rep.require("tau_small", p.tau, "<", tau_max)
    rep.require("history_diameter", diam0, "<", 1 / 8)
    return rep.conclude(COMPLETE)


def c1_constant(p):
    N = p.N
    return 2 * (N - 1) / N * min(p.kappa0 + abs(p.kappa1), p.kappa0 + abs(tilde_kappa(p)))


def lyapunov_rates(p):
    """``(beta, gamma)`` of the pair functional, with the Young parameter set to 1."""
    k0, kt, N = p.kappa0, abs(tilde_kappa(p)), p.N
    beta = 7 / 4 * k0 - 4 * k0 / N - 4 * kt - 8 * kt / N
    gamma = (k0 + 2 * kt) / N
    return beta, gamma


def check_thm32(p, diam0):
    """Complete aggregation for gain pairs close to the Stuart-Landau pair."""
    rep = TheoremReport("thm32")
    k0, N = p.kappa0, p.N
    kt = tilde_kappa(p)
    c1 = c1_constant(p)
    beta, gamma = lyapunov_rates(p)
    rep.constants.update(
        kappa_tilde=kt,
        C1=c1,
        kappa_tilde_threshold=9 / 256 * k0,
        tau_threshold=_safe_inv(8 * c1),
        beta=beta,
        gamma=gamma,
    )
    _setting_complete_zero_flow(rep, p)
    rep.require("kappa0_positive", k0, ">", 0.0)
    rep.require("kappa_tilde_small", abs(kt), "<", 9 / 256 * k0)
    rep.require("C1_tau", c1 * p.tau, "<", 1 / 8)
    rep.require("N_at_least_3", N, ">=", 3)
    rep.require("history_diameter", diam0, "<", 1 / 8)
    return rep.conclude(COMPLETE)


def c2_constant(p):
    return 2 * (p.N - 1) / p.N * (p.kappa0 + abs(p.kappa1))


def practical_polynomial(p):
    """Coefficients ``(a, b, c)`` of the quadratic that bounds ``dL/dt`` on a complete graph."""
    k0, k1, N, tau = p.kappa0, abs(p.kappa1), p.N, p.tau
    c2 = c2_constant(p)
    a = 2 * k0
    b = -2 * k0 + 2 * c2 * k0 * tau + 4 * k1 + 2 * c2 * k0 * tau / N
    c = 4 * c2 * k1 * tau + (4 * c2 * tau / N) * (k0 + 2 * k1)
    return a, b, c


def check_thm41(p, L0):
    """Practical aggregation in the delay on a complete graph."""
    rep = TheoremReport("thm41")
    k0, k1 = p.kappa0, abs(p.kappa1)
    a, b, c = practical_polynomial(p)
    rep.constants.update(
        C2=c2_constant(p),
        poly_a=a,
        poly_b=b,
        poly_c=c,
        discriminant=b * b - 4 * a * c,
        limit_threshold=1 - 2 * k1 / k0 if k0 > 0 else float("nan"),
    )
    rep.notes.append(
        "initial condition checked as L(0) < x_plus(tau); its tau -> 0 limit is 1 - 2|kappa1|/kappa0"
    )
    _setting_complete_zero_flow(rep, p)
    rep.require("gain_ratio", 2 * k1, "<", k0)
    roots = quadratic_roots(a, b, c) if k0 > 0 else None
    if roots is None:
        rep.notes.append("tau too large for root existence")
        rep.require("discriminant_positive", b * b - 4 * a * c, ">", 0.0)
        return rep.conclude(PRACTICAL)
    x_lo, x_hi = roots
    rep.constants.update(x_minus=x_lo, x_plus=x_hi)
    rep.require("discriminant_positive", b * b - 4 * a * c, ">", 0.0)
    rep.require("L0_below_x_plus", L0, "<", x_hi)
    return rep.conclude(PRACTICAL, x_lo)


def c3_constant(p, use_max_entry=True):
    """Delay-displacement constant for a general network.

    ``use_max_entry`` selects ``max a_ij`` (what the estimate actually uses);
    otherwise the row-spread of the adjacency is substituted.
    """
    N = p.N
    flow = max(inf_norm(om) for om in p.omegas)
    a_scale = adjacency_max(p.adjacency) if use_max_entry else adjacency_diameter(p.adjacency)
    return flow + 2 * a_scale * (N - 1) * (p.kappa0 + abs(p.kappa1)) / N


def network_threshold(A, i, j):
    A = np.asarray(A, dtype=float)
    return 1 - 2 * np.abs(A[i] - A[j]).sum() / (A[i] + A[j]).sum()


def network_coefficients(p, i, j):
    """``(A1, A2, A3)`` of the quadratic bound for the pair ``(i, j)``."""
    A, N, tau = p.adjacency, p.N, p.tau
    k0, k1 = p.kappa0, abs(p.kappa1)
    c3 = c3_constant(p)
    s_sum = (A[i] + A[j]).sum()
    s_dif = np.abs(A[i] - A[j]).sum()
    diag = A[i, i] + A[j, j]
    a1 = s_sum / N
    a2 = 2 * s_dif / N + 2 * c3 * tau * s_sum / N + c3 * tau * diag / N + 2 * k1 * s_sum / (N * k0)
    a3 = (omega_diameter(p.omegas) / k0 + 2 * c3 * tau * s_dif / N
          + 2 * c3 * tau * diag * (1 + k1 / k0) / N + 4 * c3 * tau * k1 / k0)
    return float(a1), float(a2), float(a3)


def _network_roots(p, pair):
    a1, a2, a3 = network_coefficients(p, *pair)
    return quadratic_roots(a1, -(a1 - a2), a3)


def check_thm42(p, L0):
    """Practical aggregation in the delay and coupling strength on a weighted network."""
    rep = TheoremReport("thm42")
    N = p.N
    pairs = [(i, j) for i in range(N) for j in range(i + 1, N)] or [(0, 0)]
    thresholds = {pr: float(network_threshold(p.adjacency, *pr)) for pr in pairs}
    worst = min(pairs, key=lambda pr: (thresholds[pr], pr))
    c3 = c3_constant(p)
    rep.constants.update(
        C3=c3,
        C3_with_adjacency_spread=c3_constant(p, use_max_entry=False),
        omega_diameter=omega_diameter(p.omegas),
        adjacency_max=adjacency_max(p.adjacency),
        adjacency_spread=adjacency_diameter(p.adjacency),
        network_threshold=thresholds[worst],
        worst_pair=list(worst),
    )
    rep.notes.append(
        "C3 uses max_ij a_ij, which is what the displacement estimate needs; the variant with the "
        "adjacency spread D(A) is reported as C3_with_adjacency_spread"
    )
    rep.notes.append("conclusion is a double limit: tau -> 0 first, then kappa0 -> infinity")
    rep.notes.append("initial condition evaluated from the data at t = 0 only")
    rep.require("kappa0_positive", p.kappa0, ">", 0.0)
    rep.require("L0_below_network_threshold", L0, "<", thresholds[worst])
    if p.kappa0 <= 0:
        return rep.conclude(PRACTICAL)
    a1, a2, a3 = network_coefficients(p, *worst)
    rep.constants.update(A1=a1, A2=a2, A3=a3)
    disc = (a1 - a2) ** 2 - 4 * a1 * a3
    rep.constants["discriminant"] = disc
    roots = _network_roots(p, worst)
    rep.require("discriminant_positive", disc, ">", 0.0)
    if roots is None:
        rep.notes.append("tau too large (or kappa0 too small) for root existence")
        return rep.conclude(PRACTICAL)
    rep.constants.update(x_minus=roots[0], x_plus=roots[1])
    worst_lo = roots[0]
    for pr in pairs:
        r = _network_roots(p, pr)
        if r is not None:
            worst_lo = max(worst_lo, r[0])
    rep.constants["x_minus_max_over_pairs"] = worst_lo
    return rep.conclude(PRACTICAL, roots[0])


def check_prop21(p, rho0):
    """Zero-delay complete aggregation and splitting for positive ``kappa1``."""
    rep = TheoremReport("prop21")
    N, k0, k1 = p.N, p.kappa0, p.kappa1
    rep.constants["rho_threshold"] = (N - 2) / N
    rep.require("zero_delay", p.tau, "==", 0.0)
    rep.flag("common_free_flow", p.has_common_flow, "Omega_j identical")
    rep.flag("complete_graph", p.is_complete, "a_jk == 1")
    rep.require("N_at_least_3", N, ">=", 3)
    rep.require("kappa1_positive", k1, ">", 0.0)
    rep.require("kappa1_below_quarter", k1, "<", k0 / 4)
    rep.require("rho0_large", rho0, ">", (N - 2) / N)
    rep.notes.append("splitting directive: compare z_j(t) with exp(Omega t) w_j(t) (compare-splitting)")
    return rep.conclude(COMPLETE)


def check_prop22(p, diam0, d=None):
    """Complete aggregation of the delayed real sphere model with a common flow."""
    rep = TheoremReport("prop22")
    d = p.d if d is None else int(d)
    kappa = p.kappa0
    om = inf_norm(p.omegas[0])
    tau_max = _safe_inv(8 * (d * om + 2 * kappa))
    rep.constants.update(omega_inf_norm=om, tau_threshold=tau_max)
    rep.flag("common_free_flow", p.has_common_flow, "Omega_j identical")
    rep.flag("real_free_flow", not np.any(p.omegas.imag), "Omega real skew-symmetric")
    rep.require("N_at_least_3", p.N, ">=", 3)
    rep.require("kappa_positive", kappa, ">", 0.0)
    rep.require("tau_small", p.tau, "<", tau_max)
    rep.require("history_diameter", diam0, "<", 1 / 8)
    return rep.conclude(COMPLETE)


GATES = ("thm31", "thm32", "thm41", "thm42", "prop21", "prop22")


def evaluate_gate(theorem, p, history):
    """Run a gate on the actual initial data of ``history``."""
    Z0 = history.initial()
    if theorem == "thm31":
        return check_thm31(p, history.sup_diameter(p.tau))
    if theorem == "thm32":
        return check_thm32(p, history.sup_diameter(p.tau))
    if theorem == "thm41":
        return check_thm41(p, gram_defect(Z0).Lmax)
    if theorem == "thm42":
        return check_thm42(p, gram_defect(Z0).Lmax)
    if theorem == "prop21":
        return check_prop21(p, order_parameter(Z0))
    if theorem == "prop22":
        return check_prop22(p, history.sup_diameter(p.tau))
    raise ValueError(f"unknown theorem {theorem!r}; expected one of {GATES}")
