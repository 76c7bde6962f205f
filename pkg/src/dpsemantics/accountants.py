"""Privacy profiles, composition, and conversions between frameworks.

zCDP budgets add linearly; RDP budgets add pointwise in gamma at shared
orders.  Both convert into tail bounds delta(eps), and trade-off curves
convert into the pointwise-bounded (eps, delta) parametrization via the
generalized inverse of the trade-off function.  A brute-force oracle
computes the tight pointwise delta of any finite mechanism pair.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from ._norm import phi, phi_inv
from .plrv import FiniteMechanismPair
from .tradeoff import TradeoffCurve, np_tradeoff_finite

DELTA_BISECTION_ITERS = 60  # 2^-60 is far below any tolerance in use


class Semantics(Enum):
    """Which guarantee an (eps, delta) curve expresses."""

    APPROXIMATE_DP = "approximate-dp"
    PBDP = "pbdp"
    ZCDP_TAIL_BOUND = "zcdp-tail-bound"
    RDP_TAIL_BOUND = "rdp-tail-bound"
    BAYES_KNOWN_REST = "bayes-known-rest"
    BAYES_ARBITRARY_PRIOR = "bayes-arbitrary-prior"


@dataclass(frozen=True)
class EpsDeltaCurve:
    """A monotone map eps -> delta under a named semantics."""

    semantics: Semantics
    _fn: Callable[[float], float]
    eps_lo: float
    eps_hi: float

    def delta(self, eps: float) -> float:
        return min(1.0, max(0.0, self._fn(eps)))


@dataclass(frozen=True)
class ZcdpProfile:
    """Accounting state under zero-concentrated DP."""

    rho: float

    def __post_init__(self) -> None:
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")

    def on_alpha_grid(self, alphas: Iterable[float]) -> "RdpProfile":
        """Expand to the equivalent (alpha, rho * alpha) RDP points."""
        return RdpProfile(tuple((a, self.rho * a) for a in alphas))


@dataclass(frozen=True)
class RdpProfile:
    """Accounting state as a set of (alpha, gamma) Renyi bounds."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        alphas = [a for a, _ in self.points]
        if any(a <= 1.0 for a in alphas):
            raise ValueError("orders alpha must be > 1")
        if any(g < 0.0 for _, g in self.points):
            raise ValueError("gamma values must be nonnegative")
        if alphas != sorted(alphas) or len(set(alphas)) != len(alphas):
            raise ValueError("alphas must be strictly increasing")


PrivacyProfile = ZcdpProfile | RdpProfile


def zcdp_compose(rhos: Sequence[float]) -> float:
    """Total rho of independently composed zCDP mechanisms."""
    if any(r < 0 for r in rhos):
        raise ValueError("rho values must be nonnegative")
    return float(sum(rhos))


def rdp_compose(a: RdpProfile, b: RdpProfile) -> RdpProfile:
    """Pointwise gamma sums at shared orders; interpolation is not sound."""
    gb = dict(b.points)
    shared = [(alpha, g + gb[alpha]) for alpha, g in a.points if alpha in gb]
    if not shared:
        raise ValueError("profiles share no alpha orders")
    return RdpProfile(tuple(shared))


def renyi_divergence(pair: FiniteMechanismPair, alpha: float) -> float:
    """alpha-Renyi divergence of the first output distribution from the second."""
    if alpha <= 1.0:
        raise ValueError("alpha must be > 1")
    total = 0.0
    for q1, q2 in zip(pair.p1, pair.p2):
        if q1 == 0.0:
            continue
        if q2 == 0.0:
            return math.inf
        total += q1 * (q1 / q2) ** (alpha - 1.0)
    return math.log(total) / (alpha - 1.0)


def zcdp_to_delta(rho: float, eps: float) -> float:
    """Tail bound e^{-(eps-rho)^2/(4 rho)} on the pointwise delta; 1 below rho."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if eps <= rho:
        return 1.0
    return math.exp(-((eps - rho) ** 2) / (4.0 * rho))


def rdp_to_delta(
    points: Sequence[tuple[float, float]] | RdpProfile, eps: float
) -> float:
    """Best tail bound e^{(alpha-1)(gamma-eps)} over points with eps > gamma."""
    pts = points.points if isinstance(points, RdpProfile) else tuple(points)
    if not pts:
        raise ValueError("at least one (alpha, gamma) point required")
    best = 1.0
    for alpha, gamma in pts:
        if eps > gamma:
            best = min(best, math.exp((alpha - 1.0) * (gamma - eps)))
    return min(1.0, max(0.0, best))


def fdp_to_epsdelta(curve: TradeoffCurve, delta: float) -> float:
    """eps on the pointwise (eps, delta) curve of a trade-off function.

    eps = log(delta / f^{-1}(1 - delta)) with the generalized inverse
    f^{-1}(z) = inf{y : f(y) <= z}; +inf when the inverse hits zero.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]; the curve is undefined at 0")
    y = curve.inverse_type2(1.0 - delta)
    if y <= 0.0:
        return math.inf
    return math.log(delta / y)


def gaussian_pbdp_epsilon(mu: float, delta: float) -> float:
    """Closed-form pointwise eps for the Gaussian mechanism.

    eps = log(delta / Phi(-Phi^{-1}(1 - delta) - mu)); note that
    -Phi^{-1}(1 - delta) is evaluated as Phi^{-1}(delta) to stay accurate
    for small delta.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    denom = phi(phi_inv(delta) - mu)
    if denom == 0.0:
        return math.inf
    return math.log(delta / denom)


def pbdp_delta_finite(pair: FiniteMechanismPair, eps: float) -> float:
    """Tight pointwise delta of a finite pair at a given eps.

    Characterization through the exact trade-off T of the pair: the
    smallest delta with T(e^{-eps} * delta) <= delta, evaluated in both
    neighbor directions with the max taken.  The feasible delta form an
    upper interval because T is concave, so bisection applies.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    return max(
        _pbdp_delta_direction(np_tradeoff_finite(pair), eps),
        _pbdp_delta_direction(np_tradeoff_finite(pair.reversed()), eps),
    )


def _pbdp_delta_direction(curve, eps: float) -> float:
    scale = math.exp(-eps)
    lo, hi = 0.0, 1.0
    for _ in range(DELTA_BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if curve.power(scale * mid) <= mid + 1e-15:
            hi = mid
        else:
            lo = mid
    return hi


def adp_gaussian_curve(mu: float, eps_hi: float = 20.0) -> EpsDeltaCurve:
    """Exact approximate-DP curve of a Gaussian mechanism."""
    if mu <= 0:
        raise ValueError("mu must be positive")

    def fn(eps: float) -> float:
        return phi(-eps / mu + mu / 2.0) - math.exp(eps) * phi(-eps / mu - mu / 2.0)

    return EpsDeltaCurve(Semantics.APPROXIMATE_DP, fn, 0.0, eps_hi)


def zcdp_bound_curve(rho: float, eps_hi: float | None = None) -> EpsDeltaCurve:
    """Upper bound on the pointwise delta curve implied by rho-zCDP."""
    hi = eps_hi if eps_hi is not None else rho + math.sqrt(4.0 * rho * math.log(1e12))
    return EpsDeltaCurve(
        Semantics.ZCDP_TAIL_BOUND, lambda eps: zcdp_to_delta(rho, eps), 0.0, hi
    )


def degenerate_curve(eps: float, delta: float = 0.0) -> EpsDeltaCurve:
    """Single-point curve, mostly useful for bound comparisons."""
    return EpsDeltaCurve(Semantics.APPROXIMATE_DP, lambda _e: delta, eps, eps)


class BudgetExceededError(RuntimeError):
    """Registering this entry would push the odometer past its cap."""

    def __init__(self, label: str, requested: Fraction, remaining: Fraction):
        self.label = label
        self.requested = requested
        self.remaining = remaining
        super().__init__(
            f"entry {label!r} needs rho={float(requested):g} but only "
            f"{float(remaining):g} of the budget remains"
        )


def _as_fraction(x: float | int | str | Fraction) -> Fraction:
    """Exact rational from a number; floats go through their shortest repr
    so that decimal-looking budgets like 0.07 stay exact."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


class Odometer:
    """Append-only rho ledger enforcing a hard cap under adaptive use.

    Registration is atomic: an entry either fits the remaining budget and
    is appended, or the odometer refuses and stays unchanged.  Arithmetic
    is exact rational so that budgets like 2.56 + 0.07 land on the cap
    without float drift.  Mutation is serialized; readers may snapshot.
    """

    def __init__(self, cap: float | int | str | Fraction):
        cap = _as_fraction(cap)
        if cap < 0:
            raise ValueError("cap must be nonnegative")
        self._cap = cap
        self._entries: list[tuple[str, Fraction]] = []
        self._lock = threading.Lock()

    @property
    def cap(self) -> Fraction:
        return self._cap

    @property
    def spent(self) -> Fraction:
        with self._lock:
            return sum((r for _, r in self._entries), Fraction(0))

    @property
    def remaining(self) -> Fraction:
        return self._cap - self.spent

    @property
    def entries(self) -> tuple[tuple[str, Fraction], ...]:
        with self._lock:
            return tuple(self._entries)

    def register(self, label: str, rho: float | int | str | Fraction) -> Fraction:
        """Append an entry; returns the remaining budget afterwards."""
        rho = _as_fraction(rho)
        if rho < 0:
            raise ValueError("rho must be nonnegative")
        with self._lock:
            spent = sum((r for _, r in self._entries), Fraction(0))
            if spent + rho > self._cap:
                raise BudgetExceededError(label, rho, self._cap - spent)
            self._entries.append((label, rho))
            return self._cap - spent - rho

    def to_ledger_text(self) -> str:
        """Audit serialization: one tab-separated line per entry."""
        lines = [f"# cap\t{self._cap}"]
        running = Fraction(0)
        for label, rho in self.entries:
            running += rho
            lines.append(f"{label}\t{rho}\t{running}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_ledger_text(cls, text: str) -> "Odometer":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# cap\t"):
            raise ValueError("ledger must start with a '# cap' line")
        odo = cls(Fraction(lines[0].split("\t", 1)[1]))
        for ln in lines[1:]:
            parts = ln.split("\t")
            if len(parts) != 3:
                raise ValueError(f"malformed ledger line: {ln!r}")
            label, rho, running = parts
            odo.register(label, Fraction(rho))
            if odo.spent != Fraction(running):
                raise ValueError(f"ledger running total mismatch at {label!r}")
        return odo


__all__ = [
    "Semantics",
    "EpsDeltaCurve",
    "ZcdpProfile",
    "RdpProfile",
    "PrivacyProfile",
    "zcdp_compose",
    "rdp_compose",
    "renyi_divergence",
    "zcdp_to_delta",
    "rdp_to_delta",
    "fdp_to_epsdelta",
    "gaussian_pbdp_epsilon",
    "pbdp_delta_finite",
    "adp_gaussian_curve",
    "zcdp_bound_curve",
    "degenerate_curve",
    "Odometer",
    "BudgetExceededError",
]
