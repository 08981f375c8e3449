"""Exponent algebra and regime classification for the (2,q)-Laplacian problem.

Everything here is a closed form in (N, p, q); no grids are involved.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class _Unbounded:
    """Sentinel for a Sobolev exponent that is +infinity.

    Compares greater than every real number and equal only to itself.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "unbounded"

    __str__ = __repr__

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("qlap.unbounded")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __float__(self):
        return math.inf


UNBOUNDED = _Unbounded()


class ParameterError(ValueError):
    """Invalid parameters or a parameter combination outside an operation's domain."""


@dataclass(frozen=True)
class ProblemParams:
    N: int
    q: float
    p: float
    alpha: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not self.q > 2:
            raise ParameterError(f"q must exceed 2, got {self.q}")
        if not self.p > 2:
            raise ParameterError(f"p must exceed 2, got {self.p}")
        if not self.m > 0:
            raise ParameterError(f"m must be positive, got {self.m}")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be nonnegative, got {self.alpha}")
        for name in ("q", "p", "alpha", "m"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    def replace(self, **changes) -> "ProblemParams":
        values = dict(N=self.N, q=self.q, p=self.p, alpha=self.alpha, m=self.m)
        values.update(changes)
        return ProblemParams(**values)

    def as_dict(self) -> dict:
        return dict(N=self.N, q=self.q, p=self.p, alpha=self.alpha, m=self.m)


def mass_critical_exponents(N: int, q: float) -> tuple[float, float]:
    """Return ``(p2, pq) = (2 + 4/N, q(1 + 2/N))``."""
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N!r}")
    if not q > 2:
        raise ParameterError(f"q must exceed 2 (regime undefined), got {q}")
    return 2.0 + 4.0 / N, q * (1.0 + 2.0 / N)


def sobolev_exponent(N: int, s: float):
    """``s* = Ns/(N-s)_+``, or ``UNBOUNDED`` when s >= N."""
    if s >= N:
        return UNBOUNDED
    return N * s / (N - s)


def delta(N: int, s: float) -> float:
    """``delta_s = N(s-2)/(2s)``, so that ``s*delta_s = N(s-2)/2``."""
    return N * (s - 2.0) / (2.0 * s)


def nu(N: int, p: float, r: float) -> float:
    """Gagliardo-Nirenberg exponent ``nu_{p,r}``.

    Requires ``r > 2N/(N+2)``; the result lies in (0, 1) when also ``2 < p < r*``.
    """
    if not r > 2.0 * N / (N + 2.0):
        raise ParameterError(f"nu_(p,r) needs r > 2N/(N+2) = {2.0 * N / (N + 2.0)}, got r={r}")
    return N * r / (r * (N + 2.0) - 2.0 * N) * (p - 2.0) / p


@dataclass(frozen=True)
class ExponentTable:
    N: int
    p: float
    q: float
    p2: float
    pq: float
    two_star: object
    q_star: object
    delta_p: float
    delta_q: float
    nu_p2: float | None
    nu_pq: float | None

    @property
    def a_grad_q(self) -> float:
        """Exponent of theta in ``||grad u_theta||_q^q``: ``q(1 + delta_q)``."""
        return self.q * (1.0 + self.delta_q)

    @property
    def b_lp(self) -> float:
        """Exponent of theta in ``||u_theta||_p^p``: ``p*delta_p``."""
        return self.p * self.delta_p

    def nu(self, r: float) -> float:
        return nu(self.N, self.p, r)

    def as_dict(self) -> dict:
        def enc(x):
            return str(x) if x is UNBOUNDED else x

        return dict(
            N=self.N, p=self.p, q=self.q, p2=self.p2, pq=self.pq,
            two_star=enc(self.two_star), q_star=enc(self.q_star),
            delta_p=self.delta_p, delta_q=self.delta_q,
            nu_p2=self.nu_p2, nu_pq=self.nu_pq,
        )


def gn_exponents(params: ProblemParams) -> ExponentTable:
    N, p, q = params.N, params.p, params.q
    p2, pq = mass_critical_exponents(N, q)
    two_star = sobolev_exponent(N, 2.0)
    q_star = sobolev_exponent(N, q)
    # nu_{p,r} is only meaningful for p < r*
    nu_p2 = nu(N, p, 2.0) if p < two_star else None
    nu_pq = nu(N, p, q) if p < q_star else None
    return ExponentTable(
        N=N, p=p, q=q, p2=p2, pq=pq, two_star=two_star, q_star=q_star,
        delta_p=delta(N, p), delta_q=delta(N, q), nu_p2=nu_p2, nu_pq=nu_pq,
    )


class RegimeKind(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    MASS_CRITICAL_LOWER = "MassCriticalLower"
    INTERMEDIATE = "Intermediate"
    MASS_CRITICAL_UPPER = "MassCriticalUpper"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    zero_mass_eligible: bool

    @property
    def is_intermediate(self) -> bool:
        return self.kind is RegimeKind.INTERMEDIATE


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=0.0)


def zero_mass_eligible(N: int, p: float, q: float) -> bool:
    """Hypotheses for nontrivial zero-mass radial solutions: N >= 3 and 2* < p < q*."""
    if N < 3:
        return False
    return sobolev_exponent(N, 2.0) < p < sobolev_exponent(N, q)


def classify_regime(params: ProblemParams) -> Regime:
    N, p, q = params.N, params.p, params.q
    p2, pq = mass_critical_exponents(N, q)
    if _same(p, p2):
        kind = RegimeKind.MASS_CRITICAL_LOWER
    elif _same(p, pq):
        kind = RegimeKind.MASS_CRITICAL_UPPER
    elif p < p2:
        kind = RegimeKind.SUBCRITICAL
    elif p < pq:
        kind = RegimeKind.INTERMEDIATE
    else:
        kind = RegimeKind.SUPERCRITICAL
    return Regime(kind=kind, zero_mass_eligible=zero_mass_eligible(N, p, q))


def require_intermediate(params: ProblemParams) -> ExponentTable:
    """Return the exponent table, raising unless p2 < p < pq."""
    regime = classify_regime(params)
    if not regime.is_intermediate:
        tab = gn_exponents(params)
        raise ParameterError(
            f"(N={params.N}, q={params.q}, p={params.p}) is {regime.kind.value}; "
            f"this operation needs p2={tab.p2:g} < p < pq={tab.pq:g}"
        )
    return gn_exponents(params)


def require_coercive(params: ProblemParams) -> ExponentTable:
    """Return the exponent table, raising unless p < pq (E bounded below on S_m)."""
    tab = gn_exponents(params)
    if not params.p < tab.pq or _same(params.p, tab.pq):
        raise ParameterError(
            f"p={params.p} must be below pq={tab.pq:g}: E is unbounded below on S_m otherwise"
        )
    return tab


class CertificateKind(str, enum.Enum):
    POHOZAEV = "Pohozaev"
    RADIAL_COMPARISON = "RadialComparison"
    NOT_CERTIFIED = "NotCertified"


@dataclass(frozen=True)
class CertificateOutcome:
    kind: CertificateKind
    # coefficients of ||grad u||_2^2 and ||grad u||_q^q in the zero-mass Pohozaev combination
    coefficients: tuple[float, float]
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.kind is not CertificateKind.NOT_CERTIFIED


def liouville_certificate(N: int, p: float, q: float) -> CertificateOutcome:
    """Decide whether the zero-mass equation is known to have only u = 0.

    Combining the Pohozaev identity with the Nehari identity leaves
    ``c2 ||grad u||_2^2 + cq ||grad u||_q^q = 0``; if ``c2 <= 0`` and ``cq < 0``
    every solution in X vanishes.  Otherwise for N <= 4 radial solutions are
    excluded by comparison with an explicit subsolution.
    """
    if not (p > 2 and q > 2):
        raise ParameterError("liouville_certificate needs p > 2 and q > 2")
    c2 = (N - 2.0) / (2.0 * N) - 1.0 / p
    cq = 1.0 / q - 1.0 / N - 1.0 / p
    coeffs = (c2, cq)
    if c2 <= 0 and cq < 0:
        return CertificateOutcome(
            CertificateKind.POHOZAEV, coeffs, "Pohozaev combination has nonpositive coefficients"
        )
    if N <= 4:
        return CertificateOutcome(
            CertificateKind.RADIAL_COMPARISON, coeffs,
            "radial comparison with a log / r^(2-N) subsolution (N <= 4)",
        )
    return CertificateOutcome(
        CertificateKind.NOT_CERTIFIED, coeffs,
        "N >= 5 and p > 2*: nontrivial zero-mass solutions may exist",
    )


@dataclass
class IterationTrace:
    N: int
    p: float
    values: list[float] = field(default_factory=list)
    steps: int = 0
    # first index n at which (p-1) a_n >= N, where a log-corrected bound closes the argument
    log_branch_index: int | None = None

    @property
    def final(self) -> float:
        return self.values[-1]


def decay_iteration(N: int, p: float, max_steps: int = 10_000) -> IterationTrace:
    """Iterate ``a_{n+1} = (p-1) a_n - 2`` from ``a_0 = (N-2)/2`` up to ``a_n >= N-2``.

    The sequence is the chain of improving decay rates |u(r)| <~ r^(-a_n) for
    zero-mass radial solutions.  ``log_branch_index`` records when the
    shortcut ``(p-1) a_n >= N`` first becomes available.
    """
    if int(N) != N or N < 3:
        raise ParameterError(f"decay_iteration needs N >= 3, got {N}")
    two_star = 2.0 * N / (N - 2.0)
    if not p > two_star or _same(p, two_star):
        raise ParameterError(f"decay_iteration needs p > 2* = {two_star:g}, got p={p}")
    a = (N - 2.0) / 2.0
    trace = IterationTrace(N=int(N), p=float(p), values=[a])
    for n in range(max_steps + 1):
        if trace.log_branch_index is None and (p - 1.0) * a >= N:
            trace.log_branch_index = n
        if a >= N - 2.0:
            trace.steps = n
            return trace
        a = (p - 1.0) * a - 2.0
        trace.values.append(a)
    raise ParameterError(f"decay_iteration did not terminate within {max_steps} steps")
