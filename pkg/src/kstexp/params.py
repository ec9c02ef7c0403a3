"""Closed-form parameter arithmetic for K_{s,t} expansion supersaturation.

Exponents are kept as exact Fractions; real values are formed only at the
end, in log space, so that huge or tiny magnitudes do not overflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import ParameterError

__all__ = [
    "FormulaConfig",
    "OptimizeResult",
    "optimize_max",
    "TauValue",
    "tau_technical",
    "tau_cor",
    "tau3",
    "tau_r",
    "alpha_r",
    "Lifted",
    "lift",
    "EllChoice",
    "select_ell",
    "ell_breakpoints",
    "ell_formula",
    "mu_value",
    "pi_value",
    "r_bound",
    "hypothesis_check",
    "ExponentReport",
    "thresholds",
    "vanilla_threshold",
    "random_turan_upper",
    "random_turan_lower",
    "theorem_value",
]

F = Fraction


@dataclass(frozen=True)
class FormulaConfig:
    """Every constant the formulas leave unspecified.

    ``log_multiplier``/``k_log_exponent`` shape the (12 log n)^100 lower end
    of the admissible k range; log factors use ``log_base`` (natural by default).
    """

    log_base: float = math.e
    log_multiplier: float = 12.0
    C: float = 0.0
    C3: float = 0.0
    Cr: float = 0.0
    C_prime: float = 1.0
    K0: float = 1.0
    k0: float = 1.0
    L0: float = 1.0
    delta: float = 1e-3
    kappa: float = 1.0
    c: float = 1e-3
    k_log_exponent: float = 100.0

    def __post_init__(self):
        for name in ("log_base", "log_multiplier", "K0", "k0", "L0", "delta", "kappa", "c"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")
        for name in ("C", "C3", "Cr", "C_prime", "k_log_exponent"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be nonnegative")
        if self.log_base == 1:
            raise ParameterError("log base 1")

    def log(self, n: float) -> float:
        return math.log(n) / math.log(self.log_base)

    def k_range(self, n: float, s: int) -> tuple:
        lo = self.K0 * (self.log_multiplier * self.log(n)) ** self.k_log_exponent
        return lo, n ** (3 / s)


DEFAULT_CONFIG = FormulaConfig()


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _check_positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ParameterError(f"{k} must be positive, got {v}")


def _check_st(s, t):
    if int(s) != s or int(t) != t or s < 1 or t < 1:
        raise ParameterError(f"s, t must be positive integers, got {s}, {t}")


# ---------------------------------------------------------------- optimize


@dataclass(frozen=True)
class OptimizeResult:
    value: float
    argmax: tuple
    preconditions: dict

    @property
    def preconditions_hold(self) -> bool:
        return all(self.preconditions.values())


def optimize_max(pi: float, A: float, B: float, s: int, t: int) -> OptimizeResult:
    """max over 1<=a<=s, 1<=b<=t of pi^(1-ab) A^(1-a) B^(1-b), by direct evaluation.

    Preconditions A >= B, pi >= 1/B and pi >= (A^(s-1) B^(t-1))^(-1/(st-1))
    are reported, not enforced; the value is returned either way.
    """
    _check_st(s, t)
    _check_positive(pi=pi, A=A, B=B)
    lp, la, lb = math.log(pi), math.log(A), math.log(B)
    best, arg = -math.inf, None
    for a in range(1, s + 1):
        for b in range(1, t + 1):
            v = (1 - a * b) * lp + (1 - a) * la + (1 - b) * lb
            if v > best:
                best, arg = v, (a, b)
    if s * t > 1:
        floor = -((s - 1) * la + (t - 1) * lb) / (s * t - 1)
        third = lp >= floor
    else:
        third = True
    pre = {"A>=B": A >= B, "pi>=1/B": pi * B >= 1, "pi>=(A^(s-1)B^(t-1))^(-1/(st-1))": third}
    return OptimizeResult(_exp(best), arg, pre)


# ---------------------------------------------------------------- tau family


@dataclass(frozen=True)
class TauValue:
    value: float
    term: int
    terms: tuple
    log_value: float = 0.0

    def __float__(self):
        return self.value


def _max_terms(log_terms: list) -> tuple:
    i = max(range(len(log_terms)), key=lambda j: (log_terms[j], -j))
    return i, log_terms[i]


def _tau_from_terms(log_terms: list, s: int, n: float, log_extra: float = 0.0) -> TauValue:
    """max{terms}^(s-1) n^(2-1/s) times exp(log_extra)."""
    i, lt = _max_terms(log_terms)
    lv = (s - 1) * lt + (2 - 1 / s) * math.log(n) + log_extra
    return TauValue(_exp(lv), i + 1, tuple(_exp(x) for x in log_terms), lv)


def technical_exponents(s: int, t: int) -> list:
    """(ell, k, n) exponents of the three terms inside tau_technical's max."""
    return [
        (F(-1), F(0), F(0)),
        (F(3 * t - 1, s * t - 1), F(-t, s * t - 1), F(-(s - 2), s * (s * t - 1))),
        (F(0), F(0), F(-(s - 1), s * (s * t - 1))),
    ]


def cor_exponents(s: int, t: int) -> list:
    """(k, n) exponents of the three terms inside tau_cor's max."""
    D = s * t + 3 * t - 2
    return [
        (F(-1, 3), F(0)),
        (F(-t, D), F(-(s - 2), s * D)),
        (F(0), F(-(s - 1), s * (s * t - 1))),
    ]


def tau3_exponents(s: int, t: int) -> list:
    """(m, n) exponents of the three terms inside tau3's max."""
    D = s * t + 3 * t - 2
    return [
        (F(-1, 3), 1 - F(1, s)),
        (F(-t, D), F(3 * s * t - 3 * t - s + 2, s * D)),
        (F(0), F(-(s - 1), s * (s * t - 1))),
    ]


def taur_exponents(s: int, t: int, r: int) -> list:
    """(m, n) exponents of the three terms inside tau_r's max."""
    D = s * t + 3 * t - 2
    return [
        (F(-2, 3 * (r - 1)), F(2 * r, 3 * (r - 1)) - F(1, s)),
        (F(-2 * t, (r - 1) * D), F(2 * r * t, (r - 1) * D) - F(3 * t + s - 2, s * D)),
        (F(0), F(-(s - 1), s * (s * t - 1))),
    ]


def mu_value(ell: float, k: float, n: float, s: int, t: int) -> TauValue:
    """The bare max inside tau_technical (no power, no n factor)."""
    _check_positive(ell=ell, k=k, n=n)
    L = [float(a) * math.log(ell) + float(b) * math.log(k) + float(c) * math.log(n) for a, b, c in technical_exponents(s, t)]
    i, lt = _max_terms(L)
    return TauValue(_exp(lt), i + 1, tuple(_exp(x) for x in L), lt)


def pi_value(k: float, n: float, s: int, t: int) -> TauValue:
    """The bare max inside tau_cor."""
    _check_positive(k=k, n=n)
    L = [float(a) * math.log(k) + float(b) * math.log(n) for a, b in cor_exponents(s, t)]
    i, lt = _max_terms(L)
    return TauValue(_exp(lt), i + 1, tuple(_exp(x) for x in L), lt)


def tau_technical(ell: float, k: float, n: float, s: int, t: int) -> TauValue:
    _check_st(s, t)
    _check_positive(ell=ell, k=k, n=n)
    L = [float(a) * math.log(ell) + float(b) * math.log(k) + float(c) * math.log(n) for a, b, c in technical_exponents(s, t)]
    return _tau_from_terms(L, s, n)


def tau_cor(k: float, n: float, s: int, t: int) -> TauValue:
    _check_st(s, t)
    _check_positive(k=k, n=n)
    L = [float(a) * math.log(k) + float(b) * math.log(n) for a, b in cor_exponents(s, t)]
    return _tau_from_terms(L, s, n)


def _log_power(n: float, C: float, cfg: FormulaConfig) -> float:
    """log of (log n)^C."""
    if C == 0:
        return 0.0
    return C * math.log(cfg.log(n))


def tau3(n: float, m: float, s: int, t: int, C3: Optional[float] = None, cfg: FormulaConfig = DEFAULT_CONFIG) -> TauValue:
    _check_st(s, t)
    _check_positive(n=n, m=m)
    C3 = cfg.C3 if C3 is None else C3
    L = [float(a) * math.log(m) + float(b) * math.log(n) for a, b in tau3_exponents(s, t)]
    return _tau_from_terms(L, s, n, _log_power(n, C3, cfg))


def tau_r(n: float, m: float, s: int, t: int, r: int, Cr: Optional[float] = None, cfg: FormulaConfig = DEFAULT_CONFIG) -> TauValue:
    _check_st(s, t)
    _check_positive(n=n, m=m)
    if r < 3:
        raise ParameterError(f"tau_r needs r >= 3, got {r}")
    Cr = cfg.Cr if Cr is None else Cr
    L = [float(a) * math.log(m) + float(b) * math.log(n) for a, b in taur_exponents(s, t, r)]
    return _tau_from_terms(L, s, n, _log_power(n, Cr, cfg))


def alpha_r(s: int, r: int) -> Fraction:
    """max{r - 3(r-1)/(2s), r-1}."""
    if s < 1 or r < 2:
        raise ParameterError("alpha_r needs s >= 1 and r >= 2")
    return max(r - F(3 * (r - 1), 2 * s), F(r - 1))


# ---------------------------------------------------------------- lifting


@dataclass(frozen=True)
class Lifted:
    M: Callable[[float], float]
    gamma: Callable[[float], float]
    tau: Callable[[float, float], float]
    r0: int
    r: int
    C: float


def lift(
    M: Callable[[float], float],
    gamma: Callable[[float], float],
    tau: Callable[[float, float], float],
    r0: int,
    r: int,
    C: float = 0.0,
    cfg: FormulaConfig = DEFAULT_CONFIG,
) -> Lifted:
    """Balanced-supersaturation parameters for r-expansions from those for r0.

    M_r(n) = max{M(n)^((r-1)/(r0-1)) n^(-(r-r0)/(r0-1)), n^(r-1)} (log n)^C,
    gamma_r(n) = gamma(n) (log n)^C,
    tau_r(n, m) = tau(n, n^((r-r0)/(r-1)) m^((r0-1)/(r-1)) (log n)^(-C)) (log n)^C.
    """
    if not (r > r0 >= 2):
        raise ParameterError(f"lift needs r > r0 >= 2, got r0={r0}, r={r}")
    e1 = F(r - 1, r0 - 1)
    e2 = F(r - r0, r0 - 1)
    e3 = F(r - r0, r - 1)
    e4 = F(r0 - 1, r - 1)

    def lc(n):
        return cfg.log(n) ** C if C else 1.0

    def M_r(n):
        a = _exp(float(e1) * math.log(M(n)) - float(e2) * math.log(n))
        return max(a, n ** (r - 1)) * lc(n)

    def gamma_r(n):
        return gamma(n) * lc(n)

    def tau_lifted(n, m):
        arg = _exp(float(e3) * math.log(n) + float(e4) * math.log(m)) / lc(n)
        return float(tau(n, arg)) * lc(n)

    return Lifted(M_r, gamma_r, tau_lifted, r0, r, C)


# ---------------------------------------------------------------- ell selector


def ell_breakpoints(s: int, t: int) -> tuple:
    """n-exponents of the three interior k breakpoints and the upper end 3/s."""
    return (
        F(3 * (s - 2), s * (s * t - 2)),
        F(4 * s * t - s - 3 * t, s * t * (s * t - 1)),
        F(s * t + 2 * s - 3, s * (s * t - 1)),
        F(3, s),
    )


def ell_formula(range_id: int, k: float, n: float, s: int, t: int) -> float:
    """The choice of ell used on each of the four k ranges."""
    D = s * t + 3 * t - 2
    if range_id == 1:
        return k ** (1 / 3)
    if range_id == 2:
        return _exp(t / D * math.log(k) + (s - 2) / (s * D) * math.log(n))
    if range_id == 3:
        return _exp((s - 1) / (s * (s * t - 1)) * math.log(n))
    if range_id == 4:
        return _exp(0.5 * math.log(k) - math.log(n) / (2 * s))
    raise ParameterError(f"no ell range {range_id}")


@dataclass(frozen=True)
class EllChoice:
    ell: float
    range_id: object
    formula_range: int
    window: tuple
    valid: bool
    mu: float
    pi: float
    mu_le_pi: bool
    in_global_range: bool
    k_range: tuple

    def report(self) -> dict:
        return {
            "ell": self.ell,
            "range": self.range_id,
            "formula_range": self.formula_range,
            "window": list(self.window),
            "valid": self.valid,
            "mu": self.mu,
            "pi": self.pi,
            "mu<=pi": self.mu_le_pi,
            "in_global_range": self.in_global_range,
        }


def select_ell(k: float, n: float, s: int, t: int, cfg: FormulaConfig = DEFAULT_CONFIG, rtol: float = 1e-9) -> EllChoice:
    """Pick ell by the range k falls in; check the validity window and mu <= pi.

    Outside [K0 (12 log n)^100, n^(3/s)] the range id is ``"out"`` and ell
    comes from the nearest range's formula.
    """
    _check_st(s, t)
    _check_positive(k=k, n=n)
    b = [n ** float(x) for x in ell_breakpoints(s, t)]
    if k <= b[0]:
        rid = 1
    elif k <= b[1]:
        rid = 2
    elif k <= b[2]:
        rid = 3
    else:
        rid = 4
    ell = ell_formula(rid, k, n, s, t)
    lo_k, hi_k = cfg.k_range(n, s)
    inside = lo_k <= k <= hi_k * (1 + rtol)
    lo = max(cfg.k0, math.sqrt(k) * n ** (-1 / (2 * s)))
    hi = k ** (1 / 3)
    valid = lo <= ell * (1 + rtol) and ell <= hi * (1 + rtol)
    mu = mu_value(ell, k, n, s, t).value
    pi = pi_value(k, n, s, t).value
    return EllChoice(ell, rid if inside else "out", rid, (lo, hi), valid, mu, pi, mu <= pi * (1 + rtol), inside, (lo_k, hi_k))


# ---------------------------------------------------------------- r bounds


def r_bound(s: int, t: int) -> Fraction:
    """1 + 2(st-1)t / ((3t-1)(t-1))."""
    if t < 2:
        raise ParameterError("r_bound needs t >= 2")
    return 1 + F(2 * (s * t - 1) * t, (3 * t - 1) * (t - 1))


def hypothesis_check(r: int, s: int, t: int) -> dict:
    """Which of the two r-hypotheses hold, and whether r clears r_bound."""
    if not (3 <= s <= t):
        raise ParameterError(f"needs 3 <= s <= t, got s={s}, t={t}")
    b1_bound = F(2 * s, 3) + 2
    b2_floor = math.floor(b1_bound)
    bullet1 = r >= b1_bound
    bullet2 = r >= b2_floor and t >= F(8 * s, 3)
    rb = r_bound(s, t)
    return {
        "r": r,
        "s": s,
        "t": t,
        "bullet1_bound": str(b1_bound),
        "bullet1": bullet1,
        "bullet2_floor": b2_floor,
        "bullet2_t_bound": str(F(8 * s, 3)),
        "bullet2": bullet2,
        "r_bound": str(rb),
        "r_bound_value": float(rb),
        "r_bound_holds": r >= rb,
        "hypothesis_holds": bullet1 or bullet2,
    }


# ---------------------------------------------------------------- exponents


def _frac_str(x: Fraction) -> str:
    return str(x)


@dataclass(frozen=True)
class ExponentReport:
    s: int
    t: int
    r: int
    threshold_exponent: Fraction
    value_exponent: Fraction
    density: Fraction
    inverse_density: Fraction
    alpha_r: Fraction
    tau_terms: tuple
    count_exponents: tuple
    vanilla_m_exponent: Fraction
    crossover_r: Fraction
    hypothesis: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "t": self.t,
            "r": self.r,
            "threshold_exponent": _frac_str(self.threshold_exponent),
            "value_exponent": _frac_str(self.value_exponent),
            "d_r": _frac_str(self.density),
            "inverse_d_r": _frac_str(self.inverse_density),
            "alpha_r": _frac_str(self.alpha_r),
            "tau_terms": [[_frac_str(a), _frac_str(b)] for a, b in self.tau_terms],
            "count_exponents": [_frac_str(x) for x in self.count_exponents],
            "vanilla_m_exponent": _frac_str(self.vanilla_m_exponent),
            "crossover_r": _frac_str(self.crossover_r),
            "hypothesis": self.hypothesis,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        d = self.as_dict()
        w = max(len(k) for k in d)
        lines = []
        for key in sorted(d):
            v = d[key]
            if isinstance(v, dict):
                v = " ".join(f"{a}={b}" for a, b in sorted(v.items()))
            elif isinstance(v, list):
                v = " ".join(str(x) if not isinstance(x, list) else "(" + ",".join(x) + ")" for x in v)
            lines.append(f"{key.ljust(w)}  {v}")
        return "\n".join(lines) + "\n"


def vanilla_threshold(s: int, t: int, r: int) -> tuple:
    """(m exponent, (st, s+t-2st), crossover r) for the plain counting bound."""
    _check_st(s, t)
    second = r - F(r - 1, 2) * (F(3, s) - F(1, s * t))
    m_exp = max(F(r - 1), second)
    return m_exp, (F(s * t), F(s + t - 2 * s * t)), F(2 * s * t, 3 * t - 1) + 1


def thresholds(s: int, t: int, r: int) -> ExponentReport:
    _check_st(s, t)
    if r < 2 or s * t < 2:
        raise ParameterError("thresholds need r >= 2 and st >= 2")
    frac = F(s + t - 2, s * t - 1)
    dens = F(s * t - 1, (r - 2) * s * t + s + t - r)
    m_exp, counts, cross = vanilla_threshold(s, t, r)
    terms = tuple(taur_exponents(s, t, r)) if r >= 3 else ()
    try:
        hyp = hypothesis_check(r, s, t)
    except ParameterError:
        hyp = {}
    return ExponentReport(
        s, t, r, -r + 2 - frac, 2 - frac, dens, 1 / dens, alpha_r(s, r), terms, counts, m_exp, cross, hyp
    )


# ---------------------------------------------------------------- random Turán bounds


def random_turan_upper(p: float, n: float, m: float, tau: Callable[[float, float], float], C_prime: float = 1.0, cfg: FormulaConfig = DEFAULT_CONFIG) -> float:
    """max{C' p m, tau(n, m) (log n)^C'}."""
    return max(C_prime * p * m, float(tau(n, m)) * cfg.log(n) ** C_prime)


def random_turan_lower(p: float, n: float, r: int, ex_n: float, density: Fraction, cfg: FormulaConfig = DEFAULT_CONFIG) -> float:
    """max{p ex(n, F), n^(r - 1/d_r) / log n}."""
    return max(p * ex_n, n ** (r - 1 / float(density)) / cfg.log(n))


def theorem_value(p: float, n: float, s: int, t: int, r: int) -> float:
    """max{p n^(r-1), n^(2-(s+t-2)/(st-1))}, the growth rate of the random Turán number."""
    return max(p * n ** (r - 1), n ** float(2 - F(s + t - 2, s * t - 1)))
