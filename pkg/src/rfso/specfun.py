"""Numerical special functions built on Mellin-Barnes contour integration.

The module provides the numeric substrate used by the channel and metric
layers:

    log_gamma(z)                complex log-gamma (Lanczos approximation)
    reg_lower_gamma(a, x)       regularized lower incomplete gamma P(a, x)
    meijer_g(spec, x)           univariate Meijer-G along a vertical contour
    fox_h_univariate(factors)   same engine, arbitrary real gamma weights
    fox_h_bivariate(spec, ...)  double Mellin-Barnes integral
    residue_series(factors)     ascending (small-argument) pole expansion

Every integrand is a finite product of gamma factors

    Gamma(offset + coef_s * s + coef_t * t) ** (+1 or -1)

described by :class:`GammaFactor`.  Contours are vertical lines whose
abscissas are chosen so every numerator factor has a positive real argument
on the contour (the standard pole-separation rule).  All gamma products are
accumulated as sums of log-gamma values and exponentiated once, so parameter
counts in the hundreds cannot overflow; callers hand in ``log_prefactor`` and
``log_x`` when the natural argument or scale of an expression leaves the
range of double precision.

Evaluation uses the trapezoidal rule on the exponentially decaying integrand
with adaptive doubling of node count and extension of the truncation window.
The integrand on a vertical line satisfies F(-u) = conj(F(u)) for real
parameters and positive arguments, so only half of each line is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

_LN2 = math.log(2.0)
_LN_PI = math.log(math.pi)
_LN_2PI = math.log(2.0 * math.pi)
_EPS = np.finfo(float).eps

__all__ = [
    "SpecfunError",
    "GammaPoleError",
    "ContourError",
    "ConvergenceError",
    "GammaFactor",
    "MeijerGSpec",
    "BivariateFoxHSpec",
    "ContourPolicy",
    "EvalResult",
    "DEFAULT_POLICY",
    "log_gamma",
    "reg_lower_gamma",
    "meijer_g",
    "fox_h_univariate",
    "fox_h_bivariate",
    "residue_series",
]


class SpecfunError(Exception):
    """Base class for special-function evaluation failures."""


class GammaPoleError(SpecfunError):
    """log_gamma was evaluated at a non-positive integer."""


class ContourError(SpecfunError):
    """No vertical contour separates the pole families of the integrand."""


class ConvergenceError(SpecfunError):
    """The quadrature failed to reach the requested tolerance in budget."""


# Lanczos approximation, g = 607/128, 15 coefficients.  Relative accuracy of
# the resulting log-gamma is ~1e-15 on Re(z) >= 0.5.
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C0 = 0.99999999999999709182
_LANCZOS_C = (
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)


def _lanczos_log_gamma(z):
    """Lanczos series; valid for Re(z) >= 0.5."""
    zm1 = z - 1.0
    s = np.full_like(z, _LANCZOS_C0)
    for k, c in enumerate(_LANCZOS_C):
        s = s + c / (zm1 + (k + 1))
    t = zm1 + _LANCZOS_G + 0.5
    return 0.5 * _LN_2PI + (zm1 + 0.5) * np.log(t) - t + np.log(s)


def _log_sin_pi(z):
    """log(sin(pi z)) with overflow-safe asymptotics for large |Im z|.

    For |Im(pi z)| beyond ~30 the direct sine would still be finite but the
    asymptotic form is cheaper and avoids any risk of overflow; within the
    strip 0 < Re z < 1 both branches agree with the principal logarithm.
    """
    w = np.pi * z
    im = w.imag
    out = np.empty_like(z)
    small = np.abs(im) < 30.0
    if small.any():
        out[small] = np.log(np.sin(w[small]))
    pos = ~small & (im > 0)
    if pos.any():
        wp = w[pos]
        out[pos] = (0.5j * np.pi - _LN2) - 1j * wp + np.log1p(-np.exp(2j * wp))
    neg = ~small & (im <= 0)
    if neg.any():
        wn = w[neg]
        out[neg] = (-0.5j * np.pi - _LN2) + 1j * wn + np.log1p(-np.exp(-2j * wn))
    return out


def log_gamma(z):
    """Complex log-gamma, vectorized.

    Returns the principal branch on Re(z) >= 0.5 and the reflection-formula
    continuation elsewhere.  For Re(z) < 0 with large |Im(z)| the imaginary
    part may differ from the fully continuous branch by a multiple of 2*pi,
    which leaves exp(log_gamma(z)) exact; inside the strip 0 < Re(z) < 1 and
    on the positive real axis the value is the principal branch.

    Raises :class:`GammaPoleError` when z is within 1e-12 of a non-positive
    integer.
    """
    arr = np.asarray(z, dtype=np.complex128)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    re = arr.real
    nearest = np.round(re)
    at_pole = (np.abs(arr.imag) <= 1e-12) & (nearest <= 0.0) & (np.abs(re - nearest) <= 1e-12)
    if at_pole.any():
        bad = arr[at_pole][0]
        raise GammaPoleError(f"log_gamma pole at z = {bad}")
    out = np.empty_like(arr)
    right = re >= 0.5
    if right.any():
        out[right] = _lanczos_log_gamma(arr[right])
    left = ~right
    if left.any():
        zl = arr[left]
        out[left] = _LN_PI - _log_sin_pi(zl) - _lanczos_log_gamma(1.0 - zl)
    if scalar:
        return complex(out[0])
    return out


def _real_log_gamma(a):
    """log Gamma(a) for real a > 0."""
    return float(np.real(log_gamma(complex(a))))


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x).

    Series expansion for x < a + 1, Lentz continued fraction for the upper
    tail otherwise.  ``a`` is a positive scalar; ``x`` may be an array.
    """
    a = float(a)
    if a <= 0.0:
        raise ValueError("reg_lower_gamma requires a > 0")
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs).copy()
    if (xs < 0).any():
        raise ValueError("reg_lower_gamma requires x >= 0")
    out = np.zeros_like(xs)
    lg_a = _real_log_gamma(a)

    ser = (xs > 0) & (xs < a + 1.0)
    if ser.any():
        xv = xs[ser]
        # P(a,x) = x^a e^-x / Gamma(a) * sum_n x^n / (a (a+1) ... (a+n))
        term = np.full_like(xv, 1.0 / a)
        total = term.copy()
        denom = a
        for _ in range(1000):
            denom += 1.0
            term = term * xv / denom
            total += term
            if (np.abs(term) <= np.abs(total) * 1e-17).all():
                break
        out[ser] = total * np.exp(a * np.log(xv) - xv - lg_a)

    cf = xs >= a + 1.0
    if cf.any():
        xv = xs[cf]
        # Lentz continued fraction for Q(a,x).
        tiny = 1e-300
        b = xv + 1.0 - a
        c = np.full_like(xv, 1.0 / tiny)
        d = 1.0 / np.where(b == 0.0, tiny, b)
        h = d.copy()
        for i in range(1, 1000):
            an = -i * (i - a)
            b = b + 2.0
            d = an * d + b
            d = np.where(np.abs(d) < tiny, tiny, d)
            c = b + an / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            d = 1.0 / d
            delta = d * c
            h = h * delta
            if (np.abs(delta - 1.0) <= 1e-16).all():
                break
        q = np.exp(-xv + a * np.log(xv) - lg_a) * h
        out[cf] = 1.0 - q

    out = np.clip(out, 0.0, 1.0)
    if scalar:
        return float(out[0])
    return out


# ---------------------------------------------------------------------------
# integr and descriptions
# ---------------------------------------------------------------------------

_POSITIONS = ("numerator", "denominator")


@dataclass(frozen=True)
class GammaFactor:
    """One factor Gamma(offset + coef_s*s + coef_t*t)**(+-1) of an integrand."""

    offset: float
    coef_s: float = 0.0
    coef_t: float = 0.0
    position: str = "numerator"

    def __post_init__(self):
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "coef_s", float(self.coef_s))
        object.__setattr__(self, "coef_t", float(self.coef_t))
        if self.position not in _POSITIONS:
            raise ValueError(f"position must be one of {_POSITIONS}")

    @property
    def sign(self):
        return 1.0 if self.position == "numerator" else -1.0


@dataclass(frozen=True)
class MeijerGSpec:
    """Orders and parameters of G^{m,n}_{p,q}(x | a; b)."""

    m: int
    n: int
    p: int
    q: int
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise ValueError("MeijerGSpec orders must satisfy 0<=m<=q, 0<=n<=p")
        if len(self.a) != self.p or len(self.b) != self.q:
            raise ValueError("MeijerGSpec parameter lists must match declared orders")

    def factors(self):
        """Integrand factors of the contour integral over s."""
        fs = []
        for j in range(self.m):
            fs.append(GammaFactor(self.b[j], 1.0, 0.0, "numerator"))
        for k in range(self.n):
            fs.append(GammaFactor(1.0 - self.a[k], -1.0, 0.0, "numerator"))
        for k in range(self.n, self.p):
            fs.append(GammaFactor(self.a[k], 1.0, 0.0, "denominator"))
        for j in range(self.m, self.q):
            fs.append(GammaFactor(1.0 - self.b[j], -1.0, 0.0, "denominator"))
        return tuple(fs)


@dataclass(frozen=True)
class BivariateFoxHSpec:
    """Gamma-factor description of a double Mellin-Barnes integrand.

    ``outer_factors`` may couple s and t; ``s_factors`` and ``t_factors``
    depend on a single variable.
    """

    outer_factors: tuple = ()
    s_factors: tuple = ()
    t_factors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "outer_factors", tuple(self.outer_factors))
        object.__setattr__(self, "s_factors", tuple(self.s_factors))
        object.__setattr__(self, "t_factors", tuple(self.t_factors))
        for f in self.s_factors:
            if f.coef_t != 0.0:
                raise ValueError("s_factors must not depend on t")
        for f in self.t_factors:
            if f.coef_s != 0.0:
                raise ValueError("t_factors must not depend on s")


@dataclass(frozen=True)
class ContourPolicy:
    """Contour placement and quadrature policy."""

    abscissa_shift: float = 1e-6
    tolerance: float = 1e-11
    max_extent: float = 220.0
    node_budget: int = 32768

    def __post_init__(self):
        if self.abscissa_shift <= 0.0:
            raise ValueError("abscissa_shift must be positive")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.node_budget < 64:
            raise ValueError("node_budget must be at least 64")


DEFAULT_POLICY = ContourPolicy()


@dataclass(frozen=True)
class EvalResult:
    """Value with a conservative absolute error estimate and run metadata."""

    value: float
    error: float
    metadata: dict = field(default_factory=dict, compare=False)

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# contour selection
# ---------------------------------------------------------------------------


def _axis_coef(factor, axis):
    return factor.coef_s if axis == "s" else factor.coef_t


def _axis_window(factors, axis):
    """Open interval of abscissas keeping numerator arguments positive."""
    lo, hi = -math.inf, math.inf
    for f in factors:
        if f.position != "numerator":
            continue
        c = _axis_coef(f, axis)
        if c > 0:
            lo = max(lo, -f.offset / c)
        elif c < 0:
            hi = min(hi, f.offset / (-c))
    return lo, hi


def _perturb_axis(factors, axis, eps):
    """Shift ascending-pole numerator offsets by distinct multiples of eps."""
    out = []
    j = 0
    for f in factors:
        if f.position == "numerator" and _axis_coef(f, axis) > 0:
            j += 1
            out.append(replace(f, offset=f.offset + j * eps))
        else:
            out.append(f)
    return tuple(out)


def _pick_in_window(lo, hi):
    if lo > -math.inf and hi < math.inf:
        return 0.5 * (lo + hi)
    if lo > -math.inf:
        return lo + 0.5
    if hi < math.inf:
        return hi - 0.5
    return 0.5


# The small leading offsets let the saddle hug a window edge: for x far from
# 1 the true saddle sits within ~1/|log x| of the limiting pole, and a contour
# further out picks up exponentially large cancellation.
_ONE_SIDED_OFFSETS = (1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.03, 0.05, 0.1, 0.2, 0.4,
                      0.8, 1.6, 3.2, 6.4, 12.8, 25.0, 50.0, 100.0, 200.0, 400.0)
_TWO_SIDED_FRACS = (0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5,
                    0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998)


def _candidate_abscissas(lo, hi):
    if lo > -math.inf and hi < math.inf:
        width = hi - lo
        return [lo + f * width for f in _TWO_SIDED_FRACS]
    if lo > -math.inf:
        return [lo + o for o in _ONE_SIDED_OFFSETS]
    if hi < math.inf:
        return [hi - o for o in _ONE_SIDED_OFFSETS]
    return [-12.8, -6.4, -3.2, -1.6, -0.8, 0.0, 0.8, 1.6, 3.2, 6.4, 12.8]


def _axis_log_magnitude(factors, axis, cands, log_x, other=0.0):
    """Re log of the integrand at height zero over candidate abscissas.

    Candidates landing within 1e-9 of any gamma pole get +inf, which keeps
    the scan away from exact poles in either position.
    """
    cs = np.asarray(cands, dtype=float)
    total = -cs * log_x
    bad = np.zeros(cs.shape, dtype=bool)
    for f in factors:
        coef = f.coef_s if axis == "s" else f.coef_t
        cross = f.coef_t if axis == "s" else f.coef_s
        args = f.offset + coef * cs + cross * other
        near = (np.abs(args - np.round(args)) < 1e-9) & (np.round(args) <= 0)
        bad |= near
        safe = np.where(near, 1.0, args)
        total = total + f.sign * np.real(log_gamma(safe.astype(np.complex128)))
    total[bad] = math.inf
    return total


def _saddle_abscissa(factors, axis, lo, hi, log_x, other=0.0):
    """Abscissa minimizing the origin magnitude: less cancellation headroom."""
    cands = [c for c in _candidate_abscissas(lo, hi) if lo < c < hi]
    if not cands:
        return _pick_in_window(lo, hi)
    mags = _axis_log_magnitude(factors, axis, cands, log_x, other)
    i = int(np.argmin(mags))
    if not math.isfinite(mags[i]):
        return _pick_in_window(lo, hi)
    return cands[i]


def _min_numerator_distance(factors, axis, c, other=0.0):
    """Distance from the abscissa to the nearest numerator pole family edge."""
    dist = math.inf
    for f in factors:
        if f.position != "numerator":
            continue
        arg = (f.offset + f.coef_s * c + f.coef_t * other if axis == "s"
               else f.offset + f.coef_s * other + f.coef_t * c)
        coef = abs(_axis_coef(f, axis))
        if coef > 0 and arg > 0:
            dist = min(dist, arg / coef)
    return dist


def _nudge_off_denominator_poles(factors, axis, c, lo, hi, other=0.0, policy=DEFAULT_POLICY):
    """Move the abscissa off any exact denominator pole at u = 0."""
    width = hi - lo if (lo > -math.inf and hi < math.inf) else 1.0
    step = min(max(3.7 * policy.abscissa_shift, 1e-9), 0.05 * width)
    for attempt in range(64):
        hit = False
        for f in factors:
            if f.position != "denominator":
                continue
            arg = f.offset + (f.coef_s * c + f.coef_t * other if axis == "s"
                              else f.coef_s * other + f.coef_t * c)
            nearest = round(arg)
            if nearest <= 0 and abs(arg - nearest) < 1e-9:
                hit = True
                break
        if not hit:
            return c
        c = c + step * (1 if attempt % 2 == 0 else -1) * (1 + attempt // 2)
        c = min(max(c, lo + 1e-12 if lo > -math.inf else c), hi - 1e-12 if hi < math.inf else c)
    raise ContourError("could not move the contour off a denominator pole")


def _choose_univariate_contour(factors, policy, log_x=0.0):
    meta = {"perturbed": False}
    lo, hi = _axis_window(factors, "s")
    if not lo < hi:
        factors = _perturb_axis(factors, "s", policy.abscissa_shift)
        meta["perturbed"] = True
        lo, hi = _axis_window(factors, "s")
        if not lo < hi:
            raise ContourError(
                f"pole families cannot be separated: window ({lo}, {hi}) is empty"
            )
    c = _saddle_abscissa(factors, "s", lo, hi, log_x)
    c = _nudge_off_denominator_poles(factors, "s", c, lo, hi, policy=policy)
    meta["abscissa"] = c
    return factors, c, meta


def _choose_bivariate_contours(spec, policy, log_x1=0.0, log_x2=0.0):
    meta = {"perturbed": False}
    s_factors, t_factors = spec.s_factors, spec.t_factors
    outer = spec.outer_factors

    def window(factors, axis):
        lo, hi = _axis_window(factors, axis)
        return [lo, hi]

    ws = window(s_factors, "s")
    wt = window(t_factors, "t")
    for axis, w, fct in (("s", ws, s_factors), ("t", wt, t_factors)):
        if not w[0] < w[1]:
            fct = _perturb_axis(fct, axis, policy.abscissa_shift)
            meta["perturbed"] = True
            lo, hi = _axis_window(fct, axis)
            if not lo < hi:
                raise ContourError(f"empty contour window on the {axis} axis")
            w[0], w[1] = lo, hi
            if axis == "s":
                s_factors = fct
            else:
                t_factors = fct

    c_s = _pick_in_window(*ws)
    c_t = _pick_in_window(*wt)

    # Couple through outer numerator factors: tighten alternate axes until
    # every outer argument has a positive real part at (c_s, c_t).
    for _ in range(16):
        ok = True
        for f in outer:
            if f.position != "numerator":
                continue
            val = f.offset + f.coef_s * c_s + f.coef_t * c_t
            if val > 0:
                continue
            ok = False
            moved = False
            for axis in ("t", "s"):
                coef = f.coef_t if axis == "t" else f.coef_s
                if coef == 0.0:
                    continue
                w = wt if axis == "t" else ws
                rest = f.offset + (f.coef_s * c_s if axis == "t" else f.coef_t * c_t)
                bound = -rest / coef
                if coef > 0:
                    new_lo = max(w[0], bound)
                    if new_lo < w[1]:
                        w[0] = new_lo
                        moved = True
                else:
                    new_hi = min(w[1], bound)
                    if new_hi > w[0]:
                        w[1] = new_hi
                        moved = True
                if moved:
                    break
            if not moved:
                raise ContourError("cannot satisfy coupled contour constraints")
            c_s = _pick_in_window(*ws)
            c_t = _pick_in_window(*wt)
        if ok:
            break
    else:
        raise ContourError("coupled contour constraints did not converge")

    # Saddle refinement: over candidate pairs inside the tightened windows,
    # minimize the origin magnitude subject to the coupling constraints.
    s_cands = [c for c in _candidate_abscissas(*ws) if ws[0] < c < ws[1]]
    t_cands = [c for c in _candidate_abscissas(*wt) if wt[0] < c < wt[1]]
    if s_cands and t_cands:
        phi_s = _axis_log_magnitude(s_factors, "s", s_cands, log_x1)
        phi_t = _axis_log_magnitude(t_factors, "t", t_cands, log_x2)
        grid = phi_s[:, None] + phi_t[None, :]
        cs_arr = np.asarray(s_cands)[:, None]
        ct_arr = np.asarray(t_cands)[None, :]
        for f in outer:
            args = f.offset + f.coef_s * cs_arr + f.coef_t * ct_arr
            pole = (np.abs(args - np.round(args)) < 1e-9) & (np.round(args) <= 0)
            infeasible = (args <= 0.02) if f.position == "numerator" else pole
            safe = np.where(pole, 1.0, args)
            grid = grid + f.sign * np.real(log_gamma(safe.astype(np.complex128)))
            grid = np.where(infeasible, math.inf, grid)
        flat = int(np.argmin(grid))
        i, j = divmod(flat, grid.shape[1])
        if math.isfinite(grid[i, j]):
            c_s, c_t = s_cands[i], t_cands[j]

    all_f = tuple(outer) + tuple(s_factors) + tuple(t_factors)
    c_s = _nudge_off_denominator_poles(all_f, "s", c_s, *ws, other=c_t, policy=policy)
    c_t = _nudge_off_denominator_poles(all_f, "t", c_t, *wt, other=c_s, policy=policy)
    meta["abscissa_s"] = c_s
    meta["abscissa_t"] = c_t
    return s_factors, t_factors, outer, c_s, c_t, meta


# ---------------------------------------------------------------------------
# quadrature cores
# ---------------------------------------------------------------------------


def _decay_rate(factors, axis):
    """Guaranteed exponential decay rate of |integrand| along the axis."""
    rho = 0.0
    for f in factors:
        rho += f.sign * abs(_axis_coef(f, axis))
    return max(0.5 * math.pi * rho, 0.3)


def _phase_rate(factors, axis, log_x, extent):
    """Crude bound on the phase derivative, for the initial step size."""
    omega = abs(log_x)
    for f in factors:
        c = abs(_axis_coef(f, axis))
        if c > 0:
            omega += c * (1.0 + math.log1p(c * extent))
    return max(omega, 1.0)


def _axis_gamma_logsum(factors, axis, c, u):
    """Sum of signed log-gamma values for single-axis factors at c + i*u."""
    z = c + 1j * u
    total = np.zeros_like(z)
    for f in factors:
        coef = _axis_coef(f, axis)
        total = total + f.sign * log_gamma(f.offset + coef * z)
    return total


def _shifted_sums(logF, weights):
    """Stable weighted sums of exp(logF): returns (shift, signed, absolute)."""
    re = logF.real
    m = float(np.max(re)) if logF.size else -math.inf
    if not math.isfinite(m):
        return -math.inf, 0.0, 0.0
    w = np.exp(logF - m)
    signed = float(np.sum(weights * w.real))
    absolute = float(np.sum(weights * np.abs(w)))
    return m, signed, absolute


def _from_log(log_scale, raw):
    """raw * exp(log_scale) without intermediate overflow."""
    if raw == 0.0 or not math.isfinite(log_scale):
        return 0.0
    lv = log_scale + math.log(abs(raw))
    if lv > 700.0:
        raise SpecfunError("result magnitude exceeds double precision range")
    if lv < -745.0:
        return 0.0
    return math.copysign(math.exp(lv), raw)


def _mb_eval_1d(factors, c, log_x, policy, log_prefactor, meta):
    rho = _decay_rate(factors, "s")
    extent = min(policy.max_extent, max(6.0 / rho, (math.log(1.0 / policy.tolerance) + 8.0) / rho))
    omega = _phase_rate(factors, "s", log_x, extent)
    # A numerator pole close to the contour makes a spike of that width at
    # the origin; the step must resolve it.
    dist = _min_numerator_distance(factors, "s", c)
    if math.isfinite(dist):
        omega = max(omega, 2.1 / max(dist, 1e-4))
    h = min(extent / 48.0, math.pi / (3.0 * omega))
    prev = None
    best = None
    for _ in range(40):
        n_nodes = int(extent / h) + 1
        if n_nodes > policy.node_budget:
            raise ConvergenceError(
                f"node budget {policy.node_budget} exceeded (needed {n_nodes}); "
                f"best estimate {best!r}"
            )
        u = np.arange(n_nodes) * h
        logF = _axis_gamma_logsum(factors, "s", c, u) - (c + 1j * u) * log_x + log_prefactor
        if not np.all(np.isfinite(logF.real) | (logF.real == -math.inf)):
            raise SpecfunError("non-finite integrand")
        weights = np.full(n_nodes, 2.0)
        weights[0] = 1.0
        shift, signed, absolute = _shifted_sums(logF, weights)
        log_scale = shift + math.log(h / (2.0 * math.pi))
        est = _from_log(log_scale, signed)
        abs_int = _from_log(log_scale, absolute)
        best = est
        # Tail: |F| decays at least like exp(-rho u) past the last node.
        tail_raw = float(np.exp(logF[-1].real - shift)) if math.isfinite(shift) else 0.0
        tail = _from_log(log_scale, tail_raw * 2.0 / (rho * h))
        tol_scale = max(abs(est), 1e-3 * abs_int)
        if tail > policy.tolerance * max(tol_scale, 1e-300) and extent < policy.max_extent:
            extent = min(extent * 1.6, policy.max_extent)
            prev = None
            continue
        if prev is not None:
            diff = abs(est - prev)
            # The 1e-290 floor accepts results at the bottom of the double
            # range, where denormal rounding makes relative tests unmeetable.
            floor = max(60.0 * _EPS * abs_int, 1e-290)
            if diff <= max(policy.tolerance * tol_scale, floor):
                err = diff + tail + 4.0 * _EPS * abs_int
                meta.update(nodes=n_nodes, extent=extent, step=h)
                return EvalResult(est, err, meta)
        prev = est
        h *= 0.5
    raise ConvergenceError(f"quadrature did not converge; best estimate {best!r}")


def _mb_eval_2d(outer, s_factors, t_factors, c_s, c_t, log_x1, log_x2,
                policy, log_prefactor, meta):
    axis_cap = 4096
    rho_s = _decay_rate(tuple(s_factors) + tuple(outer), "s")
    rho_t = _decay_rate(tuple(t_factors) + tuple(outer), "t")
    # Only the single-axis factors guarantee decay along diagonals where the
    # coupled factors stall, so fall back to those when they are weaker.
    rho_s = min(rho_s, max(_decay_rate(s_factors, "s"), 0.3) * 4.0)
    rho_t = min(rho_t, max(_decay_rate(t_factors, "t"), 0.3) * 4.0)
    goal = math.log(1.0 / policy.tolerance) + 8.0
    ext_s = min(policy.max_extent, max(4.0 / rho_s, goal / max(_decay_rate(s_factors, "s"), 0.3)))
    ext_t = min(policy.max_extent, max(4.0 / rho_t, goal / max(_decay_rate(t_factors, "t"), 0.3)))
    omega_s = _phase_rate(tuple(s_factors) + tuple(outer), "s", log_x1, ext_s)
    omega_t = _phase_rate(tuple(t_factors) + tuple(outer), "t", log_x2, ext_t)
    dist_s = _min_numerator_distance(tuple(s_factors) + tuple(outer), "s", c_s, other=c_t)
    dist_t = _min_numerator_distance(tuple(t_factors) + tuple(outer), "t", c_t, other=c_s)
    if math.isfinite(dist_s):
        omega_s = max(omega_s, 2.1 / max(dist_s, 1e-4))
    if math.isfinite(dist_t):
        omega_t = max(omega_t, 2.1 / max(dist_t, 1e-4))
    h_s = min(ext_s / 24.0, math.pi / (3.0 * omega_s))
    h_t = min(ext_t / 24.0, math.pi / (3.0 * omega_t))

    def grid_eval(ext_s, h_s, ext_t, h_t):
        n_s = int(ext_s / h_s) + 1
        n_t = int(ext_t / h_t)
        if n_s > axis_cap or (2 * n_t + 1) > 2 * axis_cap + 1:
            raise ConvergenceError("per-axis node cap exceeded")
        if n_s * (2 * n_t + 1) > (1 << 23):
            raise ConvergenceError("total node budget exceeded")
        u_s = np.arange(n_s) * h_s
        u_t = np.arange(-n_t, n_t + 1) * h_t
        s_log = _axis_gamma_logsum(s_factors, "s", c_s, u_s) - (c_s + 1j * u_s) * log_x1
        t_log = _axis_gamma_logsum(t_factors, "t", c_t, u_t) - (c_t + 1j * u_t) * log_x2
        w_s = np.full(n_s, 2.0)
        w_s[0] = 1.0
        # Row 0 pairs (0, u_t) with (0, -u_t): keep u_t >= 0 with weight 2.
        w_row0 = np.zeros(2 * n_t + 1)
        w_row0[n_t] = 1.0
        w_row0[n_t + 1:] = 2.0
        chunk = max(1, (1 << 20) // (2 * n_t + 1))
        parts = []
        edge_mag = -math.inf
        edge_mag_s = -math.inf
        for i0 in range(0, n_s, chunk):
            i1 = min(i0 + chunk, n_s)
            S = (c_s + 1j * u_s[i0:i1])[:, None]
            T = (c_t + 1j * u_t)[None, :]
            tot = (s_log[i0:i1, None] + t_log[None, :]) + log_prefactor
            for f in outer:
                tot = tot + f.sign * log_gamma(f.offset + f.coef_s * S + f.coef_t * T)
            parts.append((i0, tot))
            edge_mag = max(edge_mag, float(np.max(tot[:, 0].real)),
                           float(np.max(tot[:, -1].real)))
            if i1 == n_s:
                edge_mag_s = float(np.max(tot[-1, :].real))
        m = max(float(np.max(t.real)) for _, t in parts)
        if not math.isfinite(m):
            return 0.0, 0.0, -math.inf, -math.inf, n_s * (2 * n_t + 1)
        signed = absolute = 0.0
        for i0, tot in parts:
            w = np.exp(tot - m)
            row_signed = w.real.sum(axis=1)
            row_abs = np.abs(w).sum(axis=1)
            lo = i0
            if i0 == 0:
                signed += float(np.dot(w_row0, w[0].real))
                absolute += float(np.dot(w_row0, np.abs(w[0])))
                lo = 1
                row_signed = row_signed[1:]
                row_abs = row_abs[1:]
            hi = lo + row_signed.size
            signed += float(np.dot(w_s[lo:hi], row_signed))
            absolute += float(np.dot(w_s[lo:hi], row_abs))
        log_scale = m + math.log(h_s * h_t / (4.0 * math.pi * math.pi))
        est = _from_log(log_scale, signed)
        abs_int = _from_log(log_scale, absolute)
        return est, abs_int, edge_mag - m, edge_mag_s - m, n_s * (2 * n_t + 1)

    prev = None
    best = None
    for _ in range(24):
        est, abs_int, edge_t_rel, edge_s_rel, n_total = grid_eval(ext_s, h_s, ext_t, h_t)
        best = est
        tol_scale = max(abs(est), 1e-3 * abs_int)
        tail_t = math.exp(edge_t_rel) * abs_int if math.isfinite(edge_t_rel) else 0.0
        tail_s = math.exp(edge_s_rel) * abs_int if math.isfinite(edge_s_rel) else 0.0
        grew = False
        if tail_t > policy.tolerance * max(tol_scale, 1e-300) and ext_t < policy.max_extent:
            ext_t = min(ext_t * 1.6, policy.max_extent)
            grew = True
        if tail_s > policy.tolerance * max(tol_scale, 1e-300) and ext_s < policy.max_extent:
            ext_s = min(ext_s * 1.6, policy.max_extent)
            grew = True
        if grew:
            prev = None
            continue
        if prev is not None:
            diff = abs(est - prev)
            floor = max(200.0 * _EPS * abs_int, 1e-290)
            if diff <= max(policy.tolerance * tol_scale, floor):
                err = diff + tail_s + tail_t + 8.0 * _EPS * abs_int
                meta.update(nodes=n_total, extent_s=ext_s, extent_t=ext_t,
                            step_s=h_s, step_t=h_t)
                return EvalResult(est, err, meta)
        prev = est
        h_s *= 0.5
        h_t *= 0.5
    raise ConvergenceError(f"2-D quadrature did not converge; best estimate {best!r}")


# ---------------------------------------------------------------------------
# public evaluators
# ---------------------------------------------------------------------------


def _resolve_log_x(x, log_x, name="x"):
    if log_x is not None:
        return float(log_x)
    if x is None:
        raise ValueError(f"either {name} or log_{name} must be given")
    x = float(x)
    if x <= 0.0:
        raise ValueError(f"{name} must be positive")
    return math.log(x)


def meijer_g(spec, x=None, policy=DEFAULT_POLICY, *, log_x=None, log_prefactor=0.0):
    """Evaluate G^{m,n}_{p,q}(x | a; b) along a vertical contour.

    Returns an :class:`EvalResult`; ``log_x`` may replace ``x`` when the
    argument would over- or underflow, and ``log_prefactor`` scales the
    result by exp(log_prefactor) inside the log-domain accumulation.
    """
    lx = _resolve_log_x(x, log_x)
    factors, c, meta = _choose_univariate_contour(spec.factors(), policy, lx)
    return _mb_eval_1d(factors, c, lx, policy, float(log_prefactor), meta)


def fox_h_univariate(factors, x=None, policy=DEFAULT_POLICY, *, log_x=None, log_prefactor=0.0):
    """Evaluate a univariate Mellin-Barnes integral with arbitrary factors.

    ``factors`` is an iterable of :class:`GammaFactor` with coef_t = 0; the
    integral is (1/2*pi*i) * int prod Gamma(...)^{+-1} x^{-s} ds.
    """
    lx = _resolve_log_x(x, log_x)
    factors = tuple(factors)
    for f in factors:
        if f.coef_t != 0.0:
            raise ValueError("fox_h_univariate factors must not depend on t")
    factors, c, meta = _choose_univariate_contour(factors, policy, lx)
    return _mb_eval_1d(factors, c, lx, policy, float(log_prefactor), meta)


def fox_h_bivariate(spec, x1=None, x2=None, policy=DEFAULT_POLICY, *,
                    log_x1=None, log_x2=None, log_prefactor=0.0):
    """Evaluate the double Mellin-Barnes integral of ``spec`` at (x1, x2).

    The value is (1/2*pi*i)^2 * int int Phi(s,t) x1^{-s} x2^{-t} ds dt over
    vertical contours chosen by the pole-separation rule; deterministic for a
    fixed policy.  Overflow is impossible by construction: all gamma products
    are log-domain sums, shifted by their maximum before exponentiation.
    """
    lx1 = _resolve_log_x(x1, log_x1, "x1")
    lx2 = _resolve_log_x(x2, log_x2, "x2")
    s_f, t_f, outer, c_s, c_t, meta = _choose_bivariate_contours(spec, policy, lx1, lx2)
    return _mb_eval_2d(outer, s_f, t_f, c_s, c_t, lx1, lx2, policy,
                       float(log_prefactor), meta)


def _log_gamma_near(base, epart):
    """log Gamma(base + epart) with the pole distance kept to full precision.

    ``base`` carries the O(1) part of the argument and ``epart`` a tiny
    perturbation.  When the argument sits within 0.1 of a non-positive
    integer the reflection formula is applied with the distance delta formed
    from the two parts directly, which avoids the catastrophic cancellation
    of evaluating sin(pi z) next to one of its zeros.
    """
    kk = round(base)
    if kk <= 0 and abs(base - kk) < 0.1:
        delta = (base - kk) + epart
        if delta == 0.0:
            raise GammaPoleError(f"gamma argument {base + epart} is an exact pole")
        kpp = -kk
        return (_LN_PI - 1j * math.pi * kpp
                - np.log(complex(math.sin(math.pi * delta)))
                - math.lgamma(1.0 + kpp - delta))
    return log_gamma(complex(base + epart))


def _log_gamma_near_vec(base, epart):
    """Vectorized :func:`_log_gamma_near` for real base and perturbation."""
    base = np.asarray(base, dtype=float)
    epart = np.asarray(epart, dtype=float)
    out = np.empty(base.shape, dtype=complex)
    kk = np.round(base)
    near = (kk <= 0.0) & (np.abs(base - kk) < 0.1)
    if np.any(near):
        delta = (base[near] - kk[near]) + epart[near]
        if np.any(delta == 0.0):
            raise GammaPoleError("gamma argument sits exactly on a pole")
        kpp = -kk[near]
        out[near] = (_LN_PI - 1j * math.pi * kpp
                     - np.log(np.sin(math.pi * delta).astype(complex))
                     - log_gamma(1.0 + kpp - delta))
    rest = ~near
    if np.any(rest):
        out[rest] = log_gamma(base[rest] + epart[rest])
    return out


def residue_series(factors, *, log_x, max_power=3.0, policy=DEFAULT_POLICY,
                   log_prefactor=0.0):
    """Ascending small-argument expansion of a univariate factor integral.

    Sums residues of prod Gamma(...)^{+-1} x^{-s} at the poles of ascending
    numerator factors (coef_s > 0), keeping every pole whose power of x does
    not exceed the leading power plus ``max_power``.  Near-coincident poles
    (rational parameter ladders collide routinely here) are resolved by
    shifting each ascending factor by a distinct multiple of the policy's
    abscissa shift; the expansion is evaluated at +eps and -eps and averaged,
    which cancels the O(eps) perturbation bias.  Merged higher-order poles
    are therefore handled without separate code paths, at the cost of an
    error floor around 1e-10 relative for double poles.
    """
    factors = tuple(factors)
    asc_idx = [i for i, f in enumerate(factors)
               if f.position == "numerator" and f.coef_s > 0]
    if not asc_idx:
        raise ContourError("residue series needs at least one ascending factor")
    jmul = {i: rank + 1 for rank, i in enumerate(asc_idx)}
    lead = min(factors[i].offset / factors[i].coef_s for i in asc_idx)
    cutoff = lead + float(max_power)

    # Exponents of every pole inside the window, unperturbed.  The shift must
    # stay well below the smallest genuine gap times the largest multiple, or
    # perturbed poles from different families could cross.  For small x a term
    # scales like x^expo, so poles more than 250 nats above the leading one in
    # expo*log(x) cannot move the sum at double precision and are dropped.
    rows = []
    exps = []
    for i in asc_idx:
        f = factors[i]
        k = 0
        while (f.offset + k) / f.coef_s <= cutoff + 1e-12:
            expo = (f.offset + k) / f.coef_s
            exps.append(expo)
            if log_x >= 0.0 or (expo - lead) * (-log_x) <= 250.0:
                rows.append((i, k, expo))
            k += 1
    exps.sort()
    min_gap = math.inf
    for lo_e, hi_e in zip(exps, exps[1:]):
        gap = hi_e - lo_e
        if gap > 1e-12:
            min_gap = min(min_gap, gap)

    p_idx = np.array([r[0] for r in rows])
    p_k = np.array([float(r[1]) for r in rows])
    p_expo = np.array([r[2] for r in rows])
    p_coef = np.array([factors[r[0]].coef_s for r in rows])
    p_jf = np.array([float(jmul[r[0]]) for r in rows])
    # Static part of the log-residue: log of (-1)^k / (k! c_f).
    p_static = np.array([complex(-math.lgamma(r[1] + 1), math.pi * r[1])
                         for r in rows]) - np.log(p_coef)
    # Per-factor gamma arguments at every pole, split into an O(1) base and a
    # multiple of eps carried separately (see _log_gamma_near).
    g_parts = []
    for g_i, g in enumerate(factors):
        keep = p_idx != g_i
        base = g.offset - g.coef_s * p_expo[keep]
        emul = jmul.get(g_i, 0) - g.coef_s * p_jf[keep] / p_coef[keep]
        g_parts.append((g.sign, keep, base, emul))

    def one_pass(eps):
        s0_eps = -p_jf * eps / p_coef
        lr = p_static + (p_expo - s0_eps) * log_x + log_prefactor
        for sign, keep, base, emul in g_parts:
            lr[keep] += sign * _log_gamma_near_vec(base, emul * eps)
        m = float(np.max(lr.real))
        w = np.exp(lr - m)
        total = _from_log(m, float(np.sum(w.real)))
        spread = _from_log(m, float(np.sum(np.abs(w))))
        return total, spread, len(rows)

    # The +-eps averages carry an O(eps^2) bias with the same sign, so a final
    # Richardson step across eps and 2*eps removes it and measures what is
    # left.  Four passes total; each is a short scalar loop.
    eps = policy.abscissa_shift
    if math.isfinite(min_gap):
        eps = min(eps, min_gap / (8.0 * (len(asc_idx) + 1)))
    v_p1, spread, n_poles = one_pass(eps)
    v_m1, _, _ = one_pass(-eps)
    v_p2, _, _ = one_pass(2.0 * eps)
    v_m2, _, _ = one_pass(-2.0 * eps)
    avg1 = 0.5 * (v_p1 + v_m1)
    avg2 = 0.5 * (v_p2 + v_m2)
    value = (4.0 * avg1 - avg2) / 3.0
    err = abs(avg1 - avg2) / 3.0 + 8.0 * _EPS * spread
    meta = {"poles": n_poles, "epsilon": eps, "max_power": float(max_power),
            "lead_exponent": lead}
    return EvalResult(value, err, meta)
