"""Truncated power-series algebra over complex coefficients.

Two expansion kinds are supported:

* ``TAYLOR_AT_ZERO``: index k holds the coefficient of z^k,
* ``LAURENT_AT_INFINITY``: index k holds the coefficient of z^(1-k),
  i.e. coeffs = [a, b, c, ...] represents a*z + b + c/z + ...

The Laurent grading is the natural one for exterior maps g with
g(infinity) = infinity and finite g'(infinity) = leading coefficient.

Arithmetic (multiply, compose, log_ratio) is implemented for Taylor
series; products of two Laurent-at-infinity expansions leave the z^(1-k)
grading (the leading power becomes 2) and are rejected rather than
silently re-graded. Derivatives are defined for both kinds.

Coefficient extraction from circle samples uses the FFT; coefficients
below ``COEFF_FLOOR`` relative to the largest one are zeroed, which keeps
downstream triangular recursions from amplifying sampling noise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NumericalFailure

# Relative floor for coefficients recovered from samples; double precision
# noise with one order of headroom.
COEFF_FLOOR = 1e-14


class Kind(enum.Enum):
    TAYLOR_AT_ZERO = "taylor_at_zero"
    LAURENT_AT_INFINITY = "laurent_at_infinity"


@dataclass(frozen=True, eq=False)
class ComplexSeries:
    """Truncated expansion with a fixed grading.

    ``order`` is the number of retained coefficients; every coefficient
    must be finite. Instances are immutable: the coefficient array is
    copied on construction and marked read-only.

    ``resolved`` records that the coefficients beyond ``order`` are known
    to sit at or below the coefficient floor (exact closed forms and
    floor-trimmed sample extractions), so zero-padding the series is
    exact; consumers that need high-order data accept such series at any
    truncation.
    """

    kind: Kind
    coeffs: np.ndarray = field(repr=False)
    resolved: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        if c.ndim != 1 or c.size < 1:
            raise InvalidInput("series needs at least one coefficient")
        if not np.all(np.isfinite(c.view(float))):
            raise InvalidInput("series coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @classmethod
    def taylor(cls, coeffs, resolved: bool = False) -> "ComplexSeries":
        return cls(Kind.TAYLOR_AT_ZERO, np.asarray(coeffs, dtype=complex),
                   resolved)

    @classmethod
    def laurent(cls, coeffs, resolved: bool = False) -> "ComplexSeries":
        return cls(Kind.LAURENT_AT_INFINITY, np.asarray(coeffs, dtype=complex),
                   resolved)

    @classmethod
    def identity(cls, kind: Kind = Kind.TAYLOR_AT_ZERO, order: int = 2) -> "ComplexSeries":
        """The series of h(z) = z in either grading."""
        c = np.zeros(max(order, 2), dtype=complex)
        if kind is Kind.TAYLOR_AT_ZERO:
            c[1] = 1.0
        else:
            c[0] = 1.0
        return cls(kind, c, resolved=True)

    def __call__(self, z):
        return evaluate(self, z)

    def is_normalized_interior(self, tol: float = 0.0) -> bool:
        """True if the series is a Taylor map with h(0) = 0, h'(0) = 1."""
        if self.kind is not Kind.TAYLOR_AT_ZERO or self.order < 2:
            return False
        return abs(self.coeffs[0]) <= tol and abs(self.coeffs[1] - 1.0) <= tol


# ---------------------------------------------------------------------------
# raw-array helpers (Taylor grading, used here and by the operator builders)
# ---------------------------------------------------------------------------

def reciprocal_array(c: np.ndarray) -> np.ndarray:
    """Coefficients of 1/sum(c_k z^k) to the same truncation; c[0] != 0.

    Triangular recursion: stable for series whose reciprocal has tame
    coefficients, which is the case for the zero-free denominators used
    in this package.
    """
    if c[0] == 0:
        raise InvalidInput("cannot invert a series with zero constant term")
    n = len(c)
    inv = np.zeros(n, dtype=c.dtype)
    inv[0] = 1.0 / c[0]
    for k in range(1, n):
        inv[k] = -np.dot(c[1:k + 1], inv[k - 1::-1]) / c[0]
    return inv


def log_array(c: np.ndarray) -> np.ndarray:
    """Coefficients of log(sum c_k z^k) to the same truncation; c[0] = 1.

    Uses (log s)' = s'/s and integrates, so no alternating power sums.
    """
    n = len(c)
    out = np.zeros(n, dtype=complex)
    if n == 1:
        return out
    ds = np.arange(1, n) * c[1:]
    q = np.convolve(ds, reciprocal_array(c.astype(complex)))[:n - 1]
    out[1:] = q / np.arange(1, n)
    return out


def derivative_array(c: np.ndarray) -> np.ndarray:
    """d/dz of a Taylor coefficient array (length shrinks by one)."""
    if len(c) == 1:
        return np.zeros(1, dtype=c.dtype)
    return c[1:] * np.arange(1, len(c))


# ---------------------------------------------------------------------------
# series operations
# ---------------------------------------------------------------------------

def multiply(a: ComplexSeries, b: ComplexSeries) -> ComplexSeries:
    """Cauchy product truncated to min(a.order, b.order)."""
    if a.kind is not b.kind:
        raise InvalidInput("cannot multiply series of different kinds")
    if a.kind is Kind.LAURENT_AT_INFINITY:
        raise InvalidInput(
            "product of two Laurent-at-infinity expansions has leading power "
            "z^2 and leaves the z^(1-k) grading; multiply Taylor data instead"
        )
    n = min(a.order, b.order)
    prod = np.convolve(a.coeffs, b.coeffs)[:n]
    return ComplexSeries(a.kind, prod)


def compose(outer: ComplexSeries, inner: ComplexSeries) -> ComplexSeries:
    """Series of outer(inner(z)), truncated to min of the input orders.

    Requires Taylor kind on both sides and inner(0) = 0, otherwise the
    composition has no truncated expansion at 0.
    """
    if outer.kind is not Kind.TAYLOR_AT_ZERO or inner.kind is not Kind.TAYLOR_AT_ZERO:
        raise InvalidInput("compose is defined for Taylor series")
    if inner.coeffs[0] != 0:
        raise InvalidInput("inner series must have zero constant term")
    n = min(outer.order, inner.order)
    out = np.zeros(n, dtype=complex)
    # Horner over the outer coefficients: out = (...(c_k * u + c_{k-1}) * u ...)
    u = inner.coeffs[:n]
    for ck in outer.coeffs[n - 1::-1]:
        out = np.convolve(out, u)[:n]
        out[0] += ck
    return ComplexSeries(Kind.TAYLOR_AT_ZERO, out)


def derivative(a: ComplexSeries) -> ComplexSeries:
    """Term-by-term derivative.

    Taylor output has order-1 coefficients (degenerate order-1 input gives
    the zero series of order 1). Laurent-at-infinity output keeps the
    z^(1-k) grading, gaining one slot: d/dz of c_k z^(1-k) lands at index
    k+1 with factor (1-k).
    """
    if a.kind is Kind.TAYLOR_AT_ZERO:
        if a.order == 1:
            return ComplexSeries.taylor([0.0], resolved=a.resolved)
        return ComplexSeries.taylor(derivative_array(a.coeffs),
                                    resolved=a.resolved)
    out = np.zeros(a.order + 1, dtype=complex)
    k = np.arange(a.order)
    out[k + 1] = (1 - k) * a.coeffs
    return ComplexSeries.laurent(out, resolved=a.resolved)


def log_ratio(a: ComplexSeries) -> ComplexSeries:
    """log of a series with unit constant term, truncated to a.order."""
    if a.kind is not Kind.TAYLOR_AT_ZERO:
        raise InvalidInput("log_ratio is defined for Taylor series")
    if a.coeffs[0] != 1.0:
        raise InvalidInput("log_ratio requires constant term exactly 1")
    return ComplexSeries.taylor(log_array(a.coeffs))


def evaluate(a: ComplexSeries, z):
    """Evaluate the truncated series at complex point(s) z (vectorized)."""
    z = np.asarray(z, dtype=complex)
    if a.kind is Kind.TAYLOR_AT_ZERO:
        out = np.zeros_like(z)
        for ck in a.coeffs[::-1]:
            out = out * z + ck
        return out if out.shape else complex(out)
    # sum c_k z^(1-k) = z * P(1/z) with P the Taylor array
    u = 1.0 / z
    out = np.zeros_like(z)
    for ck in a.coeffs[::-1]:
        out = out * u + ck
    out = out * z
    return out if out.shape else complex(out)


def coeffs_from_samples(samples, radius: float, kind: Kind = Kind.TAYLOR_AT_ZERO,
                        floor: float = COEFF_FLOOR) -> ComplexSeries:
    """Recover expansion coefficients from uniform samples on |z| = radius.

    The sample count must be a power of two. Retains M/2 coefficients,
    zeroing those below ``floor`` relative to the largest magnitude. A
    non-decaying high-frequency tail means the circle lies outside the
    domain of analyticity and is rejected.
    """
    samples = np.asarray(samples, dtype=complex)
    m = len(samples)
    if m < 2 or (m & (m - 1)) != 0:
        raise InvalidInput("sample count must be a power of two >= 2")
    if radius <= 0:
        raise InvalidInput("radius must be positive")
    spec = np.fft.fft(samples) / m
    half = m // 2
    if kind is Kind.TAYLOR_AT_ZERO:
        k = np.arange(half, dtype=float)
        coeffs = spec[:half] * radius ** (-k)
    else:
        # coefficient of z^(1-k) sits in frequency bin (1-k) mod m
        k = np.arange(half)
        coeffs = spec[(1 - k) % m] * radius ** (k - 1.0)
    mags = np.abs(coeffs)
    top = mags.max()
    if top == 0.0:
        return ComplexSeries(kind, np.zeros(1, dtype=complex), resolved=True)
    # analyticity diagnostic: the tail quarter must not dominate the head
    head = mags[:max(2, half // 4)].max()
    tail = mags[3 * half // 4:].max() if half >= 4 else 0.0
    if tail > 10.0 * head and tail > 1e3 * floor * top:
        raise NumericalFailure(
            "coefficient growth in the high frequencies: sampling circle "
            "appears to lie outside the domain of analyticity"
        )
    # the FFT noise level grows with the sample count; when the tail
    # quarter is flat noise, raise the floor above it
    floor_abs = floor * top
    if half >= 8:
        noise = float(np.median(mags[3 * half // 4:]))
        if noise <= 1e-10 * top:
            floor_abs = max(floor_abs, 6.0 * noise)
    keep = mags >= floor_abs
    # rounding noise in the samples lands in every bin and is amplified by
    # radius**(-k); entries below that level are not signal
    sample_noise = 8.0 * np.finfo(float).eps * float(np.abs(samples).max())
    if kind is Kind.TAYLOR_AT_ZERO:
        amp = radius ** (-np.arange(half, dtype=float))
    else:
        amp = radius ** (np.arange(half, dtype=float) - 1.0)
    keep &= mags >= sample_noise * np.maximum(amp, 1.0)
    coeffs = np.where(keep, coeffs, 0.0)
    nz = np.nonzero(np.abs(coeffs) > 0)[0]
    if nz.size == 0:
        return ComplexSeries(kind, np.zeros(1, dtype=complex), resolved=True)
    # the trim only certifies exact padding when it cut before the Nyquist
    # edge; otherwise spectral content may continue past the window
    trimmed = int(nz.max()) + 1 < half - 4
    return ComplexSeries(kind, coeffs[:int(nz.max()) + 1], resolved=trimmed)


def samples_from_coeffs(a: ComplexSeries, radius: float, m: int):
    """Values of the series on m uniform points of |z| = radius."""
    if m < 2 or (m & (m - 1)) != 0:
        raise InvalidInput("sample count must be a power of two >= 2")
    theta = 2.0 * np.pi * np.arange(m) / m
    return evaluate(a, radius * np.exp(1j * theta))
