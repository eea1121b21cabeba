"""Truncated operator blocks in orthonormal Bergman bases and the
Fredholm-determinant potential.

Conventions (also emitted in every CLI report):

* bases e_n(z) = sqrt(n/pi) z^(n-1) on the disk and
  estar_n(w) = sqrt(n/pi) w^(-n-1) on the exterior, n >= 1;
* block entries are matrix elements of the four kernel operators in these
  bases. With the generating expansions

      log((f(z)-f(w))/(z-w))  = sum b_mn z^m w^n,
      log((g(z)-g(w))/(z-w))  = sum bt_mn z^-m w^-n   (+ const),
      log(1 - f(z)/g(w))      = sum c_mn z^m w^-n,

  the blocks are b1[m,n] = -sqrt(mn) b_mn, b4[m,n] = -sqrt(mn) bt_mn,
  b2[m,n] = -sqrt(mn) c_mn and b3 = transpose(b2) (the kernel symmetry
  K3(z,w) = K2(w,z)). The global sign cancels in every reported quantity,
  which all factor through B B*.
* the interior and exterior contraction blocks satisfy
  ||b1|| < 1, ||b4|| < 1 and the four block relations
  B1 B1* + B2 B2* = I,  B3 B1* + B4 B2* = 0,
  B1 B3* + B2 B4* = 0,  B3 B3* + B4 B4* = I
  in the infinite-dimensional limit.
* the determinant potential is reported with two signs:
  ``s2_univ`` = log det(I - B B*) <= 0 and ``s2_dg`` = -s2_univ >= 0.

All entries are computed from generating functions by a slice-triangular
log recursion (solve D * dL = dD one power at a time); no kernel
quadrature is performed. Matrix entries are exact to roundoff given series
coefficients through index 2N+1; missing high coefficients are treated as
zero, which is exact for floor-trimmed expansions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .maps import WeldingPair, inverted_pair, schwarzian
from .series import (
    ComplexSeries,
    Kind,
    evaluate,
    log_array,
    reciprocal_array,
)


# ---------------------------------------------------------------------------
# report type shared with the quadrature module
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceReport:
    """Per-order estimates of a scalar plus the last-increment residual."""

    orders: tuple
    estimates: tuple
    extrapolated: float
    residual_tail: float

    def __post_init__(self):
        orders = tuple(int(n) for n in self.orders)
        if any(b <= a for a, b in zip(orders, orders[1:])):
            raise InvalidInput("orders must be strictly increasing")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "estimates", tuple(float(x) for x in self.estimates))
        if self.residual_tail < 0:
            raise InvalidInput("residual_tail must be nonnegative")

    def to_dict(self) -> dict:
        return {"orders": list(self.orders),
                "estimates": list(self.estimates),
                "extrapolated": self.extrapolated,
                "residual_tail": self.residual_tail}


def _report_from_estimates(orders, estimates) -> ConvergenceReport:
    est = [float(x) for x in estimates]
    tail = abs(est[-1] - est[-2]) if len(est) >= 2 else 0.0
    return ConvergenceReport(orders=tuple(orders), estimates=tuple(est),
                             extrapolated=est[-1], residual_tail=tail)


# ---------------------------------------------------------------------------
# bivariate log by slice recursion
# ---------------------------------------------------------------------------

def _log_bivariate(d: np.ndarray) -> np.ndarray:
    """log of a truncated bivariate series, row index = powers of the first
    variable. Requires d[0,0] = 1.

    Solves d * (d/dz L) = d/dz d slice by slice; the per-slice products run
    through padded FFTs. Stable because every intermediate row is a prefix
    of the true expansion (triangular forward substitution), unlike the
    alternating power sums of log(1+u).
    """
    n0, n1 = d.shape
    if d[0, 0] != 1.0:
        raise InvalidInput("bivariate log requires unit constant term")
    real = np.isrealobj(d)
    size = 1 << int(np.ceil(np.log2(max(2 * n1, 2))))
    if real:
        fft = lambda x: np.fft.rfft(x, size, axis=-1)
        ifft = lambda x: np.fft.irfft(x, size)[..., :n1]
    else:
        fft = lambda x: np.fft.fft(x, size, axis=-1)
        ifft = lambda x: np.fft.ifft(x, size)[..., :n1]
    fd = fft(d)
    finv0 = fft(reciprocal_array(d[0, :].astype(complex) if not real else d[0, :]))
    fp = np.zeros((max(n0 - 1, 1), fd.shape[1]), dtype=complex)
    p = np.zeros((max(n0 - 1, 1), n1), dtype=d.dtype)
    for m in range(n0 - 1):
        if m == 0:
            acc = 0.0
        else:
            acc = np.einsum("jk,jk->k", fd[m:0:-1, :], fp[:m, :])
        row = ifft(((m + 1) * fd[m + 1, :] - acc) * finv0)
        p[m, :] = row
        fp[m, :] = fft(row)
    out = np.zeros((n0, n1), dtype=complex)
    if n0 > 1:
        out[1:, :] = p / np.arange(1, n0)[:, None]
    out[0, :] = log_array(d[0, :].astype(complex))
    return out


def _padded(coeffs: np.ndarray, need: int) -> np.ndarray:
    out = np.zeros(need, dtype=complex)
    k = min(len(coeffs), need)
    out[:k] = coeffs[:k]
    if np.abs(out.imag).max() == 0.0:
        return out.real.copy()
    return out


def _interior_series(pair_or_series) -> ComplexSeries:
    if isinstance(pair_or_series, WeldingPair):
        return pair_or_series.interior
    if isinstance(pair_or_series, ComplexSeries):
        if pair_or_series.kind is not Kind.TAYLOR_AT_ZERO:
            raise InvalidInput("interior block needs a Taylor series")
        return pair_or_series
    raise InvalidInput("expected a WeldingPair or ComplexSeries")


def _exterior_series(pair_or_series) -> ComplexSeries:
    if isinstance(pair_or_series, WeldingPair):
        return pair_or_series.exterior
    if isinstance(pair_or_series, ComplexSeries):
        if pair_or_series.kind is not Kind.LAURENT_AT_INFINITY:
            raise InvalidInput("exterior block needs a Laurent series")
        return pair_or_series
    raise InvalidInput("expected a WeldingPair or ComplexSeries")


def _sqrt_weights(n: int) -> np.ndarray:
    m = np.arange(1, n + 1, dtype=float)
    return np.sqrt(np.outer(m, m))


def _require_order(series: ComplexSeries, n: int, side: str):
    """Reject a series that was truncated before reaching N+1 coefficients.

    A ``resolved`` series (closed form or floor-trimmed extraction) may be
    zero-padded exactly, so any N is admissible for it.
    """
    if series.order >= n + 1 or series.resolved:
        return
    raise InvalidInput(
        f"{side} series order {series.order} is insufficient for N = {n}"
        f" and its tail is not resolved; need order >= {n + 1}")


def build_b1(pair, n: int) -> np.ndarray:
    """Interior contraction block from log((f(z)-f(w))/(z-w))."""
    fseries = _interior_series(pair)
    _require_order(fseries, n, "interior")
    aa = _padded(fseries.coeffs, 2 * n + 2)
    aa = aa / aa[1]
    d = np.empty((n + 1, n + 1), dtype=aa.dtype)
    for i in range(n + 1):
        d[i, :] = aa[i + 1:i + n + 2]
    ell = _log_bivariate(d)
    return np.ascontiguousarray(-_sqrt_weights(n) * ell[1:, 1:])


def build_b4(pair, n: int) -> np.ndarray:
    """Exterior contraction block from log((g(z)-g(w))/(z-w)).

    An affine rescaling of g shifts only the constant term of the
    generating function, so the block is invariant under it.
    """
    gseries = _exterior_series(pair)
    _require_order(gseries, n, "exterior")
    g = gseries.coeffs
    if g[0] == 0:
        raise InvalidInput("exterior map must have nonzero leading coefficient")
    gg = _padded(g, 2 * n + 2)
    gg = gg / gg[0]
    d = np.zeros((n + 1, n + 1), dtype=gg.dtype)
    d[0, 0] = 1.0
    for p in range(1, n + 1):
        d[p, 1:] = -gg[p + 1:p + n + 1]
    ell = _log_bivariate(d)
    return np.ascontiguousarray(-_sqrt_weights(n) * ell[1:, 1:])


def separation_radii(pair, radii=(0.9, 0.95, 0.98),
                     exterior_radii=(1.6, 1.4, 1.25, 1.1),
                     samples: int = 512):
    """A pair (r, R) with max|f| on |z|=r below min|g| on |w|=R, or None.

    This is the geometric sanity check behind the mixed expansion: the
    bivariate monomial series of log(1 - f/g) converges on the product of
    the two circles exactly when they separate the curve.
    """
    theta = np.exp(1j * 2.0 * np.pi * np.arange(samples) / samples)
    f = pair.interior if isinstance(pair, WeldingPair) else pair[0]
    g = pair.exterior if isinstance(pair, WeldingPair) else pair[1]
    for r in sorted(radii, reverse=True):
        fmax = np.abs(evaluate(f, r * theta)).max()
        for big_r in sorted(exterior_radii):
            gmin = np.abs(evaluate(g, big_r * theta)).min()
            if fmax < gmin:
                return (r, big_r)
    return None


def build_b2_b3(pair, n: int):
    """Mixed blocks from log(1 - f(z)/g(w)); returns (b2, b3 = b2^T)."""
    fseries = _interior_series(pair)
    gseries = _exterior_series(pair)
    _require_order(fseries, n, "interior")
    _require_order(gseries, n, "exterior")
    a, g = fseries.coeffs, gseries.coeffs
    if isinstance(pair, WeldingPair) and separation_radii(pair) is None:
        raise NumericalFailure(
            "no separating radii r < 1 < R with |f| < |g| found; the pair "
            "does not bound a common curve in the expected way")
    f_arr = _padded(a, n + 1)
    g_arr = _padded(g, n + 1)
    # Laurent coefficients of 1/g: 1/g(w) = x * recip(sum g_k x^k), x = 1/w
    inv = reciprocal_array(g_arr)
    dcoef = np.zeros(n + 1, dtype=inv.dtype)
    dcoef[1:] = inv[:n]
    e = -np.outer(f_arr, dcoef)
    e[0, 0] = 1.0
    ell = _log_bivariate(e)
    b2 = np.ascontiguousarray(-_sqrt_weights(n) * ell[1:, 1:])
    # the transposed block through the other slice direction: with
    # ell_t = log of E^T one has ell_t[m, n] = c_nm, so this IS b2^T up to
    # an independent numerical path (exercised by the transpose invariant)
    ell_t = _log_bivariate(np.ascontiguousarray(e.T))
    b3 = np.ascontiguousarray(-_sqrt_weights(n) * ell_t[1:, 1:])
    return b2.astype(complex), b3.astype(complex)


@dataclass(frozen=True)
class GrunskyTruncation:
    """N x N blocks of the four kernel operators for one pair."""

    n: int
    b1: np.ndarray = field(repr=False)
    b2: np.ndarray = field(repr=False)
    b3: np.ndarray = field(repr=False)
    b4: np.ndarray = field(repr=False)
    provenance: str = ""


def build_truncation(pair: WeldingPair, n: int) -> GrunskyTruncation:
    b1 = build_b1(pair, n).astype(complex)
    b4 = build_b4(pair, n).astype(complex)
    b2, b3 = build_b2_b3(pair, n)
    tag = f"{pair.family_tag}{pair.params or ''} N={n} M={pair.sample_count}"
    return GrunskyTruncation(n=n, b1=b1, b2=b2, b3=b3, b4=b4, provenance=tag)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

_DIAG_SPLIT = 1e-4  # below this |z-w|, interior/exterior kernels use the
                    # Schwarzian limit of the removable singularity


def _in_disk(z) -> bool:
    return abs(z) < 1.0


def kernel_value(pair: WeldingPair, which: int, z: complex, w: complex) -> complex:
    """Pointwise kernel of operator block ``which`` in {1, 2, 3, 4}.

    Domains: 1 -> disk x disk, 2 -> disk x exterior, 3 -> exterior x disk,
    4 -> exterior x exterior. For blocks 1 and 4 the removable singularity
    at z = w is evaluated through the Schwarzian of the map at the midpoint:
    the double-pole difference tends to -S(h)(z)/(6 pi).
    """
    z, w = complex(z), complex(w)
    pi = np.pi
    if which == 1:
        if not (_in_disk(z) and _in_disk(w)):
            raise InvalidInput("kernel 1 needs both arguments in the disk")
        if abs(z - w) < _DIAG_SPLIT:
            return complex(-schwarzian(pair.interior, 0.5 * (z + w)) / (6.0 * pi))
        fz, fw = pair.f(z), pair.f(w)
        fpz = _eval_deriv(pair.interior, z)
        fpw = _eval_deriv(pair.interior, w)
        return (1.0 / (z - w) ** 2 - fpz * fpw / (fz - fw) ** 2) / pi
    if which == 4:
        if _in_disk(z) or _in_disk(w):
            raise InvalidInput("kernel 4 needs both arguments outside the disk")
        if abs(z - w) < _DIAG_SPLIT:
            return complex(-schwarzian(pair.exterior, 0.5 * (z + w)) / (6.0 * pi))
        gz, gw = pair.g(z), pair.g(w)
        gpz = _eval_deriv(pair.exterior, z)
        gpw = _eval_deriv(pair.exterior, w)
        return (1.0 / (z - w) ** 2 - gpz * gpw / (gz - gw) ** 2) / pi
    if which == 2:
        if not (_in_disk(z) and not _in_disk(w)):
            raise InvalidInput("kernel 2 needs z in the disk, w outside")
        return (_eval_deriv(pair.interior, z) * _eval_deriv(pair.exterior, w)
                / (pair.f(z) - pair.g(w)) ** 2) / pi
    if which == 3:
        if not (not _in_disk(z) and _in_disk(w)):
            raise InvalidInput("kernel 3 needs z outside the disk, w inside")
        return (_eval_deriv(pair.exterior, z) * _eval_deriv(pair.interior, w)
                / (pair.g(z) - pair.f(w)) ** 2) / pi
    raise InvalidInput("kernel index must be 1, 2, 3 or 4")


def _eval_deriv(series: ComplexSeries, z):
    from .series import derivative as _sderiv
    return evaluate(_sderiv(series), z)


# ---------------------------------------------------------------------------
# residuals, determinants, iterated kernels
# ---------------------------------------------------------------------------

def grunsky_identity_residual(trunc: GrunskyTruncation):
    """Frobenius norms of the four block relations on the leading
    floor(N/2) x floor(N/2) block."""
    n = trunc.n
    h = n // 2
    eye = np.eye(n)
    r1 = trunc.b1 @ trunc.b1.conj().T + trunc.b2 @ trunc.b2.conj().T - eye
    r2 = trunc.b3 @ trunc.b1.conj().T + trunc.b4 @ trunc.b2.conj().T
    r3 = trunc.b1 @ trunc.b3.conj().T + trunc.b2 @ trunc.b4.conj().T
    r4 = trunc.b3 @ trunc.b3.conj().T + trunc.b4 @ trunc.b4.conj().T - eye
    return tuple(float(np.linalg.norm(r[:h, :h])) for r in (r1, r2, r3, r4))


def spectral_norm(b: np.ndarray) -> float:
    return float(np.linalg.norm(b, 2))


def logdet_potential(b: np.ndarray, orders) -> ConvergenceReport:
    """log det(I - B_n B_n*) over leading blocks B_n, n in ``orders``.

    Each block determinant is evaluated by LU factorization with partial
    pivoting after a Cholesky positive-definiteness certificate; the
    determinant of the Hermitian positive-definite matrix is real positive,
    and the computed log-determinant sign must match to 1e-12.
    """
    orders = [int(n) for n in orders]
    if any(n < 1 or n > b.shape[0] for n in orders):
        raise InvalidInput("orders must lie in [1, N]")
    top = max(orders)
    if spectral_norm(b[:top, :top]) >= 1.0:
        raise NumericalFailure(
            "spectral norm of the truncated block is not below one")
    estimates = []
    for n in orders:
        block = b[:n, :n]
        a = np.eye(n) - block @ block.conj().T
        try:
            np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise NumericalFailure(
                f"I - BB* is not positive definite at order {n}")
        sign, logabs = np.linalg.slogdet(a)
        if abs(sign - 1.0) > 1e-12:
            raise NumericalFailure(
                f"determinant of a Hermitian positive matrix came out "
                f"non-real at order {n}: sign = {sign}")
        estimates.append(logabs)
    return _report_from_estimates(orders, estimates)


def s2_univ(pair: WeldingPair, n: int, route: str = "b1") -> float:
    """log det(I - BB*) <= 0 at truncation n via the chosen block route."""
    b = build_b1(pair, n) if route == "b1" else build_b4(pair, n)
    return logdet_potential(b, [n]).extrapolated


def _basis_vector(n: int, z: complex, which: int) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=float)
    if which == 1:
        return np.sqrt(k / np.pi) * np.asarray(z, dtype=complex) ** (k - 1)
    return np.sqrt(k / np.pi) * np.asarray(z, dtype=complex) ** (-k - 1)


def norm_bound_v(z: complex) -> float:
    """Upper bound 1/(pi (1-|z|^2)^2) for ||K(z, .)||^2 on either side."""
    r2 = abs(z) ** 2
    return 1.0 / (np.pi * (1.0 - r2) ** 2) if r2 < 1 else \
        1.0 / (np.pi * (r2 - 1.0) ** 2)


def iterated_kernel_diag(trunc: GrunskyTruncation, n_power: int, z: complex,
                         which: int = 1) -> float:
    """Diagonal value of the n-th iterated contraction kernel at z.

    Expands v_z = K(z, .) in the orthonormal basis (coefficients are rows
    of the block against basis values) and applies matrix powers of BB*.
    The value is a nonnegative real number.
    """
    if n_power < 1:
        raise InvalidInput("power must be >= 1")
    if which not in (1, 4):
        raise InvalidInput("iterated kernels are defined for blocks 1 and 4")
    z = complex(z)
    if which == 1 and abs(z) >= 1.0:
        raise InvalidInput("interior iterated kernel needs |z| < 1")
    if which == 4 and abs(z) <= 1.0:
        raise InvalidInput("exterior iterated kernel needs |z| > 1")
    b = trunc.b1 if which == 1 else trunc.b4
    basis = _basis_vector(trunc.n, z, which)
    beta = b.T @ basis
    m = b @ b.conj().T
    vec = beta.copy()
    for _ in range(n_power - 1):
        vec = m @ vec
    val = np.vdot(beta, vec)
    return float(val.real)


def o1_diag(trunc: GrunskyTruncation, z: complex, tol: float = 1e-12,
            which: int = 1) -> float:
    """Diagonal of the operator sum_{n>=1} (BB*)^n / n at z.

    The series is truncated once the geometric tail bound
    q^{n} / ((n+1)(1-q)) * ||v_z||^2 drops below ``tol``, with q the
    spectral norm of the contraction block squared and the norm bound
    1/(pi (1-|z|^2)^2).
    """
    b = trunc.b1 if which == 1 else trunc.b4
    q = spectral_norm(b) ** 2
    if q >= 1.0:
        raise NumericalFailure("contraction block has norm >= 1")
    z = complex(z)
    bound = norm_bound_v(z)
    basis = _basis_vector(trunc.n, z, which)
    beta = b.T @ basis
    m = b @ b.conj().T
    total = 0.0
    vec = beta.copy()
    n = 1
    while True:
        total += float(np.vdot(beta, vec).real) / n
        if q == 0.0:
            break
        tail = bound * q ** n / ((n + 1) * (1.0 - q))
        if tail <= tol:
            break
        vec = m @ vec
        n += 1
        if n > 100000:
            raise NumericalFailure("iterated kernel series did not close")
    return total


@dataclass(frozen=True)
class InversionCheck:
    s2_pair_b1: float
    s2_inverted_b1: float
    s2_pair_b4: float

    @property
    def symmetry_gap(self) -> float:
        return abs(self.s2_pair_b1 - self.s2_inverted_b1)

    @property
    def route_gap(self) -> float:
        return abs(self.s2_pair_b1 - self.s2_pair_b4)


def inversion_check(pair: WeldingPair, n: int, n_inverted: int = None) -> InversionCheck:
    """Determinant potential of a pair against its reflected pair.

    Returns the potential of the pair through its interior block, of the
    inverted pair through its interior block, and of the pair through the
    exterior block; invariance under inversion makes all three agree in
    the limit.
    """
    inv = inverted_pair(pair)
    v1 = s2_univ(pair, n, route="b1")
    v2 = s2_univ(inv, n_inverted or n, route="b1")
    v4 = s2_univ(pair, n, route="b4")
    return InversionCheck(s2_pair_b1=v1, s2_inverted_b1=v2, s2_pair_b4=v4)


# ---------------------------------------------------------------------------
# CSV export of matrices
# ---------------------------------------------------------------------------

def matrix_to_csv(b: np.ndarray) -> str:
    """Row-major CSV with a header row; each entry contributes adjacent
    re/im columns with 17 significant digits."""
    n0, n1 = b.shape
    header = ",".join(f"c{j}_re,c{j}_im" for j in range(n1))
    lines = [header]
    for i in range(n0):
        cells = []
        for j in range(n1):
            cells.append(f"{b[i, j].real:.17g}")
            cells.append(f"{b[i, j].imag:.17g}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def matrix_from_csv(text: str) -> np.ndarray:
    lines = [ln for ln in text.strip().splitlines() if ln]
    rows = []
    for ln in lines[1:]:
        vals = [float(x) for x in ln.split(",")]
        rows.append([complex(vals[2 * j], vals[2 * j + 1])
                     for j in range(len(vals) // 2)])
    return np.array(rows, dtype=complex)
