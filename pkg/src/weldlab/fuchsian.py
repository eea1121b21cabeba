"""Genus-2 cocompact group of the regular hyperbolic octagon.

The group is generated by four hyperbolic translations G_k along the axes
at angles k*pi/4, each pairing two opposite sides of the regular octagon
with vertex angle pi/4 centered at the origin, plus their inverses. The
vertex radius solves the regular-octagon angle condition (angle sum 2 pi
at the glued vertex), found by bisection rather than a transcribed
constant; the product relation

    G0 G1^-1 G2 G3^-1 G0^-1 G1 G2^-1 G3 = +-identity

certifies the construction. Matrices live in SU(1,1): [[a, b], [conj(b),
conj(a)]] with |a|^2 - |b|^2 = 1, acting by z -> (a z + b)/(conj(b) z +
conj(a)) with derivative 1/(conj(b) z + conj(a))^2.

The Dirichlet domain about 0 is the octagon itself; membership compares
hyperbolic distances to the enumerated orbit of 0. The hyperbolic-area
integral of the Bergman diagonal 1/(pi (1-|z|^2)^2) over the domain equals
genus - 1, the basepoint value entering the trace identities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NumericalFailure

GENUS = 2
_N_SIDES = 8
_SECTOR = np.pi / _N_SIDES          # half opening angle of one side sector
_TARGET_VERTEX_ANGLE = np.pi / 4.0  # eight corners glue to one 2 pi vertex


def _rotation(phi: float) -> np.ndarray:
    return np.array([[np.exp(1j * phi / 2.0), 0.0],
                     [0.0, np.exp(-1j * phi / 2.0)]], dtype=complex)


def _translation(length: float) -> np.ndarray:
    """Hyperbolic translation along the real axis, length in the curvature
    -1 metric."""
    return np.array([[np.cosh(length / 2.0), np.sinh(length / 2.0)],
                     [np.sinh(length / 2.0), np.cosh(length / 2.0)]],
                    dtype=complex)


def apply_mobius(m: np.ndarray, z):
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def mobius_derivative(m: np.ndarray, z):
    return 1.0 / (m[1, 0] * z + m[1, 1]) ** 2


def hyperbolic_distance(z, w) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    rho = np.abs((z - w) / (1.0 - np.conj(w) * z))
    return 2.0 * np.arctanh(rho)


def _vertex_angle(vertex_radius_hyp: float) -> float:
    """Interior angle of the regular octagon with the given hyperbolic
    vertex radius (right-triangle relation cosh c = cot A cot B)."""
    return 2.0 * np.arctan(1.0 / (np.cosh(vertex_radius_hyp) * np.tan(_SECTOR)))


@dataclass(frozen=True)
class FuchsianGroup:
    """Octagon side-pairing generators (4 translations and inverses)."""

    generators: tuple = field(repr=False)   # 8 SU(1,1) matrices
    genus: int = GENUS
    relation_word: tuple = ()
    vertex_radius: float = 0.0              # hyperbolic distance to a vertex
    side_distance: float = 0.0              # hyperbolic distance to a side
    translation_length: float = 0.0

    def element(self, index: int) -> np.ndarray:
        """Signed index: +k is generator k (1-based), -k its inverse."""
        if index == 0 or abs(index) > 4:
            raise InvalidInput("generator index must be in 1..4 or -1..-4")
        k = abs(index) - 1
        return self.generators[k] if index > 0 else self.generators[k + 4]

    def relation_product(self) -> np.ndarray:
        out = np.eye(2, dtype=complex)
        for idx in self.relation_word:
            out = out @ self.element(idx)
        return out

    def relation_residual(self) -> float:
        p = self.relation_product()
        eye = np.eye(2)
        return float(min(np.abs(p - eye).max(), np.abs(p + eye).max()))


def octagon_group(tol: float = 1e-14) -> FuchsianGroup:
    """The genus-2 group of the regular octagon with opposite sides paired.

    The vertex radius is found by bisection on the vertex-angle condition;
    the side distance follows from tanh(side) = tanh(vertex) * cos(pi/8),
    and each pairing translation has length twice the side distance.
    """
    lo, hi = 0.5, 6.0
    if not (_vertex_angle(lo) > _TARGET_VERTEX_ANGLE > _vertex_angle(hi)):
        raise NumericalFailure("bisection bracket for the vertex radius failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _vertex_angle(mid) > _TARGET_VERTEX_ANGLE:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    rv = 0.5 * (lo + hi)
    rm = np.arctanh(np.tanh(rv) * np.cos(_SECTOR))
    length = 2.0 * rm
    t = _translation(length)
    gens = []
    for k in range(4):
        r = _rotation(k * np.pi / 4.0)
        gens.append(r @ t @ np.conj(r.T))
    gens.extend(np.linalg.inv(g) for g in gens[:4])
    word = (1, -2, 3, -4, -1, 2, -3, 4)
    group = FuchsianGroup(generators=tuple(g for g in gens), genus=GENUS,
                          relation_word=word, vertex_radius=rv,
                          side_distance=rm, translation_length=length)
    resid = group.relation_residual()
    if resid > 1e-10:
        raise NumericalFailure(
            f"octagon relation product residual {resid:.3e} exceeds 1e-10")
    return group


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupEnumeration:
    """Distinct elements representable by words of length <= max_word_length,
    deduplicated up to overall sign (the matrices act projectively)."""

    max_word_length: int
    elements: np.ndarray = field(repr=False)   # shape (count, 2, 2)

    @property
    def count(self) -> int:
        return len(self.elements)

    def orbit_of_zero(self) -> np.ndarray:
        return self.elements[:, 0, 1] / self.elements[:, 1, 1]


def _canonical_key(m: np.ndarray, scale: float = 1e-6):
    """Hashable quantization of an SU(1,1) matrix up to sign.

    Two keys per matrix (plain and half-shifted grid) so that a pair of
    representations of one element differing by accumulated roundoff agrees
    on at least one key with overwhelming margin.
    """
    a, b = m[0, 0], m[0, 1]
    if (a.real, a.imag, b.real, b.imag) < (-a.real, -a.imag, -b.real, -b.imag):
        a, b = -a, -b
    vec = np.array([a.real, a.imag, b.real, b.imag])
    k1 = tuple(np.round(vec / scale).astype(np.int64))
    k2 = tuple(np.round(vec / scale + 0.5).astype(np.int64))
    return k1, k2


def enumerate_elements(group: FuchsianGroup, max_word_length: int) -> GroupEnumeration:
    """Breadth-first enumeration over the 8 generators up to the given
    word length (capped at 8 to stay desk scale)."""
    if max_word_length < 0 or max_word_length > 8:
        raise InvalidInput("word length must lie in 0..8")
    eye = np.eye(2, dtype=complex)
    seen = {}
    elements = [eye]
    for key in _canonical_key(eye):
        seen[key] = 0
    frontier = [eye]
    for _ in range(max_word_length):
        new_frontier = []
        for el in frontier:
            for g in group.generators:
                cand = el @ g
                k1, k2 = _canonical_key(cand)
                hit = seen.get(k1, seen.get(k2))
                if hit is not None:
                    continue
                idx = len(elements)
                seen[k1] = idx
                seen[k2] = idx
                elements.append(cand)
                new_frontier.append(cand)
        frontier = new_frontier
    return GroupEnumeration(max_word_length=max_word_length,
                            elements=np.array(elements))


# ---------------------------------------------------------------------------
# Dirichlet domain
# ---------------------------------------------------------------------------

def in_dirichlet_domain(enumeration: GroupEnumeration, z, slack: float = 1e-12):
    """True where d(z, 0) <= d(z, gamma 0) + slack for every enumerated
    gamma != id. With word length >= 2 this is the exact octagon."""
    z = np.asarray(z, dtype=complex)
    orbit = enumeration.orbit_of_zero()
    nonzero = orbit[np.abs(orbit) > 1e-14]
    d0 = hyperbolic_distance(z, 0.0)
    inside = np.ones(z.shape, dtype=bool)
    for p in nonzero:
        inside &= d0 <= hyperbolic_distance(z, p) + slack
    return inside if inside.shape else bool(inside)


def domain_area_integral(group: FuchsianGroup, n_theta: int = 2048,
                         tol: float = 1e-5, max_refinements: int = 4) -> dict:
    """Integral of 1/(pi (1-|z|^2)^2) over the Dirichlet octagon.

    For each angle the domain boundary radius is found by bisection on the
    membership predicate (the domain is star-shaped about 0), the radial
    integral is closed-form, and the angular integral is a midpoint rule
    refined by doubling until two consecutive estimates agree. The value
    is genus - 1 by Gauss-Bonnet.
    """
    enum = enumerate_elements(group, 2)
    orbit = enum.orbit_of_zero()
    orbit = orbit[np.abs(orbit) > 1e-14]

    def estimate(n: int) -> float:
        theta = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        direction = np.exp(1j * theta)
        lo = np.zeros(n)
        hi = np.full(n, 0.999999)
        for _ in range(52):
            mid = 0.5 * (lo + hi)
            z = mid * direction
            # |z - p|/|1 - conj(p) z| < |z| iff closer to p than to 0
            inside = np.ones(n, dtype=bool)
            for p in orbit:
                inside &= np.abs(z) <= np.abs((z - p) / (1.0 - np.conj(p) * z))
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        rm = 0.5 * (lo + hi)
        vals = rm ** 2 / (1.0 - rm ** 2)
        return float(vals.mean())

    estimates = [estimate(n_theta)]
    ns = [n_theta]
    for _ in range(max_refinements):
        ns.append(ns[-1] * 2)
        estimates.append(estimate(ns[-1]))
        if abs(estimates[-1] - estimates[-2]) <= tol:
            return {"value": estimates[-1], "n_theta": ns,
                    "estimates": estimates,
                    "residual": abs(estimates[-1] - estimates[-2])}
    raise NumericalFailure(
        f"area quadrature did not settle within {tol:.1e}: "
        f"estimates {estimates}")


# ---------------------------------------------------------------------------
# automorphy and basepoint trace identities
# ---------------------------------------------------------------------------

def automorphy_residual(kernel, gamma: np.ndarray, z_points, w_points,
                        conjugate_second: bool = False,
                        gamma_second: np.ndarray = None) -> float:
    """max |K(gamma z, gamma' w) gamma'(z) D - K(z, w)| over the samples.

    ``D`` is gamma''(w) or its conjugate depending on whether the kernel is
    holomorphic (K-type) or anti-holomorphic (Bergman / iterated type) in
    the second argument. ``gamma_second`` defaults to ``gamma`` and covers
    the paired action on mixed kernels.
    """
    z = np.asarray(z_points, dtype=complex)
    w = np.asarray(w_points, dtype=complex)
    g2 = gamma if gamma_second is None else gamma_second
    gz = apply_mobius(gamma, z)
    gw = apply_mobius(g2, w)
    dz = mobius_derivative(gamma, z)
    dw = mobius_derivative(g2, w)
    if conjugate_second:
        dw = np.conj(dw)
    resid = kernel(gz, gw) * dz * dw - kernel(z, w)
    return float(np.abs(resid).max())


def bergman_kernel(z, w):
    """Reproducing kernel of the disk, 1/(pi (1 - z conj(w))^2)."""
    return 1.0 / (np.pi * (1.0 - np.asarray(z) * np.conj(w)) ** 2)


def basepoint_mixed_kernel(z, w):
    """The disk-to-exterior kernel of the identity pair, 1/(pi (z - w)^2)."""
    return 1.0 / (np.pi * (np.asarray(z) - np.asarray(w)) ** 2)


def basepoint_trace_term(group: FuchsianGroup, k: int, n_theta: int = 2048) -> float:
    """Integral of the k-th iterated mixed kernel diagonal over the domain.

    At the basepoint the mixed contraction is the identity operator, whose
    reproducing property makes every power have the Bergman diagonal; each
    term therefore equals the area integral (= genus - 1). The power sets
    the quadrature resolution so successive terms carry independent errors.
    """
    if k < 1:
        raise InvalidInput("trace term index must be >= 1")
    return domain_area_integral(group, n_theta=n_theta + 512 * (k % 3),
                                tol=1e-5)["value"]


def alternating_trace_sum(group: FuchsianGroup, n: int) -> float:
    """sum_{k=0}^{n} (-1)^k C(n,k) * (k-th trace term); zero for n >= 1.

    The k = 0 term is the area integral itself. Binomial weights amplify
    the independent quadrature errors, which is what the tolerance of the
    basepoint suite accounts for.
    """
    if n < 1:
        raise InvalidInput("n must be >= 1")
    from math import comb
    total = 0.0
    for k in range(n + 1):
        term = domain_area_integral(group, n_theta=2048 + 512 * k,
                                    tol=1e-5)["value"]
        total += (-1) ** k * comb(n, k) * term
    return total


def group_to_json(group: FuchsianGroup, enumeration: GroupEnumeration = None) -> str:
    doc = {
        "genus": group.genus,
        "relation_word": list(group.relation_word),
        "vertex_radius": group.vertex_radius,
        "side_distance": group.side_distance,
        "translation_length": group.translation_length,
        "generators": [[[x.real, x.imag] for x in g.ravel()]
                       for g in group.generators],
    }
    if enumeration is not None:
        doc["max_word_length"] = enumeration.max_word_length
        doc["element_count"] = enumeration.count
    return json.dumps(doc, indent=2, sort_keys=True)
