"""Exact arithmetic in Q(beta) for a Pisot unit beta.

A field element is a rational coordinate vector in the power basis
{1, beta, ..., beta^(d-1)}.  All arithmetic (including division by beta,
which stays in Z[beta] because the norm of beta is a unit) is exact.
Comparisons go through certified rational enclosures of the real embedding
and refine until the sign is decided, so they are exact as well.

The geometric side lives in R^d: the companion matrix, its eigenvectors
v_1..v_d normalized so that v_1 + ... + v_d = e_1, the lattice map psi,
and the projection phi to the contracting hyperplane H spanned by the
real and imaginary parts of v_2..v_d.  Coordinates on H are taken in the
basis (Re v_2[, Im v_2], Re v_3, ...); in these coordinates the companion
action is an exact block rotation-scaling, so the Euclidean coordinate
norm contracts by |beta_j| blockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import FieldMismatch, NotIrreducible, NotPisot, NotUnit, ValidationError
from .rootiso import (RootDisk, certified_complex_roots, is_irreducible_monic,
                      isolate_real_roots, poly_deriv, poly_eval, refine_root,
                      sqrt_upper)

LT, EQ, GT = -1, 0, 1

_FLOAT_SLACK = 1e-13


# ---------------------------------------------------------------------------
# rational interval helpers

def _imul(a, b):
    ps = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(ps), max(ps)


def _horner_interval(coords, lo, hi):
    acc = (Fraction(0), Fraction(0))
    for c in reversed(coords):
        acc = _imul(acc, (lo, hi))
        acc = (acc[0] + c, acc[1] + c)
    return acc


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _to_float_up(fr):
    """Float upper bound of a nonnegative Fraction."""
    f = float(fr)
    return math.nextafter(f, math.inf) if Fraction(f) < fr else f


class Enclosure:
    """Numeric presentation of a certified complex enclosure."""

    __slots__ = ("center", "radius")

    def __init__(self, center, radius):
        self.center = complex(center)
        self.radius = float(radius)

    def __repr__(self):
        return f"Enclosure({self.center:.12g}, r<={self.radius:.3g})"


# ---------------------------------------------------------------------------

class PisotField:
    """Algebraic environment for a Pisot unit: conjugates, companion matrix,
    normalized eigenvectors and the contracting-hyperplane basis.

    Construct with :func:`make_field`; instances are immutable apart from
    monotone internal refinement caches, and safe to share between threads.
    """

    def __init__(self, coeffs):
        coeffs = tuple(int(c) for c in coeffs)
        d = len(coeffs)
        if d < 2:
            raise ValidationError("degree must be at least 2")
        if abs(coeffs[-1]) != 1:
            raise NotUnit(f"constant coefficient {coeffs[-1]} is not a unit")
        self.coeffs = coeffs
        self.degree = d
        # minimal polynomial x^d - c1 x^(d-1) - ... - cd, ascending coefficients
        self.min_poly = [Fraction(-c) for c in reversed(coeffs)] + [Fraction(1)]
        if not is_irreducible_monic([int(c) for c in self.min_poly]):
            raise NotIrreducible(f"x^{d} - " + " - ".join(
                f"{c}*x^{d - i - 1}" for i, c in enumerate(coeffs)) + " factors over Q")
        self._dps = 60
        self._init_conjugates()
        self._init_linear_data()
        self._init_geometry()

    # -- conjugate certification ------------------------------------------

    def _init_conjugates(self):
        p = self.min_poly
        real_ivs = isolate_real_roots(p)
        real_ivs = [refine_root(p, lo, hi, Fraction(1, 2 ** 80)) for lo, hi in real_ivs]
        n_complex = self.degree - len(real_ivs)
        disks = certified_complex_roots([int(c) for c in p], n_complex, dps=self._dps)

        # classify: exactly one real root > 1, everything else inside the unit circle
        big = [iv for iv in real_ivs if iv[0] > 1]
        if len(big) != 1:
            raise NotPisot("expected exactly one real root > 1")
        beta1 = big[0]
        small = []
        for lo, hi in real_ivs:
            if (lo, hi) == beta1:
                continue
            while not (abs(lo) < 1 and abs(hi) < 1):
                if lo >= 1 or hi <= -1:
                    raise NotPisot(f"real conjugate in [{float(lo)}, {float(hi)}] not inside unit circle")
                lo, hi = refine_root(p, lo, hi, (hi - lo) / 16)
            small.append((lo, hi))
        for disk in disks:
            if disk.abs_upper() >= 1:
                if disk.abs_lower() > 1:
                    raise NotPisot("complex conjugate outside unit circle")
                disks = certified_complex_roots([int(c) for c in p], len(disks), dps=self._dps * 2)
                self._dps *= 2
                for dk in disks:
                    if dk.abs_upper() >= 1:
                        raise NotPisot("complex conjugate not certified inside unit circle")
                break

        small.sort()
        # conjugates[0] is beta itself; then real conjugates ascending, then
        # complex conjugate pairs (Im > 0 first, mirror second)
        self._real_encl = {0: beta1}
        self._kinds = ["real"]
        for iv in small:
            self._kinds.append("real")
            self._real_encl[len(self._kinds) - 1] = iv
        self._disks = {}
        for disk in disks:
            self._kinds.append("complex")
            self._disks[len(self._kinds) - 1] = disk

        rho = Fraction(0)
        for j in range(1, self.degree):
            rho = max(rho, self.conj_abs_upper(j))
        if rho >= 1:
            raise NotPisot("contraction ratio not below 1")
        self.rho = _to_float_up(rho) * (1 + 1e-12)

    def _refine_real(self, j, width):
        lo, hi = self._real_encl[j]
        if hi - lo > width:
            lo, hi = refine_root(self.min_poly, lo, hi, width)
            self._real_encl[j] = (lo, hi)
        return self._real_encl[j]

    def _refine_disk(self, j, radius):
        if self._disks[j].radius > radius:
            bits = max(64, int(-radius.numerator.bit_length() + radius.denominator.bit_length()) + 16)
            self._dps = max(self._dps, int(bits * 0.302) + 30)
            n = len(self._disks)
            disks = certified_complex_roots([int(c) for c in self.min_poly], n, dps=self._dps)
            old = sorted(self._disks)
            # match recomputed disks to existing indices by nearest center
            for idx in old:
                cur = self._disks[idx]
                best = min(disks, key=lambda dk: (dk.re - cur.re) ** 2 + (dk.im - cur.im) ** 2)
                self._disks[idx] = best
        return self._disks[j]

    def conj_kind(self, j):
        return self._kinds[j]

    def conj_enclosure(self, j, width=Fraction(1, 2 ** 60)):
        """Certified enclosure of the j-th conjugate (0-based; 0 is beta)."""
        if self._kinds[j] == "real":
            lo, hi = self._refine_real(j, width)
            return RootDisk((lo + hi) / 2, Fraction(0), (hi - lo) / 2)
        return self._refine_disk(j, width)

    def conj_abs_upper(self, j):
        if self._kinds[j] == "real":
            lo, hi = self._real_encl[j]
            return max(abs(lo), abs(hi))
        return self._disks[j].abs_upper()

    def beta1_interval(self, width=Fraction(1, 2 ** 60)):
        return self._refine_real(0, width)

    # -- linear data --------------------------------------------------------

    def _init_linear_data(self):
        d = self.degree
        c = self.coeffs
        self.companion = tuple(
            tuple(c[k] if i == 0 else (1 if k == i - 1 else 0) for k in range(d))
            for i in range(d))
        # columns M^k e1 for psi, and the inverse change of basis for pi1
        cols = []
        v = [Fraction(1)] + [Fraction(0)] * (d - 1)
        for _ in range(d):
            cols.append(tuple(v))
            v = [sum(Fraction(self.companion[i][k]) * v[k] for k in range(d)) for i in range(d)]
        self._psi_cols = tuple(cols)
        self._pi1_rows = _invert_rational_matrix([[cols[k][i] for k in range(d)] for i in range(d)])
        # powers beta^d .. beta^(2d-2) in the basis, for reduction after products
        pows = [tuple(Fraction(x) for x in row) for row in _basis_powers(c, 2 * d - 1)]
        self._pow_coords = pows
        self._inv_beta = tuple(
            Fraction(-c[d - 2 - k], c[d - 1]) if k < d - 1 else Fraction(1, c[d - 1])
            for k in range(d))
        # integer matrix of multiplication by 1/beta on coordinates (unit norm)
        inv_cols = []
        cur = list(self._inv_beta)
        base = QBeta(self, tuple(self._inv_beta))
        for k in range(d):
            col = QBeta(self, tuple(Fraction(1) if i == k else Fraction(0) for i in range(d))) * base
            inv_cols.append([int(x) for x in col.coords])
        self.inv_beta_mat = tuple(tuple(inv_cols[k][i] for k in range(d)) for i in range(d))

    # -- geometry ------------------------------------------------------------

    def _init_geometry(self):
        d = self.degree
        centers = []
        for j in range(d):
            disk = self.conj_enclosure(j, Fraction(1, 2 ** 70))
            centers.append(complex(float(disk.re), float(disk.im)))
        dp = poly_deriv(self.min_poly)
        vs = []
        for b in centers:
            dpb = complex(sum(float(c) * b ** k for k, c in enumerate(dp)))
            vec = np.array([b ** (d - 1 - i) for i in range(d)], dtype=complex) / dpb
            vs.append(vec)
        self.v = vs
        resid = abs(sum(vs) - np.eye(d)[0]).max()
        if resid > 1e-8:
            raise ValidationError(f"eigenvector normalization failed, residual {resid:.2e}")
        self.v_err = max(resid, 1e-14)

        blocks = []   # ('real', j) or ('pair', j) with j the Im>0 member
        j = 1
        while j < d:
            if self._kinds[j] == "real":
                blocks.append(("real", j))
                j += 1
            else:
                blocks.append(("pair", j))
                j += 2
        self.hblocks = blocks
        rows = []
        mh = np.zeros((d - 1, d - 1))
        k = 0
        for kind, j in blocks:
            bj = centers[j]
            if kind == "real":
                rows.append(vs[j].real)
                mh[k, k] = bj.real
                k += 1
            else:
                rows.append(vs[j].real)
                rows.append(vs[j].imag)
                mh[k, k] = bj.real
                mh[k, k + 1] = bj.imag
                mh[k + 1, k] = -bj.imag
                mh[k + 1, k + 1] = bj.real
                k += 2
        self.hmat = np.array(rows)          # rows are the hyperplane basis vectors
        self.contract_mat = mh              # action of the companion matrix on H coordinates
        full = np.column_stack([vs[0].real] + [r for r in self.hmat])
        self.det_factor = abs(np.linalg.det(full))
        mv = self.hmat.T @ mh
        chk = np.array(self.companion, dtype=float) @ self.hmat.T
        if np.abs(mv - chk).max() > 1e-9:
            raise ValidationError("hyperplane action inconsistent with companion matrix")

    # -- element constructors -------------------------------------------------

    def qb(self, coords):
        """Element from a coordinate sequence (rationals, ints, or 'p/q' strings)."""
        coords = list(coords)
        if len(coords) > self.degree:
            raise ValidationError("too many coordinates")
        coords += [0] * (self.degree - len(coords))
        return QBeta(self, tuple(Fraction(c) for c in coords))

    def from_rational(self, r):
        return self.qb([Fraction(r)])

    @property
    def zero(self):
        return self.qb([0])

    @property
    def one(self):
        return self.qb([1])

    @property
    def beta(self):
        return self.qb([0, 1])

    def __repr__(self):
        return f"PisotField({self.coeffs})"

    def __eq__(self, other):
        return isinstance(other, PisotField) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)


def _basis_powers(c, upto):
    """Coordinates of beta^k for k < upto over the basis, as integer rows."""
    d = len(c)
    rows = []
    cur = [0] * d
    cur[0] = 1
    for _ in range(upto):
        rows.append(list(cur))
        top = cur[d - 1]
        nxt = [0] * d
        for i in range(d - 1, 0, -1):
            nxt[i] = cur[i - 1]
        for i in range(d):
            nxt[d - 1 - i] += top * c[i]
        cur = nxt
    return rows


def _invert_rational_matrix(m):
    n = len(m)
    a = [[Fraction(m[i][j]) for j in range(n)] + [Fraction(1 if i == j else 0) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        f = a[col][col]
        a[col] = [x / f for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                g = a[r][col]
                a[r] = [x - g * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def make_field(*coeffs):
    """Validated Pisot-unit field from minimal-polynomial coefficients c1..cd.

    Raises NotUnit, NotIrreducible, or NotPisot when the polynomial does not
    define a Pisot unit.
    """
    if len(coeffs) == 1 and isinstance(coeffs[0], (list, tuple)):
        coeffs = tuple(coeffs[0])
    return PisotField(coeffs)


# ---------------------------------------------------------------------------

class QBeta:
    """An element of Q(beta) as an exact rational vector over {1, beta, ...}."""

    __slots__ = ("field", "coords")

    def __init__(self, field, coords):
        self.field = field
        self.coords = coords

    # -- ring operations

    def _chk(self, other):
        if isinstance(other, int):
            other = self.field.qb([other])
        if not isinstance(other, QBeta):
            raise TypeError(f"cannot combine QBeta with {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatch("operands belong to different fields")
        return other

    def __add__(self, other):
        other = self._chk(other)
        return QBeta(self.field, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        other = self._chk(other)
        return QBeta(self.field, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return QBeta(self.field, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QBeta(self.field, tuple(a * other for a in self.coords))
        other = self._chk(other)
        d = self.field.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.coords):
            if a == 0:
                continue
            for j, b in enumerate(other.coords):
                if b != 0:
                    prod[i + j] += a * b
        out = list(prod[:d])
        pows = self.field._pow_coords
        for k in range(d, 2 * d - 1):
            if prod[k] != 0:
                row = pows[k]
                for i in range(d):
                    out[i] += prod[k] * row[i]
        return QBeta(self.field, tuple(out))

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return (-self) + other

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return QBeta(self.field, tuple(a / other for a in self.coords))
        other = self._chk(other)
        return self * other.inv()

    def div_beta(self):
        """Exact division by beta (stays in Z[beta] for integral elements)."""
        return self * QBeta(self.field, self.field._inv_beta)

    def inv(self):
        """Exact multiplicative inverse, by solving the multiplication system."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        d = self.field.degree
        cols = []
        cur = self
        for _ in range(d):
            cols.append(cur.coords)
            cur = cur * self.field.beta
        m = [[cols[k][i] for k in range(d)] for i in range(d)]
        inv = _invert_rational_matrix(m)
        return QBeta(self.field, tuple(inv[i][0] for i in range(d)))

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        out = self.field.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- structure

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def is_rational(self):
        return all(c == 0 for c in self.coords[1:])

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coords)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field.qb([other])
        return isinstance(other, QBeta) and self.field == other.field and self.coords == other.coords

    def __hash__(self):
        return hash((self.coords, self.field.coeffs))

    def __lt__(self, other):
        return qb_compare(self, self._chk(other)) == LT

    def __le__(self, other):
        return qb_compare(self, self._chk(other)) != GT

    def __gt__(self, other):
        return qb_compare(self, self._chk(other)) == GT

    def __ge__(self, other):
        return qb_compare(self, self._chk(other)) != LT

    def __float__(self):
        lo, hi = gamma_interval(self, 0, Fraction(1, 2 ** 60))
        return float((lo + hi) / 2)

    def __abs__(self):
        return -self if qb_compare(self, self.field.zero) == LT else self

    def __repr__(self):
        return "QB(" + ", ".join(str(c) for c in self.coords) + ")"


# ---------------------------------------------------------------------------
# embeddings

def gamma_interval(x, j, width):
    """Certified rational interval for a real embedding of x (0-based j)."""
    fld = x.field
    if fld.conj_kind(j) != "real":
        raise ValidationError("gamma_interval needs a real conjugate")
    scale = 1 + sum(abs(c) for c in x.coords)
    w = Fraction(width) / (scale * 4 * fld.degree)
    while True:
        lo, hi = fld._refine_real(j, w)
        vlo, vhi = _horner_interval(x.coords, lo, hi)
        if vhi - vlo <= width:
            return vlo, vhi
        w /= 16


def gamma_disk(x, j, radius):
    """Certified rational disk (re, im, rad) for a complex embedding of x."""
    fld = x.field
    scale = 1 + sum(abs(c) for c in x.coords)
    r = Fraction(radius) / (scale * 4 * fld.degree)
    while True:
        disk = fld._refine_disk(j, r)
        c = (disk.re, disk.im)
        val = (Fraction(0), Fraction(0))
        for cf in reversed(x.coords):
            val = _cmul(val, c)
            val = (val[0] + cf, val[1])
        cabs = sqrt_upper(disk.re ** 2 + disk.im ** 2) + disk.radius
        dbound = Fraction(0)
        for k, cf in enumerate(x.coords):
            if k >= 1 and cf != 0:
                dbound += k * abs(cf) * cabs ** (k - 1)
        rad = disk.radius * dbound
        if rad <= radius:
            return val[0], val[1], rad
        r /= 16


def gamma(x, j, precision=53):
    """Certified numeric enclosure of the j-th embedding of x (0-based).

    ``precision`` is in bits: the returned radius is at most 2**(1-precision)
    times max(1, |x|) plus float-conversion slack.
    """
    target = Fraction(1, 2 ** precision) * (1 + sum(abs(c) for c in x.coords))
    if x.field.conj_kind(j) == "real":
        lo, hi = gamma_interval(x, j, target)
        mid = (lo + hi) / 2
        conv = abs(mid - Fraction(float(mid)))
        return Enclosure(float(mid), _to_float_up((hi - lo) / 2 + conv) + 5e-324)
    re, im, rad = gamma_disk(x, j, target)
    conv = abs(re - Fraction(float(re))) + abs(im - Fraction(float(im)))
    return Enclosure(complex(float(re), float(im)), _to_float_up(rad + conv) + 5e-324)


def gamma_abs_upper(x, j):
    """Certified rational upper bound for |Gamma_j(x)|."""
    if x.field.conj_kind(j) == "real":
        lo, hi = gamma_interval(x, j, Fraction(1, 2 ** 30))
        return max(abs(lo), abs(hi))
    re, im, rad = gamma_disk(x, j, Fraction(1, 2 ** 30))
    return sqrt_upper(re * re + im * im) + rad


def qb_compare(x, y):
    """Exact three-way comparison; -1, 0, 1 for <, =, >."""
    if x.field != y.field:
        raise FieldMismatch("cannot compare elements of different fields")
    if x.coords == y.coords:
        return EQ
    diff = tuple(a - b for a, b in zip(x.coords, y.coords))
    width = Fraction(1, 2 ** 64)
    fld = x.field
    while True:
        lo, hi = fld._refine_real(0, width)
        vlo, vhi = _horner_interval(diff, lo, hi)
        if vlo > 0:
            return GT
        if vhi < 0:
            return LT
        width /= 2 ** 64


def qb_sign(x):
    return qb_compare(x, x.field.zero)


def qb_floor(x):
    """Exact floor of a field element."""
    if x.is_rational():
        return math.floor(x.coords[0])
    width = Fraction(1, 16)
    while True:
        lo, hi = gamma_interval(x, 0, width)
        if math.floor(lo) == math.floor(hi):
            return math.floor(lo)
        width /= 256


def qb_ceil(x):
    if x.is_rational():
        return math.ceil(x.coords[0])
    return qb_floor(x) + 1


def _simplest_between(lo, hi):
    """Smallest-denominator fraction in the closed rational interval [lo, hi]."""
    if lo > hi:
        raise ValueError("empty interval")
    fl = math.floor(lo)
    if fl + 1 <= hi:
        return Fraction(fl if lo <= fl else fl + 1)
    frac_lo, frac_hi = lo - fl, hi - fl
    if frac_lo == 0:
        return Fraction(fl)
    inner = _simplest_between(1 / frac_hi, 1 / frac_lo)
    return fl + 1 / inner


def simple_rational_in(lo, hi):
    """A small-denominator rational field element x with lo <= x < hi (exact)."""
    field = lo.field
    width = (hi - lo)
    w = Fraction(1, 16)
    while True:
        a1, b1 = gamma_interval(lo, 0, w)
        a2, b2 = gamma_interval(hi, 0, w)
        if b1 < a2:
            x = field.qb([_simplest_between(b1, a2)])
            if qb_compare(x, lo) != LT and qb_compare(x, hi) == LT:
                return x
        w /= 64


# ---------------------------------------------------------------------------
# lattice and hyperplane maps

@dataclass(frozen=True)
class HPoint:
    """A point of the contracting hyperplane in basis coordinates, with a
    certified error radius (Euclidean in these coordinates)."""
    coords: tuple
    err: float

    def __iter__(self):
        return iter(self.coords)


def psi(x):
    """Exact lattice embedding: psi(x) = sum_k q_k M^k e_1 (rational vector)."""
    cols = x.field._psi_cols
    d = x.field.degree
    out = [Fraction(0)] * d
    for k, q in enumerate(x.coords):
        if q != 0:
            col = cols[k]
            for i in range(d):
                out[i] += q * col[i]
    return tuple(out)


def pi1(vec, field):
    """Exact inverse of psi: the Q(beta) element whose lattice image is vec."""
    d = field.degree
    vec = tuple(Fraction(v) for v in vec)
    if len(vec) != d:
        raise ValidationError("vector length does not match field degree")
    rows = field._pi1_rows
    coords = tuple(sum(rows[k][i] * vec[i] for i in range(d)) for k in range(d))
    return QBeta(field, coords)


def phi(x, precision=53):
    """Certified hyperplane component of psi(x), in hyperplane coordinates."""
    fld = x.field
    coords = []
    err = 0.0
    for kind, j in fld.hblocks:
        enc = gamma(x, j, precision)
        if kind == "real":
            coords.append(enc.center.real)
            err += enc.radius ** 2
        else:
            coords.append(2 * enc.center.real)
            coords.append(-2 * enc.center.imag)
            err += 8 * enc.radius ** 2
    return HPoint(tuple(coords), math.sqrt(err) * (1 + 1e-12) + _FLOAT_SLACK)


def hpoint_ambient(p, field):
    """Embed hyperplane coordinates back into R^d (numpy float vector)."""
    return field.hmat.T @ np.asarray(p.coords if isinstance(p, HPoint) else p)
