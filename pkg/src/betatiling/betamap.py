"""Piecewise-linear expansion maps x -> beta*x - a on exact interval pieces.

A transform carries a digit set A in Q(beta) and, per digit, a finite union
of half-open intervals.  The ``side`` flag selects between the right-continuous
map (pieces [lo, hi)) and its left-continuous twin (pieces (lo, hi]).  All
membership tests, orbits, and expansions are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dfield
from fractions import Fraction

from .errors import (BadAlpha, BudgetExceeded, EmptyPart, NoFixedPoint,
                     NotSurjective, OutOfDomain, Overlap, PediciniGapViolated,
                     UnknownDigit, ValidationError)
from .numfield import (EQ, GT, LT, QBeta, make_field, qb_ceil, qb_compare,
                       qb_floor)


@dataclass(frozen=True)
class IntervalQB:
    """Half-open interval with exact endpoints; orientation given by context."""
    lo: QBeta
    hi: QBeta

    def length(self):
        return self.hi - self.lo

    def __repr__(self):
        return f"[{float(self.lo):.6g}, {float(self.hi):.6g})"


def _merge_union(intervals):
    """Disjoint normal form of a union of half-open intervals."""
    ivs = sorted(intervals, key=lambda iv: iv.lo)
    out = []
    for iv in ivs:
        if qb_compare(iv.lo, iv.hi) != LT:
            continue
        if out and qb_compare(iv.lo, out[-1].hi) != GT:
            if qb_compare(iv.hi, out[-1].hi) == GT:
                out[-1] = IntervalQB(out[-1].lo, iv.hi)
        else:
            out.append(iv)
    return out


def _union_equal(a, b):
    a, b = _merge_union(a), _merge_union(b)
    if len(a) != len(b):
        return False
    return all(x.lo == y.lo and x.hi == y.hi for x, y in zip(a, b))


def _intersect(iv, jv):
    lo = iv.lo if qb_compare(iv.lo, jv.lo) == GT else jv.lo
    hi = iv.hi if qb_compare(iv.hi, jv.hi) == LT else jv.hi
    return IntervalQB(lo, hi) if qb_compare(lo, hi) == LT else None


class BetaTransform:
    """A validated expansion map.  Immutable; build with :func:`build_transform`."""

    def __init__(self, field, digits, parts, side, _validated=False):
        self.field = field
        self.digits = list(digits)
        self.parts = [list(p) for p in parts]
        self.side = side
        if not _validated:
            raise ValidationError("use build_transform()")
        self.pieces = sorted(
            ((iv, a) for a, pp in enumerate(self.parts) for iv in pp),
            key=lambda t: t[0].lo)
        self.xmin = self.pieces[0][0].lo
        self.xmax = self.pieces[-1][0].hi
        comps = []
        for iv, _ in self.pieces:
            if comps and comps[-1].hi == iv.lo:
                comps[-1] = IntervalQB(comps[-1].lo, iv.hi)
            else:
                comps.append(IntervalQB(iv.lo, iv.hi))
        self.components = comps
        lo, hi = self.field.beta1_interval()
        b1 = float((lo + hi) / 2)
        self._b1_pows = tuple(b1 ** k for k in range(self.field.degree))
        self._float_pieces = tuple((float(iv.lo), float(iv.hi)) for iv, _ in self.pieces)

    # -- membership --------------------------------------------------------

    def _approx(self, x):
        v = s = 0.0
        for c, p in zip(x.coords, self._b1_pows):
            cf = c.numerator / c.denominator
            v += cf * p
            s += abs(cf) * p
        return v, s

    def digit_index_of(self, x):
        """Index of the digit whose piece contains x, or None.

        Uses a float screen with a wide exactness band; only points near a
        piece boundary fall through to exact comparisons.
        """
        xf, scale = self._approx(x)
        band = 1e-9 * (1.0 + scale)
        right = self.side == "right"
        exact_needed = False
        for (lof, hif), (iv, a) in zip(self._float_pieces, self.pieces):
            if right:
                if lof + band <= xf < hif - band:
                    return a
            else:
                if lof + band < xf <= hif - band:
                    return a
            if lof - band <= xf <= lof + band or hif - band <= xf <= hif + band:
                exact_needed = True
        if not exact_needed:
            return None
        for iv, a in self.pieces:
            if right:
                if qb_compare(x, iv.lo) != LT and qb_compare(x, iv.hi) == LT:
                    return a
            else:
                if qb_compare(x, iv.lo) == GT and qb_compare(x, iv.hi) != GT:
                    return a
        return None

    def contains(self, x):
        return self.digit_index_of(x) is not None

    def step(self, x):
        """One application of the map: returns (digit, beta*x - digit)."""
        a = self.digit_index_of(x)
        if a is None:
            raise OutOfDomain(f"{x!r} is not in the domain")
        digit = self.digits[a]
        return digit, x * self.field.beta - digit

    def step_index(self, x):
        a = self.digit_index_of(x)
        if a is None:
            raise OutOfDomain(f"{x!r} is not in the domain")
        return a, x * self.field.beta - self.digits[a]

    def domain_union(self):
        return [iv for iv, _ in self.pieces]

    def diam(self):
        return self.xmax - self.xmin

    def digit_lookup(self, value):
        for i, dg in enumerate(self.digits):
            if dg == value:
                return i
        raise UnknownDigit(f"{value!r} is not a digit of this transform")

    def twin(self):
        """The companion map with flipped interval sides; an involution."""
        return BetaTransform(self.field, self.digits, self.parts,
                             "left" if self.side == "right" else "right",
                             _validated=True)

    def digits_integral(self):
        return all(d.is_integral() for d in self.digits)

    # -- config ------------------------------------------------------------

    def to_config(self):
        return {
            "field": list(self.field.coeffs),
            "digits": [[str(c) for c in d.coords] for d in self.digits],
            "parts": [[{"lo": [str(c) for c in iv.lo.coords],
                        "hi": [str(c) for c in iv.hi.coords]} for iv in pp]
                      for pp in self.parts],
            "side": self.side,
        }

    def __repr__(self):
        return (f"BetaTransform({self.field.coeffs}, |A|={len(self.digits)}, "
                f"{sum(len(p) for p in self.parts)} pieces, {self.side})")


def build_transform(field, digits, parts, side="right"):
    """Validate digit pieces and the exact surjectivity identity.

    ``digits`` are field elements, ``parts`` one interval list per digit.
    Raises EmptyPart, Overlap, or NotSurjective.
    """
    if side not in ("right", "left"):
        raise ValidationError("side must be 'right' or 'left'")
    if not digits:
        raise EmptyPart("no digits")
    digits = [d if isinstance(d, QBeta) else field.qb([d]) for d in digits]
    norm_parts = []
    for a, pp in enumerate(parts):
        if not pp:
            raise EmptyPart(f"digit {digits[a]!r} has no interval")
        for iv in pp:
            if qb_compare(iv.lo, iv.hi) != LT:
                raise ValidationError(f"empty or reversed interval {iv!r}")
        norm_parts.append(_merge_union(pp))
    flat = sorted(((iv, a) for a, pp in enumerate(norm_parts) for iv in pp),
                  key=lambda t: t[0].lo)
    for (iv, a), (jv, b) in zip(flat, flat[1:]):
        if qb_compare(jv.lo, iv.hi) == LT:
            raise Overlap(f"{iv!r} (digit {digits[a]!r}) overlaps {jv!r} (digit {digits[b]!r})")
    beta = field.beta
    images = [IntervalQB(iv.lo * beta - digits[a], iv.hi * beta - digits[a])
              for a, pp in enumerate(norm_parts) for iv in pp]
    domain = [iv for iv, _ in flat]
    if not _union_equal(images, domain):
        raise NotSurjective(
            "images of the branches do not cover the domain exactly: "
            f"{[str(i) for i in _merge_union(images)]} vs {[str(i) for i in _merge_union(domain)]}")
    order = sorted(range(len(digits)), key=lambda a: norm_parts[a][0].lo)
    return BetaTransform(field, [digits[a] for a in order],
                         [norm_parts[a] for a in order], side, _validated=True)


# ---------------------------------------------------------------------------
# presets

def preset(kind, field, alpha=None, digits=None):
    """Standard transform families; ``alpha`` and ``digits`` as each needs."""
    one = field.one
    beta = field.beta
    if kind == "greedy":
        top = qb_ceil(beta) - 1
        ds = [field.qb([a]) for a in range(top + 1)]
        parts = [[IntervalQB(d.div_beta(), (d + 1).div_beta())] for d in ds[:-1]]
        parts.append([IntervalQB(ds[-1].div_beta(), one)])
        return build_transform(field, ds, parts, "right")
    if kind == "lazy":
        top = qb_ceil(beta) - 1
        ds = [field.qb([a]) for a in range(top + 1)]
        right = field.qb([top]) * (beta - one).inv()
        bounds = [field.zero] + [(right + field.qb([a])).div_beta() for a in range(top)] + [right]
        parts = [[IntervalQB(bounds[a], bounds[a + 1])] for a in range(top + 1)]
        return build_transform(field, ds, parts, "left")
    if kind == "pedicini":
        if not digits:
            raise ValidationError("pedicini preset needs a digit list")
        ds = sorted((d if isinstance(d, QBeta) else field.qb([d]) for d in digits))
        if not ds[0].is_zero():
            raise ValidationError("pedicini digits must start at 0")
        gap_bound = ds[-1] * (beta - one).inv()
        for lo, hi in zip(ds, ds[1:]):
            if qb_compare(hi - lo, gap_bound) == GT:
                raise PediciniGapViolated(f"digit gap {hi - lo!r} exceeds {gap_bound!r}")
        parts = [[IntervalQB(a.div_beta(), b.div_beta())] for a, b in zip(ds, ds[1:])]
        parts.append([IntervalQB(ds[-1].div_beta(), ds[-1] * (beta - one).inv())])
        return build_transform(field, ds, parts, "right")
    if kind == "linear_mod1":
        if alpha is None:
            raise ValidationError("linear_mod1 preset needs alpha")
        if qb_compare(alpha, field.zero) == LT or qb_compare(alpha, one) != LT:
            raise BadAlpha("alpha must satisfy 0 <= alpha < 1")
        top = qb_ceil(beta + alpha) - 1
        ds = [field.qb([i]) - alpha for i in range(top + 1)]
        bounds = [field.zero] + [(field.qb([i]) - alpha).div_beta() for i in range(1, top + 1)] + [one]
        parts = [[IntervalQB(bounds[i], bounds[i + 1])] for i in range(top + 1)]
        try:
            return build_transform(field, ds, parts, "right")
        except (NotSurjective, ValidationError) as exc:
            raise BadAlpha(str(exc)) from exc
    if kind == "minimal_weight":
        if alpha is None:
            raise ValidationError("minimal_weight preset needs alpha")
        if qb_compare(alpha, field.zero) != GT:
            raise BadAlpha("alpha must be positive")
        ds = [-one, field.zero, one]
        ba = beta * alpha
        parts = [[IntervalQB(-ba, -alpha)], [IntervalQB(-alpha, alpha)], [IntervalQB(alpha, ba)]]
        try:
            return build_transform(field, ds, parts, "right")
        except (NotSurjective, ValidationError) as exc:
            raise BadAlpha(str(exc)) from exc
    if kind == "symmetric":
        half = Fraction(1, 2)
        lo_d = qb_floor((one - beta) / 2)
        hi_d = qb_ceil((beta - one) / 2)
        ds = [field.qb([i]) for i in range(lo_d, hi_d + 1)]
        bounds = [field.qb([-half])]
        for i in range(lo_d, hi_d):
            bounds.append((field.qb([i]) + field.qb([half])).div_beta())
        bounds.append(field.qb([half]))
        parts = [[IntervalQB(bounds[k], bounds[k + 1])] for k in range(len(ds))]
        return build_transform(field, ds, parts, "right")
    raise ValidationError(f"unknown preset kind {kind!r}")


# ---------------------------------------------------------------------------
# expansions

@dataclass(frozen=True)
class Expansion:
    """Digit-index word: preperiod then infinitely repeated period."""
    preperiod: tuple
    period: tuple
    exact: bool = True

    def digit_at(self, k):
        if k < len(self.preperiod):
            return self.preperiod[k]
        if not self.period:
            raise IndexError("finite word")
        return self.period[(k - len(self.preperiod)) % len(self.period)]

    def tail(self, k):
        """The shifted word starting at position k, in canonical form."""
        if k <= len(self.preperiod):
            return Expansion(self.preperiod[k:], self.period, self.exact)
        if not self.period:
            raise IndexError("finite word")
        r = (k - len(self.preperiod)) % len(self.period)
        return Expansion((), self.period[r:] + self.period[:r], self.exact)

    def __len__(self):
        return len(self.preperiod) + len(self.period)


def expand(t, x, max_steps=100000):
    """The digit expansion of x under t, with certified eventual period.

    Orbit points are hashed exactly, so the returned preperiod and period are
    minimal.  Raises OutOfDomain if x is outside the domain and BudgetExceeded
    (a defect signal for field elements) if no revisit happens in max_steps.
    """
    seen = {}
    word = []
    cur = x
    for k in range(max_steps):
        key = cur.coords
        if key in seen:
            j = seen[key]
            return Expansion(tuple(word[:j]), tuple(word[j:]), True)
        seen[key] = k
        a, cur = t.step_index(cur)
        word.append(a)
    raise BudgetExceeded("no period detected", x=str(x), steps=max_steps)


def expansion_value(t, word):
    """Exact value sum(digit_k * beta^-k) of an eventually periodic word."""
    f = t.field
    if not word.period:
        raise ValidationError("word must be eventually periodic (nonempty period)")
    beta = f.beta
    n = len(word.period)
    acc = f.zero
    for a in word.period:
        acc = acc * beta + t.digits[a]
    per_val = acc * (beta ** n - f.one).inv()
    val = per_val
    for a in reversed(word.preperiod):
        val = (val + t.digits[a]).div_beta()
    return val


def word_from_digits(t, pre, per):
    """Digit-index word from digit values (ints, rationals, or QBeta)."""
    conv = lambda d: t.digit_lookup(d if isinstance(d, QBeta) else t.field.qb([d]))
    return Expansion(tuple(conv(d) for d in pre), tuple(conv(d) for d in per))


def is_admissible(t, word):
    """Whether the eventually periodic word is the expansion of its own value.

    Uses the lexicographic endpoint criterion when every digit piece is a
    single interval in monotone layout, and exact tail-value membership in
    general; the two agree.
    """
    for a in itertools.chain(word.preperiod, word.period):
        if not 0 <= a < len(t.digits):
            raise UnknownDigit(f"digit index {a} out of range")
    if _lex_applicable(t):
        words = endpoint_words(t)
        strict_low = t.side == "left"
        for k in range(len(word.preperiod) + len(word.period)):
            tail = word.tail(k)
            a = tail.preperiod[0] if tail.preperiod else tail.period[0]
            low, up = words[a][0]
            cmp_low = word_compare(low, tail)
            if cmp_low == GT or (strict_low and cmp_low == EQ):
                return False
            cmp_up = word_compare(tail, up)
            if (cmp_up != LT) if t.side == "right" else (cmp_up == GT):
                return False
        return True
    for k in range(len(word.preperiod) + len(word.period)):
        tail = word.tail(k)
        a = tail.preperiod[0] if tail.preperiod else tail.period[0]
        x = expansion_value(t, tail)
        if t.digit_index_of(x) != a:
            return False
    return True


def _lex_applicable(t):
    if any(len(p) != 1 for p in t.parts):
        return False
    # digit order must match interval order
    return all(qb_compare(t.digits[a], t.digits[a + 1]) == LT
               for a in range(len(t.digits) - 1))


def endpoint_words(t):
    """Per digit and piece, the pair of bounding expansions: the expansion of
    the left endpoint under the right-continuous map and of the right endpoint
    under the left-continuous one."""
    tw = t.twin()
    right, left = (t, tw) if t.side == "right" else (tw, t)
    out = []
    for a, pp in enumerate(t.parts):
        rows = []
        for iv in pp:
            rows.append((expand(right, iv.lo), expand(left, iv.hi)))
        out.append(rows)
    return out


def word_compare(w1, w2, horizon=None):
    """Exact lexicographic comparison of eventually periodic index words."""
    if horizon is None:
        n1, n2 = max(1, len(w1.period)), max(1, len(w2.period))
        horizon = len(w1.preperiod) + len(w2.preperiod) + _lcm(n1, n2) + 1
    for k in range(horizon):
        a, b = w1.digit_at(k), w2.digit_at(k)
        if a != b:
            return GT if a > b else LT
    return EQ


def _lcm(a, b):
    from math import gcd
    return a * b // gcd(a, b)


def prefix_interval_set(t, prefix):
    """Exact set {x : the expansion of x starts with the given index word}.

    Independent of the admissibility machinery: computed by pulling the digit
    pieces back through the branches.  Returns a disjoint interval list.
    """
    beta = t.field.beta
    cur = [iv for iv, _ in t.pieces]
    for a in reversed(prefix):
        nxt = []
        for iv in cur:
            pre = IntervalQB((iv.lo + t.digits[a]).div_beta(),
                             (iv.hi + t.digits[a]).div_beta())
            for piece in t.parts[a]:
                got = _intersect(pre, piece)
                if got is not None:
                    nxt.append(got)
        cur = _merge_union(nxt)
        if not cur:
            return []
    return cur


# ---------------------------------------------------------------------------
# the boundary-orbit set

@dataclass
class VData:
    """Boundary-orbit points, the intervals they bound, and merge times."""
    V: list
    J: dict            # V point -> IntervalQB
    m: dict            # discontinuity -> merge time (None if the orbits never merge)
    order: dict = dfield(default_factory=dict)

    def __post_init__(self):
        self.order = {v.coords: i for i, v in enumerate(self.V)}

    def index_of_point(self, x):
        """Index of the interval containing x (exact, right-continuous)."""
        lo, hi = 0, len(self.V) - 1
        best = None
        for i, v in enumerate(self.V):
            if qb_compare(v, x) != GT:
                best = i
            else:
                break
        if best is None:
            return None
        iv = self.J[self.V[best]]
        if qb_compare(x, iv.hi) == LT:
            return best
        return None


def compute_v(t, budget=20000):
    """Boundary-orbit set, intervals, and merge times of the two one-sided maps.

    For each interior discontinuity the orbits under the map and its twin are
    iterated in lockstep with exact equality tests; the loop stops at the merge
    time or, when the orbit pair closes a cycle without merging, after the pair
    cycle is complete (all orbit points collected).
    """
    if t.side != "right":
        raise ValidationError("boundary-orbit analysis expects the right-continuous map")
    tw = t.twin()
    pts = {iv.lo.coords: iv.lo for iv in t.components}
    m = {}
    for (iv, a), (jv, b) in zip(t.pieces, t.pieces[1:]):
        if iv.hi != jv.lo or a == b:
            continue
        e = jv.lo
        u, w = e, e
        seen_pairs = set()
        merge = None
        collected = []
        for k in range(1, budget + 1):
            _, u = t.step_index(u)
            _, w = tw.step_index(w)
            if u == w:
                merge = k
                break
            pair = (u.coords, w.coords)
            if pair in seen_pairs:
                break
            seen_pairs.add(pair)
            collected.append(u)
            collected.append(w)
        else:
            raise BudgetExceeded("orbit pair did not close", point=str(e), steps=budget)
        m[e] = merge
        for p in collected:
            if t.contains(p):
                pts[p.coords] = p
    vlist = sorted(pts.values())
    jmap = {}
    for comp in t.components:
        inside = [v for v in vlist if qb_compare(v, comp.lo) != LT and qb_compare(v, comp.hi) == LT]
        for v, nxt in zip(inside, inside[1:] + [None]):
            jmap[v] = IntervalQB(v, nxt if nxt is not None else comp.hi)
    vd = VData(vlist, jmap, m)
    total = _merge_union(list(jmap.values()))
    if not _union_equal(total, t.domain_union()):
        raise ValidationError("interval partition does not cover the domain")
    return vd


# ---------------------------------------------------------------------------
# transfer matrix, invariant density, support restriction

def transfer_matrix(t, vdata):
    """Integer matrix E with E[i][j] = number of digits a such that the
    branch-a preimage of V[i] lands in interval j."""
    n = len(vdata.V)
    mat = [[0] * n for _ in range(n)]
    for i, v in enumerate(vdata.V):
        for a in range(len(t.digits)):
            y = (v + t.digits[a]).div_beta()
            if t.digit_index_of(y) == a:
                j = vdata.index_of_point(y)
                if j is None:
                    raise ValidationError("preimage escaped the interval partition")
                mat[i][j] += 1
    return mat


def _qb_kernel(a_rows, field):
    """Kernel basis of an exact matrix over Q(beta) (rows of QBeta entries)."""
    rows = [list(r) for r in a_rows]
    n = len(rows)
    cols = len(rows[0]) if rows else 0
    piv_cols = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, n) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inv()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(cols) if c not in piv_cols]
    basis = []
    for fc in free:
        vec = [field.zero] * cols
        vec[fc] = field.one
        for ridx, pc in enumerate(piv_cols):
            vec[pc] = -rows[ridx][fc]
        basis.append(vec)
    return basis


def invariant_density(t, vdata):
    """Exact piecewise-constant invariant density weights, one per interval.

    Solves beta*h = E*h over Q(beta) and normalizes the nonnegative solution
    to total integral one.  Weights are proportional to the transverse measure
    of the interval's fiber.
    """
    mat = transfer_matrix(t, vdata)
    f = t.field
    n = len(mat)
    a_rows = [[f.qb([mat[i][j]]) - (f.beta if i == j else f.zero) for j in range(n)]
              for i in range(n)]
    basis = _qb_kernel(a_rows, f)
    cand = None
    for vec in basis:
        signs = [qb_compare(x, f.zero) for x in vec]
        if all(s != LT for s in signs) and any(s == GT for s in signs):
            cand = vec
            break
        if all(s != GT for s in signs) and any(s == LT for s in signs):
            cand = [-x for x in vec]
            break
    if cand is None:
        raise NoFixedPoint("no nonnegative transfer fixed vector found")
    total = f.zero
    for h, v in zip(cand, vdata.V):
        total = total + h * vdata.J[v].length()
    inv = total.inv()
    return [h * inv for h in cand]


def restrict_to_support(t, weights, vdata):
    """Restriction of the transform to the union of positive-weight intervals."""
    f = t.field
    support = [vdata.J[v] for v, h in zip(vdata.V, weights)
               if qb_compare(h, f.zero) == GT]
    support = _merge_union(support)
    if _union_equal(support, t.domain_union()):
        return t
    new_parts = []
    new_digits = []
    for a, pp in enumerate(t.parts):
        kept = []
        for iv in pp:
            for sv in support:
                got = _intersect(iv, sv)
                if got is not None:
                    kept.append(got)
        if kept:
            new_digits.append(t.digits[a])
            new_parts.append(kept)
    return build_transform(f, new_digits, new_parts, t.side)


def supported(t, budget=20000):
    """Convenience pipeline: restrict t to the support of its invariant density."""
    vd = compute_v(t, budget)
    w = invariant_density(t, vd)
    return restrict_to_support(t, w, vd)


# ---------------------------------------------------------------------------
# config I/O

def transform_from_config(cfg):
    """Build a transform from a JSON-style dict (explicit pieces or preset)."""
    fld = make_field(*cfg["field"])
    if "preset" in cfg:
        alpha = fld.qb(cfg["alpha"]) if "alpha" in cfg else None
        digits = [fld.qb(d) for d in cfg["digits"]] if "digits" in cfg else None
        t = preset(cfg["preset"], fld, alpha=alpha, digits=digits)
    else:
        digits = [fld.qb(d) for d in cfg["digits"]]
        parts = [[IntervalQB(fld.qb(iv["lo"]), fld.qb(iv["hi"])) for iv in pp]
                 for pp in cfg["parts"]]
        t = build_transform(fld, digits, parts, cfg.get("side", "right"))
    if cfg.get("restrict_to_support"):
        t = supported(t)
    return t
