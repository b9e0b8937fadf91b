"""Symbolic layer: the admissible-word automaton and the exact tiling test.

The closure of the expansion language is recognized by a deterministic
automaton built from the bounding expansions of the interval endpoints: every
tail of a word must lie, lexicographically, between the lower and upper
endpoint words of one piece of its leading digit.  States are sets of pending
boundary comparisons.

The tiling decision runs a two-tape difference machine per candidate tile
pair: states carry the exact value difference of the two remaining rays plus
the alive-state sets of both tapes, transitions prepend one digit per tape
and divide the difference by beta.  A pair of tiles overlaps on positive
measure exactly when beta is an eigenvalue of the adjacency matrix of a
recurrent component, which is tested exactly over the integers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dfield
from fractions import Fraction

import numpy as np

from .betamap import Expansion, endpoint_words, expand
from .errors import (BudgetExceeded, DigitsNotIntegral, NotSofic,
                     ValidationError)
from .numfield import GT, LT, gamma_abs_upper, qb_compare, simple_rational_in
from .tiling import clouds_at_depth, conj_block_bounds, _require_integral_digits


# ---------------------------------------------------------------------------
# soficity

@dataclass(frozen=True)
class SoficityReport:
    sofic: bool
    endpoint_expansions: tuple   # ((digit_idx, piece_idx, lower, upper), ...)
    witness: object = None


def soficity_check(t):
    """Eventual periodicity of every endpoint expansion (always certified for
    field-element endpoints, by exact orbit closure)."""
    rows = []
    words = endpoint_words(t)
    for a, per_piece in enumerate(words):
        for i, (low, up) in enumerate(per_piece):
            rows.append((a, i, low, up))
    return SoficityReport(True, tuple(rows))


# ---------------------------------------------------------------------------
# the follower automaton

def _canon(word, pos):
    npre, nper = len(word.preperiod), len(word.period)
    if pos < npre:
        return pos
    return npre + (pos - npre) % nper


class ShiftAutomaton:
    """Deterministic automaton for the factors of the closed expansion shift.

    All live states are accepting; a word is a factor exactly when it labels a
    live path from the initial state.
    """

    def __init__(self, transform, states, delta, initial, bound_words):
        self.transform = transform
        self.n_states = states
        self.delta = delta           # list of tuples, one per state; None = dead
        self.initial = initial
        self.bound_words = bound_words   # ((digit, piece) -> (lower, upper))
        self.alphabet = len(transform.digits)
        self._ray_cache = {}
        self._pred_cache = {}

    # -- runs ---------------------------------------------------------------

    def run(self, word, start=None):
        """Final state after the finite index word, or None if it dies."""
        s = self.initial if start is None else start
        for a in word:
            if s is None:
                return None
            s = self.delta[s][a]
        return s

    def is_factor(self, word):
        return self.run(word) is not None

    def accepts_ray(self, word):
        """Whether the eventually periodic ray stays alive from the start."""
        return self.initial in self.ray_alive_states(word)

    def ray_alive_states(self, word):
        """All states from which the infinite ray survives (memoized)."""
        key = (word.preperiod, word.period)
        if key in self._ray_cache:
            return self._ray_cache[key]
        cur = list(range(self.n_states))
        for a in word.preperiod:
            cur = [None if s is None else self.delta[s][a] for s in cur]
        if not word.period:
            out = frozenset(i for i, s in enumerate(cur) if s is not None)
            self._ray_cache[key] = out
            return out
        seen = set()
        state = tuple(cur)
        while state not in seen:
            seen.add(state)
            for a in word.period:
                cur = [None if s is None else self.delta[s][a] for s in cur]
            state = tuple(cur)
        # survivors of the closed cycle are alive forever
        out = frozenset(i for i, s in enumerate(state) if s is not None)
        self._ray_cache[key] = out
        return out

    def predecessor_set(self, alive, a):
        """States s with delta(s, a) inside the given alive set (memoized)."""
        key = (alive, a)
        if key not in self._pred_cache:
            self._pred_cache[key] = frozenset(
                s for s in range(self.n_states)
                if self.delta[s][a] is not None and self.delta[s][a] in alive)
        return self._pred_cache[key]

    # -- exports --------------------------------------------------------------

    def to_json(self):
        return {
            "states": self.n_states,
            "initial": self.initial,
            "transitions": [[(-1 if s is None else s) for s in row] for row in self.delta],
        }

    def to_dot(self):
        lines = ["digraph shift {", "  rankdir=LR;"]
        for i in range(self.n_states):
            shape = "doublecircle" if i == self.initial else "circle"
            lines.append(f'  q{i} [shape={shape}];')
        for i, row in enumerate(self.delta):
            for a, s in enumerate(row):
                if s is not None:
                    label = str(float(self.transform.digits[a]))
                    lines.append(f'  q{i} -> q{s} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self):
        return f"ShiftAutomaton({self.n_states} states, {self.alphabet} letters)"


def _monotone_layout(t):
    last_digit = None
    for iv, a in t.pieces:
        if last_digit is not None and a < last_digit:
            return False
        last_digit = a
    return True


def build_automaton(t, state_budget=200000):
    """Deterministic factor automaton from the endpoint expansions, minimized.

    Needs the right-continuous orientation and a digit-monotone piece layout
    (every listed transform family has one).
    """
    if t.side != "right":
        raise ValidationError("automaton construction expects the right-continuous map")
    if not _monotone_layout(t):
        raise NotSofic("piece layout is not digit-monotone; no lexicographic automaton")
    words = endpoint_words(t)
    bw = {}
    pieces_of = [[] for _ in t.digits]
    for a, per_piece in enumerate(words):
        for i, (low, up) in enumerate(per_piece):
            bw[(a, i)] = (low, up)
            pieces_of[a].append((a, i))

    def wdigit(word, pos):
        return word.digit_at(pos)

    def advance(word, pos):
        return _canon(word, pos + 1)

    def spawn(c):
        entries = []
        for key in pieces_of[c]:
            low, up = bw[key]
            entries.append(("b", key, _canon(low, 1), _canon(up, 1)))
        return frozenset(entries)

    def advance_position(entries, c):
        satisfied = False
        out = []
        for e in entries:
            kind, key = e[0], e[1]
            low, up = bw[key]
            if kind == "b":
                pl, pu = e[2], e[3]
                lc, uc = wdigit(low, pl), wdigit(up, pu)
                if lc == uc:
                    if c == lc:
                        out.append(("b", key, advance(low, pl), advance(up, pu)))
                else:
                    if c == lc:
                        out.append(("l", key, advance(low, pl)))
                    elif c == uc:
                        out.append(("u", key, advance(up, pu)))
                    elif lc < c < uc:
                        satisfied = True
            elif kind == "l":
                pl = e[2]
                lc = wdigit(low, pl)
                if c > lc:
                    satisfied = True
                elif c == lc:
                    out.append(("l", key, advance(low, pl)))
            else:
                pu = e[2]
                uc = wdigit(up, pu)
                if c < uc:
                    satisfied = True
                elif c == uc:
                    out.append(("u", key, advance(up, pu)))
        if satisfied:
            return "done"
        if not out:
            return None
        return frozenset(out)

    alphabet = len(t.digits)
    initial = frozenset()
    index = {initial: 0}
    order = [initial]
    delta = []
    queue = [initial]
    while queue:
        state = queue.pop()
        while len(delta) < len(order):
            delta.append(None)
        row = []
        for c in range(alphabet):
            dead = False
            nxt = set()
            for pstate in state:
                res = advance_position(pstate, c)
                if res is None:
                    dead = True
                    break
                if res != "done":
                    nxt.add(res)
            if dead:
                row.append(None)
                continue
            nxt.add(spawn(c))
            key = frozenset(nxt)
            if key not in index:
                if len(index) >= state_budget:
                    raise BudgetExceeded("automaton construction exceeded the state budget")
                index[key] = len(order)
                order.append(key)
                queue.append(key)
            row.append(index[key])
        delta[index[state]] = tuple(row)
    aut = ShiftAutomaton(t, len(order), delta, 0, bw)
    return _minimize(aut)


def _minimize(aut):
    n = aut.n_states
    # Moore refinement with an explicit dead class
    cls = [0] * n
    while True:
        sig = {}
        new = [0] * n
        for i in range(n):
            key = (cls[i], tuple(-1 if s is None else cls[s] for s in aut.delta[i]))
            if key not in sig:
                sig[key] = len(sig)
            new[i] = sig[key]
        if new == cls:
            break
        cls = new
    k = len(set(cls))
    if k == n:
        return aut
    rep = {}
    remap = [None] * n
    order = []
    for i in range(n):
        if cls[i] not in rep:
            rep[cls[i]] = len(order)
            order.append(i)
        remap[i] = rep[cls[i]]
    delta = []
    for i in order:
        delta.append(tuple(None if s is None else remap[s] for s in aut.delta[i]))
    return ShiftAutomaton(aut.transform, len(order), delta, remap[aut.initial], aut.bound_words)


def forbidden_words(aut, maxlen=6):
    """Minimal forbidden words up to the given length, as digit-index tuples.

    A word is minimal forbidden when it is not a factor but both its maximal
    proper factors are.
    """
    out = []
    frontier = [((), aut.initial)]
    for _ in range(maxlen):
        nxt = []
        for word, s in frontier:
            for a in range(aut.alphabet):
                to = aut.delta[s][a]
                cand = word + (a,)
                if to is None:
                    if aut.is_factor(cand[1:]):
                        out.append(cand)
                else:
                    nxt.append((cand, to))
        frontier = nxt
    return sorted(out)


# ---------------------------------------------------------------------------
# candidate differences between tile translates

def difference_pairs(t, g, depth=10):
    """Triples (delta, i, j) of candidate overlapping tile classes.

    delta runs over nonzero lattice points of the certified conjugate box with
    positive real embedding; (i, j) over interval classes whose translates can
    meet both arithmetically (interval intersection) and geometrically (cloud
    distance at the given depth).  Pruning only ever discards pairs whose
    clouds are provably farther apart than the certified error allows.
    """
    _require_integral_digits(t)
    f = t.field
    from .tiling import lattice_candidates
    from .numfield import phi
    bounds = [2 * b for b in conj_block_bounds(t)]
    diam = t.xmax - t.xmin
    dfhi = float(diam)
    cands = lattice_candidates(f, -dfhi, dfhi, bounds)
    clouds, err = clouds_at_depth(g, depth)
    nv = len(g.vertices)
    cell = 2 * err
    slack = cell * 0.75 + 1e-9          # decimation displacement bound
    reach = int(math.ceil((2 * err + slack) / cell)) + 1
    dim = f.degree - 1
    offs = np.array(list(itertools.product(range(-reach, reach + 1), repeat=dim)),
                    dtype=np.int64)
    enc_base = np.int64(1) << 21

    def encode(cells):
        out = cells[:, 0].astype(np.int64)
        for k in range(1, cells.shape[1]):
            out = out * enc_base + cells[:, k]
        return out

    centers = []
    enc_sets = []
    boxes = []
    for cl in clouds:
        cells = np.unique(np.floor(cl / cell).astype(np.int64), axis=0)
        centers.append((cells + 0.5) * cell)
        enc_sets.append(np.sort(encode(cells)))
        boxes.append((cl.min(axis=0), cl.max(axis=0)))

    def cells_touch(i, pts):
        cells = np.floor(pts / cell).astype(np.int64)
        dil = (cells[:, None, :] + offs[None, :, :]).reshape(-1, dim)
        codes = encode(dil)
        pos = np.searchsorted(enc_sets[i], codes)
        pos = np.clip(pos, 0, len(enc_sets[i]) - 1)
        return bool(np.any(enc_sets[i][pos] == codes))
    jlo = [float(iv.lo) for iv in g.J]
    jhi = [float(iv.hi) for iv in g.J]
    out = []
    for coords in cands:
        if all(c == 0 for c in coords):
            continue
        delta = f.qb(coords)
        if qb_compare(delta, f.zero) != GT:
            continue
        if qb_compare(delta, diam) != LT:
            continue
        df = float(delta)
        pd = np.array(phi(delta, 60).coords)
        for i in range(nv):
            for j in range(nv):
                # interval translates must meet (float gate, exact confirm
                # only inside the narrow ambiguity band)
                lo = max(jlo[i], jlo[j] - df)
                hi = min(jhi[i], jhi[j] - df)
                if hi - lo < -1e-9:
                    continue
                if hi - lo < 1e-9:
                    lo_q = max(g.J[i].lo, g.J[j].lo - delta)
                    hi_q = min(g.J[i].hi, g.J[j].hi - delta)
                    if qb_compare(lo_q, hi_q) != LT:
                        continue
                bmin, bmax = boxes[j]
                amin, amax = boxes[i]
                gap = np.maximum(bmin + pd - amax, amin - (bmax + pd)).max()
                if gap > 2 * err + slack:
                    continue
                if cells_touch(i, centers[j] + pd):
                    out.append((delta, i, j))
    return out, err


def difference_candidates(t, g, depth=10):
    """Nonzero candidate differences (plus zero, which is always one)."""
    pairs, _ = difference_pairs(t, g, depth)
    seen = {}
    for delta, _, _ in pairs:
        seen[delta.coords] = delta
    return [t.field.zero] + sorted(seen.values())


# ---------------------------------------------------------------------------
# the difference machine

@dataclass
class DiffTransducer:
    """Two-tape difference machine for one candidate pair of tiles."""
    transform: object
    states: list        # (diff QBeta, in_alive, out_alive)
    edges: list         # (src, dst, a_in, a_out)
    initial: int
    delta0: object

    def adjacency(self):
        n = len(self.states)
        m = [[0] * n for _ in range(n)]
        for s, d, _, _ in self.edges:
            m[s][d] += 1
        return m


def build_diff_transducer(t, aut, delta0, in_ray, out_ray, state_budget=60000):
    """Reachable good part of the difference machine for one candidate.

    States combine the exact remaining-value difference with alive-state sets
    for both tapes; a state is good when both current rays are admissible
    from scratch.  Differences escape forever once a conjugate embedding
    leaves the certified box, so those states are dropped.  Differences stay
    in Z[beta], so the core runs on integer coordinate tuples.
    """
    f = t.field
    d = f.degree
    caps = [2 * b for b in conj_block_bounds(t)]
    diam = t.xmax - t.xmin
    q0 = aut.initial
    p_in = aut.ray_alive_states(in_ray)
    p_out = aut.ray_alive_states(out_ray)
    if q0 not in p_in or q0 not in p_out:
        raise ValidationError("candidate rays are not admissible")
    if not delta0.is_integral():
        raise DigitsNotIntegral("difference must lie in Z[beta]")
    minv = f.inv_beta_mat
    d0 = tuple(int(c) for c in delta0.coords)
    digit_co = [tuple(int(c) for c in dg.coords) for dg in t.digits]
    na = len(t.digits)
    ddiff = {(a, b): tuple(digit_co[a][k] - digit_co[b][k] for k in range(d))
             for a in range(na) for b in range(na)}

    conj_pows = []
    for _, j in f.hblocks:
        disk = f.conj_enclosure(j)
        conj_pows.append([complex(float(disk.re), float(disk.im)) ** k for k in range(d)])
    disk0 = f.conj_enclosure(0)
    b1_pows = [float(disk0.re) ** k for k in range(d)]
    caps_f = [float(c) for c in caps]
    diam_f = float(diam)
    inbox_cache = {}

    def _in_box_raw(co):
        # float fast paths with a wide exactness band; borderline cases are
        # settled by certified bounds, so no state is wrongly dropped or kept
        band = 1e-6 * (1 + sum(abs(c) for c in co))
        v1 = abs(sum(c * p for c, p in zip(co, b1_pows)))
        if v1 > diam_f + band:
            return False
        if v1 >= diam_f - band:
            x = f.qb(co)
            if qb_compare(x, diam) == GT or qb_compare(x, -diam) == LT:
                return False
        for blk, (pows, cap, cap_q) in enumerate(zip(conj_pows, caps_f, caps)):
            vj = abs(sum(c * p for c, p in zip(co, pows)))
            if vj > cap + band:
                return False
            if vj >= cap - band and gamma_abs_upper(f.qb(co), f.hblocks[blk][1]) > cap_q:
                return False
        return True

    def in_box(co):
        if co not in inbox_cache:
            inbox_cache[co] = _in_box_raw(co)
        return inbox_cache[co]

    pre = aut.predecessor_set
    start = (d0, p_in, p_out)
    index = {start: 0}
    states = [start]
    edges = []
    queue = [0]
    rng = range(d)
    while queue:
        si = queue.pop()
        diff, pin, pout = states[si]
        for a_in in range(na):
            npin = pre(pin, a_in)
            if q0 not in npin:
                continue
            for a_out in range(na):
                npout = pre(pout, a_out)
                if q0 not in npout:
                    continue
                dd = ddiff[(a_in, a_out)]
                s = tuple(diff[k] + dd[k] for k in rng)
                nd = tuple(sum(minv[i][k] * s[k] for k in rng) for i in rng)
                if not in_box(nd):
                    continue
                key = (nd, npin, npout)
                if key not in index:
                    if len(states) >= state_budget:
                        raise BudgetExceeded("difference machine exceeded the state budget")
                    index[key] = len(states)
                    states.append(key)
                    queue.append(index[key])
                edges.append((si, index[key], a_in, a_out))
    qb_states = [(f.qb(co), pin, pout) for co, pin, pout in states]
    return DiffTransducer(t, qb_states, edges, 0, delta0)


# ---------------------------------------------------------------------------
# exact eigenvalue-beta test

def _bareiss_det(m):
    """Exact determinant of an integer matrix by fraction-free elimination."""
    a = [row[:] for row in m]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _minpoly_at_matrix(field, m):
    """q(M) for the minimal polynomial q, over the integers."""
    n = len(m)
    c = field.coeffs

    def matmul(a, b):
        return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)]

    # q(M) = M^d - c1 M^(d-1) - ... - cd I, built by Horner
    out = [[m[i][j] - (c[0] if i == j else 0) for j in range(n)] for i in range(n)]
    for k in range(1, field.degree):
        out = matmul(out, m)
        for i in range(n):
            out[i][i] -= c[k]
    return out


def beta_is_eigenvalue(field, m):
    """Exact test: beta is an eigenvalue of the integer matrix m.

    Equivalent to the minimal polynomial dividing the characteristic
    polynomial; decided by a fraction-free determinant of q(M).
    """
    return _bareiss_det(_minpoly_at_matrix(field, m)) == 0


def _sccs(n, adj):
    """Tarjan's strongly connected components (iterative)."""
    low = [0] * n
    num = [-1] * n
    on = [False] * n
    stack = []
    out = []
    counter = [0]
    for root in range(n):
        if num[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                num[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on[v] = True
            recurse = False
            for i in range(pi, len(adj[v])):
                w = adj[v][i]
                if num[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                elif on[w]:
                    low[v] = min(low[v], num[w])
            if recurse:
                continue
            if low[v] == num[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return out


@dataclass(frozen=True)
class TilingDecision:
    verdict: str           # 'tiling' or 'multiple'
    pairs: tuple           # (delta, vx, vy, spectral_gap) for overlapping pairs
    candidates_checked: int
    spectral_gaps: tuple   # per candidate: numeric beta - spectral radius when no divisor


def decide_tiling(t, g, pset, depth=10, state_budget=60000, automaton=None):
    """Exact verdict: tiling, or a list of positive-measure overlapping pairs.

    For every candidate difference and class pair, builds the two-tape
    difference machine and tests whether beta is an eigenvalue of the
    adjacency matrix of any recurrent component reachable in it.
    """
    _require_integral_digits(t)
    f = t.field
    aut = automaton if automaton is not None else build_automaton(t)
    pairs, _ = difference_pairs(t, g, depth)
    overlapping = []
    gaps = []
    ray_cache = {}

    def ray(x):
        if x.coords not in ray_cache:
            ray_cache[x.coords] = expand(t, x)
        return ray_cache[x.coords]

    beta_f = float(f.beta)
    rep_bounds = conj_block_bounds(t)
    done = {}
    for delta, i, j in pairs:
        # any representative of the class pair gives the same tiles; a lattice
        # point with small conjugates keeps the endpoint orbits short
        lo = max(g.J[i].lo, g.J[j].lo - delta)
        hi = min(g.J[i].hi, g.J[j].hi - delta)
        xrep = _small_orbit_rep(t, lo, hi, rep_bounds)
        key = (delta.coords, xrep.coords)
        if key in done:
            if done[key]:
                overlapping.append((delta, g.vertices[i], g.vertices[j]))
            continue
        yrep = xrep + delta
        td = build_diff_transducer(t, aut, delta, ray(yrep), ray(xrep),
                                   state_budget=state_budget)
        n = len(td.states)
        adj_list = [[] for _ in range(n)]
        counts = {}
        for s, d, _, _ in td.edges:
            adj_list[s].append(d)
            counts[(s, d)] = counts.get((s, d), 0) + 1
        hit = False
        worst = None
        for comp in _sccs(n, adj_list):
            cset = set(comp)
            internal = [(u, v) for u in comp for v in adj_list[u] if v in cset]
            if not internal:
                continue
            idx = {v: k for k, v in enumerate(comp)}
            m = [[0] * len(comp) for _ in comp]
            for (u, v), c in counts.items():
                if u in cset and v in cset:
                    m[idx[u]][idx[v]] = c
            if beta_is_eigenvalue(f, m):
                hit = True
                break
            sr = max(abs(np.linalg.eigvals(np.array(m, dtype=float)))) if comp else 0.0
            worst = sr if worst is None else max(worst, sr)
        done[key] = hit
        if hit:
            overlapping.append((delta, g.vertices[i], g.vertices[j]))
        else:
            gaps.append(beta_f - (worst if worst is not None else 0.0))
    verdict = "multiple" if overlapping else "tiling"
    return TilingDecision(verdict, tuple(overlapping), len(pairs), tuple(gaps))


def _small_orbit_rep(t, lo, hi, bounds):
    """A field element in [lo, hi) whose forward orbit is short: a lattice
    point with bounded conjugates when one exists, else the simplest rational."""
    from .tiling import lattice_candidates
    f = t.field
    flo, fhi = float(lo), float(hi)
    pad = (fhi - flo) * 1e-6 + 1e-12
    scale = 1
    while scale <= 4:
        for coords in lattice_candidates(f, flo - pad, fhi + pad, [b * scale for b in bounds]):
            x = f.qb(coords)
            if qb_compare(x, lo) != LT and qb_compare(x, hi) == LT:
                return x
        scale *= 2
    return simple_rational_in(lo, hi)
