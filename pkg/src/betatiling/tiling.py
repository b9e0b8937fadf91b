"""Geometric layer: fiber tiles on the contracting hyperplane.

The closure of the admissible pasts of a point x, mapped through the
contracting embeddings, is a compact tile; tiles are constant on the
boundary-orbit intervals, satisfy a graph-directed system of contractions
indexed by digit branches, and translate to a covering of the hyperplane by
lattice points of the domain.  This module builds the graph, iterates the
contractions into certified point clouds, enumerates purely periodic points,
decides point/tile membership exactly, and samples covering degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield
from fractions import Fraction

import numpy as np

from .betamap import IntervalQB, Expansion, expand
from .errors import (BudgetExceeded, DigitsNotIntegral, UnrenderableDimension,
                     ValidationError)
from .numfield import (GT, LT, gamma_abs_upper, phi, qb_compare)

_FLOAT_STEP_SLACK = 1e-12


def _require_integral_digits(t):
    if not t.digits_integral():
        raise DigitsNotIntegral("tiling operations need digits in Z[beta]")


def conj_block_bounds(t):
    """Certified per-block radius of all past sums: max_a |G_j(a)| / (1-|b_j|)."""
    f = t.field
    out = []
    for kind, j in f.hblocks:
        num = max(gamma_abs_upper(d, j) for d in t.digits)
        den = 1 - f.conj_abs_upper(j)
        out.append(num / den)
    return out


# ---------------------------------------------------------------------------
# graph-directed system

@dataclass
class GifsGraph:
    """Vertices are interval representatives; an edge (i -> j, a) records that
    the branch-a preimage of vertex i lies in interval j, so tile(i) contains
    the contracted tile(j) translated by the digit projection."""
    transform: object
    vertices: list
    J: list
    edges: list                    # edges[i] = [(j, digit_index), ...]
    phi_digits: np.ndarray         # hyperplane coordinates of each digit
    phi_err: float
    cloud_constant: float          # Hausdorff bound for the depth-0 seed
    _cloud_cache: dict = dfield(default_factory=dict)

    @property
    def field(self):
        return self.transform.field

    def vertex_index(self, x):
        for i, v in enumerate(self.vertices):
            if qb_compare(x, v) != LT and qb_compare(x, self.J[i].hi) == LT:
                return i
        return None


def gifs_build(t, vdata):
    """Exact edge set of the graph-directed system for the interval tiles."""
    _require_integral_digits(t)
    f = t.field
    verts = list(vdata.V)
    jlist = [vdata.J[v] for v in verts]
    edges = [[] for _ in verts]
    for i, v in enumerate(verts):
        for a in range(len(t.digits)):
            y = (v + t.digits[a]).div_beta()
            if t.digit_index_of(y) == a:
                j = vdata.index_of_point(y)
                if j is None:
                    raise ValidationError("branch preimage escaped the partition")
                edges[i].append((j, a))
        if not edges[i]:
            raise ValidationError(f"vertex {v!r} has no branch preimage")
    phis = [phi(d, 60) for d in t.digits]
    phi_mat = np.array([p.coords for p in phis])
    phi_err = max(p.err for p in phis)
    bounds = conj_block_bounds(t)
    # block coordinates are (2 Re G, -2 Im G) for a conjugate pair, G for a real one
    sq = sum((2 * float(b)) ** 2 if kind == "pair" else float(b) ** 2
             for (kind, _), b in zip(t.field.hblocks, bounds))
    cconst = math.sqrt(sq) * (1 + 1e-9) + 1e-9
    return GifsGraph(t, verts, jlist, edges, phi_mat, phi_err, cconst)


@dataclass(frozen=True)
class TileCloud:
    """Depth-k point cloud of one tile with a certified Hausdorff error."""
    owner: object
    depth: int
    points: np.ndarray      # shape (n, d-1), hyperplane coordinates
    err: float

    def __len__(self):
        return len(self.points)


def _snap(points, grid):
    snapped = np.round(points / grid) * grid
    return np.unique(snapped, axis=0)


def clouds_at_depth(g, depth, snap_threshold=4000):
    """Point clouds for every vertex, cached and built by backward iteration.

    Returns (list of arrays, err).  The error bound accounts for truncation at
    the given depth, for grid snapping, and for float slack.
    """
    if depth in g._cloud_cache:
        return g._cloud_cache[depth]
    f = g.field
    dim = f.degree - 1
    if depth == 0:
        clouds = [np.zeros((1, dim)) for _ in g.vertices]
        g._cloud_cache[0] = (clouds, g.cloud_constant)
        return g._cloud_cache[0]
    prev, perr = clouds_at_depth(g, depth - 1, snap_threshold)
    rho = f.rho
    mh = f.contract_mat
    err = rho * perr + g.phi_err + _FLOAT_STEP_SLACK
    grid = max(err / 128, 1e-9)
    clouds = []
    for i in range(len(g.vertices)):
        parts = [prev[j] @ mh.T + g.phi_digits[a] for j, a in g.edges[i]]
        pts = np.vstack(parts)
        if len(pts) > snap_threshold:
            pts = _snap(pts, grid)
        pts = np.unique(pts, axis=0)
        clouds.append(pts)
    # snapping displacement enters contracted at later depths; charge it now
    err += grid * math.sqrt(dim) * 0.5
    g._cloud_cache[depth] = (clouds, err)
    return g._cloud_cache[depth]


def tile_cloud(g, x, depth):
    """Certified depth-k cloud of the tile owned by the interval containing x."""
    i = x if isinstance(x, int) else g.vertex_index(x)
    if i is None:
        raise ValidationError(f"{x!r} is not in the domain")
    clouds, err = clouds_at_depth(g, depth)
    return TileCloud(g.vertices[i], depth, clouds[i], err)


def box_count_measure(points, cell):
    """Box-counting measure of a point cloud at the given cell size."""
    if len(points) == 0:
        return 0.0
    cells = np.unique(np.floor(points / cell).astype(np.int64), axis=0)
    return len(cells) * cell ** points.shape[1]


@dataclass(frozen=True)
class NatExtDomain:
    """Product representation of the invertible extension's domain."""
    pieces: tuple          # (vertex, interval, cloud) triples
    area: float
    err: float
    det_factor: float


def natext_domain(t, vdata, g, depth):
    """Interval-times-tile product pieces plus a volume estimate.

    The volume is the sum over pieces of interval length times the
    box-counting measure of the tile cloud, scaled by the exact change of
    basis to ambient coordinates.
    """
    clouds, err = clouds_at_depth(g, depth)
    cell = 2 * err
    pieces = []
    vol = 0.0
    for i, v in enumerate(g.vertices):
        cl = TileCloud(v, depth, clouds[i], err)
        pieces.append((v, g.J[i], cl))
        vol += float(g.J[i].length()) * box_count_measure(clouds[i], cell)
    return NatExtDomain(tuple(pieces), vol * g.field.det_factor, err, g.field.det_factor)


# ---------------------------------------------------------------------------
# lattice enumeration under conjugate bounds

def _conj_matrix(field):
    d = field.degree
    cs = []
    for j in range(d):
        disk = field.conj_enclosure(j)
        cs.append(complex(float(disk.re), float(disk.im)))
    return np.array([[c ** k for k in range(d)] for c in cs])


def lattice_candidates(field, g1_lo, g1_hi, block_bounds):
    """Integer coordinate vectors whose embeddings fit the given box.

    The real embedding is confined to [g1_lo, g1_hi] and each conjugate block
    to the corresponding radius.  The float prefilter is inflated so that no
    true solution is excluded; callers re-check exactly.
    """
    d = field.degree
    vand = _conj_matrix(field)
    vinv = np.linalg.inv(vand)
    bvec = [max(abs(g1_lo), abs(g1_hi))]
    for (kind, j), r in zip(field.hblocks, block_bounds):
        bvec.append(float(r))
        if kind == "pair":
            bvec.append(float(r))
    bvec = np.array(bvec)
    ranges = np.abs(vinv) @ bvec * (1 + 1e-9) + 0.5001
    axes = [np.arange(-int(r), int(r) + 1) for r in ranges]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    vals0 = coords.astype(float) @ vand[0].real
    keep = (vals0 >= g1_lo - 1e-9) & (vals0 <= g1_hi + 1e-9)
    for (kind, j), r in zip(field.hblocks, block_bounds):
        row = vand[j]
        zj = coords.astype(float) @ row.real + 1j * (coords.astype(float) @ row.imag)
        keep &= np.abs(zj) <= float(r) * (1 + 1e-9) + 1e-9
    coords = coords[keep]
    order = np.lexsort(coords.T[::-1])
    return [tuple(int(c) for c in row) for row in coords[order]]


def _heights_iter(field, g1_lo, g1_hi, block_bounds, max_height):
    """Lattice candidates ordered by coordinate height (sup norm), then lex."""
    cands = lattice_candidates(field, g1_lo, g1_hi, block_bounds)
    return sorted(cands, key=lambda c: (max(abs(x) for x in c), c))


# ---------------------------------------------------------------------------
# purely periodic points

@dataclass(frozen=True)
class PeriodicSet:
    points: tuple
    periods: tuple
    words: tuple

    def __len__(self):
        return len(self.points)


def purely_periodic_points(t):
    """All integral points of the domain whose full orbit returns exactly.

    Enumerates the certified conjugate box that any such point must satisfy
    (its hyperplane image lies in the bounded set of past sums), then keeps
    the points whose exact orbit revisits the start.
    """
    _require_integral_digits(t)
    f = t.field
    bounds = conj_block_bounds(t)
    lo, hi = float(t.xmin), float(t.xmax)
    pts, periods, words = [], [], []
    for coords in lattice_candidates(f, lo, hi, bounds):
        x = f.qb(coords)
        if not t.contains(x):
            continue
        word = expand(t, x)
        if not word.preperiod:
            pts.append(x)
            periods.append(len(word.period))
            words.append(word)
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    return PeriodicSet(tuple(pts[i] for i in order),
                       tuple(periods[i] for i in order),
                       tuple(words[i] for i in order))


def check_f(pset):
    """Single-orbit-point criterion: the origin sits in exactly one tile."""
    return len(pset) == 1


# ---------------------------------------------------------------------------
# exact tile membership for lattice points

@dataclass(frozen=True)
class MembershipReport:
    z: object
    k: int
    owners: tuple
    count: int


def _piece_right_end(t, x):
    for iv, a in t.pieces:
        if qb_compare(x, iv.lo) != LT and qb_compare(x, iv.hi) == LT:
            return iv.hi
    return None


def tiles_containing(t, pset, z, k_budget=400):
    """The exact set of tiles whose translate contains the projection of z.

    Picks the smallest shift k making the orbit test of every purely periodic
    point valid, then re-checks at k plus the full period round for stability.
    """
    _require_integral_digits(t)
    f = t.field
    if not z.is_integral():
        raise DigitsNotIntegral("z must lie in Z[beta]")
    if qb_compare(z, f.zero) == LT:
        raise ValidationError("z must be nonnegative")
    if not len(pset):
        raise ValidationError("empty periodic set")

    def owners_at(k):
        zk = z
        for _ in range(k):
            zk = zk.div_beta()
        res = []
        for y in pset.points:
            if not t.contains(y + zk):
                return None
            r = _piece_right_end(t, y)
            if qb_compare(y + zk.div_beta(), r) != LT:
                return None
            cur = y + zk
            for _ in range(k):
                _, cur = t.step_index(cur)
            res.append(cur)
        seen = {}
        for x in res:
            seen[x.coords] = x
        return tuple(sorted(seen.values()))

    k = 0
    owners = None
    while k <= k_budget:
        owners = owners_at(k)
        if owners is not None:
            break
        k += 1
    else:
        raise BudgetExceeded("no valid shift found", z=str(z))
    if owners is None:
        raise BudgetExceeded("no valid shift found", z=str(z))
    lcm = 1
    for p in pset.periods:
        lcm = lcm * p // math.gcd(lcm, p)
    again = owners_at(k + lcm)
    if again != owners:
        raise ValidationError("owner set unstable under a full period round")
    return MembershipReport(z, k, owners, len(owners))


def covering_degree_estimate(t, pset, samples):
    """Minimum owner count over the samples plus the full histogram.

    Every sampled count is at least the covering degree, so the minimum is an
    attained candidate for it (exact when an exclusive sample is hit)."""
    hist = {}
    mn = None
    for z in samples:
        rep = tiles_containing(t, pset, z)
        hist[rep.count] = hist.get(rep.count, 0) + 1
        mn = rep.count if mn is None else min(mn, rep.count)
    return mn, hist


# ---------------------------------------------------------------------------
# weak-finiteness witnesses

@dataclass(frozen=True)
class WitnessReport:
    status: str            # 'holds' or 'fails_by_budget'
    x: object
    witnesses: dict        # y -> (z, k)
    epsilon: object
    chains: dict           # y -> orbit value list (length k+1)


def weak_finiteness_epsilon(t, pset):
    """Exact search radius: min over periodic points of the scaled distance to
    the right end of the containing piece."""
    f = t.field
    eps = None
    for y in pset.points:
        r = _piece_right_end(t, y)
        cand = (r - y) * f.beta
        if eps is None or qb_compare(cand, eps) == LT:
            eps = cand
    return eps


def _height_ordered_range(field, g1_lo, g1_hi, height):
    """Integer coordinate tuples with sup norm <= height whose real embedding
    lies in [g1_lo, g1_hi], ordered by (height, lex)."""
    d = field.degree
    vand = _conj_matrix(field)
    ax = np.arange(-height, height + 1)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    vals = coords.astype(float) @ vand[0].real
    keep = (vals >= g1_lo - 1e-9) & (vals <= g1_hi + 1e-9)
    coords = coords[keep]
    rows = [tuple(int(c) for c in r) for r in coords]
    rows.sort(key=lambda c: (max(abs(x) for x in c), c))
    return rows


def check_w(t, pset, z_height=40, k_budget=300, max_candidates=20000):
    """Search for a uniform merge witness: a small nonnegative lattice z and a
    shift k sending every periodic point plus z to one common periodic point.

    A found witness certifies the tiling property.  Exhausting the budget is
    reported as such, never as a refutation.
    """
    _require_integral_digits(t)
    f = t.field
    eps = weak_finiteness_epsilon(t, pset)
    cands = _height_ordered_range(f, 0.0, float(eps), z_height)
    pts = list(pset.points)
    tried = 0
    for coords in cands:
        z = f.qb(coords)
        if qb_compare(z, f.zero) == LT or qb_compare(z, eps) != LT:
            continue
        tried += 1
        if tried > max_candidates:
            break
        cur = [y + z for y in pts]
        if not all(t.contains(c) for c in cur):
            continue
        chains = [[c] for c in cur]
        seen_states = set()
        for k in range(k_budget + 1):
            vals = {c.coords for c in cur}
            if len(vals) == 1:
                x = cur[0]
                idx = next((i for i, y in enumerate(pts) if y == x), None)
                if idx is not None:
                    return WitnessReport(
                        "holds", x,
                        {y: (z, k) for y in pts},
                        eps,
                        {pts[i]: list(chains[i]) for i in range(len(pts))})
            state = tuple(c.coords for c in cur)
            if state in seen_states:
                break
            seen_states.add(state)
            try:
                cur = [t.step_index(c)[1] for c in cur]
            except Exception:
                break
            for ch, c in zip(chains, cur):
                ch.append(c)
    return WitnessReport("fails_by_budget", None, {}, eps, {})


# ---------------------------------------------------------------------------
# torus translates

@dataclass(frozen=True)
class TorusScene:
    scene_points: np.ndarray    # ambient R^d points of the base domain
    translates: tuple           # integer vectors used
    coverage: dict              # multiplicity -> fraction of sampled cells
    resolution: int
    scale: int


def torus_translates(t, vdata, g, depth, lattice_box=None, scale=1, resolution=120):
    """Lattice translates of the extension domain with a coverage histogram.

    Samples the domain as ambient points (interval grid times tile cloud),
    marks cells of the fundamental domain of the scaled lattice, and counts
    how many translates hit each cell.
    """
    f = g.field
    d = f.degree
    if d > 3:
        raise UnrenderableDimension("translate scenes are limited to degree <= 3")
    clouds, err = clouds_at_depth(g, depth)
    v1 = f.v[0].real
    h = scale / resolution
    chunks = []
    for i in range(len(g.vertices)):
        lo, hi = float(g.J[i].lo), float(g.J[i].hi)
        n = max(2, int((hi - lo) / (h / 2)) + 1)
        ts = np.linspace(lo, hi, n, endpoint=False)
        amb = clouds[i] @ f.hmat
        pts = ts[:, None, None] * v1[None, None, :] - amb[None, :, :]
        chunks.append(pts.reshape(-1, d))
    scene = np.vstack(chunks)
    if lattice_box is None:
        lo_m = np.floor(-scene.max(axis=0) / scale).astype(int) - 1
        hi_m = np.ceil((scale - scene.min(axis=0)) / scale).astype(int) + 1
    else:
        lo_m = np.full(d, -lattice_box, dtype=int)
        hi_m = np.full(d, lattice_box, dtype=int)
    counts = np.zeros((resolution,) * d, dtype=np.int16)
    mlists = [range(int(lo_m[i]), int(hi_m[i]) + 1) for i in range(d)]
    translates = []
    import itertools as _it
    for mv in _it.product(*mlists):
        shifted = scene + np.array(mv, dtype=float) * scale
        inside = np.all((shifted >= 0) & (shifted < scale), axis=1)
        if not inside.any():
            continue
        translates.append(mv)
        idx = np.floor(shifted[inside] / h).astype(int)
        idx = np.clip(idx, 0, resolution - 1)
        flat = np.zeros((resolution,) * d, dtype=bool)
        flat[tuple(idx.T)] = True
        counts += flat.astype(np.int16)
    hist = {}
    total = counts.size
    vals, freq = np.unique(counts, return_counts=True)
    for v, c in zip(vals, freq):
        hist[int(v)] = c / total
    return TorusScene(scene, tuple(translates), hist, resolution, scale)
