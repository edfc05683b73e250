"""Martingale difference sequences and their decoupled tangent sequences.

A :class:`GeneratorKernel` holds functions ``h_n`` of the first ``n``
coordinates of a base space.  :func:`decouple` realizes, on the doubled space,

    d_n(x, y) = h_n(x_1, ..., x_{n-1}, x_n)
    e_n(x, y) = h_n(x_1, ..., x_{n-1}, y_n)

which are tangent with respect to the interleaved filtration, with ``e``
conditionally independent given the x-block.  Every other pair in the module
(Paley-Walsh, multiplier, stopped transforms) is produced through this one
construction.

Difference sequences are stored as arrays of shape ``(N, n_atoms, dim)``;
step ``n`` lives at index ``n - 1``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import banach as B
from .probspace import (
    Coordinate,
    CoordinateSpace,
    average_out,
    cylinder_ids,
    depends_only_on,
    doubled_space,
    rademacher,
)

MDS_TOL = 1e-10
LAW_TOL = 1e-12


class MeasurabilityError(ValueError):
    pass


class CenteringError(ValueError):
    """A kernel or sequence has nonzero conditional mean."""


class PredictabilityError(ValueError):
    def __init__(self, k: int, msg: str = ""):
        super().__init__(msg or f"transform indicator at step {k} is not predictable")
        self.k = k


def _as3(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim == 2:
        h = h[..., None]
    if h.ndim != 3:
        raise ValueError(f"expected an (N, atoms, dim) table, got shape {h.shape}")
    return h


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)


def conditional_means(diffs: np.ndarray, space: CoordinateSpace) -> np.ndarray:
    """``E(diffs[n-1] | level n-1)`` for every step."""
    return np.stack([average_out(diffs[n - 1], space, space.filtration_axes(n - 1)) for n in range(1, len(diffs) + 1)])


def center(h, space: CoordinateSpace) -> np.ndarray:
    """Subtract the one-step conditional mean from each ``h_n``."""
    h = _as3(h)
    return h - conditional_means(h, space)


# kernels ---------------------------------------------------------------------

@dataclass
class GeneratorKernel:
    """The functions ``h_1..h_N`` on a base space, tabulated per atom."""

    space: CoordinateSpace
    banach: B.Space
    h: np.ndarray

    def __post_init__(self):
        self.h = _as3(self.h)
        if self.space.block is not None:
            raise ValueError("a kernel lives on a base (non-doubled) space")
        N = self.space.depth
        if self.h.shape[:2] != (N, self.space.n_atoms):
            raise ValueError(f"kernel table shape {self.h.shape} does not match N={N}, atoms={self.space.n_atoms}")
        if self.h.shape[2] != self.banach.total_dim:
            raise B.DimensionError(f"kernel vectors have dimension {self.h.shape[2]}, space needs {self.banach.total_dim}")
        for n in range(1, N + 1):
            if not depends_only_on(self.h[n - 1], self.space, range(n)):
                raise MeasurabilityError(f"h_{n} depends on coordinates after {n}")
        resid = conditional_means(self.h, self.space)
        if np.max(np.abs(resid), initial=0.0) > MDS_TOL * _scale(self.h):
            n = int(np.argmax(np.abs(resid).reshape(N, -1).max(axis=1))) + 1
            raise CenteringError(f"h_{n} has nonzero conditional mean")

    @property
    def N(self) -> int:
        return self.space.depth

    @classmethod
    def from_tables(cls, space: CoordinateSpace, banach: B.Space, tables: Sequence, recenter: bool = False):
        """Build from compact tables; ``tables[n-1]`` has shape ``arities[:n] + (dim,)``."""
        ar = space.arities
        D = banach.total_dim
        full = []
        for n, t in enumerate(tables, start=1):
            t = np.asarray(t, dtype=float).reshape(ar[:n] + (D,))
            full.append(np.broadcast_to(t.reshape(ar[:n] + (1,) * (len(ar) - n) + (D,)), ar + (D,)).reshape(-1, D))
        h = np.stack(full)
        if recenter:
            h = center(h, space)
        return cls(space, banach, h)

    def tables(self) -> list:
        ar = self.space.arities
        D = self.h.shape[2]
        out = []
        for n in range(1, self.N + 1):
            t = self.h[n - 1].reshape(ar + (D,))
            out.append(t[(slice(None),) * n + (0,) * (len(ar) - n)].copy())
        return out

    def mds(self) -> "MDS":
        return MDS(self.space, self.h.copy(), self.banach)

    def serialize(self) -> str:
        return serialize_kernel(self)

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:16]


def random_kernel(space: CoordinateSpace, banach: B.Space, rng: np.random.Generator, scale_spread: float = 1.0) -> GeneratorKernel:
    """Centered Gaussian kernel; each step gets a random log-normal scale."""
    D = banach.total_dim
    tables = []
    for n in range(1, space.depth + 1):
        s = math.exp(scale_spread * rng.standard_normal())
        tables.append(s * rng.standard_normal(space.arities[:n] + (D,)))
    return GeneratorKernel.from_tables(space, banach, tables, recenter=True)


def zero_kernel(space: CoordinateSpace, banach: B.Space) -> GeneratorKernel:
    return GeneratorKernel(space, banach, np.zeros((space.depth, space.n_atoms, banach.total_dim)))


# sequences and pairs -----------------------------------------------------------

@dataclass
class MDS:
    """Martingale difference sequence ``diffs[n-1] = d_n`` on ``space``."""

    space: CoordinateSpace
    diffs: np.ndarray
    banach: B.Space
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.diffs = _as3(self.diffs)
        if self.diffs.shape[1] != self.space.n_atoms:
            raise ValueError("one row per atom required")
        if self.diffs.shape[2] != self.banach.total_dim:
            raise B.DimensionError("difference vectors do not conform to the Banach space")
        if self.validate:
            for n in range(1, self.N + 1):
                if not depends_only_on(self.diffs[n - 1], self.space, self.space.filtration_axes(n)):
                    raise MeasurabilityError(f"d_{n} is not level-{n} measurable")
            resid = conditional_means(self.diffs, self.space)
            if np.max(np.abs(resid), initial=0.0) > MDS_TOL * _scale(self.diffs):
                raise CenteringError("sequence is not a martingale difference sequence")

    @property
    def N(self) -> int:
        return self.diffs.shape[0]


@dataclass
class DecoupledPair:
    base: CoordinateSpace
    doubled: CoordinateSpace
    kernel: GeneratorKernel
    d: MDS
    e: MDS

    @property
    def N(self) -> int:
        return self.kernel.N

    @property
    def banach(self) -> B.Space:
        return self.kernel.banach

    @property
    def g_axes(self) -> tuple:
        return self.doubled.x_axes


@lru_cache(maxsize=64)
def decouple_index(space: CoordinateSpace):
    """Base-atom indices giving ``d_n`` and ``e_n`` at every doubled atom.

    Returns ``(x_index, e_index)`` where ``x_index[j]`` is the x-path of doubled
    atom ``j`` and ``e_index[n-1, j]`` is the base atom ``(x_<n, y_n, x_>n)``.
    """
    A = space.n_atoms
    N = space.depth
    j = np.arange(A * A)
    x_index = j // A
    y_index = j % A
    xp = space.paths[x_index]
    yp = space.paths[y_index]
    e_index = np.empty((N, A * A), dtype=np.int64)
    for n in range(N):
        p = xp.copy()
        p[:, n] = yp[:, n]
        e_index[n] = np.ravel_multi_index(p.T, space.arities)
    x_index.setflags(write=False)
    e_index.setflags(write=False)
    return x_index, e_index


def decouple(kernel: GeneratorKernel) -> DecoupledPair:
    """Realize ``(d_n)`` and its decoupled tangent ``(e_n)`` on the doubled space."""
    space = kernel.space
    dbl = doubled_space(space)
    xi, ei = decouple_index(space)
    d = kernel.h[:, xi, :]
    e = np.stack([kernel.h[n][ei[n]] for n in range(kernel.N)])
    return DecoupledPair(space, dbl, kernel, MDS(dbl, d, kernel.banach, validate=False), MDS(dbl, e, kernel.banach, validate=False))


def paley_walsh_kernel(generators: Sequence, banach: B.Space) -> GeneratorKernel:
    """Kernel ``h_n = r_n f_n(r_1..r_{n-1})`` on a Rademacher space.

    ``generators[n-1]`` is either an array of shape ``(2**(n-1), dim)`` indexed
    by the lexicographic sign path (``-1`` before ``+1``) or a callable taking
    the tuple of previous signs.
    """
    N = len(generators)
    space = rademacher(N)
    D = banach.total_dim
    tables = []
    for n, f in enumerate(generators, start=1):
        if callable(f):
            prev = [tuple(2 * np.array(p) - 1) for p in np.ndindex(*(2,) * (n - 1))]
            vals = np.array([np.broadcast_to(np.asarray(f(tuple(float(s) for s in sgn)), dtype=float), (D,)) for sgn in prev])
        else:
            vals = np.asarray(f, dtype=float).reshape(2 ** (n - 1), D)
        t = vals.reshape((2,) * (n - 1) + (1, D)) * np.array([-1.0, 1.0]).reshape((1,) * (n - 1) + (2, 1))
        tables.append(t)
    return GeneratorKernel.from_tables(space, banach, tables)


def paley_walsh(generators: Sequence, banach: B.Space) -> MDS:
    """``d_n = r_n f_n(r_1, ..., r_{n-1})`` on ``N`` Rademacher coordinates."""
    return paley_walsh_kernel(generators, banach).mds()


def paley_walsh_generators(kernel: GeneratorKernel) -> list:
    """Recover the generator tables ``f_n`` from a Rademacher kernel."""
    if not kernel.space.is_rademacher:
        raise ValueError("not a Rademacher space")
    return [t[..., 1, :].reshape(2 ** n, -1) for n, t in enumerate(kernel.tables())]


def multiplier_mds(space: CoordinateSpace, xi, w, banach: B.Space) -> DecoupledPair:
    """Pair ``d_n = xi_n w_n`` and ``e_n = xi_n(x_<n, y_n) w_n``.

    ``xi`` has shape ``(N, atoms)`` and must be adapted; ``w`` has shape
    ``(N, atoms, dim)`` and must be predictable.
    """
    xi = np.asarray(xi, dtype=float)
    w = _as3(w)
    for n in range(1, space.depth + 1):
        if not depends_only_on(xi[n - 1], space, range(n)):
            raise MeasurabilityError(f"xi_{n} is not adapted")
        if not depends_only_on(w[n - 1], space, range(n - 1)):
            raise MeasurabilityError(f"w_{n} is not predictable")
    h = xi[..., None] * w
    resid = conditional_means(h, space)
    if np.max(np.abs(resid), initial=0.0) > MDS_TOL * _scale(h):
        raise CenteringError("xi_n w_n has nonzero conditional mean")
    return decouple(GeneratorKernel(space, banach, h))


def partial_sums(m) -> np.ndarray:
    """``f_n = d_1 + ... + d_n`` for every step, shape ``(N, atoms, dim)``."""
    diffs = m.diffs if isinstance(m, MDS) else _as3(m)
    return np.cumsum(diffs, axis=0)


def maximal(fs, banach: B.Space):
    """Return ``(f_star, running)`` where ``running[n-1] = max_{m<=n} ||f_m||``."""
    norms = B.norm(_as3(fs), banach)
    running = np.maximum.accumulate(norms, axis=0)
    return running[-1], running


# laws and checkers -------------------------------------------------------------

def _quantize(values: np.ndarray, tol: float) -> np.ndarray:
    q = tol * _scale(values)
    return np.rint(values / q)


def law(values, probs, tol: float = LAW_TOL) -> list:
    """Distribution of a finitely supported variable as sorted ``(value, prob)`` pairs."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    keys = _quantize(v, tol)
    uk, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    mass = np.bincount(inv.ravel(), weights=np.asarray(probs, dtype=float), minlength=len(uk))
    return [(tuple(float(c) for c in v[i]), float(m)) for i, m in zip(first, mass)]


def laws_equal(a: list, b: list, tol: float = LAW_TOL) -> bool:
    if len(a) != len(b):
        return False
    for (va, pa), (vb, pb) in zip(a, b):
        if abs(pa - pb) > tol or np.max(np.abs(np.subtract(va, vb)), initial=0.0) > tol * max(1.0, np.max(np.abs(va), initial=0.0)):
            return False
    return True


@dataclass
class CheckResult:
    ok: bool
    witness: dict | None = None

    def __bool__(self):
        return self.ok


def _cylinder_prefix(space: CoordinateSpace, axes, atom: int) -> tuple:
    return tuple(int(space.paths[atom, a]) for a in axes)


def check_tangent(a: MDS, b: MDS, tol: float = LAW_TOL) -> CheckResult:
    """Compare the one-step conditional laws of ``a_n`` and ``b_n`` on every cylinder.

    The witness for a failure is the first step ``n`` and the lexicographically
    first level-``(n-1)`` cylinder where the laws differ.
    """
    space = a.space
    if b.space != space or a.diffs.shape != b.diffs.shape:
        raise ValueError("sequences must live on the same space with the same shape")
    p = space.probs
    M = space.n_atoms
    scale = max(_scale(a.diffs), _scale(b.diffs))
    q = tol * scale
    for n in range(1, a.N + 1):
        axes = space.filtration_axes(n - 1)
        cyl = cylinder_ids(space, axes)
        ka = np.rint(a.diffs[n - 1] / q)
        kb = np.rint(b.diffs[n - 1] / q)
        rows = np.concatenate([np.column_stack([cyl, ka]), np.column_stack([cyl, kb])])
        uk, inv = np.unique(rows, axis=0, return_inverse=True)
        inv = inv.ravel()
        ma = np.bincount(inv[:M], weights=p, minlength=len(uk))
        mb = np.bincount(inv[M:], weights=p, minlength=len(uk))
        cyl_mass = np.bincount(cyl, weights=p)
        ucyl = uk[:, 0].astype(np.int64)
        bad = np.abs(ma - mb) / cyl_mass[ucyl] > tol
        if bad.any():
            c = int(ucyl[bad].min())
            sel = cyl == c
            atom = int(np.flatnonzero(sel)[0])
            cm = cyl_mass[c]
            return CheckResult(False, {
                "n": n,
                "cylinder": _cylinder_prefix(space, axes, atom),
                "law_a": law(a.diffs[n - 1][sel], p[sel] / cm, tol),
                "law_b": law(b.diffs[n - 1][sel], p[sel] / cm, tol),
            })
    return CheckResult(True)


def _value_ids(values: np.ndarray, q: float) -> np.ndarray:
    _, inv = np.unique(np.rint(values / q), axis=0, return_inverse=True)
    return inv.ravel()


def check_ci(seq, g_axes=None, tol: float = LAW_TOL, chunk: int = 64) -> CheckResult:
    """Verify the (CI) condition of ``seq`` (an MDS or the ``e`` of a pair).

    Two requirements are checked exactly on the finite space: every one-step
    conditional law given the filtration equals the conditional law given
    ``G`` (sigma-field of the coordinates in ``g_axes``, default the x-block),
    and given ``G`` the joint law of ``(e_1..e_N)`` is the product of its
    marginals.  Singleton events suffice on a finite support.
    """
    e = seq.e if isinstance(seq, DecoupledPair) else seq
    space = e.space
    if g_axes is None:
        if space.block is None:
            raise ValueError("give g_axes for a sequence on a base space")
        g_axes = space.x_axes
    g_axes = tuple(g_axes)
    p = space.probs
    q = tol * _scale(e.diffs)
    gid = cylinder_ids(space, g_axes)
    gmass = np.bincount(gid, weights=p)
    vids = []
    for n in range(1, e.N + 1):
        vid = _value_ids(e.diffs[n - 1], q)
        vids.append(vid)
        K = int(vid.max()) + 1
        axes = space.filtration_axes(n - 1)
        for lo in range(0, K, chunk):
            cols = np.arange(lo, min(K, lo + chunk))
            ind = (vid[:, None] == cols[None, :]).astype(float)
            pf = average_out(ind, space, axes)
            pg = average_out(ind, space, g_axes)
            diff = np.abs(pf - pg)
            if (diff > tol).any():
                atom = int(np.flatnonzero((diff > tol).any(axis=1))[0])
                col = int(np.flatnonzero(diff[atom] > tol)[0])
                v = e.diffs[n - 1][vid == cols[col]][0]
                return CheckResult(False, {
                    "kind": "conditional law differs from G-conditional law",
                    "n": n,
                    "atom": tuple(int(i) for i in space.paths[atom]),
                    "value": tuple(float(c) for c in v),
                    "p_filtration": float(pf[atom, col]),
                    "p_G": float(pg[atom, col]),
                })
    V = np.column_stack([gid] + vids)
    uj, jinv = np.unique(V, axis=0, return_inverse=True)
    jinv = jinv.ravel()
    joint = np.bincount(jinv, weights=p, minlength=len(uj)) / gmass[uj[:, 0]]
    prod = np.ones(len(uj))
    G = len(gmass)
    for n, vid in enumerate(vids):
        K = int(vid.max()) + 1
        marg = np.bincount(gid * K + vid, weights=p, minlength=G * K).reshape(G, K) / gmass[:, None]
        prod *= marg[uj[:, 0], uj[:, n + 1]]
    bad = np.abs(joint - prod) > tol
    covered = np.bincount(uj[:, 0].astype(np.int64), weights=prod, minlength=len(gmass))
    uncovered = np.abs(covered - 1.0) > tol
    if bad.any() or uncovered.any():
        g = int(uj[np.flatnonzero(bad)[0], 0]) if bad.any() else int(np.flatnonzero(uncovered)[0])
        atom = int(np.flatnonzero(gid == g)[0])
        return CheckResult(False, {
            "kind": "not conditionally independent given G",
            "g_cylinder": _cylinder_prefix(space, g_axes, atom),
        })
    return CheckResult(True)


# stopping times ----------------------------------------------------------------

@dataclass
class StoppingTriple:
    """Stopping times ``mu <= nu`` and ``sigma`` on the base space.

    Values are in ``0..N+1``; ``N + 1`` encodes an empty infimum.
    """

    mu: np.ndarray
    nu: np.ndarray
    sigma: np.ndarray
    params: dict = field(default_factory=dict)

    def validate(self, space: CoordinateSpace) -> None:
        N = space.depth
        for name in ("mu", "nu", "sigma"):
            t = np.asarray(getattr(self, name))
            if t.shape != (space.n_atoms,) or t.min() < 0 or t.max() > N + 1:
                raise ValueError(f"{name} must be an integer table with values in 0..{N + 1}")
            for n in range(N + 1):
                if not depends_only_on((t <= n).astype(float), space, range(n)):
                    raise MeasurabilityError(f"{{{name} <= {n}}} is not level-{n} measurable")
        if np.any(np.asarray(self.mu) > np.asarray(self.nu)):
            raise ValueError("mu must not exceed nu")


def transform_indicators(space: CoordinateSpace, st: StoppingTriple) -> np.ndarray:
    """``1{mu < k <= nu ^ sigma}`` for ``k = 1..N``, shape ``(N, atoms)``."""
    N = space.depth
    k = np.arange(1, N + 1)[:, None]
    top = np.minimum(st.nu, st.sigma)[None, :]
    return ((st.mu[None, :] < k) & (k <= top)).astype(float)


def stopped_transform(pair: DecoupledPair, st: StoppingTriple) -> DecoupledPair:
    """Transform both sequences by ``1{mu < k <= nu ^ sigma}``."""
    space = pair.base
    st.validate(space)
    ind = transform_indicators(space, st)
    for k in range(1, pair.N + 1):
        if not depends_only_on(ind[k - 1], space, range(k - 1)):
            raise PredictabilityError(k)
    return decouple(GeneratorKernel(space, pair.banach, ind[..., None] * pair.kernel.h))


def first_passage(levels: np.ndarray, threshold: float, N: int) -> np.ndarray:
    """First ``n`` (1-based) with ``levels[n-1] > threshold``, else ``N + 1``."""
    hit = levels > threshold
    first = np.argmax(hit, axis=0) + 1
    return np.where(hit.any(axis=0), first, N + 1).astype(np.int64)


def g_conditional_moment(pair: DecoupledPair, p: float) -> np.ndarray:
    """``E(||g_n||^p | G)`` as base-space tables, shape ``(N, atoms)``.

    On the doubled space ``G`` is the x-block, so the conditional expectation
    is an average over y-paths.
    """
    A = pair.base.n_atoms
    g = partial_sums(pair.e)
    normp = np.asarray(B.norm(g, pair.banach)) ** p
    # axis-by-axis averaging keeps rows that agree on the x-path bitwise equal
    avg = average_out(normp.T, pair.doubled, pair.doubled.x_axes)
    return avg.reshape(A, A, pair.N)[:, 0, :].T.copy()


def build_sigma(pair: DecoupledPair, delta: float, lam: float, p: float, majorant: GeneratorKernel | None = None):
    """``sigma = inf{n : E(||g_n||^p | G)^(1/p) > delta*lam or 4 d*_n > delta*lam}``.

    ``majorant`` supplies ``d*`` (defaults to the pair's own kernel).  Returns
    ``(sigma, moment_roots)``; both are base-space tables.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    space = pair.base
    N = pair.N
    roots = g_conditional_moment(pair, p) ** (1.0 / p)
    for n in range(1, N + 1):
        if not depends_only_on(roots[n - 1], space, range(n - 1)):
            raise MeasurabilityError(f"G-conditional moment at step {n} is not level-{n - 1} measurable")
    src = majorant if majorant is not None else pair.kernel
    _, dstar = maximal(src.h, src.banach)
    level = np.maximum(roots, 4.0 * dstar)
    sigma = first_passage(level, delta * lam, N)
    return sigma, roots


# kernel files ----------------------------------------------------------------

def serialize_kernel(kernel: GeneratorKernel) -> str:
    """Flat text table of ``h_n`` in atom order with a self-describing header."""
    sp = kernel.space
    lines = [
        "# tangentlab kernel v1",
        f"N={kernel.N}",
        "arities=" + ",".join(str(a) for a in sp.arities),
        "outcomes=" + "|".join(",".join(repr(o) for o in c.outcomes) for c in sp.levels),
        "probs=" + "|".join(",".join(repr(x) for x in c.probs) for c in sp.levels),
        f"space={B.format_space(kernel.banach)}",
        "# n,atom," + ",".join(f"v{i + 1}" for i in range(kernel.h.shape[2])),
    ]
    for n in range(kernel.N):
        for a in range(sp.n_atoms):
            lines.append(f"{n + 1},{a}," + ",".join(repr(float(v)) for v in kernel.h[n, a]))
    return "\n".join(lines) + "\n"


def parse_kernel(text: str) -> GeneratorKernel:
    header = {}
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line and not line[0].isdigit():
            k, v = line.split("=", 1)
            header[k.strip()] = v.strip()
        else:
            rows.append(line.split(","))
    for key in ("N", "arities", "outcomes", "probs", "space"):
        if key not in header:
            raise ValueError(f"kernel file is missing {key}=")
    N = int(header["N"])
    outs = [tuple(float(x) for x in grp.split(",")) for grp in header["outcomes"].split("|")]
    probs = [tuple(float(x) for x in grp.split(",")) for grp in header["probs"].split("|")]
    space = CoordinateSpace(tuple(Coordinate(o, p) for o, p in zip(outs, probs)))
    if space.depth != N or ",".join(str(a) for a in space.arities) != header["arities"]:
        raise ValueError("kernel header is inconsistent")
    banach = B.parse_space(header["space"])
    D = banach.total_dim
    h = np.zeros((N, space.n_atoms, D))
    seen = np.zeros((N, space.n_atoms), dtype=bool)
    for r in rows:
        n, a = int(r[0]), int(r[1])
        vals = [float(x) for x in r[2:]]
        if len(vals) != D:
            raise ValueError(f"row for n={n}, atom={a} has {len(vals)} values, expected {D}")
        h[n - 1, a] = vals
        seen[n - 1, a] = True
    if not seen.all():
        raise ValueError("kernel table is incomplete")
    return GeneratorKernel(space, banach, h)


def load_kernel(path) -> GeneratorKernel:
    with open(path) as fh:
        return parse_kernel(fh.read())


def save_kernel(kernel: GeneratorKernel, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(serialize_kernel(kernel))

