"""Adversarial search for large decoupling, UMD and Garling ratios.

Every constant found here is a lower bound for the corresponding best
constant of the space.  Searches move over compact kernel tables (one array
per step, shape ``arities[:n] + (dim,)``), keep every step centered, and
score instances with a vectorized evaluator; the final best instance is
re-scored with the exact engine before it is reported.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import banach as B
from .estimator import ConstantEstimate, decoupling_ratio
from .martingale import GeneratorKernel, decouple_index, paley_walsh_kernel
from .probspace import CoordinateSpace, get_atom_cap, uniform

MODES = ("decoupling", "umd_exact", "garling_forward", "garling_reverse")
STEP_SIZES = (1.0, 0.3, 0.1)
MAX_UMD_DEPTH = 16
CERTIFY_TOL = 1e-10


def sign_matrix(N: int) -> np.ndarray:
    """All ``2**N`` sign vectors in lexicographic order (``-1`` first)."""
    if N > MAX_UMD_DEPTH:
        raise ValueError(f"sign enumeration is limited to N <= {MAX_UMD_DEPTH}, got {N}")
    return 2.0 * np.indices((2,) * N).reshape(N, -1).T - 1.0


def _as_rademacher_kernel(generators, banach: B.Space | None) -> GeneratorKernel:
    if isinstance(generators, GeneratorKernel):
        return generators
    return paley_walsh_kernel(generators, banach)


def _signed_moments(kernel: GeneratorKernel, p: float, chunk: int = 256) -> np.ndarray:
    """``E ||sum_n eps_n d_n||^p`` for every sign vector ``eps``."""
    S = sign_matrix(kernel.N)
    probs = kernel.space.probs
    out = np.empty(len(S))
    for lo in range(0, len(S), chunk):
        sums = np.einsum("sn,nad->sad", S[lo:lo + chunk], kernel.h)
        nrm = np.asarray(B.norm(sums, kernel.banach)) ** p
        out[lo:lo + chunk] = [math.fsum(probs * row) for row in nrm]
    return out


def umd_constant_exact(generators, p: float, banach: B.Space | None = None) -> ConstantEstimate:
    """Largest ratio ``(E||sum eps_n d_n||^p / E||sum d_n||^p)^(1/p)`` over all sign vectors.

    ``generators`` are Paley-Walsh generator tables (see
    :func:`~tangentlab.martingale.paley_walsh_kernel`) or a kernel.
    """
    kernel = _as_rademacher_kernel(generators, banach)
    if kernel.N > MAX_UMD_DEPTH:
        raise ValueError(f"depth {kernel.N} too large for sign enumeration (max {MAX_UMD_DEPTH})")
    m = _signed_moments(kernel, p)
    base = m[-1]  # all-plus sign vector is last in lexicographic order
    est = ConstantEstimate(math.nan, "exact", fingerprint=kernel.fingerprint, extra={"p": p, "N": kernel.N})
    if base <= 0:
        est.status = "degenerate"
        return est
    i = int(np.argmax(m))
    est.value = (m[i] / base) ** (1.0 / p)
    est.extra["signs"] = [int(s) for s in sign_matrix(kernel.N)[i]]
    return est


def garling_constants(kernel: GeneratorKernel, p: float) -> dict:
    """Forward ``(E||sum d_n||^p / E||sum r_n d_n||^p)^(1/p)`` and its reciprocal.

    ``r_n`` is an independent Rademacher sequence; its expectation is taken by
    enumerating all sign vectors.
    """
    m = _signed_moments(kernel, p)
    num = m[-1]
    den = math.fsum(m) / len(m)
    if den <= 0 or num <= 0:
        return {"forward": math.nan, "reverse": math.nan, "status": "degenerate"}
    fwd = (num / den) ** (1.0 / p)
    return {"forward": fwd, "reverse": 1.0 / fwd, "status": "ok"}


# fast evaluator ----------------------------------------------------------------

class Evaluator:
    """Vectorized objective for one (space, banach, p, mode) combination."""

    def __init__(self, space: CoordinateSpace, banach: B.Space, p: float, mode: str):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
        if mode != "decoupling" and not space.is_rademacher:
            raise ValueError(f"mode {mode} needs a Rademacher (arity 2) space")
        self.space, self.banach, self.p, self.mode = space, banach, float(p), mode
        self.probs = np.asarray(space.probs)
        if mode == "decoupling":
            if space.n_atoms**2 > get_atom_cap():
                raise ValueError(f"exact evaluation needs {space.n_atoms ** 2} doubled atoms, cap is {get_atom_cap()}")
            _, self.e_index = decouple_index(space)
            self.dprobs = np.multiply.outer(self.probs, self.probs).ravel()
        else:
            self.signs = sign_matrix(space.depth)

    def expand(self, tables) -> np.ndarray:
        ar = self.space.arities
        L = len(ar)
        D = tables[0].shape[-1]
        return np.stack([
            np.broadcast_to(t.reshape(ar[:n] + (1,) * (L - n) + (D,)), ar + (D,)).reshape(-1, D)
            for n, t in enumerate(tables, start=1)
        ])

    def __call__(self, tables) -> float:
        h = self.expand(tables)
        p = self.p
        fN = h.sum(axis=0)
        num = self.probs @ (np.asarray(B.norm(fN, self.banach)) ** p)
        if self.mode == "decoupling":
            g = h[0][self.e_index[0]].copy()
            for n in range(1, len(h)):
                g += h[n][self.e_index[n]]
            den = self.dprobs @ (np.asarray(B.norm(g, self.banach)) ** p)
            return _ratio(num, den, p)
        sums = np.einsum("sn,nad->sad", self.signs, h)
        m = (np.asarray(B.norm(sums, self.banach)) ** p) @ self.probs
        if self.mode == "umd_exact":
            return _ratio(m.max(), num, p)
        if self.mode == "garling_forward":
            return _ratio(num, m.mean(), p)
        return _ratio(m.mean(), num, p)

    def certify(self, kernel: GeneratorKernel) -> ConstantEstimate:
        """Re-score with the exact (``fsum``) engine."""
        if self.mode == "decoupling":
            return decoupling_ratio(kernel, self.p)
        if self.mode == "umd_exact":
            return umd_constant_exact(kernel, self.p)
        g = garling_constants(kernel, self.p)
        key = "forward" if self.mode == "garling_forward" else "reverse"
        return ConstantEstimate(g[key], "exact", fingerprint=kernel.fingerprint, status=g["status"],
                                extra={"p": self.p, "N": kernel.N, **g})


def _ratio(num: float, den: float, p: float) -> float:
    if not den > 0:
        return -math.inf
    return float((num / den) ** (1.0 / p))


# hill climbing -----------------------------------------------------------------

@dataclass
class SearchConfig:
    space: B.Space
    p: float = 1.0
    N: int = 4
    mode: str = "decoupling"
    budget: int = 10_000
    seed: int = 0
    restarts: int = 4
    arity: int = 2

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.N < 1 or self.restarts < 1:
            raise ValueError("N and restarts must be positive")
        if self.mode != "decoupling" and self.arity != 2:
            raise ValueError(f"mode {self.mode} uses Paley-Walsh instances (arity 2)")
        if self.arity ** (2 * self.N) > get_atom_cap():
            raise ValueError(f"N={self.N}, arity={self.arity} exceeds the atom cap for exact evaluation")


@dataclass
class SearchResult:
    config: SearchConfig
    kernel: GeneratorKernel
    estimate: ConstantEstimate
    trace: list = field(default_factory=list)  # (evaluation, restart, best value) at each improvement
    evaluations: int = 0

    @property
    def best(self) -> float:
        return self.estimate.value


def random_tables(space: CoordinateSpace, D: int, rng: np.random.Generator) -> list:
    tables = []
    for n in range(1, space.depth + 1):
        t = rng.standard_normal(space.arities[:n] + (D,))
        tables.append(_center_level(t, space, n))
    return tables


def _center_level(t: np.ndarray, space: CoordinateSpace, n: int) -> np.ndarray:
    w = np.asarray(space.levels[n - 1].probs).reshape((1,) * (n - 1) + (-1, 1))
    return t - (t * w).sum(axis=n - 1, keepdims=True)


def _climb(ev: Evaluator, tables: list, budget: int, rng: np.random.Generator, restart: int, trace: list):
    space = ev.space
    N = space.depth
    tables = [t.copy() for t in tables]
    best = ev(tables)
    used = 1
    trace.append((used, restart, best))
    step = 0
    while used < budget:
        s = STEP_SIZES[step % len(STEP_SIZES)]
        additive = (step // len(STEP_SIZES)) % 2 == 0
        step += 1
        n = int(rng.integers(1, N + 1))
        t = tables[n - 1]
        prefix = tuple(int(rng.integers(a)) for a in space.arities[: n - 1])
        cand = t.copy()
        if additive:
            k = int(rng.integers(space.arities[n - 1]))
            u = rng.standard_normal(t.shape[-1])
            u /= max(np.linalg.norm(u), 1e-300)
            scale = math.sqrt(float(np.mean(t**2))) or 1.0
            cand[prefix + (k,)] += s * scale * u
            cand = _center_level(cand, space, n)
        else:
            cand[prefix] *= math.exp(s * rng.standard_normal())
        trial = tables[: n - 1] + [cand] + tables[n:]
        val = ev(trial)
        used += 1
        if val > best:
            best, tables = val, trial
            trace.append((used, restart, best))
    return best, tables, used


def hill_climb(cfg: SearchConfig, initial: list | None = None, workers: int = 1) -> SearchResult:
    """Coordinate ascent over kernel table entries with restarts.

    Restart ``r`` draws from ``SeedSequence(cfg.seed, spawn_key=(r,))``; the
    total number of objective evaluations is ``cfg.budget``.  ``initial``
    (compact tables) seeds restart 0.  The best instance is re-scored with
    the exact engine and the two scores must agree to 1e-10.
    """
    space = uniform(cfg.N, cfg.arity)
    ev = Evaluator(space, cfg.space, cfg.p, cfg.mode)
    D = cfg.space.total_dim
    R = min(cfg.restarts, cfg.budget)
    budgets = [cfg.budget // R + (1 if r < cfg.budget % R else 0) for r in range(R)]

    def run(r):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(r,)))
        start = [np.asarray(t, dtype=float) for t in initial] if (r == 0 and initial is not None) else random_tables(space, D, rng)
        trace = []
        best, tables, used = _climb(ev, start, budgets[r], rng, r, trace)
        return best, tables, used, trace

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            runs = list(ex.map(run, range(R)))
    else:
        runs = [run(r) for r in range(R)]
    # ties go to the lowest restart index
    r_best = max(range(R), key=lambda r: (runs[r][0], -r))
    best, tables, _, _ = runs[r_best]
    kernel = GeneratorKernel.from_tables(space, cfg.space, tables)
    est = ev.certify(kernel)
    if not est.degenerate and abs(est.value - best) > CERTIFY_TOL * max(1.0, abs(best)):
        raise AssertionError(f"search score {best} and exact recheck {est.value} disagree")
    est.seed = cfg.seed
    est.extra.update({"mode": cfg.mode, "budget": cfg.budget, "restart": r_best})
    offset = 0
    trace = []
    for r in range(R):
        trace.extend((offset + i, rr, v) for i, rr, v in runs[r][3])
        offset += runs[r][2]
    return SearchResult(cfg, kernel, est, trace, sum(x[2] for x in runs))


# sweeps ------------------------------------------------------------------------

SWEEP_COLUMNS = ("dim", "p", "N", "mode", "best_constant", "seed", "budget", "fingerprint")


@dataclass
class SweepTable:
    rows: list
    results: list = field(default_factory=list, repr=False)

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items() if k in SWEEP_COLUMNS})
        return buf.getvalue()


def dimension_sweep(cfg: SearchConfig, dims, workers: int = 1) -> SweepTable:
    """Run :func:`hill_climb` for each size in ``dims`` (ascending).

    Each search after the first starts restart 0 from the previous optimum,
    zero-padded into the larger space.  Padding is isometric, so the column
    of best constants is nondecreasing.
    """
    dims = sorted(int(d) for d in dims)
    rows, results = [], []
    prev = None
    for d in dims:
        sp = B.with_dim(cfg.space, d)
        init = None
        if prev is not None:
            init = [B.embed(t, prev.config.space, sp) for t in prev.kernel.tables()]
        res = hill_climb(replace(cfg, space=sp), initial=init, workers=workers)
        rows.append({
            "dim": d, "p": float(cfg.p), "N": cfg.N, "mode": cfg.mode,
            "best_constant": float(res.best), "seed": cfg.seed, "budget": cfg.budget,
            "fingerprint": res.kernel.fingerprint, "space": B.format_space(sp),
        })
        results.append(res)
        prev = res
    return SweepTable(rows, results)
