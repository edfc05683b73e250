"""Exact and Monte Carlo evaluation of the functionals in the decoupling inequalities.

Exact quantities are sums over atoms of the doubled space, accumulated with
``math.fsum`` so they do not depend on atom order.  The Monte Carlo engine
samples x- and y-paths independently from the coordinate distributions and
evaluates the kernel by table lookup; sample block ``b`` always draws from
the stream ``SeedSequence(seed, spawn_key=(b,))``, so results do not depend
on how blocks are spread over workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import banach as B
from .davis import davis_split
from .martingale import (
    DecoupledPair,
    GeneratorKernel,
    StoppingTriple,
    build_sigma,
    check_ci,
    check_tangent,
    decouple,
    first_passage,
    g_conditional_moment,
    stopped_transform,
)

MC_BLOCK = 4096


class DegenerateError(ValueError):
    pass


@dataclass
class ConstantEstimate:
    value: float
    engine: str = "exact"
    samples: int | None = None
    std_error: float | None = None
    seed: int | None = None
    fingerprint: str | None = None
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.status == "degenerate"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _check_p(p: float) -> None:
    if math.isinf(p):
        raise ValueError("p = inf is not computed (the decoupling inequality holds there with constant 1)")
    if p < 1:
        raise ValueError(f"p must be in [1, inf), got {p}")


def _mean(probs: np.ndarray, x: np.ndarray) -> float:
    return math.fsum(probs * x)


def moment_exact(values, p: float, probs, banach: B.Space) -> float:
    """``sum_atoms prob * ||value||^p``."""
    return _mean(np.asarray(probs), np.asarray(B.norm(values, banach)) ** p)


def lp_norm_exact(values, p: float, space, banach: B.Space | None = None) -> float:
    """``(E ||values||^p)^(1/p)`` over the atoms of ``space``.

    Scalar tables (one value per atom) are measured by absolute value.
    """
    _check_p(p)
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
        banach = banach or B.Lp(1, 1)
    if banach is None:
        banach = B.Lp(v.shape[1], 2)
    return moment_exact(v, p, space.probs, banach) ** (1.0 / p)


def pair_sums(pair: DecoupledPair, N: int | None = None):
    """``(f_N, g_N)`` at every doubled atom."""
    N = pair.N if N is None else N
    if not 1 <= N <= pair.N:
        raise ValueError(f"N must be in 1..{pair.N}")
    return pair.d.diffs[:N].sum(axis=0), pair.e.diffs[:N].sum(axis=0)


def _as_pair(obj) -> DecoupledPair:
    if isinstance(obj, DecoupledPair):
        return obj
    if isinstance(obj, GeneratorKernel):
        return decouple(obj)
    raise TypeError("expected a GeneratorKernel or DecoupledPair")


# Monte Carlo -------------------------------------------------------------------

def _sample_block(kernel: GeneratorKernel, N: int, which: str, p: float, size: int, seed: int, block: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    sp = kernel.space
    xs = np.column_stack([rng.choice(c.arity, size=size, p=c.probs) for c in sp.levels])
    ys = np.column_stack([rng.choice(c.arity, size=size, p=c.probs) for c in sp.levels])
    total = np.zeros((size, kernel.h.shape[2]))
    if which == "f":
        idx = np.ravel_multi_index(xs.T, sp.arities)
        for n in range(N):
            total += kernel.h[n][idx]
    else:
        for n in range(N):
            path = xs.copy()
            path[:, n] = ys[:, n]
            total += kernel.h[n][np.ravel_multi_index(path.T, sp.arities)]
    return np.asarray(B.norm(total, kernel.banach)) ** p


def mc_samples(source, which: str, p: float, samples: int, seed: int, N: int | None = None, workers: int = 1) -> np.ndarray:
    """Draw ``||f_N||^p`` or ``||g_N||^p`` for ``samples`` independent paths."""
    kernel = source.kernel if isinstance(source, DecoupledPair) else source
    if which not in ("f", "g"):
        raise ValueError("which must be 'f' or 'g'")
    N = kernel.N if N is None else N
    sizes = [min(MC_BLOCK, samples - lo) for lo in range(0, samples, MC_BLOCK)]

    def run(b):
        return _sample_block(kernel, N, which, p, sizes[b], seed, b)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    return np.concatenate(parts)


def lp_norm_mc(source, which: str, p: float, samples: int, seed: int, N: int | None = None, workers: int = 1) -> ConstantEstimate:
    """Unbiased Monte Carlo estimate of ``E ||f_N||^p`` (``which='f'``) or ``E ||g_N||^p``."""
    _check_p(p)
    if samples < 2:
        raise ValueError("need at least 2 samples")
    kernel = source.kernel if isinstance(source, DecoupledPair) else source
    x = mc_samples(kernel, which, p, samples, seed, N, workers)
    mean = math.fsum(x) / samples
    se = float(np.std(x, ddof=1) / math.sqrt(samples))
    return ConstantEstimate(mean, "mc", samples, se, seed, kernel.fingerprint, extra={"which": which, "p": p})


# ratios ----------------------------------------------------------------------

def decoupling_ratio(pair, p: float, N: int | None = None, engine: str = "exact",
                     samples: int = 20000, seed: int = 0, workers: int = 1) -> ConstantEstimate:
    """``(E||f_N||^p)^(1/p) / (E||g_N||^p)^(1/p)``; the reciprocal is in ``extra['reverse']``."""
    _check_p(p)
    pair = _as_pair(pair)
    fp = pair.kernel.fingerprint
    if engine == "exact":
        f, g = pair_sums(pair, N)
        num = moment_exact(f, p, pair.doubled.probs, pair.banach)
        den = moment_exact(g, p, pair.doubled.probs, pair.banach)
        est = ConstantEstimate(math.nan, "exact", fingerprint=fp)
        se_log = None
    elif engine == "mc":
        xf = mc_samples(pair.kernel, "f", p, samples, seed, N, workers)
        xg = mc_samples(pair.kernel, "g", p, samples, seed, N, workers)
        num, den = math.fsum(xf) / samples, math.fsum(xg) / samples
        est = ConstantEstimate(math.nan, "mc", samples, None, seed, fp)
        se_log = None
        if num > 0 and den > 0:
            # delta method on log ratio; both means come from the same paths
            c = np.cov(xf, xg, ddof=1)
            var = c[0, 0] / num**2 + c[1, 1] / den**2 - 2 * c[0, 1] / (num * den)
            se_log = math.sqrt(max(var, 0.0) / samples) / p
    else:
        raise ValueError(f"unknown engine {engine!r}")
    est.extra.update({"p": p, "N": pair.N if N is None else N, "numerator": num ** (1 / p), "denominator": den ** (1 / p)})
    if den <= 0:
        est.status = "degenerate"
        est.extra["reverse"] = math.nan
        return est
    est.value = (num / den) ** (1.0 / p)
    est.extra["reverse"] = (den / num) ** (1.0 / p) if num > 0 else math.inf
    if se_log is not None:
        est.std_error = est.value * se_log
    return est


def weak_type_levels(norms: np.ndarray, probs: np.ndarray, p: float = 1.0):
    """``max_a a^p P(X >= a)`` over the support of ``X``; returns ``(value, a)``."""
    order = np.argsort(-norms, kind="stable")
    a = norms[order]
    tail = np.cumsum(probs[order])
    score = a**p * tail
    i = int(np.argmax(score))
    return float(score[i]), float(a[i])


def weak_type_constant(pair, N: int | None = None) -> ConstantEstimate:
    """``sup_lambda lambda P(||f_N|| > lambda) / E||g_N||``, exact over the support."""
    pair = _as_pair(pair)
    f, g = pair_sums(pair, N)
    probs = pair.doubled.probs
    den = moment_exact(g, 1.0, probs, pair.banach)
    top, level = weak_type_levels(np.asarray(B.norm(f, pair.banach)), probs)
    est = ConstantEstimate(math.nan, "exact", fingerprint=pair.kernel.fingerprint,
                           extra={"level": level, "numerator": top, "denominator": den})
    if den <= 0:
        est.status = "degenerate"
        return est
    est.value = top / den
    return est


@dataclass
class SupComparison:
    lhs: float   # (E max_n ||g_n||^p)^(1/p)
    rhs: float   # max_n (E ||g_n||^p)^(1/p)
    factor: float

    @property
    def bound(self) -> float:
        return self.factor * self.rhs

    def holds(self, tol: float = 1e-9) -> bool:
        return self.rhs <= self.lhs + tol and self.lhs <= self.bound + tol


def sup_comparison(pair, p: float, N: int | None = None) -> SupComparison:
    """Maximal-function norm of ``g`` against the largest ``L^p`` norm along the path."""
    _check_p(p)
    pair = _as_pair(pair)
    N = pair.N if N is None else N
    probs = pair.doubled.probs
    g = np.cumsum(pair.e.diffs[:N], axis=0)
    norms = np.asarray(B.norm(g, pair.banach))
    lhs = _mean(probs, norms.max(axis=0) ** p) ** (1 / p)
    rhs = max(_mean(probs, norms[n] ** p) for n in range(N)) ** (1 / p)
    return SupComparison(lhs, rhs, 2.0 ** (1.0 + 1.0 / p))


# good-lambda probe ---------------------------------------------------------------

@dataclass
class GoodLambdaReport:
    params: dict
    p_fstar_gt_lambda: float
    lhs_moment: float               # max_n E||G_n||^p of the stopped decoupled sum
    rhs_corrected: float            # (3 delta lambda)^p P(f1* > lambda)
    rhs_displayed: float            # 3^p delta^p P(f1* > lambda)
    conditional_slack: float        # min over x of 3 delta lambda 1{mu<inf} - E(||G_n||^p|G)^(1/p)
    p_event: float                  # P(f1* > beta lambda, control < delta lambda)
    p_tail_F: float                 # P(||F_N|| > (beta - delta - 1) lambda)
    inclusion_violations: int
    measured_C: float
    chain_corrected: float          # 3^p C^p delta^p (beta-delta-1)^-p P(f1* > lambda)
    chain_displayed: float          # same with delta in place of delta^p
    tangent: bool = True
    ci: bool = True

    @property
    def slack(self) -> float:
        return self.rhs_corrected - self.lhs_moment

    @property
    def event_slack(self) -> float:
        return self.p_tail_F - self.p_event

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slack"] = self.slack
        d["event_slack"] = self.event_slack
        return d


def good_lambda_probe(kernel: GeneratorKernel, delta: float, beta: float, lam: float, p: float = 1.0,
                      check: bool = True) -> GoodLambdaReport:
    """Evaluate both sides of the stopped-transform estimates for one parameter choice.

    The kernel is Davis-split; the small part drives the stopping times
    ``mu``, ``nu`` (first passages of ``||f1_n||`` above ``lam`` and
    ``beta*lam``) and ``sigma`` (see :func:`~tangentlab.martingale.build_sigma`).
    The corrected bound carries the factor ``lam^p`` and ``delta^p``; the
    uncorrected readings are reported next to it.
    """
    _check_p(p)
    if delta < 0 or lam < 0:
        raise ValueError("delta and lambda must be nonnegative")
    if not beta > 1 + delta:
        raise ValueError(f"need beta > 1 + delta, got beta={beta}, delta={delta}")
    split = davis_split(kernel)
    pair1 = decouple(split.h1)
    base = kernel.space
    N = kernel.N
    bs = kernel.banach
    f1 = np.asarray(B.norm(np.cumsum(split.h1.h, axis=0), bs))
    mu = first_passage(f1, lam, N)
    nu = first_passage(f1, beta * lam, N)
    sigma, roots = build_sigma(pair1, delta, lam, p, majorant=kernel)
    st = StoppingTriple(mu, nu, sigma, {"delta": delta, "beta": beta, "lambda": lam, "p": p})
    stopped = stopped_transform(pair1, st)

    tangent = ci = True
    if check:
        tangent = bool(check_tangent(stopped.d, stopped.e))
        ci = bool(check_ci(stopped))

    bprobs = base.probs
    hit = (mu <= N).astype(float)
    p_hit = _mean(bprobs, hit)
    cond = g_conditional_moment(stopped, p) ** (1 / p)
    cond_slack = float((3 * delta * lam * hit[None, :] - cond).min())
    Gn = np.cumsum(stopped.e.diffs, axis=0)
    dprobs = stopped.doubled.probs
    lhs = max(_mean(dprobs, np.asarray(B.norm(Gn[n], bs)) ** p) for n in range(N))

    hstar = np.asarray(B.norm(kernel.h, bs)).max(axis=0)
    control = np.maximum(roots.max(axis=0), 4 * hstar)
    event = (f1.max(axis=0) > beta * lam) & (control < delta * lam)
    FN = np.asarray(B.norm(stopped.kernel.h.sum(axis=0), bs))
    t = (beta - delta - 1) * lam
    tail = FN > t
    inclusion = int(np.count_nonzero(event & ~tail))

    GN = Gn[-1]
    gmom = _mean(dprobs, np.asarray(B.norm(GN, bs)) ** p)
    top, _ = weak_type_levels(FN, bprobs, p)
    C = (top / gmom) ** (1 / p) if gmom > 0 else (0.0 if top == 0 else math.inf)
    ratio = (beta - delta - 1) ** (-p)
    chain_c = 3**p * C**p * delta**p * ratio * p_hit if C < math.inf else math.inf
    chain_d = 3**p * C**p * delta * ratio * p_hit if C < math.inf else math.inf
    return GoodLambdaReport(
        params=st.params,
        p_fstar_gt_lambda=p_hit,
        lhs_moment=lhs,
        rhs_corrected=(3 * delta * lam) ** p * p_hit,
        rhs_displayed=3**p * delta**p * p_hit,
        conditional_slack=cond_slack,
        p_event=_mean(bprobs, event.astype(float)),
        p_tail_F=_mean(bprobs, tail.astype(float)),
        inclusion_violations=inclusion,
        measured_C=C,
        chain_corrected=chain_c,
        chain_displayed=chain_d,
        tangent=tangent,
        ci=ci,
    )
