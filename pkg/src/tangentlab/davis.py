"""Davis decomposition of a generator kernel and the pair threshold split.

The kernel split is into a part bounded by a predictable majorant and a
part whose norms sum to at most twice the maximal function.  Both parts are
re-centered so each is again a martingale difference kernel:

    u_n = h_n 1{||h_n|| <= 2 h*_{n-1}},     v_n = h_n 1{||h_n|| > 2 h*_{n-1}}
    h1_n = u_n - E(u_n | level n-1),         h2_n = v_n + E(u_n | level n-1)

so that ``h1 + h2 = h``.  Ties at the threshold go to ``u``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import banach as B
from .martingale import (
    DecoupledPair,
    GeneratorKernel,
    MDS,
    conditional_means,
    maximal,
)

CERT_TOL = 1e-10


class CertificateError(AssertionError):
    """A pointwise inequality that must hold by construction failed."""


@dataclass
class DavisSplit:
    kernel: GeneratorKernel
    u: np.ndarray
    v: np.ndarray
    h1: GeneratorKernel
    h2: GeneratorKernel
    hstar: np.ndarray  # hstar[n] = max_{m<=n} ||h_m||, hstar[0] = 0

    @property
    def N(self) -> int:
        return self.kernel.N


def davis_split(kernel: GeneratorKernel) -> DavisSplit:
    h = kernel.h
    norms = B.norm(h, kernel.banach)
    _, running = maximal(h, kernel.banach)
    hstar = np.concatenate([np.zeros((1, h.shape[1])), running])
    small = norms <= 2.0 * hstar[:-1]
    u = np.where(small[..., None], h, 0.0)
    v = np.where(small[..., None], 0.0, h)
    cu = conditional_means(u, kernel.space)
    h1 = GeneratorKernel(kernel.space, kernel.banach, u - cu)
    h2 = GeneratorKernel(kernel.space, kernel.banach, v + cu)
    return DavisSplit(kernel, u, v, h1, h2, hstar)


@dataclass
class Certificate:
    """Worst slack of each pointwise inequality, with the atom where it occurs."""

    entries: dict = field(default_factory=dict)
    tol: float = CERT_TOL

    @property
    def passed(self) -> bool:
        return all(e["slack"] >= -self.tol for e in self.entries.values())

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed, "tol": self.tol, "inequalities": self.entries}, indent=2, sort_keys=True)

    def raise_for_violation(self) -> None:
        for name, e in self.entries.items():
            if e["slack"] < -self.tol:
                raise CertificateError(f"{name} violated at n={e['n']}, atom {e['atom']}: slack {e['slack']:.3e}")


def _worst(slack: np.ndarray, space, per_step: bool) -> dict:
    """Locate the minimum of a slack table of shape (N, atoms) or (atoms,)."""
    if slack.size == 0:
        return {"slack": float("inf"), "n": None, "atom": None}
    if per_step:
        n, a = np.unravel_index(int(np.argmin(slack)), slack.shape)
        n = int(n) + 1
    else:
        a, n = int(np.argmin(slack)), None
    return {"slack": float(slack.flat[np.argmin(slack)]), "n": n, "atom": [int(i) for i in space.paths[a]]}


def certify_davis(split: DavisSplit, strict: bool = True) -> Certificate:
    """Check, atom by atom,

    * ``sum_n ||v_n|| <= 2 h*``
    * ``||h1_n|| <= 4 h*_{n-1}``
    * ``||u_n|| <= 2 h*_{n-1}``

    plus the reconstruction ``h1 + h2 = h``.  With ``strict`` a violation raises
    :class:`CertificateError`.
    """
    bs = split.kernel.banach
    sp = split.kernel.space
    prev = split.hstar[:-1]
    cert = Certificate()
    cert.entries["sum_v_le_2hstar"] = _worst(2.0 * split.hstar[-1] - B.norm(split.v, bs).sum(axis=0), sp, False)
    cert.entries["h1_le_4hstar_prev"] = _worst(4.0 * prev - B.norm(split.h1.h, bs), sp, True)
    cert.entries["u_le_2hstar_prev"] = _worst(2.0 * prev - B.norm(split.u, bs), sp, True)
    recon = np.abs(split.h1.h + split.h2.h - split.kernel.h).max(axis=2)
    cert.entries["reconstruction"] = _worst(-recon, sp, True)
    if strict:
        cert.raise_for_violation()
    return cert


@dataclass
class PairThresholdSplit:
    a: np.ndarray  # a[n-1] = max_{m<n} max(||d_m||, ||e_m||); a[N] is the final running max
    d1: np.ndarray
    d2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    slack: float


def pair_threshold_split(pair: DecoupledPair, check_symmetric: bool = False) -> PairThresholdSplit:
    """Split ``d`` and ``e`` at twice the running maximum of both sequences.

    The bound ``||d''_n|| <= 2 (a_{n+1} - a_n)`` (and the same for ``e''``) is
    certified pointwise.  The split parts are martingale differences only for
    conditionally symmetric input; with ``check_symmetric`` all four are
    validated as MDS and a :class:`~tangentlab.martingale.CenteringError`
    propagates otherwise.
    """
    bs = pair.banach
    nd = B.norm(pair.d.diffs, bs)
    ne = B.norm(pair.e.diffs, bs)
    both = np.maximum(nd, ne)
    run = np.maximum.accumulate(both, axis=0)
    a = np.concatenate([np.zeros((1, both.shape[1])), run])
    thr = 2.0 * a[:-1]
    dsmall = nd <= thr
    esmall = ne <= thr
    d1 = np.where(dsmall[..., None], pair.d.diffs, 0.0)
    d2 = pair.d.diffs - d1
    e1 = np.where(esmall[..., None], pair.e.diffs, 0.0)
    e2 = pair.e.diffs - e1
    bound = 2.0 * (a[1:] - a[:-1])
    slack = float(min((bound - B.norm(d2, bs)).min(), (bound - B.norm(e2, bs)).min()))
    if slack < -CERT_TOL:
        raise CertificateError(f"large-part bound violated, slack {slack:.3e}")
    if check_symmetric:
        for arr in (d1, d2, e1, e2):
            MDS(pair.doubled, arr, bs)
    return PairThresholdSplit(a, d1, d2, e1, e2, slack)
