"""Finite-dimensional Banach norms.

Every vector in the package is a plain float64 array whose trailing axis holds
the coordinates; the space descriptor tells :func:`norm` how to measure it.
Leading axes are treated as a batch, so a whole atom table can be measured in
one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

INF = math.inf
MAX_TRACE_K = 8


class DescriptorError(ValueError):
    """Invalid space descriptor or descriptor text."""


class DimensionError(ValueError):
    """Vector does not conform to its space."""


@dataclass(frozen=True)
class Lp:
    """``l^p_dim``; ``p`` may be :data:`INF`."""

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DescriptorError(f"lp dim must be a positive integer, got {self.dim}")
        if not (self.p >= 1):
            raise DescriptorError(f"lp exponent must be >= 1, got {self.p}")

    @property
    def total_dim(self) -> int:
        return int(self.dim)


@dataclass(frozen=True)
class NestedL1:
    """``L^p(S; inner)`` over a finite measure space ``S`` given by ``weights``.

    The default ``p = 1`` is the Bochner space ``L^1(S; inner)``; other exponents
    are used for the Fubini lift experiments.
    """

    weights: tuple
    inner: "Space"
    p: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) == 0:
            raise DescriptorError("nested space needs at least one weight")
        if any(not (w > 0) for w in self.weights):
            raise DescriptorError(f"weights must be positive, got {self.weights}")
        if not isinstance(self.inner, (Lp, NestedL1, TraceNorm)):
            raise DescriptorError("inner must be a space descriptor")
        if not (self.p >= 1) or math.isinf(self.p):
            raise DescriptorError(f"outer exponent must be in [1, inf), got {self.p}")

    @property
    def total_dim(self) -> int:
        return len(self.weights) * self.inner.total_dim


@dataclass(frozen=True)
class TraceNorm:
    """Trace (nuclear) norm of ``k x k`` real matrices stored row-major."""

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DescriptorError(f"trace k must be a positive integer, got {self.k}")
        if self.k > MAX_TRACE_K:
            raise DescriptorError(f"trace k is capped at {MAX_TRACE_K}, got {self.k}")

    @property
    def total_dim(self) -> int:
        return int(self.k) ** 2


Space = Union[Lp, NestedL1, TraceNorm]


def _check(v: np.ndarray, s: Space) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 0 or v.shape[-1] != s.total_dim:
        raise DimensionError(
            f"vector with trailing dimension {v.shape[-1] if v.ndim else 0} "
            f"does not conform to {format_space(s)} (dimension {s.total_dim})"
        )
    return v


def _lp(v: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(v)
    if math.isinf(p):
        return a.max(axis=-1)
    if p == 1:
        return a.sum(axis=-1)
    if p == 2:
        return np.sqrt(np.einsum("...i,...i->...", v, v))
    # scale by the max modulus so large entries cannot overflow in the power
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    return (np.sum((a / safe) ** p, axis=-1)) ** (1.0 / p) * safe[..., 0]


def norm(v, s: Space) -> np.ndarray | float:
    """Norm of ``v`` (or of every vector in a batch) in the space ``s``.

    Parameters
    ----------
    v : array_like, shape (..., s.total_dim)
    s : Lp, NestedL1 or TraceNorm

    Returns
    -------
    float or ndarray of shape ``v.shape[:-1]``
    """
    v = _check(v, s)
    out = _norm(v, s)
    return float(out) if np.ndim(out) == 0 else out


def _norm(v: np.ndarray, s: Space) -> np.ndarray:
    if isinstance(s, Lp):
        return _lp(v, s.p)
    if isinstance(s, NestedL1):
        m = s.inner.total_dim
        blocks = v.reshape(v.shape[:-1] + (len(s.weights), m))
        inner = _norm(blocks, s.inner)
        w = np.asarray(s.weights)
        if s.p == 1:
            return inner @ w
        return (inner**s.p @ w) ** (1.0 / s.p)
    if isinstance(s, TraceNorm):
        k = s.k
        mats = v.reshape(v.shape[:-1] + (k, k))
        return np.linalg.svd(mats, compute_uv=False).sum(axis=-1)
    raise DescriptorError(f"unknown space descriptor {s!r}")


def axpy(a: float, x, y, s: Space | None = None) -> np.ndarray:
    """Return ``a * x + y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    if s is not None:
        _check(x, s)
    return a * x + y


def with_dim(s: Space, d: int) -> Space:
    """Same kind of space at a different size (used by dimension sweeps).

    For nested spaces the size is the number of sections; new sections get
    weight equal to the first one so that zero padding stays isometric.
    """
    if isinstance(s, Lp):
        return Lp(d, s.p)
    if isinstance(s, TraceNorm):
        return TraceNorm(d)
    if isinstance(s, NestedL1):
        w = list(s.weights[:d]) + [s.weights[0]] * max(0, d - len(s.weights))
        return NestedL1(tuple(w), s.inner, s.p)
    raise DescriptorError(f"unknown space descriptor {s!r}")


def embed(v, src: Space, dst: Space) -> np.ndarray:
    """Zero-pad vectors of ``src`` into the larger space ``dst`` of the same kind.

    The embedding is isometric for every supported kind (coordinates for
    ``Lp``, top-left block for ``TraceNorm``, leading sections for nested
    spaces with matching weights).
    """
    v = _check(v, src)
    batch = v.shape[:-1]
    if type(src) is not type(dst):
        raise DescriptorError("embedding needs spaces of the same kind")
    if isinstance(src, Lp):
        if dst.dim < src.dim or dst.p != src.p:
            raise DescriptorError(f"cannot embed {format_space(src)} into {format_space(dst)}")
        out = np.zeros(batch + (dst.dim,))
        out[..., : src.dim] = v
        return out
    if isinstance(src, TraceNorm):
        if dst.k < src.k:
            raise DescriptorError(f"cannot embed {format_space(src)} into {format_space(dst)}")
        out = np.zeros(batch + (dst.k, dst.k))
        out[..., : src.k, : src.k] = v.reshape(batch + (src.k, src.k))
        return out.reshape(batch + (dst.k**2,))
    if (
        len(dst.weights) < len(src.weights)
        or dst.weights[: len(src.weights)] != src.weights
        or dst.inner != src.inner
        or dst.p != src.p
    ):
        raise DescriptorError(f"cannot embed {format_space(src)} into {format_space(dst)}")
    out = np.zeros(batch + (dst.total_dim,))
    out[..., : src.total_dim] = v
    return out


def size_of(s: Space) -> int:
    if isinstance(s, Lp):
        return s.dim
    if isinstance(s, TraceNorm):
        return s.k
    return len(s.weights)


def is_hilbert(s: Space) -> bool:
    return isinstance(s, Lp) and (s.p == 2 or s.dim == 1)


# text form ---------------------------------------------------------------

def _fmt_num(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


def format_space(s: Space) -> str:
    """Canonical text form, e.g. ``lp:dim=4,p=inf`` or ``trace:k=2``."""
    if isinstance(s, Lp):
        return f"lp:dim={s.dim},p={_fmt_num(s.p)}"
    if isinstance(s, TraceNorm):
        return f"trace:k={s.k}"
    if isinstance(s, NestedL1):
        w = ",".join(repr(float(x)) for x in s.weights)
        if s.p == 1:
            return f"l1of:weights={w};inner={format_space(s.inner)}"
        return f"lpof:p={_fmt_num(s.p)};weights={w};inner={format_space(s.inner)}"
    raise DescriptorError(f"unknown space descriptor {s!r}")


def _parse_num(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INF
    try:
        return float(t)
    except ValueError:
        raise DescriptorError(f"not a number: {text!r}") from None


def _kv(body: str, sep: str) -> dict:
    out = {}
    for part in body.split(sep):
        if not part.strip():
            continue
        if "=" not in part:
            raise DescriptorError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_space(text: str) -> Space:
    """Parse the canonical text form produced by :func:`format_space`."""
    text = text.strip()
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    if kind == "lp":
        kv = _kv(body, ",")
        if set(kv) - {"dim", "p"} or "dim" not in kv:
            raise DescriptorError(f"bad lp descriptor {text!r}")
        dim = _parse_num(kv["dim"])
        if not float(dim).is_integer():
            raise DescriptorError(f"lp dim must be an integer in {text!r}")
        return Lp(int(dim), _parse_num(kv.get("p", "2")))
    if kind == "trace":
        kv = _kv(body, ",")
        if set(kv) != {"k"}:
            raise DescriptorError(f"bad trace descriptor {text!r}")
        return TraceNorm(int(_parse_num(kv["k"])))
    if kind in ("l1of", "lpof"):
        # inner= swallows the rest so nested descriptors keep their own separators
        head, sep, inner = body.partition("inner=")
        if not sep:
            raise DescriptorError(f"nested descriptor needs inner=: {text!r}")
        kv = _kv(head, ";")
        allowed = {"weights"} | ({"p"} if kind == "lpof" else set())
        if set(kv) - allowed or "weights" not in kv:
            raise DescriptorError(f"bad nested descriptor {text!r}")
        weights = tuple(_parse_num(w) for w in kv["weights"].split(","))
        p = _parse_num(kv["p"]) if kind == "lpof" else 1.0
        if kind == "lpof" and "p" not in kv:
            raise DescriptorError(f"lpof needs p=: {text!r}")
        return NestedL1(weights, parse_space(inner), p)
    raise DescriptorError(f"unknown space kind in {text!r}")
