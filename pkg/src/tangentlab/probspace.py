"""Finite product probability spaces with their coordinate filtrations.

Atoms are enumerated in lexicographic order of their outcome-index paths,
which is also C order of the ``arities`` tensor.  A random variable is a
table with one row per atom; levels are 1-based, so "level n" means the
sigma-field generated by the first ``n`` coordinates.

A *doubled* space (``block`` set) is the product of a base space with an
independent copy: coordinates ``0..N-1`` are the x-block, ``N..2N-1`` the
y-block.  Its filtration is interleaved: level ``n`` reveals
``x_1..x_n`` and ``y_1..y_n`` together.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_ATOM_CAP = 2**24
_atom_cap = DEFAULT_ATOM_CAP


class AtomCapError(MemoryError):
    """The requested space has more atoms than the configured cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"space needs {required} atoms, cap is {cap} (raise it with the atom-cap override)")
        self.required = required
        self.cap = cap


class LevelError(ValueError):
    pass


def set_atom_cap(cap: int | None) -> int:
    """Set the global atom cap (``None`` restores the default); returns the old cap."""
    global _atom_cap
    old = _atom_cap
    _atom_cap = DEFAULT_ATOM_CAP if cap is None else int(cap)
    return old


def get_atom_cap() -> int:
    return _atom_cap


@dataclass(frozen=True)
class Coordinate:
    outcomes: tuple
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(float(o) for o in self.outcomes))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.outcomes) != len(self.probs) or not self.outcomes:
            raise ValueError("outcomes and probs must be non-empty and of equal length")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError(f"outcomes must be distinct, got {self.outcomes}")
        if any(not (p > 0) for p in self.probs):
            raise ValueError(f"probabilities must be positive, got {self.probs}")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {self.probs}")

    @property
    def arity(self) -> int:
        return len(self.outcomes)


RADEMACHER = Coordinate((-1.0, 1.0), (0.5, 0.5))


@dataclass(frozen=True)
class AtomTable:
    paths: np.ndarray
    probs: np.ndarray

    def __len__(self):
        return len(self.probs)


@dataclass(frozen=True, eq=False)
class CoordinateSpace:
    levels: tuple
    block: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise ValueError("a coordinate space needs at least one coordinate")
        if any(not isinstance(c, Coordinate) for c in self.levels):
            raise TypeError("levels must be Coordinate instances")
        if self.block is not None and 2 * self.block != len(self.levels):
            raise ValueError("a doubled space has exactly two blocks")
        required = math.prod(self.arities)
        if required > _atom_cap:
            raise AtomCapError(required, _atom_cap)

    def __eq__(self, other):
        return (
            isinstance(other, CoordinateSpace)
            and self.levels == other.levels
            and self.block == other.block
        )

    def __hash__(self):
        return hash((self.levels, self.block))

    @property
    def n_coords(self) -> int:
        return len(self.levels)

    @property
    def depth(self) -> int:
        """Number of filtration steps (``N`` for both a base space and its double)."""
        return self.block if self.block is not None else len(self.levels)

    @property
    def arities(self) -> tuple:
        return tuple(c.arity for c in self.levels)

    @property
    def n_atoms(self) -> int:
        return math.prod(self.arities)

    @property
    def is_rademacher(self) -> bool:
        return all(c == RADEMACHER for c in self.levels)

    @cached_property
    def probs(self) -> np.ndarray:
        p = np.ones(1)
        for c in self.levels:
            p = np.multiply.outer(p, np.asarray(c.probs)).ravel()
        p.setflags(write=False)
        return p

    @cached_property
    def paths(self) -> np.ndarray:
        grids = np.indices(self.arities).reshape(self.n_coords, -1).T
        grids = np.ascontiguousarray(grids)
        grids.setflags(write=False)
        return grids

    def labels(self, i: int) -> np.ndarray:
        """Outcome labels of 0-based coordinate ``i`` at every atom."""
        return np.asarray(self.levels[i].outcomes)[self.paths[:, i]]

    def filtration_axes(self, n: int) -> tuple:
        """Coordinates revealed at level ``n`` of this space's filtration."""
        if not 0 <= n <= self.depth:
            raise LevelError(f"level {n} outside 0..{self.depth}")
        if self.block is None:
            return tuple(range(n))
        return tuple(range(n)) + tuple(range(self.block, self.block + n))

    @property
    def x_axes(self) -> tuple:
        if self.block is None:
            return tuple(range(self.n_coords))
        return tuple(range(self.block))


def rademacher(n: int) -> CoordinateSpace:
    return CoordinateSpace((RADEMACHER,) * n)


def uniform(n: int, arity: int = 2) -> CoordinateSpace:
    """``n`` uniform coordinates on ``arity`` points; arity 2 gives Rademacher labels."""
    if arity == 2:
        return rademacher(n)
    outcomes = tuple(float(i) for i in range(arity))
    return CoordinateSpace((Coordinate(outcomes, (1.0 / arity,) * arity),) * n)


def atoms(space: CoordinateSpace) -> AtomTable:
    """Atoms of ``space`` in lexicographic path order."""
    return AtomTable(space.paths, space.probs)


def doubled_space(space: CoordinateSpace) -> CoordinateSpace:
    """Product of ``space`` with an independent copy, x-block first."""
    if space.block is not None:
        raise ValueError("space is already doubled")
    return CoordinateSpace(space.levels + space.levels, block=space.n_coords)


# conditional expectations ----------------------------------------------------

def _tensor(values: np.ndarray, space: CoordinateSpace) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[0] != space.n_atoms:
        raise ValueError(f"table has {values.shape[0]} rows, space has {space.n_atoms} atoms")
    return values.reshape(space.arities + values.shape[1:])


def average_out(values, space: CoordinateSpace, keep) -> np.ndarray:
    """Average ``values`` over every coordinate not in ``keep``.

    Returns a full table (one row per atom) that depends only on the kept
    coordinates.
    """
    t = _tensor(values, space)
    full = t.shape
    keep = set(keep)
    for ax in range(space.n_coords):
        if ax in keep:
            continue
        w = np.asarray(space.levels[ax].probs)
        shape = [1] * t.ndim
        shape[ax] = -1
        t = (t * w.reshape(shape)).sum(axis=ax, keepdims=True)
    return np.broadcast_to(t, full).reshape((space.n_atoms,) + full[space.n_coords:]).copy()


def depends_only_on(values, space: CoordinateSpace, keep, tol: float = 0.0) -> bool:
    """True if ``values`` is constant along every coordinate outside ``keep``."""
    t = _tensor(values, space)
    idx = tuple(slice(None) if ax in set(keep) else slice(0, 1) for ax in range(space.n_coords))
    ref = np.broadcast_to(t[idx], t.shape)
    if tol == 0.0:
        return bool(np.array_equal(t, ref))
    return bool(np.all(np.abs(t - ref) <= tol))


def cond_expect(values, space: CoordinateSpace, n: int) -> np.ndarray:
    """Conditional expectation given level ``n`` of the space's filtration."""
    return average_out(values, space, space.filtration_axes(n))


def expect(values, space: CoordinateSpace):
    """``sum_atoms prob * value`` with correctly rounded summation per component."""
    v = np.asarray(values, dtype=float)
    p = space.probs
    if v.shape[0] != p.shape[0]:
        raise ValueError(f"table has {v.shape[0]} rows, space has {p.shape[0]} atoms")
    if v.ndim == 1:
        return math.fsum(p * v)
    flat = (p.reshape((-1,) + (1,) * (v.ndim - 1)) * v).reshape(v.shape[0], -1)
    out = np.array([math.fsum(flat[:, j]) for j in range(flat.shape[1])])
    return out.reshape(v.shape[1:])


@dataclass
class LeafFn:
    """A random variable on ``space`` with a declared measurability level.

    ``values`` has shape ``(n_atoms,)`` for scalars or ``(n_atoms, dim)`` for
    vectors.  The level refers to the space's own filtration.
    """

    space: CoordinateSpace
    values: np.ndarray
    level: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.space.n_atoms:
            raise ValueError("one value per atom required")
        if self.level is None:
            self.level = self.space.depth
        if not self.is_measurable(self.level):
            raise LevelError(f"values are not level-{self.level} measurable")

    def is_measurable(self, n: int) -> bool:
        return depends_only_on(self.values, self.space, self.space.filtration_axes(n))

    def cond_expect(self, n: int) -> "LeafFn":
        if n >= self.level:
            return LeafFn(self.space, self.values.copy(), self.level)
        return LeafFn(self.space, cond_expect(self.values, self.space, n), n)

    def expect(self):
        return expect(self.values, self.space)

    @classmethod
    def from_function(cls, space: CoordinateSpace, fn, level: int | None = None) -> "LeafFn":
        """Tabulate ``fn(labels)`` where ``labels`` is the tuple of outcome labels."""
        outs = [lv.outcomes for lv in space.levels]
        vals = [fn(tuple(o[i] for o, i in zip(outs, path))) for path in space.paths]
        return cls(space, np.asarray(vals, dtype=float), level)


def coordinate(space: CoordinateSpace, n: int) -> LeafFn:
    """The label of coordinate ``n`` (1-based) as a level-``n`` random variable."""
    level = n if space.block is None else (n - 1) % space.block + 1
    return LeafFn(space, space.labels(n - 1), level)


def cylinder_ids(space: CoordinateSpace, axes) -> np.ndarray:
    """Integer id per atom of the cylinder determined by the coordinates in ``axes``.

    Ids follow lexicographic order of the cylinder's path prefix.
    """
    axes = tuple(axes)
    if not axes:
        return np.zeros(space.n_atoms, dtype=np.int64)
    sub = space.paths[:, axes]
    dims = tuple(space.arities[a] for a in axes)
    return np.ravel_multi_index(sub.T, dims).astype(np.int64)


def iter_paths(space: CoordinateSpace):
    """Lexicographic outcome-index paths, for brute-force checks."""
    return itertools.product(*(range(a) for a in space.arities))
