"""Zero-one row-selection operators on the unitary DFT.

An operator is a pair of disjoint index sets: the `selected` rows carry
measurements, the `suppressed` rows are constrained to zero. Nothing here
builds a dense 0-1 matrix; products with the transform go through the FFT
followed by a gather (or a scatter followed by the inverse FFT).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .spectral import ComplexSignal, as_signal, dft

__all__ = [
    "IndexSet",
    "ProjectionOperator",
    "complement",
    "extend",
    "suppress_outside",
    "extend_vector",
    "measure",
    "apply_rows",
    "apply_adjoint",
]


@dataclass(frozen=True)
class IndexSet:
    """Sorted set of distinct indices in ``[0, N)``."""

    indices: np.ndarray
    N: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if self.N < 1:
            raise ValueError("ambient size N must be positive")
        if idx.size and (idx.min() < 0 or idx.max() >= self.N):
            raise ValueError(f"indices must lie in [0, {self.N})")
        uniq = np.unique(idx)
        if uniq.size != idx.size:
            raise ValueError("duplicate indices")
        uniq.setflags(write=False)
        object.__setattr__(self, "indices", uniq)

    @classmethod
    def of(cls, indices: Iterable[int], N: int) -> "IndexSet":
        return cls(np.fromiter(indices, dtype=np.int64), N)

    def __len__(self) -> int:
        return self.indices.size

    def __iter__(self):
        return iter(int(i) for i in self.indices)

    def __contains__(self, k) -> bool:
        return bool(np.isin(k, self.indices))

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.N == other.N and np.array_equal(self.indices, other.indices)

    def __hash__(self):
        return hash((self.N, self.indices.tobytes()))

    def __repr__(self):
        return f"IndexSet({self.indices.tolist()}, N={self.N})"

    def union(self, other: "IndexSet") -> "IndexSet":
        _check_same_N(self, other)
        return IndexSet(np.union1d(self.indices, other.indices), self.N)

    def difference(self, other: "IndexSet") -> "IndexSet":
        _check_same_N(self, other)
        return IndexSet(np.setdiff1d(self.indices, other.indices), self.N)

    def issubset(self, other: "IndexSet") -> bool:
        return bool(np.isin(self.indices, other.indices).all())

    def mask(self) -> np.ndarray:
        m = np.zeros(self.N, dtype=bool)
        m[self.indices] = True
        return m


def _check_same_N(a: IndexSet, b: IndexSet):
    if a.N != b.N:
        raise ValueError(f"ambient sizes differ: {a.N} != {b.N}")


def complement(sel: IndexSet) -> IndexSet:
    """All indices of ``[0, N)`` not in `sel`, ascending."""
    return IndexSet(np.flatnonzero(~sel.mask()), sel.N)


@dataclass(frozen=True)
class ProjectionOperator:
    """Selected measurement rows plus rows forced to zero.

    Rows are stacked as ``selected`` (ascending) then ``suppressed``
    (ascending). When the two sets cover every index the operator is square
    and is a row permutation of the identity.
    """

    selected: IndexSet
    suppressed: IndexSet | None = None

    def __post_init__(self):
        sup = self.suppressed
        if sup is None:
            sup = IndexSet(np.empty(0, dtype=np.int64), self.selected.N)
            object.__setattr__(self, "suppressed", sup)
        _check_same_N(self.selected, sup)
        if np.intersect1d(self.selected.indices, sup.indices).size:
            raise ValueError("selected and suppressed rows overlap")

    @classmethod
    def from_indices(cls, selected: Iterable[int], N: int,
                     suppressed: Iterable[int] = ()) -> "ProjectionOperator":
        return cls(IndexSet.of(selected, N), IndexSet.of(suppressed, N))

    @property
    def N(self) -> int:
        return self.selected.N

    @property
    def n_rows(self) -> int:
        return len(self.selected) + len(self.suppressed)

    @property
    def is_extended(self) -> bool:
        return self.n_rows == self.N

    @property
    def rows(self) -> np.ndarray:
        """Row indices in stacking order."""
        return np.concatenate([self.selected.indices, self.suppressed.indices])


def extend(op: ProjectionOperator) -> ProjectionOperator:
    """Square extension: every non-selected row becomes a zero constraint."""
    if len(op.suppressed):
        raise ValueError("operator already carries suppressed rows")
    return ProjectionOperator(op.selected, complement(op.selected))


def suppress_outside(selected: IndexSet, support: IndexSet) -> ProjectionOperator:
    """Measure `selected` and force every bin outside `support` to zero.

    This is the out-band suppression used for band-limited signals; the
    unsampled in-band bins stay free.
    """
    if not selected.issubset(support):
        raise ValueError("selected rows must lie inside the support")
    return ProjectionOperator(selected, complement(support))


def extend_vector(v, N: int) -> ComplexSignal:
    """Append zeros to `v` up to length `N`."""
    if isinstance(v, ComplexSignal):
        domain, values = v.domain, v.values
    else:
        domain, values = "frequency", np.asarray(v, dtype=complex).reshape(-1)
    if values.size > N:
        raise ValueError(f"vector of length {values.size} longer than N={N}")
    out = np.zeros(N, dtype=complex)
    out[:values.size] = values
    return ComplexSignal(out, domain)


def measure(op: ProjectionOperator, s) -> ComplexSignal:
    """Spectrum of `s` at the selected rows, followed by the zero block."""
    s = as_signal(s, "time")
    if s.N != op.N:
        raise ValueError(f"signal length {s.N} != operator size {op.N}")
    S = dft(s).values
    out = np.zeros(op.n_rows, dtype=complex)
    out[:len(op.selected)] = S[op.selected.indices]
    return ComplexSignal(out, "frequency")


def apply_rows(op: ProjectionOperator, s) -> np.ndarray:
    """The linear row map itself: spectrum of `s` at every operator row.

    Differs from :func:`measure` only on the suppressed block, where this
    returns the actual coefficients instead of the imposed zeros. It is the
    exact adjoint partner of :func:`apply_adjoint`.
    """
    v = np.asarray(s.values if isinstance(s, ComplexSignal) else s, dtype=complex)
    if v.size != op.N:
        raise ValueError(f"signal length {v.size} != operator size {op.N}")
    return np.fft.fft(v, norm="ortho")[op.rows]


def apply_adjoint(op: ProjectionOperator, y) -> ComplexSignal:
    """Adjoint of the full row map: scatter `y` onto its rows, inverse transform.

    `y` has one entry per operator row (selected rows first). Because the
    rows are orthonormal, ``measure(op, apply_adjoint(op, y))`` returns `y`
    on the selected rows.
    """
    y = np.asarray(y.values if isinstance(y, ComplexSignal) else y, dtype=complex).reshape(-1)
    if y.size != op.n_rows:
        raise ValueError(f"expected {op.n_rows} entries, got {y.size}")
    full = np.zeros(op.N, dtype=complex)
    full[op.rows] = y
    return ComplexSignal(np.fft.ifft(full, norm="ortho"), "time")
