"""Domain types, distance-matrix validation and discrete Voronoi tessellation.

Objects are indexed from 0 internally.  A medoid set is stored sorted, and the
cluster id of an object is the position (in that sorted set) of the medoid it
is assigned to.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SYMMETRY_TOL = 1e-9
# Floor applied to off-diagonal distances before any Gamma log-density.
DISTANCE_FLOOR = 1e-12
BINARY_MAGIC = b"BDCM"


class ValidationError(ValueError):
    """Base class for rejected inputs."""


class NonSquare(ValidationError):
    pass


class AsymmetryBeyondTolerance(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class NonFiniteEntry(ValidationError):
    pass


class InvalidMedoidSet(ValidationError):
    pass


class EmptyMedoidIntersection(ValidationError):
    """A layer-1 cluster contains no layer-2 medoid."""

    def __init__(self, cluster: int):
        super().__init__(f"layer-1 cluster {cluster} has no layer-2 medoid")
        self.cluster = cluster


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    values: np.ndarray
    _log: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def clamped(self) -> np.ndarray:
        """Distances with off-diagonal entries floored at ``DISTANCE_FLOOR``."""
        return self._cached()[0]

    @property
    def log_values(self) -> np.ndarray:
        """Elementwise log of ``clamped``; the diagonal is set to 0."""
        return self._cached()[1]

    def _cached(self):
        if self._log is None:
            c = np.maximum(self.values, DISTANCE_FLOOR)
            np.fill_diagonal(c, 0.0)
            lg = np.log(np.where(c > 0, c, 1.0))
            c.setflags(write=False)
            lg.setflags(write=False)
            object.__setattr__(self, "_log", (c, lg))
        return self._log

    def __getitem__(self, idx):
        return self.values[idx]

    def permute(self, perm: Sequence[int]) -> "DistanceMatrix":
        """Relabel objects: new object ``i`` is old object ``perm[i]``."""
        p = np.asarray(perm)
        return DistanceMatrix(_readonly(self.values[np.ix_(p, p)]))

    def subset(self, idx: Sequence[int]) -> "DistanceMatrix":
        return self.permute(idx)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def validate_distance_matrix(raw) -> DistanceMatrix:
    """Check and lightly clean a square distance matrix.

    Entries within ``SYMMETRY_TOL`` of symmetric are averaged and a diagonal
    within the same tolerance of zero is zeroed.  Anything else raises.
    """
    a = np.array(raw, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteEntry("distance matrix contains NaN or infinite entries")
    asym = np.abs(a - a.T)
    if asym.size and asym.max() > SYMMETRY_TOL:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise AsymmetryBeyondTolerance(
            f"D[{i},{j}]={a[i, j]!r} differs from D[{j},{i}]={a[j, i]!r}"
        )
    a = 0.5 * (a + a.T)
    diag = np.diag(a)
    if np.any(np.abs(diag) >= SYMMETRY_TOL):
        raise ValidationError("diagonal entries must be zero")
    np.fill_diagonal(a, 0.0)
    if np.any(a < 0):
        raise NegativeEntry("distance matrix has negative entries")
    return DistanceMatrix(_readonly(a))


@dataclass(frozen=True)
class MedoidSet:
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if not idx:
            raise InvalidMedoidSet("a medoid set needs at least one index")
        if len(set(idx)) != len(idx):
            raise InvalidMedoidSet(f"duplicate medoids in {idx}")
        if idx[0] < 0:
            raise InvalidMedoidSet("negative medoid index")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices: Iterable[int], n: int | None = None) -> "MedoidSet":
        ms = cls(tuple(indices))
        if n is not None:
            ms.check(n)
        return ms

    @property
    def k(self) -> int:
        return len(self.indices)

    def check(self, n: int) -> None:
        if self.indices[-1] >= n:
            raise InvalidMedoidSet(f"medoid {self.indices[-1]} out of range for N={n}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def mask(self) -> int:
        """Bitmask encoding, handy as a dictionary key."""
        m = 0
        for i in self.indices:
            m |= 1 << i
        return m

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        return i in self.indices


@dataclass(frozen=True, eq=False)
class Partition:
    labels: np.ndarray
    k: int

    @classmethod
    def from_labels(cls, labels, canonical: bool = True) -> "Partition":
        """Build from arbitrary labels.

        With ``canonical`` the ids are renumbered by first occurrence, so two
        equal partitions have identical label vectors.
        """
        lab = np.asarray(labels)
        if canonical:
            _, first, inv = np.unique(lab, return_index=True, return_inverse=True)
            order = np.argsort(np.argsort(first))
            lab = order[inv]
            k = len(first)
        else:
            k = int(lab.max()) + 1 if lab.size else 0
        lab = np.array(lab, dtype=np.intp)
        lab.setflags(write=False)
        return cls(lab, k)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    @property
    def clusters(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        bounds = np.cumsum(self.sizes)[:-1]
        return np.split(order, bounds)

    def canonical(self) -> "Partition":
        return Partition.from_labels(self.labels)

    def key(self) -> tuple[int, ...]:
        return tuple(self.canonical().labels.tolist())

    def same_as(self, other: "Partition") -> bool:
        return self.key() == other.key()

    def permute(self, perm: Sequence[int]) -> "Partition":
        return Partition.from_labels(self.labels[np.asarray(perm)], canonical=False)

    def refines(self, coarse: "Partition") -> bool:
        """True when equal labels here imply equal labels in ``coarse``."""
        seen: dict[int, int] = {}
        for a, b in zip(self.labels.tolist(), coarse.labels.tolist()):
            if seen.setdefault(a, b) != b:
                return False
        return True


@dataclass(frozen=True)
class MultiViewData:
    d1: DistanceMatrix
    d2: DistanceMatrix

    def __post_init__(self):
        if self.d1.n != self.d2.n:
            raise ValidationError(
                f"layers disagree on object count: {self.d1.n} vs {self.d2.n}"
            )

    @property
    def n(self) -> int:
        return self.d1.n


def nearest_medoid_labels(values: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    """Position of the nearest medoid for every object.

    ``np.argmin`` returns the first minimum, and medoids are sorted, so ties
    go to the smallest medoid index.  Medoids are always their own cluster.
    """
    labels = np.argmin(values[medoids], axis=0)
    labels[medoids] = np.arange(len(medoids))
    return labels


def induce_partition(d: DistanceMatrix, gamma: MedoidSet) -> Partition:
    gamma.check(d.n)
    labels = nearest_medoid_labels(d.values, gamma.as_array())
    labels.setflags(write=False)
    return Partition(labels, gamma.k)


def nested_labels(
    values2: np.ndarray, labels1: np.ndarray, medoids2: np.ndarray
) -> np.ndarray:
    """Layer-2 labels restricted to each object's layer-1 cluster.

    Raises EmptyMedoidIntersection when some layer-1 cluster holds none of
    ``medoids2``.
    """
    k1 = int(labels1.max()) + 1
    owner = labels1[medoids2]
    covered = np.zeros(k1, dtype=bool)
    covered[owner] = True
    if not covered.all():
        raise EmptyMedoidIntersection(int(np.argmin(covered)))
    sub = values2[medoids2]
    blocked = owner[:, None] != labels1[None, :]
    labels = np.argmin(np.where(blocked, np.inf, sub), axis=0)
    labels[medoids2] = np.arange(len(medoids2))
    return labels


def induce_nested_partition(
    mv: MultiViewData, gamma1: MedoidSet, gamma2: MedoidSet
) -> tuple[Partition, Partition]:
    t1 = induce_partition(mv.d1, gamma1)
    gamma2.check(mv.n)
    labels2 = nested_labels(mv.d2.values, t1.labels, gamma2.as_array())
    labels2.setflags(write=False)
    return t1, Partition(labels2, gamma2.k)


def repair_nested_medoids(
    mv: MultiViewData, gamma1: MedoidSet, gamma2: MedoidSet
) -> MedoidSet:
    """Add the layer-1 medoid of every cluster that has no layer-2 medoid."""
    t1 = induce_partition(mv.d1, gamma1)
    return MedoidSet(repair_indices(t1.labels, gamma1.indices, gamma2.indices))


def repair_indices(labels1: np.ndarray, gamma1, gamma2) -> tuple[int, ...]:
    covered = {int(labels1[m]) for m in gamma2}
    extra = [m for c, m in enumerate(gamma1) if c not in covered]
    if not extra:
        return tuple(gamma2)
    return tuple(sorted(set(gamma2).union(extra)))


# --- file formats -----------------------------------------------------------


def read_distance_csv(path) -> DistanceMatrix:
    """Square comma-separated matrix; a non-numeric first row is a header."""
    text = Path(path).read_text().strip().splitlines()
    rows = [line.split(",") for line in text if line.strip()]
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        rows = rows[1:]
    return validate_distance_matrix([[float(x) for x in r] for r in rows])


def write_distance_csv(path, d: DistanceMatrix) -> None:
    np.savetxt(path, d.values, delimiter=",", fmt="%.17g")


def read_distance_binary(path) -> DistanceMatrix:
    raw = Path(path).read_bytes()
    if raw[:4] != BINARY_MAGIC:
        raise ValidationError(f"{path}: not a BDCM file")
    (n,) = struct.unpack("<Q", raw[4:12])
    body = np.frombuffer(raw, dtype="<f8", offset=12)
    if body.size != n * n:
        raise ValidationError(f"{path}: expected {n * n} values, found {body.size}")
    return validate_distance_matrix(body.reshape(n, n))


def write_distance_binary(path, d: DistanceMatrix) -> None:
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<Q", d.n))
        fh.write(np.ascontiguousarray(d.values, dtype="<f8").tobytes())


def read_distance(path) -> DistanceMatrix:
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == BINARY_MAGIC:
        return read_distance_binary(path)
    return read_distance_csv(path)


def read_labels(path) -> np.ndarray:
    """1-based labels, one per line, optional header; returned 0-based."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            out.append(int(float(line.split(",")[0])))
        except ValueError:
            if out:
                raise
    return np.asarray(out, dtype=np.intp) - 1


def write_labels(path, labels) -> None:
    lab = np.asarray(labels, dtype=np.intp) + 1
    Path(path).write_text("label\n" + "".join(f"{v}\n" for v in lab.tolist()))
