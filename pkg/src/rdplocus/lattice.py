"""Integer lattices: Hermite and Smith normal forms, subgroups of ``Z^k``,
kernels of maps to cyclic groups and the Picard-group formula.

Subgroups are compared through their row-style Hermite normal form:
nonzero rows only, pivots positive and strictly moving right, entries above
a pivot reduced into ``[0, pivot)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd, prod
from typing import Iterable, Sequence

Matrix = list[list[int]]


class LatticeError(ValueError):
    pass


class NotASubgroup(LatticeError):
    pass


def _copy(m: Iterable[Sequence[int]]) -> Matrix:
    return [[int(v) for v in row] for row in m]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s*a + t*b = g = gcd(a, b) >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def hnf_with_transform(m: Sequence[Sequence[int]], ncols: int | None = None) -> tuple[Matrix, Matrix, int]:
    """Row-reduce ``m`` to Hermite normal form.

    Returns ``(h, u, rank)`` with ``u`` unimodular, ``u * m = h``; the first
    ``rank`` rows of ``h`` are the HNF and the remaining rows are zero, so the
    last rows of ``u`` span the left kernel of ``m``.
    """
    a = _copy(m)
    rows = len(a)
    cols = ncols if ncols is not None else (len(a[0]) if a else 0)
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    r = 0
    for c in range(cols):
        if r == rows:
            break
        # gcd-combine every lower row into row r in column c
        for i in range(r + 1, rows):
            if a[i][c] == 0:
                continue
            if a[r][c] == 0:
                a[r], a[i] = a[i], a[r]
                u[r], u[i] = u[i], u[r]
                continue
            x, y = a[r][c], a[i][c]
            g, s, t = _xgcd(x, y)
            p, q = x // g, y // g
            ar, ai = a[r], a[i]
            a[r] = [s * v + t * w for v, w in zip(ar, ai)]
            a[i] = [-q * v + p * w for v, w in zip(ar, ai)]
            ur, ui = u[r], u[i]
            u[r] = [s * v + t * w for v, w in zip(ur, ui)]
            u[i] = [-q * v + p * w for v, w in zip(ur, ui)]
        piv = a[r][c]
        if piv == 0:
            continue
        if piv < 0:
            a[r] = [-v for v in a[r]]
            u[r] = [-v for v in u[r]]
            piv = -piv
        for i in range(r):
            f = a[i][c] // piv
            if f:
                a[i] = [v - f * w for v, w in zip(a[i], a[r])]
                u[i] = [v - f * w for v, w in zip(u[i], u[r])]
        r += 1
    return a, u, r


def hnf(m: Sequence[Sequence[int]], ncols: int | None = None) -> Matrix:
    """Canonical row-style Hermite normal form (zero rows dropped)."""
    h, _u, r = hnf_with_transform(m, ncols)
    return h[:r]


def left_kernel(m: Sequence[Sequence[int]], ncols: int | None = None) -> Matrix:
    """A basis of ``{v : v * m = 0}`` over the integers."""
    _h, u, r = hnf_with_transform(m, ncols)
    return u[r:]


def snf(m: Sequence[Sequence[int]]) -> list[int]:
    """Smith invariant factors ``d_1 | d_2 | ...`` of ``m`` (one per min(rows, cols))."""
    a = _copy(m)
    rows = len(a)
    cols = len(a[0]) if a else 0
    diag = []
    for t in range(min(rows, cols)):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not nz:
            diag.extend([0] * (min(rows, cols) - t))
            break
        _, i, j = min(nz)
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    a[i] = [v - q * w for v, w in zip(a[i], a[t])]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    for row in a:
                        row[j] -= q * row[t]
                    if a[t][j]:
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                        done = False
            if not done:
                continue
            # the pivot must divide the remaining block
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % a[t][t]), None)
            if bad is None:
                break
            a[t] = [v + w for v, w in zip(a[t], a[bad[0]])]
        diag.append(abs(a[t][t]))
    return diag


# ----------------------------------------------------------------------
# subgroups
# ----------------------------------------------------------------------

class Subgroup:
    """A subgroup of ``Z^k`` given by generators; equality is HNF equality."""

    __slots__ = ("k", "gens", "_hnf")

    def __init__(self, k: int, gens: Iterable[Sequence[int]] = ()):
        self.k = k
        self.gens = _copy(gens)
        if any(len(g) != k for g in self.gens):
            raise LatticeError(f"generators must have length {k}")
        self._hnf: Matrix | None = None

    @classmethod
    def full(cls, k: int) -> "Subgroup":
        return cls(k, [[int(i == j) for j in range(k)] for i in range(k)])

    @property
    def hnf(self) -> Matrix:
        if self._hnf is None:
            self._hnf = hnf(self.gens, self.k) if self.gens else []
        return self._hnf

    @property
    def rank(self) -> int:
        return len(self.hnf)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and self.k == other.k and self.hnf == other.hnf

    def __hash__(self) -> int:
        return hash((self.k, tuple(map(tuple, self.hnf))))

    def __repr__(self) -> str:
        return f"Subgroup(k={self.k}, hnf={self.hnf})"

    def contains(self, v: Sequence[int]) -> bool:
        if len(v) != self.k:
            raise LatticeError("vector length differs from the ambient rank")
        v = [int(x) for x in v]
        for row in self.hnf:
            c = next(i for i, x in enumerate(row) if x)
            if v[c] % row[c]:
                return False
            f = v[c] // row[c]
            v = [a - f * b for a, b in zip(v, row)]
        return not any(v)

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return all(self.contains(g) for g in other.hnf)

    def format(self, labels: Sequence[str]) -> str:
        return "<" + ", ".join(format_vector(row, labels) for row in self.hnf) + ">"


def format_vector(v: Sequence[int], labels: Sequence[str]) -> str:
    parts = []
    for c, lab in zip(v, labels):
        if not c:
            continue
        mag = "" if abs(c) == 1 else str(abs(c))
        if not parts:
            parts.append(("-" if c < 0 else "") + mag + lab)
        else:
            parts.append(("-" if c < 0 else "+") + mag + lab)
    return "".join(parts) or "0"


def subgroup_index(a: Subgroup, b: Subgroup) -> int | float:
    """``[B : A]`` for ``A`` inside ``B``; ``inf`` when the ranks differ."""
    if a.k != b.k:
        raise LatticeError("ambient ranks differ")
    if not b.contains_subgroup(a):
        raise NotASubgroup("first argument is not contained in the second")
    if a.rank != b.rank:
        return float("inf")
    return _covolume(a) // _covolume(b)


def _covolume(s: Subgroup) -> int:
    # product of pivots is the covolume inside the saturation only for full rank;
    # for lower rank use the gcd of maximal minors via SNF of the HNF rows
    h = s.hnf
    if not h:
        return 1
    return prod(snf(h))


def intersect_subgroups(a: Subgroup, b: Subgroup) -> Subgroup:
    """``A`` meet ``B`` via the left kernel of the stacked generator matrix."""
    if a.k != b.k:
        raise LatticeError("ambient ranks differ")
    ha, hb = a.hnf, b.hnf
    if not ha or not hb:
        return Subgroup(a.k)
    ker = left_kernel(ha + hb, a.k)
    gens = []
    for row in ker:
        s = row[: len(ha)]
        gens.append([sum(si * r[c] for si, r in zip(s, ha)) for c in range(a.k)])
    return Subgroup(a.k, gens)


def intersect_all(groups: Iterable[Subgroup]) -> Subgroup:
    it = iter(groups)
    out = next(it)
    for g in it:
        out = intersect_subgroups(out, g)
    return out


# ----------------------------------------------------------------------
# cyclic maps and the Picard formula
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CyclicMapSpec:
    """The map ``Z^k -> Z/modulus`` sending ``e_i`` to ``images[i]``."""

    modulus: int
    images: tuple[int, ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise LatticeError("modulus must be positive")
        object.__setattr__(self, "images", tuple(int(a) % self.modulus for a in self.images))

    @property
    def k(self) -> int:
        return len(self.images)

    def __call__(self, v: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.images, v)) % self.modulus


def kernel_of_cyclic_map(spec: CyclicMapSpec) -> Subgroup:
    k = spec.k
    col = [[a] for a in spec.images] + [[spec.modulus]]
    ker = left_kernel(col, 1)
    out = Subgroup(k, [row[:k] for row in ker])
    assert all(spec(g) == 0 for g in out.hnf)
    return out


@dataclass
class PicardProblem:
    """Curves ``C_1..C_r`` with multiplicities, plus one map per fixed point.

    The ambient lattice is ``Z^(r+1)`` with basis ``C_1, ..., C_r, H``.
    ``free_images`` lists fixed points whose local class group sees the
    named curves without relations (no cyclic model); their kernel is
    spanned by ``H`` and the curves not named.
    """

    labels: list[str]
    multiplicities: list[int]
    maps: list[CyclicMapSpec] = field(default_factory=list)
    free_images: list[list[str]] = field(default_factory=list)

    def __post_init__(self):
        if len(self.labels) != len(self.multiplicities):
            raise LatticeError("one multiplicity per curve")
        if any(m < 1 for m in self.multiplicities):
            raise LatticeError("multiplicities must be >= 1")
        for s in self.maps:
            if s.k != self.k:
                raise LatticeError(f"map has {s.k} images, expected {self.k}")
            if s.images[-1] != 0:
                raise LatticeError("local maps must send H to 0")
        for names in self.free_images:
            unknown = set(names) - set(self.labels)
            if unknown:
                raise LatticeError(f"unknown curve labels {sorted(unknown)}")

    @property
    def k(self) -> int:
        return len(self.labels) + 1

    @property
    def basis_labels(self) -> list[str]:
        return list(self.labels) + ["H"]

    def kernels(self) -> list[Subgroup]:
        out = [kernel_of_cyclic_map(s) for s in self.maps]
        for names in self.free_images:
            gens = [[int(i == j) for j in range(self.k)] for i, lab in enumerate(self.basis_labels)
                    if lab not in names]
            out.append(Subgroup(self.k, gens))
        return out

    @classmethod
    def from_json(cls, data: dict | str) -> "PicardProblem":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            labels = [c["label"] for c in data["curves"]]
            mults = [int(c.get("multiplicity", 1)) for c in data["curves"]]
            maps, free = [], []
            for fp in data.get("fixed_points", []):
                if fp.get("free_images") is not None:
                    free.append(list(fp["free_images"]))
                    continue
                images = fp["images"]
                unknown = set(images) - set(labels)
                if unknown:
                    raise LatticeError(f"unknown curve labels {sorted(unknown)}")
                maps.append(CyclicMapSpec(int(fp["modulus"]),
                                          tuple(int(images.get(lab, 0)) for lab in labels) + (0,)))
        except (KeyError, TypeError) as exc:
            raise LatticeError(f"malformed Picard problem: {exc}") from exc
        return cls(labels, mults, maps, free)

    def to_json(self) -> dict:
        fps = [{"modulus": s.modulus,
                "images": {lab: a for lab, a in zip(self.labels, s.images) if a}} for s in self.maps]
        fps += [{"free_images": names} for names in self.free_images]
        return {"curves": [{"label": lab, "multiplicity": m}
                           for lab, m in zip(self.labels, self.multiplicities)],
                "fixed_points": fps}


def picard_group(p: PicardProblem) -> Subgroup:
    """Intersection of the local kernels with ``<m_1 C_1, ..., m_r C_r, H>``."""
    k = p.k
    mult = Subgroup(k, [[m * int(i == j) for j in range(k)] for i, m in enumerate(p.multiplicities + [1])])
    return intersect_all([mult] + p.kernels())


def picard_report(p: PicardProblem) -> dict:
    g = picard_group(p)
    index = subgroup_index(g, Subgroup.full(p.k))
    return {
        "basis": p.basis_labels,
        "hnf": g.hnf,
        "generators": g.format(p.basis_labels),
        "index_in_class_group": index if index != float("inf") else None,  # None: infinite index
    }


def pinwheel_kernel(r: int) -> Subgroup:
    """Kernel of ``L_0 -> 1, L_i -> -1, H -> 0`` into ``Z/r`` on ``L_0..L_r, H``."""
    if r < 2:
        raise LatticeError("pinwheel needs r >= 2")
    return kernel_of_cyclic_map(CyclicMapSpec(r, (1,) + (-1,) * r + (0,)))


def pinwheel_generators(r: int) -> Subgroup:
    """The listed generators ``r L_0, L_0 + L_i (i = 1..r), H``."""
    k = r + 2
    e = [[int(i == j) for j in range(k)] for i in range(k)]
    gens = [[r * v for v in e[0]]]
    gens += [[a + b for a, b in zip(e[0], e[i])] for i in range(1, r + 1)]
    gens.append(e[k - 1])
    return Subgroup(k, gens)
