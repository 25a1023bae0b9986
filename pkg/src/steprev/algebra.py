"""Integer vectors and multisets over actions and places.

Everything here is immutable.  Vectors are stored in canonical, zero-free
form so that structural equality and hashing coincide with mathematical
equality.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import InvalidName, OverlappingSupports

FORWARD = "forward"
REVERSE = "reverse"
INDEXED = "indexed"
KINDS = (FORWARD, REVERSE, INDEXED)

_BASE_RE = re.compile(r"^[^\s~\[\]()^:,@#]+$")


@dataclass(frozen=True, order=True)
class ActionName:
    """An action: a forward action ``a``, its reverse ``~a``, or an indexed
    reverse ``~a[tag]`` whose tag is an opaque string."""

    base: str
    kind: str = FORWARD
    index: str | None = None

    def __post_init__(self):
        if not isinstance(self.base, str) or not _BASE_RE.match(self.base):
            raise InvalidName(f"bad action base {self.base!r}")
        if self.kind not in KINDS:
            raise InvalidName(f"bad action kind {self.kind!r}")
        if (self.kind == INDEXED) != (self.index is not None):
            raise InvalidName("an index is present iff the action is an indexed reverse")
        if self.index is not None and ("[" in self.index or "]" in self.index):
            raise InvalidName(f"bad index tag {self.index!r}")

    @classmethod
    def parse(cls, text: str) -> "ActionName":
        if text.startswith("~~"):
            raise InvalidName(f"double reversal is not allowed: {text!r}")
        if text.startswith("~"):
            body = text[1:]
            if body.endswith("]") and "[" in body:
                base, _, tag = body[:-1].partition("[")
                return cls(base, INDEXED, tag)
            return cls(body, REVERSE)
        return cls(text)

    @property
    def is_forward(self) -> bool:
        return self.kind == FORWARD

    @property
    def is_reverse(self) -> bool:
        """True for both plain and indexed reverses."""
        return self.kind != FORWARD

    def forward(self) -> "ActionName":
        return ActionName(self.base)

    def reverse(self) -> "ActionName":
        if self.kind != FORWARD:
            raise InvalidName(f"cannot reverse the reverse action {self}")
        return ActionName(self.base, REVERSE)

    def indexed(self, tag: str) -> "ActionName":
        if self.kind == INDEXED:
            raise InvalidName(f"{self} is already indexed")
        return ActionName(self.base, INDEXED, str(tag))

    def noidx(self) -> "ActionName":
        if self.kind == INDEXED:
            return ActionName(self.base, REVERSE)
        return self

    def __str__(self):
        if self.kind == FORWARD:
            return self.base
        if self.kind == REVERSE:
            return "~" + self.base
        return f"~{self.base}[{self.index}]"

    def __repr__(self):
        return f"ActionName({str(self)!r})"


def action(name) -> ActionName:
    if isinstance(name, ActionName):
        return name
    return ActionName.parse(name)


def _order(key):
    if isinstance(key, ActionName):
        return (0, key)
    return (1, str(key))


class Vector(Mapping):
    """An integer vector with finite support."""

    __slots__ = ("_d", "_hash")

    def __init__(self, entries=()):
        if isinstance(entries, Mapping):
            items = entries.items()
        else:
            items = entries
        d = {}
        for k, v in items:
            if not isinstance(v, int) or isinstance(v, bool):
                raise TypeError(f"vector entries must be integers, got {v!r}")
            if v:
                d[k] = d.get(k, 0) + v
                if not d[k]:
                    del d[k]
        self._check(d)
        self._d = d
        self._hash = None

    def _check(self, d):
        pass

    @classmethod
    def _raw(cls, d):
        obj = object.__new__(cls)
        obj._d = d
        obj._hash = None
        return obj

    # Mapping protocol; absent keys read as zero.
    def __getitem__(self, key):
        return self._d.get(key, 0)

    def __iter__(self) -> Iterator:
        return iter(self.keys_sorted())

    def __len__(self):
        return len(self._d)

    def __contains__(self, key):
        return key in self._d

    def get(self, key, default=0):
        return self._d.get(key, default)

    def keys_sorted(self):
        return sorted(self._d, key=_order)

    def items_sorted(self):
        return [(k, self._d[k]) for k in self.keys_sorted()]

    @property
    def support(self) -> frozenset:
        return frozenset(self._d)

    def __eq__(self, other):
        if isinstance(other, Vector):
            return self._d == other._d
        if isinstance(other, Mapping):
            return self._d == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __bool__(self):
        return bool(self._d)

    def _wrap(self, d):
        if isinstance(self, Multiset) and all(v > 0 for v in d.values()):
            return Multiset._raw(d)
        return Vector._raw(d)

    def __add__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        d = dict(self._d)
        for k, v in other._d.items():
            s = d.get(k, 0) + v
            if s:
                d[k] = s
            else:
                d.pop(k, None)
        if isinstance(self, Multiset) and isinstance(other, Multiset):
            return Multiset._raw(d)
        return Vector._raw(d)

    def __sub__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        d = dict(self._d)
        for k, v in other._d.items():
            s = d.get(k, 0) - v
            if s:
                d[k] = s
            else:
                d.pop(k, None)
        return self._wrap(d)

    def __neg__(self):
        return Vector._raw({k: -v for k, v in self._d.items()})

    def __mul__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k == 0:
            return self._wrap({})
        d = {key: v * k for key, v in self._d.items()}
        return self._wrap(d) if k > 0 else Vector._raw(d)

    __rmul__ = __mul__

    def __le__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        keys = self._d.keys() | other._d.keys()
        return all(self[k] <= other[k] for k in keys)

    def __ge__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        return other <= self

    def __lt__(self, other):
        return self <= other and self != other

    def __gt__(self, other):
        return other <= self and self != other

    def dot(self, weights: Mapping) -> int:
        return sum(v * weights.get(k, 0) for k, v in self._d.items())

    def restrict(self, keys) -> "Vector":
        keys = set(keys)
        return self._wrap({k: v for k, v in self._d.items() if k in keys})

    def map_keys(self, fn) -> "Vector":
        d = {}
        for k, v in self._d.items():
            nk = fn(k)
            s = d.get(nk, 0) + v
            if s:
                d[nk] = s
            else:
                d.pop(nk, None)
        return self._wrap(d)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self._d.values())

    def literal(self) -> str:
        parts = []
        for k, v in self.items_sorted():
            parts.append(str(k) if v == 1 else f"{k}^{v}")
        return "(" + " ".join(parts) + ")"

    def as_dict(self) -> dict:
        return {str(k): v for k, v in self.items_sorted()}

    def __repr__(self):
        inner = ", ".join(f"{k}: {v}" for k, v in self.items_sorted())
        return f"{type(self).__name__}({{{inner}}})"


class Multiset(Vector):
    """A vector with non-negative entries (a step or a marking)."""

    __slots__ = ()

    def _check(self, d):
        for k, v in d.items():
            if v < 0:
                raise ValueError(f"multiset entry for {k} is negative ({v})")

    @classmethod
    def of(cls, *keys) -> "Multiset":
        d = {}
        for k in keys:
            d[k] = d.get(k, 0) + 1
        return cls._raw(d)

    @property
    def size(self) -> int:
        return sum(self._d.values())

    def is_set(self) -> bool:
        return all(v == 1 for v in self._d.values())

    def is_spike(self) -> bool:
        return len(self._d) <= 1

    def elements(self) -> list:
        out = []
        for k, v in self.items_sorted():
            out.extend([k] * v)
        return out


EMPTY = Multiset()


def step(*names, **counts) -> Multiset:
    """Build a step from action literals: ``step("a", "a", "~b")``."""
    d: dict = {}
    for n in names:
        a = action(n)
        d[a] = d.get(a, 0) + 1
    for n, c in counts.items():
        a = action(n)
        d[a] = d.get(a, 0) + c
    return Multiset(d)


def marking(*places, **counts) -> Multiset:
    """Build a place multiset: ``marking("p1", "p1", p3=2)``."""
    d: dict = {}
    for p in places:
        d[p] = d.get(p, 0) + 1
    for p, c in counts.items():
        d[p] = d.get(p, 0) + c
    return Multiset(d)


def combine(a: Vector, b: Vector, mode: str = "sum") -> Vector:
    """Componentwise sum, difference, or union of vectors with disjoint supports."""
    if mode == "sum":
        return a + b
    if mode == "diff":
        return a - b
    if mode == "disjoint-union":
        shared = a.support & b.support
        if shared:
            raise OverlappingSupports(f"supports overlap on {sorted(map(str, shared))}")
        return a + b
    raise ValueError(f"unknown combine mode {mode!r}")


def disjoint_union(a: Vector, b: Vector, a_keys=None, b_keys=None) -> Vector:
    """Union of two vectors over declared-disjoint index sets."""
    if a_keys is not None and b_keys is not None:
        shared = set(a_keys) & set(b_keys)
        if shared:
            raise OverlappingSupports(f"index sets overlap on {sorted(map(str, shared))}")
    return combine(a, b, "disjoint-union")


def noidx(alpha: Vector) -> Vector:
    """Replace every indexed reverse ``~a[i]`` by the plain reverse ``~a``."""
    return alpha.map_keys(lambda k: k.noidx() if isinstance(k, ActionName) else k)


def reverse_step(alpha: Multiset) -> Multiset:
    """The reverse of a step over forward actions."""
    return alpha.map_keys(lambda k: k.reverse())


def sub_multisets(gamma: Multiset) -> Iterable[Multiset]:
    """All beta <= gamma, enumerated in a fixed order."""
    keys = gamma.keys_sorted()
    ranges = [range(gamma[k] + 1) for k in keys]
    for counts in itertools.product(*ranges):
        yield Multiset._raw({k: c for k, c in zip(keys, counts) if c})


def maximal_elements(steps: Iterable[Multiset]) -> list[Multiset]:
    """The <=-maximal elements of a finite family of multisets."""
    steps = sorted(set(steps), key=lambda s: (-s.size, s.literal()))
    out: list[Multiset] = []
    for s in steps:
        if not any(s <= m for m in out):
            out.append(s)
    return out
