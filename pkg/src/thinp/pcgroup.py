"""Finite p-groups given by refined power-commutator presentations.

A presentation on generators a1..an (every relative order equal to p) is

    a_i^p     = w_i      (word in a_{i+1}..a_n)
    [a_j, a_i] = c_ji    (j > i, word in a_{j+1}..a_n)

with ``[a, b] = a^-1 b^-1 a b``.  Group elements are exponent tuples
``(e_1, ..., e_n)`` with ``0 <= e_k < p``, standing for a1^e1 ... an^en.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

Word = tuple[tuple[int, int], ...]
GroupElement = tuple[int, ...]

COLLECT_STEP_BUDGET = 10**6
ENUMERATION_BOUND = 5**7
TABLE_BOUND = 3**6


class PresentationError(ValueError):
    """Structurally invalid presentation (bad indices, exponents, prime)."""


class ParseError(PresentationError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class InconsistentPresentation(ValueError):
    def __init__(self, report: "ConsistencyReport"):
        super().__init__(
            f"presentation {report.name!r} fails {len(report.failures)} overlap check(s)"
        )
        self.report = report


class CollectionError(RuntimeError):
    """Collection exceeded its rewrite budget; indicates a bug or a bad presentation."""


class BoundExceeded(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


@dataclass(frozen=True, eq=False)
class PcPresentation:
    name: str
    prime: int
    ngens: int
    power_relations: Mapping[int, Word] = field(default_factory=dict)
    commutator_relations: Mapping[tuple[int, int], Word] = field(default_factory=dict)

    def validate(self) -> None:
        p, n = self.prime, self.ngens
        if not is_prime(p):
            raise PresentationError(f"{p} is not prime")
        if n < 1:
            raise PresentationError("ngens must be positive")
        for i, w in self.power_relations.items():
            if not 1 <= i <= n:
                raise PresentationError(f"pow {i}: index out of range")
            _check_tail(w, i, p, n, f"pow {i}")
        for (j, i), w in self.commutator_relations.items():
            if not 1 <= i < j <= n:
                raise PresentationError(f"comm {j} {i}: need 1 <= i < j <= n")
            _check_tail(w, j, p, n, f"comm {j} {i}")

    def relators(self) -> list[tuple[str, tuple[int, ...], Word]]:
        """Every defining relation as (kind, key, tail), trivial ones included."""
        out = []
        for i in range(1, self.ngens + 1):
            out.append(("pow", (i,), self.power_relations.get(i, ())))
        for j in range(2, self.ngens + 1):
            for i in range(1, j):
                out.append(("comm", (j, i), self.commutator_relations.get((j, i), ())))
        return out


def _check_tail(w: Word, key: int, p: int, n: int, where: str) -> None:
    last = key
    for k, e in w:
        if k <= last or k > n:
            raise PresentationError(f"{where}: tail index {k} violates ordering")
        if not 1 <= e <= p - 1:
            raise PresentationError(f"{where}: exponent {e} out of range [1, {p - 1}]")
        last = k


# ---------------------------------------------------------------- parsing

_FACTOR = re.compile(r"a(\d+)(?:\^(\d+))?$")


def _parse_word(text: str, lineno: int) -> Word:
    text = text.strip()
    if text == "1":
        return ()
    factors = []
    for tok in text.split():
        m = _FACTOR.match(tok)
        if not m:
            raise ParseError(lineno, f"bad factor {tok!r}")
        factors.append((int(m.group(1)), int(m.group(2) or 1)))
    if not factors:
        raise ParseError(lineno, "empty word (use 1 for the identity)")
    return tuple(factors)


def parse_presentation(text: str) -> PcPresentation:
    name = prime = ngens = None
    powers: dict[int, Word] = {}
    comms: dict[tuple[int, int], Word] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "group":
                if not re.fullmatch(r"[A-Za-z_][\w.-]*", rest):
                    raise ParseError(lineno, f"bad group name {rest!r}")
                name = rest
            elif head == "prime":
                prime = int(rest)
                if not is_prime(prime):
                    raise ParseError(lineno, f"{prime} is not prime")
            elif head == "ngens":
                ngens = int(rest)
                if ngens < 1:
                    raise ParseError(lineno, "ngens must be positive")
            elif head in ("pow", "comm"):
                if prime is None or ngens is None:
                    raise ParseError(lineno, "relation before prime/ngens")
                lhs, eq, rhs = rest.partition("=")
                if not eq:
                    raise ParseError(lineno, "missing '='")
                idx = [int(t) for t in lhs.split()]
                word = _parse_word(rhs, lineno)
                if head == "pow":
                    if len(idx) != 1:
                        raise ParseError(lineno, "pow takes one index")
                    key = idx[0]
                    if key in powers:
                        raise ParseError(lineno, f"duplicate pow {key}")
                    powers[key] = word
                    _check_line(lambda: _check_tail(word, key, prime, ngens, "pow"), lineno,
                                lambda: 1 <= key <= ngens)
                else:
                    if len(idx) != 2:
                        raise ParseError(lineno, "comm takes two indices")
                    j, i = idx
                    if not i < j:
                        raise ParseError(lineno, f"index-ordering violation: comm {j} {i} needs j > i")
                    if (j, i) in comms:
                        raise ParseError(lineno, f"duplicate comm {j} {i}")
                    comms[(j, i)] = word
                    _check_line(lambda: _check_tail(word, j, prime, ngens, "comm"), lineno,
                                lambda: 1 <= i and j <= ngens)
            else:
                raise ParseError(lineno, f"unknown directive {head!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(lineno, str(exc)) from exc
    if name is None or prime is None or ngens is None:
        raise ParseError(0, "missing group/prime/ngens header")
    pres = PcPresentation(name, prime, ngens, powers, comms)
    pres.validate()
    return pres


def _check_line(check, lineno, in_range) -> None:
    if not in_range():
        raise ParseError(lineno, "generator index out of range")
    try:
        check()
    except PresentationError as exc:
        raise ParseError(lineno, str(exc)) from exc


def format_word(w: Word) -> str:
    if not w:
        return "1"
    return " ".join(f"a{k}" if e == 1 else f"a{k}^{e}" for k, e in w)


def format_presentation(P: PcPresentation) -> str:
    lines = [f"group {P.name}", f"prime {P.prime}", f"ngens {P.ngens}"]
    for i in sorted(P.power_relations):
        lines.append(f"pow {i} = {format_word(P.power_relations[i])}")
    for j, i in sorted(P.commutator_relations):
        lines.append(f"comm {j} {i} = {format_word(P.commutator_relations[(j, i)])}")
    return "\n".join(lines) + "\n"


def load_presentation(path) -> PcPresentation:
    with open(path, encoding="utf-8") as fh:
        return parse_presentation(fh.read())


# ------------------------------------------------------------- collection

class Collector:
    """Collection from the left for a refined pc presentation.

    Works on 0-based generator indices; words are sequences of
    ``(k, e)`` with ``e >= 1``.
    """

    def __init__(self, P: PcPresentation, budget: int = COLLECT_STEP_BUDGET):
        P.validate()
        self.p = P.prime
        self.n = P.ngens
        self.budget = budget
        n = self.n
        self.power = [
            [(k - 1, e) for k, e in P.power_relations.get(i + 1, ())] for i in range(n)
        ]
        self.comm = [[[] for _ in range(n)] for _ in range(n)]
        for (j, i), w in P.commutator_relations.items():
            self.comm[j - 1][i - 1] = [(k - 1, e) for k, e in w]
        self.inverse_gen: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for k in reversed(range(n)):
            # a_k^-1 = a_k^(p-1) * (a_k^p)^-1
            inv_tail = []
            for j, e in reversed(self.power[k]):
                inv_tail.extend(self.inverse_gen[j] * e)
            vec = [0] * n
            self.collect_into(vec, [(k, self.p - 1)] + inv_tail)
            self.inverse_gen[k] = _vec_word(vec)

    def collect_into(self, vec: list[int], word: Sequence[tuple[int, int]]) -> None:
        p, n = self.p, self.n
        power, comm = self.power, self.comm
        stack = []
        for k, e in reversed(word):
            if e > 0:
                stack.append((k, e))
            elif e < 0:
                for _ in range(-e):
                    stack.extend(reversed(self.inverse_gen[k]))
        steps = 0
        while stack:
            steps += 1
            if steps > self.budget:
                raise CollectionError(f"collection exceeded {self.budget} steps")
            k, e = stack.pop()
            tail = [(j, vec[j]) for j in range(k + 1, n) if vec[j]]
            if not tail:
                q, vec[k] = divmod(vec[k] + e, p)
                for _ in range(q):
                    stack.extend(reversed(power[k]))
                continue
            for j, _ in tail:
                vec[j] = 0
            # vec * a_k * (tail)^(a_k) * a_k^(e-1);  a_j^(a_k) = a_j [a_j, a_k]
            if e > 1:
                stack.append((k, e - 1))
            for j, ej in reversed(tail):
                c = comm[j][k]
                for _ in range(ej):
                    stack.extend(reversed(c))
                    stack.append((j, 1))
            stack.append((k, 1))

    def collect(self, word: Sequence[tuple[int, int]]) -> GroupElement:
        vec = [0] * self.n
        self.collect_into(vec, word)
        return tuple(vec)


def _vec_word(vec: Sequence[int]) -> list[tuple[int, int]]:
    return [(k, e) for k, e in enumerate(vec) if e]


# ------------------------------------------------------------- consistency

@dataclass
class ConsistencyReport:
    name: str
    checked: int
    failures: list[tuple[str, tuple[int, ...], GroupElement, GroupElement]]

    @property
    def consistent(self) -> bool:
        return not self.failures


def check_consistency(P: PcPresentation) -> ConsistencyReport:
    """Evaluate the overlap conditions of a refined pc presentation.

    Both sides of each overlap are collected with different bracketings;
    generator indices in the report are 1-based.
    """
    C = Collector(P)
    p, n = C.p, C.n

    def mul(vec, word):
        v = list(vec)
        C.collect_into(v, word)
        return tuple(v)

    def w(vec):
        return _vec_word(vec)

    failures = []
    checked = 0
    ident = (0,) * n
    # (a_k a_j) a_i = a_k (a_j a_i),  k > j > i
    for k in range(n):
        for j in range(k):
            for i in range(j):
                lhs = mul(mul(ident, [(k, 1), (j, 1)]), [(i, 1)])
                rhs = mul(ident, [(k, 1)] + w(mul(ident, [(j, 1), (i, 1)])))
                checked += 1
                if lhs != rhs:
                    failures.append(("kji", (k + 1, j + 1, i + 1), lhs, rhs))
    for j in range(n):
        for i in range(j):
            # (a_j^p) a_i = a_j^(p-1) (a_j a_i)
            lhs = mul(ident, C.power[j] + [(i, 1)])
            rhs = mul(ident, [(j, p - 1)] + w(mul(ident, [(j, 1), (i, 1)])))
            checked += 1
            if lhs != rhs:
                failures.append(("jpi", (j + 1, i + 1), lhs, rhs))
            # a_j (a_i^p) = (a_j a_i) a_i^(p-1)
            lhs = mul(ident, [(j, 1)] + C.power[i])
            rhs = mul(mul(ident, [(j, 1), (i, 1)]), [(i, p - 1)])
            checked += 1
            if lhs != rhs:
                failures.append(("jip", (j + 1, i + 1), lhs, rhs))
    for i in range(n):
        # (a_i^p) a_i = a_i (a_i^p)
        lhs = mul(ident, C.power[i] + [(i, 1)])
        rhs = mul(ident, [(i, 1)] + C.power[i])
        checked += 1
        if lhs != rhs:
            failures.append(("ipi", (i + 1,), lhs, rhs))
    return ConsistencyReport(P.name, checked, failures)


# ------------------------------------------------------------------ groups

class Group:
    """A consistent pc-presented p-group with exact normal-form arithmetic.

    Elements are exponent tuples; ``index`` maps them to 0..|G|-1 in
    lexicographic order.  For |G| <= ``table_bound`` a full Cayley table
    is built eagerly.
    """

    def __init__(
        self,
        presentation: PcPresentation,
        *,
        table_bound: int = TABLE_BOUND,
        enumeration_bound: int = ENUMERATION_BOUND,
    ):
        report = check_consistency(presentation)
        if not report.consistent:
            raise InconsistentPresentation(report)
        self.presentation = presentation
        self.name = presentation.name
        self.p = presentation.prime
        self.n = presentation.ngens
        self.order = self.p**self.n
        self.enumeration_bound = enumeration_bound
        self.collector = Collector(presentation)
        self.identity: GroupElement = (0,) * self.n
        self._weights = [self.p ** (self.n - 1 - k) for k in range(self.n)]
        self._elements: list[GroupElement] | None = None
        self.table: np.ndarray | None = None
        self.inverse_table: np.ndarray | None = None
        self._rows: list[list[int]] | None = None
        self._inv: list[int] | None = None
        if self.order <= enumeration_bound:
            self._elements = list(itertools.product(range(self.p), repeat=self.n))
        if self.order <= min(table_bound, enumeration_bound):
            self._build_table()

    def __repr__(self) -> str:
        return f"Group({self.name!r}, order={self.p}^{self.n})"

    @classmethod
    def from_text(cls, text: str, **kw) -> "Group":
        return cls(parse_presentation(text), **kw)

    @classmethod
    def from_file(cls, path, **kw) -> "Group":
        return cls(load_presentation(path), **kw)

    # -- enumeration and indexing

    @property
    def elements(self) -> list[GroupElement]:
        if self._elements is None:
            raise BoundExceeded(
                f"|G| = {self.order} exceeds enumeration bound {self.enumeration_bound}"
            )
        return self._elements

    def index(self, g: GroupElement) -> int:
        return sum(e * w for e, w in zip(g, self._weights))

    def element(self, i: int) -> GroupElement:
        if self._elements is not None:
            return self._elements[i]
        out = []
        for w in self._weights:
            q, i = divmod(i, w)
            out.append(q)
        return tuple(out)

    def generators(self) -> list[GroupElement]:
        return [tuple(int(k == j) for k in range(self.n)) for j in range(self.n)]

    def check_element(self, g) -> GroupElement:
        g = tuple(g)
        if len(g) != self.n or not all(isinstance(e, int) and 0 <= e < self.p for e in g):
            raise ValueError(f"{g!r} is not a normal form of {self.name}")
        return g

    def _build_table(self) -> None:
        N, n = self.order, self.n
        # right multiplication by each pc generator, then fold along normal forms
        gen = np.empty((N, n), dtype=np.int32)
        for i, g in enumerate(self.elements):
            for k in range(n):
                v = list(g)
                self.collector.collect_into(v, [(k, 1)])
                gen[i, k] = self.index(v)
        table = np.empty((N, N), dtype=np.int32)
        base = np.arange(N, dtype=np.int32)
        for j, h in enumerate(self.elements):
            col = base
            for k, e in enumerate(h):
                for _ in range(e):
                    col = gen[col, k]
            table[:, j] = col
        ident = self.index(self.identity)
        inv = np.empty(N, dtype=np.int32)
        rows, cols = np.nonzero(table == ident)
        inv[rows] = cols
        self.table = table
        self.inverse_table = inv
        self._rows = table.tolist()
        self._inv = inv.tolist()

    @property
    def has_table(self) -> bool:
        return self._rows is not None

    # -- index arithmetic (fast paths used by the exhaustive modules)

    def mul_idx(self, i: int, j: int) -> int:
        if self._rows is not None:
            return self._rows[i][j]
        return self.index(self.multiply(self.element(i), self.element(j)))

    def inv_idx(self, i: int) -> int:
        if self._inv is not None:
            return self._inv[i]
        return self.index(self.inverse(self.element(i)))

    def comm_idx(self, i: int, j: int) -> int:
        if self._rows is not None:
            r, v = self._rows, self._inv
            return r[r[r[v[i]][v[j]]][i]][j]
        return self.index(self.commutator(self.element(i), self.element(j)))

    def conj_idx(self, i: int, h: int) -> int:
        """h^-1 * i * h."""
        if self._rows is not None:
            r = self._rows
            return r[r[self._inv[h]][i]][h]
        return self.index(self.conjugate(self.element(i), self.element(h)))

    # -- element arithmetic

    def collect(self, w: Iterable[tuple[int, int]]) -> GroupElement:
        """Normal form of a word given with 1-based generator indices."""
        word = []
        for k, e in w:
            if not 1 <= k <= self.n:
                raise ValueError(f"generator index {k} out of range")
            word.append((k - 1, e))
        return self.collector.collect(word)

    def word_of(self, g: GroupElement) -> Word:
        return tuple((k + 1, e) for k, e in enumerate(g) if e)

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if len(a) != self.n or len(b) != self.n:
            raise ValueError("elements belong to a different group")
        if self._rows is not None:
            return self._elements[self._rows[self.index(a)][self.index(b)]]
        v = list(a)
        self.collector.collect_into(v, _vec_word(b))
        return tuple(v)

    def inverse(self, a: GroupElement) -> GroupElement:
        if len(a) != self.n:
            raise ValueError("element belongs to a different group")
        if self._inv is not None:
            return self._elements[self._inv[self.index(a)]]
        word = []
        for k, e in reversed(list(enumerate(a))):
            for _ in range(e):
                word.extend(self.collector.inverse_gen[k])
        return self.collector.collect(word)

    def commutator(self, a: GroupElement, b: GroupElement) -> GroupElement:
        m = self.multiply
        return m(m(m(self.inverse(a), self.inverse(b)), a), b)

    def conjugate(self, a: GroupElement, h: GroupElement) -> GroupElement:
        """a^h = h^-1 a h."""
        return self.multiply(self.multiply(self.inverse(h), a), h)

    def element_order(self, a: GroupElement) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.multiply(x, a)
            k += 1
        return k

    def power(self, a: GroupElement, k: int) -> GroupElement:
        k %= self.element_order(a)
        result, base = self.identity, a
        while k:
            if k & 1:
                result = self.multiply(result, base)
            base = self.multiply(base, base)
            k >>= 1
        return result

    def product(self, elems: Iterable[GroupElement]) -> GroupElement:
        out = self.identity
        for g in elems:
            out = self.multiply(out, g)
        return out

    def evaluate(self, w: Word, images: Sequence[GroupElement]) -> GroupElement:
        """Value of a pc word after substituting ``images[k-1]`` for a_k."""
        out = self.identity
        for k, e in w:
            out = self.multiply(out, self.power(images[k - 1], e))
        return out


def enumerate_elements(G: Group) -> list[GroupElement]:
    return list(G.elements)
