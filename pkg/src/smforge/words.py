"""Typed free-group words over interned alphabets.

Every other layer of the package works with words over a mixed alphabet of
state letters, tape letters, and (at the presentation level) rule letters.
A letter is interned once into an :class:`Alphabet` and afterwards handled
as a signed integer id, so words are tuples of nonzero ints and all the
kind/sector bookkeeping lives in side tables on the alphabet.

Kinds:

* ``"q"``  state letter, carries a part index
* ``"a"``  tape letter, carries a sector index and a subkind
* ``"t"``  rule letter used by group presentations, carries a position index

Tape subkinds (``"A"``, ``"b"``, ``"o"``) classify input-alphabet copies,
noise letters, and ordinary letters; the typed length of a word splits as
``|w|_a == |w|_A + |w|_b + |w|_o``.

Text format: letters are space separated, a letter is ``name`` or
``name^-1``, and the empty word prints as ``1``. Round trips are bit exact.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

KINDS = ("q", "a", "t")
SUBKINDS = ("A", "b", "o")


class Alphabet:
    """Intern table for letters. Ids are 1-based so ``-id`` is the inverse."""

    def __init__(self) -> None:
        self._ids: Dict[str, int] = {}
        self._names: List[str] = []
        self._kinds: List[str] = []
        self._sectors: List[Optional[int]] = []
        self._parts: List[Optional[int]] = []
        self._subkinds: List[Optional[str]] = []
        self._coords: List[Optional[int]] = []

    def intern(
        self,
        name: str,
        kind: str = "a",
        sector: Optional[int] = None,
        part: Optional[int] = None,
        subkind: str = "o",
        coord: Optional[int] = None,
    ) -> int:
        """Intern ``name`` and return its id. Re-interning must agree.

        >>> al = Alphabet()
        >>> al.intern("a", sector=1)
        1
        >>> al.intern("a", sector=1)
        1
        """
        if not name or any(c.isspace() for c in name) or "^" in name:
            raise ValueError("bad letter name: %r" % (name,))
        if kind not in KINDS:
            raise ValueError("bad kind: %r" % (kind,))
        if kind == "a" and subkind not in SUBKINDS:
            raise ValueError("bad subkind: %r" % (subkind,))
        if name in self._ids:
            i = self._ids[name]
            if self._kinds[i - 1] != kind:
                raise ValueError("letter %r re-interned with kind %r != %r"
                                 % (name, kind, self._kinds[i - 1]))
            return i
        self._names.append(name)
        self._kinds.append(kind)
        self._sectors.append(sector)
        self._parts.append(part)
        self._subkinds.append(subkind if kind == "a" else None)
        self._coords.append(coord)
        i = len(self._names)
        self._ids[name] = i
        return i

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def id_of(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise KeyError("unknown letter: %r" % (name,)) from None

    def name_of(self, i: int) -> str:
        return self._names[abs(i) - 1]

    def kind_of(self, i: int) -> str:
        return self._kinds[abs(i) - 1]

    def sector_of(self, i: int) -> Optional[int]:
        return self._sectors[abs(i) - 1]

    def part_of(self, i: int) -> Optional[int]:
        return self._parts[abs(i) - 1]

    def subkind_of(self, i: int) -> Optional[str]:
        return self._subkinds[abs(i) - 1]

    def coord_of(self, i: int) -> Optional[int]:
        return self._coords[abs(i) - 1]

    def ids(self, kind: Optional[str] = None) -> List[int]:
        return [i + 1 for i in range(len(self._names))
                if kind is None or self._kinds[i] == kind]

    # -- word construction ------------------------------------------------

    def word(self, letters: Iterable[int] = ()) -> "Word":
        return Word(self, free_reduce(letters))

    def raw_word(self, letters: Iterable[int]) -> "Word":
        """Build a word asserted to be already reduced (checked)."""
        ltrs = tuple(letters)
        for a, b in zip(ltrs, ltrs[1:]):
            if a == -b:
                raise ValueError("raw_word got a reducible sequence")
        return Word(self, ltrs)

    def gen(self, name: str, sign: int = 1) -> "Word":
        return Word(self, (sign * self.id_of(name),))

    def parse(self, text: str) -> "Word":
        """Parse the textual word format.

        >>> al = Alphabet(); _ = al.intern("a"); _ = al.intern("b")
        >>> al.parse("a b^-1 a").format()
        'a b^-1 a'
        >>> al.parse("1").format()
        '1'
        """
        toks = text.split()
        if toks == ["1"]:
            return self.word()
        out: List[int] = []
        for tok in toks:
            if tok.endswith("^-1"):
                out.append(-self.id_of(tok[:-3]))
            elif "^" in tok:
                raise ValueError("bad letter token: %r" % (tok,))
            else:
                out.append(self.id_of(tok))
        return self.word(out)


def free_reduce(letters: Iterable[int]) -> Tuple[int, ...]:
    """Stack reduction of a signed-id sequence; cancels adjacent inverses."""
    stack: List[int] = []
    for x in letters:
        if x == 0:
            raise ValueError("letter id 0")
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


class Word:
    """A freely reduced word, immutable, tied to its alphabet."""

    __slots__ = ("alpha", "ltrs")

    def __init__(self, alpha: Alphabet, ltrs: Tuple[int, ...]):
        self.alpha = alpha
        self.ltrs = ltrs

    # -- group operations --------------------------------------------------

    def __mul__(self, other: "Word") -> "Word":
        if self.alpha is not other.alpha:
            raise ValueError("words over different alphabets")
        return Word(self.alpha, free_reduce(self.ltrs + other.ltrs))

    def __invert__(self) -> "Word":
        return Word(self.alpha, tuple(-x for x in reversed(self.ltrs)))

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return (~self) ** (-n)
        out = self.alpha.word()
        for _ in range(n):
            out = out * self
        return out

    def conj(self, g: "Word") -> "Word":
        """g * self * g^-1."""
        return g * self * ~g

    # -- identity ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Word) and other.alpha is self.alpha
                and other.ltrs == self.ltrs)

    def __hash__(self) -> int:
        return hash((id(self.alpha), self.ltrs))

    def __len__(self) -> int:
        return len(self.ltrs)

    def __bool__(self) -> bool:
        return bool(self.ltrs)

    def __repr__(self) -> str:
        return "Word(%s)" % self.format()

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.alpha, self.ltrs[i])
        return self.ltrs[i]

    # -- typed lengths -----------------------------------------------------

    def count(self, kind: Optional[str] = None, subkind: Optional[str] = None) -> int:
        al = self.alpha
        n = 0
        for x in self.ltrs:
            if kind is not None and al.kind_of(x) != kind:
                continue
            if subkind is not None and al.subkind_of(x) != subkind:
                continue
            n += 1
        return n

    @property
    def len_q(self) -> int:
        return self.count("q")

    @property
    def len_a(self) -> int:
        return self.count("a")

    @property
    def len_t(self) -> int:
        return self.count("t")

    @property
    def len_A(self) -> int:
        return self.count("a", "A")

    @property
    def len_b(self) -> int:
        return self.count("a", "b")

    @property
    def len_o(self) -> int:
        return self.count("a", "o")

    # -- text --------------------------------------------------------------

    def format(self) -> str:
        if not self.ltrs:
            return "1"
        al = self.alpha
        return " ".join(al.name_of(x) if x > 0 else al.name_of(x) + "^-1"
                        for x in self.ltrs)


def cyclic_reduce(w: Word) -> Tuple[Word, Word]:
    """Return (core, conj) with ``w == conj * core * ~conj`` and core
    cyclically reduced.

    >>> al = Alphabet(); _ = al.intern("a"); _ = al.intern("b")
    >>> core, c = cyclic_reduce(al.parse("a b a^-1"))
    >>> core.format(), c.format()
    ('b', 'a')
    """
    ltrs = w.ltrs
    i, j = 0, len(ltrs)
    while j - i >= 2 and ltrs[i] == -ltrs[j - 1]:
        i += 1
        j -= 1
    return Word(w.alpha, ltrs[i:j]), Word(w.alpha, ltrs[:i])


def substitute(w: Word, images: Dict[int, Word], target: Alphabet) -> Word:
    """Apply the homomorphism sending letter id i to images[i].

    Ids missing from ``images`` are an error; the result is reduced.
    """
    out: List[int] = []
    for x in w.ltrs:
        img = images[abs(x)]
        out.extend(img.ltrs if x > 0 else (~img).ltrs)
    return Word(target, free_reduce(out))


def relabel(w: Word, letter_map: Dict[int, int], target: Alphabet) -> Word:
    """Letter-to-letter rename, preserving signs."""
    return Word(target, tuple(
        letter_map[abs(x)] if x > 0 else -letter_map[abs(x)] for x in w.ltrs))


# -- subgroup membership via Stallings folding ------------------------------

class _Folder:
    """Folded core graph of the subgroup generated by a list of words.

    Edges are inserted one at a time and folded eagerly: whenever a vertex
    would acquire two equal-label outgoing edges, the targets are merged
    (union-find) and the loser's edges are re-queued for insertion.
    """

    def __init__(self, basis: Sequence[Word]):
        for b in basis:
            if not b:
                raise ValueError("empty word in basis")
        self.parent: List[int] = [0]
        self.adj: List[Dict[int, int]] = [dict()]
        self._queue: List[Tuple[int, int, int]] = []
        for b in basis:
            v = 0
            for k, x in enumerate(b.ltrs):
                u = 0 if k == len(b.ltrs) - 1 else self._new_vertex()
                self._insert(v, x, u)
                v = self._find(u)

    def _new_vertex(self) -> int:
        self.parent.append(len(self.parent))
        self.adj.append(dict())
        return len(self.parent) - 1

    def _find(self, v: int) -> int:
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def _insert(self, v: int, x: int, u: int) -> None:
        self._queue.append((v, x, u))
        while self._queue:
            v, x, u = self._queue.pop()
            v, u = self._find(v), self._find(u)
            tf = self.adj[v].get(x)
            tf = self._find(tf) if tf is not None else None
            tb = self.adj[u].get(-x)
            tb = self._find(tb) if tb is not None else None
            if tf is not None and tf != u:
                self._merge(tf, u)
                self._queue.append((self._find(v), x, self._find(u)))
            elif tb is not None and tb != v:
                self._merge(tb, v)
                self._queue.append((self._find(v), x, self._find(u)))
            else:
                # new edge, or a half-present pair getting normalized
                self.adj[v][x] = u
                self.adj[u][-x] = v

    def _merge(self, a: int, b: int) -> None:
        a, b = self._find(a), self._find(b)
        if a == b:
            return
        self.parent[b] = a
        moved = list(self.adj[b].items())
        self.adj[b] = dict()
        for x, u in moved:
            self._queue.append((a, x, self._find(u)))

    # -- queries -----------------------------------------------------------

    def trace(self, w: Word) -> Optional[int]:
        v = self._find(0)
        for x in w.ltrs:
            nxt = self.adj[v].get(x)
            if nxt is None:
                return None
            v = self._find(nxt)
        return v

    def accepts(self, w: Word) -> bool:
        return self.trace(w) == self._find(0)

    def rank(self) -> int:
        verts = set(self._find(v) for v in range(len(self.parent)))
        edges = 0
        for v in verts:
            for x in self.adj[v]:
                if x > 0:
                    edges += 1
        return edges - len(verts) + 1


BasisExpression = List[Tuple[int, int]]


def validate_basis(basis: Sequence[Word]) -> bool:
    """True iff the words freely generate a subgroup of rank len(basis).

    >>> al = Alphabet(); _ = al.intern("a"); _ = al.intern("b")
    >>> validate_basis([al.parse("a a"), al.parse("b")])
    True
    >>> validate_basis([al.parse("a"), al.parse("a^-1")])
    False
    """
    if any(not b for b in basis):
        return False
    if not basis:
        return True
    return _Folder(basis).rank() == len(basis)


def is_member(w: Word, basis: Sequence[Word]) -> bool:
    """Membership of w in the subgroup generated by the given words.

    Unlike :func:`express_in_basis` this never searches for an expression,
    so it is complete for every generating set (the words need not be free).

    >>> al = Alphabet(); _ = al.intern("a"); _ = al.intern("b")
    >>> is_member(al.parse("a a b"), [al.parse("a a"), al.parse("b")])
    True
    >>> is_member(al.parse("a"), [al.parse("a a"), al.parse("b")])
    False
    """
    if not w:
        return True
    gens = [b for b in basis if b]
    if not gens:
        return False
    return _Folder(gens).accepts(w)


_PEEL_BUDGET = 200_000


def express_in_basis(w: Word, basis: Sequence[Word]) -> Optional[BasisExpression]:
    """Write ``w`` as a product of basis elements, or None if not a member.

    Returns a list of (basis index, sign) terms whose ordered product is
    ``w``. For a basis that passes :func:`validate_basis` the expression is
    the unique reduced one and its term count is the basis length of ``w``.

    >>> al = Alphabet(); _ = al.intern("a"); _ = al.intern("b")
    >>> express_in_basis(al.parse("a a b"), [al.parse("a a"), al.parse("b")])
    [(0, 1), (1, 1)]
    >>> express_in_basis(al.parse("a"), [al.parse("a a"), al.parse("b")]) is None
    True
    """
    for b in basis:
        if not b:
            raise ValueError("empty word in basis")
    if not w:
        return []
    if not basis:
        return None
    folder = _Folder(basis)
    if not folder.accepts(w):
        return None

    # fast path: single-letter basis
    if all(len(b) == 1 for b in basis):
        letter_at: Dict[int, Tuple[int, int]] = {}
        for j, b in enumerate(basis):
            x = b.ltrs[0]
            if x not in letter_at:
                letter_at[x] = (j, 1)
            if -x not in letter_at:
                letter_at[-x] = (j, -1)
        expr = [letter_at[x] for x in w.ltrs]
        return expr

    # bounded breadth-first peeling, complete for Nielsen-reduced-like bases
    signed = [(j, s, b if s > 0 else ~b) for j, b in enumerate(basis) for s in (1, -1)]
    start = w
    prev: Dict[Word, Tuple[Word, int, int]] = {}
    frontier = [start]
    seen = {start}
    empty = w.alpha.word()
    found = start == empty
    nodes = 0
    while frontier and not found:
        nxt: List[Word] = []
        for cur in frontier:
            for j, s, bw in signed:
                rem = (~bw) * cur
                if len(rem) > len(cur) or rem in seen:
                    continue
                nodes += 1
                if nodes > _PEEL_BUDGET:
                    raise RuntimeError(
                        "express_in_basis: peel budget exhausted; "
                        "basis outside the supported classes")
                seen.add(rem)
                prev[rem] = (cur, j, s)
                if not rem:
                    found = True
                    break
                nxt.append(rem)
            if found:
                break
        frontier = nxt
    if not found:
        raise RuntimeError(
            "express_in_basis: membership holds but no peel path found; "
            "basis outside the supported classes")
    terms: BasisExpression = []
    cur = empty
    while cur != start:
        cur, j, s = prev[cur]
        terms.append((j, s))
    terms.reverse()
    # defensive forward check
    acc = empty
    for j, s in terms:
        acc = acc * (basis[j] if s > 0 else ~basis[j])
    if acc != w:
        raise RuntimeError("express_in_basis: internal readback mismatch")
    return terms


def expression_word(basis: Sequence[Word], expr: BasisExpression) -> Word:
    """Multiply out a basis expression."""
    if not basis:
        raise ValueError("empty basis")
    ltrs: List[int] = []
    for j, s in expr:
        w = basis[j]
        if s > 0:
            ltrs.extend(w.ltrs)
        else:
            ltrs.extend(-x for x in reversed(w.ltrs))
    return basis[0].alpha.word(ltrs)
