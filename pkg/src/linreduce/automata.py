"""Nondeterministic finite automata over interned string symbols.

Symbols are plain strings (their display form); a symbol's id is its index
in the owning :class:`Alphabet`.  State sets are handled as Python ints used
as bitsets, which keeps subset construction and antichain checks cheap.
"""

from __future__ import annotations

import json
from collections import deque
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property

DEFAULT_SUBSET_CAP = 1 << 22


class InputError(ValueError):
    """A word or file does not fit the object it is used with."""


class ResourceError(RuntimeError):
    """An exploration exceeded its configured cap."""

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what} exceeded cap of {cap}")
        self.cap = cap


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Alphabet(Sequence):
    """Ordered set of symbol displays.  Iteration order is the id order."""

    __slots__ = ("_symbols", "_index")

    def __init__(self, symbols: Iterable[str] = ()):
        syms = tuple(symbols)
        index = {}
        for i, s in enumerate(syms):
            if not isinstance(s, str) or not s:
                raise InputError(f"symbol must be a non-empty string, got {s!r}")
            if s in index:
                raise InputError(f"duplicate symbol {s!r}")
            index[s] = i
        self._symbols = syms
        self._index = index

    def __getitem__(self, i):
        return self._symbols[i]

    def __len__(self) -> int:
        return len(self._symbols)

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def __iter__(self):
        return iter(self._symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self._symbols == other._symbols

    def __hash__(self) -> int:
        return hash(self._symbols)

    def __repr__(self) -> str:
        return f"Alphabet({list(self._symbols)!r})"

    def index(self, symbol: str) -> int:  # type: ignore[override]
        try:
            return self._index[symbol]
        except KeyError:
            raise InputError(f"unknown symbol {symbol!r}") from None

    def get(self, symbol: str) -> int | None:
        return self._index.get(symbol)

    def union(self, other: Iterable[str]) -> Alphabet:
        extra = [s for s in other if s not in self._index]
        return self if not extra else Alphabet(self._symbols + tuple(extra))

    def issubset(self, other: Alphabet) -> bool:
        return all(s in other for s in self._symbols)


Transition = tuple[int, "str | None", int]


def _transition_key(alphabet: Alphabet, t: Transition):
    src, label, dst = t
    return (src, -1 if label is None else alphabet.index(label), dst)


@dataclass(frozen=True, eq=True)
class Nfa:
    """An NFA with epsilon moves (label ``None``).

    Instances are immutable; derived lookup tables are computed lazily and
    cached on the instance.
    """

    alphabet: Alphabet
    state_count: int
    transitions: tuple[Transition, ...]
    initial: frozenset[int]
    final: frozenset[int]

    def __post_init__(self):
        n = self.state_count
        if n < 0:
            raise InputError("state_count must be non-negative")
        for src, label, dst in self.transitions:
            if not (0 <= src < n and 0 <= dst < n):
                raise InputError(f"transition endpoint out of range: {(src, label, dst)}")
            if label is not None and label not in self.alphabet:
                raise InputError(f"transition label {label!r} not in alphabet")
        for q in self.initial | self.final:
            if not 0 <= q < n:
                raise InputError(f"state {q} out of range")
        canonical = tuple(sorted(set(self.transitions), key=lambda t: _transition_key(self.alphabet, t)))
        object.__setattr__(self, "transitions", canonical)
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "final", frozenset(self.final))

    def __hash__(self) -> int:
        return hash((self.alphabet, self.state_count, self.transitions, self.initial, self.final))

    # -- lookup tables --------------------------------------------------

    @cached_property
    def _succ(self) -> tuple[list[list[int]], list[dict[int, list[int]]]]:
        eps: list[list[int]] = [[] for _ in range(self.state_count)]
        delta: list[dict[int, list[int]]] = [{} for _ in range(self.state_count)]
        for src, label, dst in self.transitions:
            if label is None:
                eps[src].append(dst)
            else:
                delta[src].setdefault(self.alphabet.index(label), []).append(dst)
        return eps, delta

    @cached_property
    def eps_closures(self) -> list[int]:
        eps, _ = self._succ
        out = []
        for q in range(self.state_count):
            mask = 1 << q
            stack = [q]
            while stack:
                for r in eps[stack.pop()]:
                    if not mask >> r & 1:
                        mask |= 1 << r
                        stack.append(r)
            out.append(mask)
        return out

    @cached_property
    def _post_tables(self) -> dict[int, list[int]]:
        return {}

    def post(self, sym: int) -> list[int]:
        """Per-state epsilon-closed successor masks for symbol id ``sym``."""
        table = self._post_tables.get(sym)
        if table is None:
            _, delta = self._succ
            closures = self.eps_closures
            table = []
            for q in range(self.state_count):
                mask = 0
                for r in delta[q].get(sym, ()):
                    mask |= closures[r]
                table.append(mask)
            self._post_tables[sym] = table
        return table

    @cached_property
    def final_mask(self) -> int:
        return sum(1 << q for q in self.final)

    @cached_property
    def start_mask(self) -> int:
        return self.closure(sum(1 << q for q in self.initial))

    def closure(self, mask: int) -> int:
        out = 0
        closures = self.eps_closures
        for q in bits(mask):
            out |= closures[q]
        return out

    @cached_property
    def _chunk_tables(self) -> dict[int, dict[int, int]]:
        return {}

    def image(self, mask: int, sym: int | None) -> int:
        """Successor set of an epsilon-closed ``mask`` under symbol id ``sym``."""
        if sym is None:
            return 0
        # successor masks are memoised per (byte offset, byte value)
        chunks = self._chunk_tables.get(sym)
        if chunks is None:
            chunks = self._chunk_tables[sym] = {}
        table = None
        out = 0
        data = mask.to_bytes((mask.bit_length() + 7) // 8, "little")
        for i, byte in enumerate(data):
            if not byte:
                continue
            key = i << 8 | byte
            got = chunks.get(key)
            if got is None:
                if table is None:
                    table = self.post(sym)
                got = 0
                for q in bits(byte):
                    got |= table[i * 8 + q]
                chunks[key] = got
            out |= got
        return out

    def symbol_id(self, symbol: str) -> int | None:
        return self.alphabet.get(symbol)

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "states": self.state_count,
            "initial": sorted(self.initial),
            "final": sorted(self.final),
            "transitions": [[s, l, d] for s, l, d in self.transitions],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Nfa:
        try:
            return cls(
                Alphabet(data["alphabet"]),
                int(data["states"]),
                tuple((int(s), l, int(d)) for s, l, d in data["transitions"]),
                frozenset(data["initial"]),
                frozenset(data["final"]),
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed NFA object: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> Nfa:
        return cls.from_dict(json.loads(text))


class NfaBuilder:
    """Incremental NFA construction with optional keyed states."""

    def __init__(self, alphabet: Iterable[str]):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        self._keys: dict[object, int] = {}
        self._count = 0
        self._edges: set[Transition] = set()

    def state(self, key: object = None) -> int:
        if key is None:
            self._count += 1
            return self._count - 1
        if key not in self._keys:
            self._keys[key] = self.state()
        return self._keys[key]

    def reserve(self, count: int) -> int:
        """Allocate ``count`` anonymous states; return the first id."""
        first = self._count
        self._count += count
        return first

    def edge(self, src: int, labels: str | None | Iterable[str], dst: int) -> None:
        if labels is None or isinstance(labels, str):
            labels = (labels,)
        for label in labels:
            self._edges.add((src, label, dst))

    def loop(self, state: int, labels: str | Iterable[str]) -> None:
        self.edge(state, labels, state)

    def build(self, initial: Iterable[int], final: Iterable[int]) -> Nfa:
        return Nfa(self.alphabet, self._count, tuple(self._edges), frozenset(initial), frozenset(final))


# -- regular expressions -------------------------------------------------


@dataclass(frozen=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class Lit:
    symbol: str


@dataclass(frozen=True)
class Concat:
    parts: tuple


@dataclass(frozen=True)
class Alt:
    options: tuple


@dataclass(frozen=True)
class Star:
    inner: object


EPS = Epsilon()


def seq(*parts) -> Concat:
    return Concat(tuple(Lit(p) if isinstance(p, str) else p for p in parts))


def alt(*options) -> Alt:
    return Alt(tuple(Lit(o) if isinstance(o, str) else o for o in options))


def star(inner) -> Star:
    return Star(Lit(inner) if isinstance(inner, str) else inner)


def plus(inner):
    return seq(inner, star(inner))


def opt(inner):
    return alt(inner, EPS)


def regex_symbols(r) -> list[str]:
    out: list[str] = []

    def walk(node):
        if isinstance(node, Lit):
            if node.symbol not in out:
                out.append(node.symbol)
        elif isinstance(node, Concat):
            for p in node.parts:
                walk(p)
        elif isinstance(node, Alt):
            for o in node.options:
                walk(o)
        elif isinstance(node, Star):
            walk(node.inner)

    walk(r)
    return out


def regex_to_nfa(r, alphabet: Iterable[str] | None = None) -> Nfa:
    """Thompson construction.  ``alphabet`` defaults to the literals of ``r``."""
    sigma = Alphabet(regex_symbols(r)) if alphabet is None else Alphabet(alphabet)
    b = NfaBuilder(sigma)

    def build(node) -> tuple[int, int]:
        if isinstance(node, Lit):
            if node.symbol not in sigma:
                raise InputError(f"literal {node.symbol!r} not in alphabet")
            s, f = b.state(), b.state()
            b.edge(s, node.symbol, f)
            return s, f
        if isinstance(node, Epsilon):
            s = b.state()
            return s, s
        if isinstance(node, Concat):
            if not node.parts:
                s = b.state()
                return s, s
            first_s, last_f = build(node.parts[0])
            for part in node.parts[1:]:
                s, f = build(part)
                b.edge(last_f, None, s)
                last_f = f
            return first_s, last_f
        if isinstance(node, Alt):
            s, f = b.state(), b.state()
            for option in node.options:
                os_, of = build(option)
                b.edge(s, None, os_)
                b.edge(of, None, f)
            return s, f
        if isinstance(node, Star):
            s = b.state()
            is_, if_ = build(node.inner)
            b.edge(s, None, is_)
            b.edge(if_, None, s)
            return s, s
        raise TypeError(f"not a regex node: {node!r}")

    start, end = build(r)
    return b.build([start], [end])


# -- membership and boolean operations ----------------------------------


def accepts(n: Nfa, word: Iterable[str]) -> bool:
    current = n.start_mask
    for symbol in word:
        if symbol not in n.alphabet:
            raise InputError(f"letter {symbol!r} not in alphabet")
        current = n.image(current, n.alphabet.index(symbol))
        if not current:
            return False
    return bool(current & n.final_mask)


def _relabel_into(b: NfaBuilder, n: Nfa) -> int:
    offset = b.reserve(n.state_count)
    for src, label, dst in n.transitions:
        b.edge(src + offset, label, dst + offset)
    return offset


def union(*nfas: Nfa) -> Nfa:
    """Disjoint union; the alphabet is the ordered union of the inputs'."""
    sigma = Alphabet()
    for n in nfas:
        sigma = sigma.union(n.alphabet)
    b = NfaBuilder(sigma)
    initial, final = [], []
    for n in nfas:
        off = _relabel_into(b, n)
        initial += [q + off for q in n.initial]
        final += [q + off for q in n.final]
    return b.build(initial, final)


def concat(*nfas: Nfa) -> Nfa:
    sigma = Alphabet()
    for n in nfas:
        sigma = sigma.union(n.alphabet)
    b = NfaBuilder(sigma)
    initial: list[int] | None = None
    prev_final: list[int] = []
    for n in nfas:
        off = _relabel_into(b, n)
        starts = [q + off for q in n.initial]
        if initial is None:
            initial = starts
        else:
            for f in prev_final:
                for s in starts:
                    b.edge(f, None, s)
        prev_final = [q + off for q in n.final]
    if initial is None:
        s = b.state()
        return b.build([s], [s])
    return b.build(initial, prev_final)


def with_self_loops(n: Nfa, letters: Iterable[str]) -> Nfa:
    """Add a self-loop on every letter of ``letters`` to every state."""
    letters = list(letters)
    sigma = n.alphabet.union(letters)
    extra = tuple((q, a, q) for q in range(n.state_count) for a in letters)
    return Nfa(sigma, n.state_count, n.transitions + extra, n.initial, n.final)


def relabel(n: Nfa, mapping: dict[str, str], alphabet: Iterable[str] | None = None) -> Nfa:
    sigma = Alphabet(alphabet) if alphabet is not None else Alphabet(mapping.get(s, s) for s in n.alphabet)
    trans = tuple((s, None if l is None else mapping.get(l, l), d) for s, l, d in n.transitions)
    return Nfa(sigma, n.state_count, trans, n.initial, n.final)


def intersect(a: Nfa, b: Nfa) -> Nfa:
    """Product construction over reachable pairs."""
    sigma = a.alphabet.union(b.alphabet)
    eps_a, delta_a = a._succ
    eps_b, delta_b = b._succ
    builder = NfaBuilder(sigma)
    ids: dict[tuple[int, int], int] = {}
    queue: deque[tuple[int, int]] = deque()

    def node(p: int, q: int) -> int:
        if (p, q) not in ids:
            ids[(p, q)] = builder.state()
            queue.append((p, q))
        return ids[(p, q)]

    initial = [node(p, q) for p in sorted(a.initial) for q in sorted(b.initial)]
    while queue:
        p, q = queue.popleft()
        here = ids[(p, q)]
        for p2 in eps_a[p]:
            builder.edge(here, None, node(p2, q))
        for q2 in eps_b[q]:
            builder.edge(here, None, node(p, q2))
        for sym_a, targets_a in delta_a[p].items():
            symbol = a.alphabet[sym_a]
            sym_b = b.alphabet.get(symbol)
            if sym_b is None:
                continue
            for p2 in targets_a:
                for q2 in delta_b[q].get(sym_b, ()):
                    builder.edge(here, symbol, node(p2, q2))
    final = [i for (p, q), i in ids.items() if p in a.final and q in b.final]
    return builder.build(initial, final)


def _check_over(n: Nfa, over: Alphabet | Iterable[str]) -> Alphabet:
    over = over if isinstance(over, Alphabet) else Alphabet(over)
    missing = [s for s in n.alphabet if s not in over]
    if missing:
        raise InputError(f"NFA alphabet not contained in target alphabet: {missing}")
    return over


def determinize(n: Nfa, over: Alphabet | Iterable[str] | None = None, cap: int = DEFAULT_SUBSET_CAP) -> Nfa:
    """Complete deterministic automaton for ``L(n)`` over ``over``."""
    over = _check_over(n, n.alphabet if over is None else over)
    sym_ids = [n.alphabet.get(s) for s in over]
    ids = {n.start_mask: 0}
    order = [n.start_mask]
    edges = []
    i = 0
    while i < len(order):
        mask = order[i]
        for symbol, sym in zip(over, sym_ids):
            nxt = n.image(mask, sym)
            if nxt not in ids:
                if len(order) >= cap:
                    raise ResourceError("subset construction", cap)
                ids[nxt] = len(order)
                order.append(nxt)
            edges.append((i, symbol, ids[nxt]))
        i += 1
    final = [j for j, m in enumerate(order) if m & n.final_mask]
    return Nfa(over, len(order), tuple(edges), frozenset([0]), frozenset(final))


def complement(n: Nfa, over: Alphabet | Iterable[str] | None = None, cap: int = DEFAULT_SUBSET_CAP) -> Nfa:
    """Complete deterministic automaton for ``over* minus L(n)``."""
    d = determinize(n, over, cap)
    return Nfa(d.alphabet, d.state_count, d.transitions, d.initial, frozenset(range(d.state_count)) - d.final)


def minimize(n: Nfa, over: Alphabet | Iterable[str] | None = None, cap: int = DEFAULT_SUBSET_CAP) -> Nfa:
    """Minimal trimmed deterministic automaton for ``L(n)`` (Moore refinement)."""
    d = determinize(n, over, cap)
    nsym = len(d.alphabet)
    succ = [[0] * nsym for _ in range(d.state_count)]
    for src, label, dst in d.transitions:
        succ[src][d.alphabet.index(label)] = dst
    block = [1 if q in d.final else 0 for q in range(d.state_count)]
    count = len(set(block))
    while True:
        sigs: dict[tuple, int] = {}
        nxt = [sigs.setdefault((block[q], *(block[r] for r in succ[q])), len(sigs)) for q in range(d.state_count)]
        block = nxt
        if len(sigs) == count:
            break
        count = len(sigs)
    # renumber blocks in order of first appearance from the start state
    order: dict[int, int] = {}
    queue = deque([0])
    order[block[0]] = 0
    edges = set()
    while queue:
        q = queue.popleft()
        for k, r in enumerate(succ[q]):
            if block[r] not in order:
                order[block[r]] = len(order)
                queue.append(r)
            edges.add((order[block[q]], d.alphabet[k], order[block[r]]))
    final = {order[block[q]] for q in d.final if block[q] in order}
    return trim(Nfa(d.alphabet, len(order), tuple(edges), frozenset([0]), frozenset(final)))


def is_empty(n: Nfa) -> tuple[str, ...] | None:
    """Shortest accepted word, least in alphabet order, or ``None``."""
    # each node holds the states first reached by one word; nodes are
    # created in shortlex order of their words
    start = n.start_mask
    nodes = [start]
    parents: list[tuple[int, int]] = [(-1, -1)]
    seen = start
    head = 0
    while head < len(nodes):
        mask = nodes[head]
        if mask & n.final_mask:
            return _unwind(n.alphabet, parents, head)
        for sym in range(len(n.alphabet)):
            nxt = n.image(mask, sym) & ~seen
            if nxt:
                seen |= nxt
                nodes.append(nxt)
                parents.append((head, sym))
        head += 1
    return None


@dataclass(frozen=True)
class Universal:
    explored: int = 0

    @property
    def verdict(self) -> str:
        return "universal"


@dataclass(frozen=True)
class Counterexample:
    word: tuple[str, ...]
    explored: int = 0

    @property
    def verdict(self) -> str:
        return "counterexample"


def sink_mask(n: Nfa, over: Alphabet) -> int:
    """Accepting states looping on every letter of ``over``."""
    mask = 0
    sym_ids = [n.alphabet.get(s) for s in over]
    if any(s is None for s in sym_ids):
        return 0
    tables = [n.post(s) for s in sym_ids]
    for q in n.final:
        if all(t[q] >> q & 1 for t in tables):
            mask |= 1 << q
    return mask


def is_universal(
    n: Nfa, over: Alphabet | Iterable[str] | None = None, cap: int = DEFAULT_SUBSET_CAP
) -> Universal | Counterexample:
    """Antichain search for a shortest word of ``over*`` rejected by ``n``.

    Breadth-first over epsilon-closed subset states, letters in id order,
    so the counterexample is the shortlex-least rejected word.  A subset
    that contains an already visited subset is pruned: it rejects a subset
    of what the smaller one rejects, and the smaller one was reached by a
    shortlex-earlier word.
    """
    over = _check_over(n, n.alphabet if over is None else over)
    sym_ids = [n.alphabet.get(s) for s in over]
    final = n.final_mask
    sinks = sink_mask(n, over)
    start = n.start_mask
    if not start & final:
        return Counterexample((), 1)
    nodes = [start]
    parents: list[tuple[int, int]] = [(-1, -1)]
    by_size: dict[int, list[int]] = {start.bit_count(): [start]}
    head = 0
    while head < len(nodes):
        mask = nodes[head]
        for k, sym in enumerate(sym_ids):
            nxt = n.image(mask, sym)
            if nxt & sinks:
                continue
            if not nxt & final:
                nodes.append(nxt)
                parents.append((head, k))
                return Counterexample(_unwind(over, parents, len(nodes) - 1), len(nodes))
            size = nxt.bit_count()
            if _subsumed(by_size, nxt, size):
                continue
            if len(nodes) >= cap:
                raise ResourceError("antichain universality search", cap)
            nodes.append(nxt)
            parents.append((head, k))
            by_size.setdefault(size, []).append(nxt)
        head += 1
    return Universal(len(nodes))


def _subsumed(by_size: dict[int, list[int]], mask: int, size: int) -> bool:
    for s, group in by_size.items():
        if s > size:
            continue
        for v in group:
            if v & ~mask == 0:
                return True
    return False


def _unwind(over: Alphabet, parents, i: int) -> tuple[str, ...]:
    word = []
    while parents[i][0] >= 0:
        i, k = parents[i]
        word.append(over[k])
    return tuple(reversed(word))


def useful_states(n: Nfa) -> list[int]:
    """States both reachable from an initial and co-reachable to a final state."""
    fwd: dict[int, list[int]] = {}
    bwd: dict[int, list[int]] = {}
    for s, _, d in n.transitions:
        fwd.setdefault(s, []).append(d)
        bwd.setdefault(d, []).append(s)

    def reach(seeds, graph):
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            for r in graph.get(stack.pop(), ()):
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return seen

    return sorted(reach(n.initial, fwd) & reach(n.final, bwd))


def trim(n: Nfa) -> Nfa:
    keep = useful_states(n)
    new = {q: i for i, q in enumerate(keep)}
    trans = tuple((new[s], l, new[d]) for s, l, d in n.transitions if s in new and d in new)
    return Nfa(
        n.alphabet,
        len(keep),
        trans,
        frozenset(new[q] for q in n.initial if q in new),
        frozenset(new[q] for q in n.final if q in new),
    )


def to_dot(n: Nfa, name: str = "nfa") -> str:
    def quote(s: str) -> str:
        return '"{}"'.format(s.replace("\\", "\\\\").replace('"', r"\""))

    lines = [f"digraph {quote(name)} {{", "  rankdir=LR;"]
    for q in range(n.state_count):
        shape = "doublecircle" if q in n.final else "circle"
        lines.append(f"  {q} [shape={shape}];")
    for i, q in enumerate(sorted(n.initial)):
        lines.append(f"  init{i} [shape=point];")
        lines.append(f"  init{i} -> {q};")
    for s, label, d in n.transitions:
        lines.append(f"  {s} -> {d} [label={quote('ε' if label is None else label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
