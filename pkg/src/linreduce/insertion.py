"""Letter Insertion instances and their exact decision procedure.

An instance is a set ``A`` of insertable letters, a base alphabet ``Γ`` and
an NFA ``N`` over ``Γ ⊎ A``.  A word ``w`` over ``Γ`` is *insertable* when
every letter of ``A`` can be placed into ``w`` exactly once, in some order,
so that ``N`` accepts the result.  The instance is positive when every word
is insertable.

Insertability is regular: :func:`closure_nfa` tracks the subset of ``A``
already placed, turning each ``a``-move of ``N`` into an epsilon move.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .automata import (
    DEFAULT_SUBSET_CAP,
    Alphabet,
    Counterexample,
    InputError,
    Nfa,
    NfaBuilder,
    Universal,
    is_universal,
    trim,
    useful_states,
)


@dataclass(frozen=True)
class ClosureAutomaton:
    nfa: Nfa
    # closure state -> (state of N, bitmask over insertables)
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class InsertionWitness:
    """A concrete insertion: ``w_0 a_p(1) w_1 ... a_p(l) w_l``.

    ``permutation`` holds 1-based indices into the instance's insertables.
    """

    decomposition: tuple[tuple[str, ...], ...]
    permutation: tuple[int, ...]
    insertables: tuple[str, ...]

    def word(self) -> tuple[str, ...]:
        return tuple(s for part in self.decomposition for s in part)

    def arranged(self) -> tuple[str, ...]:
        out = list(self.decomposition[0])
        for idx, part in zip(self.permutation, self.decomposition[1:]):
            out.append(self.insertables[idx - 1])
            out.extend(part)
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "decomposition": [list(p) for p in self.decomposition],
            "permutation": list(self.permutation),
            "arranged": list(self.arranged()),
        }


@dataclass(frozen=True)
class InsertionInstance:
    insertables: tuple[str, ...]
    base: Alphabet
    nfa: Nfa

    def __post_init__(self):
        object.__setattr__(self, "insertables", tuple(self.insertables))
        if not isinstance(self.base, Alphabet):
            object.__setattr__(self, "base", Alphabet(self.base))
        if len(set(self.insertables)) != len(self.insertables):
            raise InputError("insertable letters must be pairwise distinct")
        clash = [a for a in self.insertables if a in self.base]
        if clash:
            raise InputError(f"insertables overlap the base alphabet: {clash}")
        allowed = set(self.insertables) | set(self.base)
        stray = [s for s in self.nfa.alphabet if s not in allowed]
        if stray:
            raise InputError(f"NFA uses letters outside Γ ⊎ A: {stray}")

    def __hash__(self) -> int:
        return hash((self.insertables, self.base, self.nfa))

    @cached_property
    def closure(self) -> ClosureAutomaton:
        return _build_closure(self)

    def to_dict(self) -> dict:
        return {"insertables": list(self.insertables), "gamma": list(self.base), "nfa": self.nfa.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> InsertionInstance:
        try:
            return cls(tuple(data["insertables"]), Alphabet(data["gamma"]), Nfa.from_dict(data["nfa"]))
        except KeyError as exc:
            raise InputError(f"instance object lacks field {exc}") from exc
        except (TypeError, AttributeError) as exc:
            raise InputError(f"malformed instance object: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> InsertionInstance:
        return cls.from_dict(json.loads(text))


def _build_closure(inst: InsertionInstance) -> ClosureAutomaton:
    n = inst.nfa
    letter_bit = {a: 1 << i for i, a in enumerate(inst.insertables)}
    full = (1 << len(inst.insertables)) - 1
    by_src: dict[int, list[tuple[str | None, int]]] = {}
    for s, label, d in n.transitions:
        by_src.setdefault(s, []).append((label, d))

    b = NfaBuilder(inst.base)
    pairs: list[tuple[int, int]] = []
    queue: deque[tuple[int, int]] = deque()

    def node(q: int, placed: int) -> int:
        key = (q, placed)
        before = len(pairs)
        sid = b.state(key)
        if sid == before:
            pairs.append(key)
            queue.append(key)
        return sid

    initial = [node(q, 0) for q in sorted(n.initial)]
    while queue:
        q, placed = queue.popleft()
        here = node(q, placed)
        for label, d in by_src.get(q, ()):
            if label is None:
                b.edge(here, None, node(d, placed))
            elif label in letter_bit:
                bit = letter_bit[label]
                if not placed & bit:
                    b.edge(here, None, node(d, placed | bit))
            else:
                b.edge(here, label, node(d, placed))
    final = [i for i, (q, placed) in enumerate(pairs) if placed == full and q in n.final]
    raw = b.build(initial, final)
    # trim() keeps useful states in ascending order; mirror that for pairs
    kept = useful_states(raw)
    return ClosureAutomaton(trim(raw), tuple(pairs[q] for q in kept))


def closure_nfa(inst: InsertionInstance) -> Nfa:
    """NFA over ``Γ`` accepting exactly the insertable words."""
    return inst.closure.nfa


def decide(inst: InsertionInstance, cap: int = DEFAULT_SUBSET_CAP) -> Universal | Counterexample:
    """Universal iff every word over Γ is insertable; else a shortest non-insertable word."""
    return is_universal(closure_nfa(inst), inst.base, cap=cap)


def insertable(inst: InsertionInstance, word: Iterable[str]) -> InsertionWitness | None:
    """A witness insertion for ``word``, or ``None`` when none exists."""
    word = tuple(word)
    for s in word:
        if s not in inst.base:
            raise InputError(f"letter {s!r} not in Γ")
    c = inst.closure
    n = c.nfa
    eps, delta = n._succ
    # search node: (position, closure state); parent holds the predecessor
    parent: dict[tuple[int, int], tuple[int, int] | None] = {}
    queue: deque[tuple[int, int]] = deque()
    for q in sorted(n.initial):
        parent[(0, q)] = None
        queue.append((0, q))
    goal = None
    end = len(word)
    while queue:
        pos, q = queue.popleft()
        if pos == end and q in n.final:
            goal = (pos, q)
            break
        nxt = [(pos, r) for r in eps[q]]
        if pos < end:
            sym = n.alphabet.get(word[pos])
            if sym is not None:
                nxt += [(pos + 1, r) for r in delta[q].get(sym, ())]
        for node in nxt:
            if node not in parent:
                parent[node] = (pos, q)
                queue.append(node)
    if goal is None:
        return None

    path = []
    node: tuple[int, int] | None = goal
    while node is not None:
        path.append(node)
        node = parent[node]
    path.reverse()

    index = {a: i for i, a in enumerate(inst.insertables)}
    parts: list[list[str]] = [[]]
    perm: list[int] = []
    for (pos, q), (pos2, q2) in zip(path, path[1:]):
        if pos2 == pos + 1:
            parts[-1].append(word[pos])
            continue
        gained = c.pairs[q2][1] & ~c.pairs[q][1]
        if gained:
            letter = inst.insertables[gained.bit_length() - 1]
            perm.append(index[letter] + 1)
            parts.append([])
    return InsertionWitness(tuple(tuple(p) for p in parts), tuple(perm), inst.insertables)
