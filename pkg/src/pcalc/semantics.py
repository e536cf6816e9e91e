"""First-order operational semantics: single steps, bounded state graphs,
weak and delay closures, and divergence analysis.

State identity everywhere is the canonical form, so graphs are quotiented by
structural congruence. Exploration is bounded and truncation is recorded
explicitly: a frontier state is one whose outgoing transitions were never
expanded, and downstream analyses must treat such graphs as partial.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .syntax import (
    InputPrefix,
    Nil,
    OutputPrefix,
    Par,
    Repl,
    Term,
    canonical_par,
    canonicalize,
    render,
    term_key,
)

DIV_YES = "yes"
DIV_NO = "no"
DIV_UNKNOWN = "unknown"


class SaturationOnTruncated(ValueError):
    pass


@dataclass(frozen=True)
class Action:
    kind: str  # 'tau' | 'in' | 'out'
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((self.kind, self.name)))

    def __hash__(self):
        return self._h

    @property
    def is_tau(self) -> bool:
        return self.kind == "tau"

    def complement(self) -> "Action":
        if self.kind == "in":
            return Action("out", self.name)
        if self.kind == "out":
            return Action("in", self.name)
        raise ValueError("tau has no complement")

    def sort_key(self):
        return ({"tau": 0, "in": 1, "out": 2}[self.kind], self.name)

    def label(self) -> str:
        if self.kind == "tau":
            return "tau"
        if self.kind == "in":
            return self.name
        return "'" + self.name

    @staticmethod
    def from_label(label: str) -> "Action":
        if label == "tau":
            return TAU
        if label.startswith("'"):
            return Action("out", label[1:])
        return Action("in", label)


TAU = Action("tau")


@dataclass(frozen=True)
class Bounds:
    max_states: int = 2000
    max_depth: int = 64

    def __post_init__(self):
        if self.max_states < 1 or self.max_depth < 1:
            raise ValueError("bounds must be at least 1")


# ---------------------------------------------------------------------------
# Single steps

_step_cache: dict = {}


def step(p: Term):
    """All transitions of p: a sorted, deduplicated tuple of (Action, target).

    Targets are canonical. Derivation rules: the two prefix axioms,
    interleaving, communication between parallel components, replication
    unfolding, and replication self-communication.
    """
    p = canonicalize(p)
    cached = _step_cache.get(p)
    if cached is None:
        cached = _step(p)
        _step_cache[p] = cached
    return cached


def _step(p: Term):
    moves = set()
    if isinstance(p, Nil):
        pass
    elif isinstance(p, InputPrefix):
        moves.add((Action("in", p.name), p.cont))
    elif isinstance(p, OutputPrefix):
        moves.add((Action("out", p.name), p.cont))
    elif isinstance(p, Repl):
        inner = step(p.body)
        for act, t in inner:
            moves.add((act, _par_of([t, p])))
        for act_in, t_in in inner:
            if act_in.kind != "in":
                continue
            for act_out, t_out in inner:
                if act_out.kind == "out" and act_out.name == act_in.name:
                    moves.add((TAU, _par_of([t_in, t_out, p])))
    elif isinstance(p, Par):
        parts = p.parts
        part_moves = [step(q) for q in parts]
        for i, ms in enumerate(part_moves):
            for act, t in ms:
                moves.add((act, _par_replace(parts, i, t)))
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                for act_i, t_i in part_moves[i]:
                    if act_i.is_tau:
                        continue
                    comp = act_i.complement()
                    for act_j, t_j in part_moves[j]:
                        if act_j == comp:
                            moves.add((TAU, _par_replace2(parts, i, t_i, j, t_j)))
    else:
        raise TypeError(f"not a first-order term: {p!r}")
    return tuple(sorted(moves, key=lambda m: (m[0].sort_key(), term_key(m[1]))))


def _par_of(parts) -> Term:
    return canonical_par(parts)


def _par_replace(parts, i, t) -> Term:
    return _par_of([t if k == i else q for k, q in enumerate(parts)])


def _par_replace2(parts, i, t_i, j, t_j) -> Term:
    repl = list(parts)
    repl[i] = t_i
    repl[j] = t_j
    return _par_of(repl)


def components(p: Term) -> Counter:
    """Multiset of parallel components of a canonical term."""
    if isinstance(p, Nil):
        return Counter()
    if isinstance(p, Par):
        return Counter(p.parts)
    return Counter((p,))


# ---------------------------------------------------------------------------
# Bounded graphs


@dataclass
class Lts:
    """A finite, possibly truncated transition graph over canonical terms.

    States are pairwise distinct canonical terms; frontier states are those
    whose outgoing transitions were not expanded (nonempty only when
    truncated). diverges holds one of 'yes'/'no'/'unknown' per state.
    """

    states: list
    edges: list  # (src, Action, dst), sorted by (src, action, dst key)
    initials: tuple
    truncated: bool
    frontier: frozenset
    depth: list
    diverges: list = field(default_factory=list)

    @property
    def initial(self) -> int:
        return self.initials[0]

    def __post_init__(self):
        self._succ = [[] for _ in self.states]
        for s, a, t in self.edges:
            self._succ[s].append((a, t))

    def succ(self, s: int):
        return self._succ[s]

    def tau_succ(self, s: int):
        return [t for a, t in self._succ[s] if a.is_tau]

    def index_of(self, p: Term):
        p = canonicalize(p)
        for i, s in enumerate(self.states):
            if s == p:
                return i
        raise KeyError(f"state not in graph: {render(p)}")

    def num_states(self) -> int:
        return len(self.states)

    def to_json(self) -> dict:
        return {
            "states": [render(s, compact=True) for s in self.states],
            "edges": [[s, a.label(), t] for s, a, t in self.edges],
            "initial": self.initial,
            "initials": list(self.initials),
            "truncated": self.truncated,
            "frontier": sorted(self.frontier),
            "diverges": list(self.diverges),
        }

    def to_dot(self) -> str:
        lines = ["digraph lts {", "  rankdir=LR;"]
        for i, s in enumerate(self.states):
            shape = "doublecircle" if self.diverges[i] == DIV_YES else "circle"
            label = render(s, compact=True).replace('"', '\\"')
            extra = ", style=bold" if i in self.initials else ""
            lines.append(f'  n{i} [shape={shape}, label="{label}"{extra}];')
        for s, a, t in self.edges:
            lines.append(f'  n{s} -> n{t} [label="{a.label()}"];')
        lines.append("}")
        return "\n".join(lines)


def build_lts(p: Term, bounds: Bounds = Bounds()) -> Lts:
    return union_lts([p], bounds)


def union_lts(terms, bounds: Bounds = Bounds()) -> Lts:
    """Breadth-first exploration from one or more roots over one state space.

    Deterministic: states are numbered in BFS discovery order with term-order
    tie-breaking among one state's newly discovered successors. A state is
    either fully expanded or left on the frontier untouched.
    """
    states: list = []
    index: dict = {}
    depth: list = []
    initials = []
    for t in terms:
        c = canonicalize(t)
        if c not in index:
            index[c] = len(states)
            states.append(c)
            depth.append(0)
        initials.append(index[c])
    edges = []
    frontier = set()
    truncated = False
    pos = 0
    while pos < len(states):
        s = states[pos]
        if depth[pos] >= bounds.max_depth:
            frontier.add(pos)
            truncated = True
            pos += 1
            continue
        moves = step(s)
        new_targets = []
        seen_new = set()
        for _a, t in moves:
            if t not in index and t not in seen_new:
                seen_new.add(t)
                new_targets.append(t)
        if len(states) + len(new_targets) > bounds.max_states:
            frontier.add(pos)
            truncated = True
            pos += 1
            continue
        for t in sorted(new_targets, key=term_key):
            index[t] = len(states)
            states.append(t)
            depth.append(depth[pos] + 1)
        for a, t in moves:
            edges.append((pos, a, index[t]))
        pos += 1
    edges.sort(key=lambda e: (e[0], e[1].sort_key(), e[2]))
    lts = Lts(states, edges, tuple(initials), truncated, frozenset(frontier), depth)
    lts.diverges = _divergence_flags(lts)
    return lts


# ---------------------------------------------------------------------------
# Divergence
#
# On a complete graph a state diverges iff it tau-reaches a tau-cycle. On a
# truncated graph a growth witness is also a sound yes: a tau-path s => t
# whose target's component multiset strictly contains the source's repeats
# forever, because steps survive added parallel context.


def _tau_adjacency(lts: Lts):
    return [[t for a, t in lts.succ(s) if a.is_tau] for s in range(lts.num_states())]


def _tau_reach_sets(lts: Lts):
    """Reflexive tau-reachability set per state."""
    adj = _tau_adjacency(lts)
    n = lts.num_states()
    reach = []
    for s in range(n):
        seen = {s}
        queue = deque((s,))
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        reach.append(frozenset(seen))
    return reach


def _divergence_flags(lts: Lts):
    n = lts.num_states()
    adj = _tau_adjacency(lts)
    reach = _tau_reach_sets(lts)
    on_cycle = set()
    for s in range(n):
        for t in adj[s]:
            if t == s or s in reach[t]:
                on_cycle.add(s)
                break
    yes_roots = set(on_cycle)
    if lts.truncated:
        comp = [components(p) for p in lts.states]
        for u in range(n):
            cu = comp[u]
            for v in reach[u]:
                if v == u:
                    continue
                cv = comp[v]
                if sum(cv.values()) > sum(cu.values()) and all(
                    cv[k] >= c for k, c in cu.items()
                ):
                    yes_roots.add(u)
                    break
    flags = []
    for s in range(n):
        if reach[s] & yes_roots:
            flags.append(DIV_YES)
        elif lts.truncated and reach[s] & lts.frontier:
            flags.append(DIV_UNKNOWN)
        else:
            flags.append(DIV_NO)
    return flags


def diverges(lts: Lts, s: int) -> str:
    if not 0 <= s < lts.num_states():
        raise KeyError(f"unknown state {s}")
    return lts.diverges[s]


# ---------------------------------------------------------------------------
# Weak and delay closures


@dataclass
class Closures:
    """Materialized weak machinery for one complete graph.

    tau_reach[s]: the reflexive => set. weak[s][action]: => action => targets
    (for tau, => itself). delay[s][action]: => action targets, visible actions
    only. bpairs(s, action): (mid, target) pairs with s => mid -action-> target.
    """

    lts: Lts
    tau_reach: list
    weak: list
    delay: list

    def bpairs(self, s: int, action: Action):
        pairs = self._bcache.get((s, action))
        if pairs is None:
            pairs = []
            for mid in sorted(self.tau_reach[s]):
                for a, t in self.lts.succ(mid):
                    if a == action:
                        pairs.append((mid, t))
            pairs = tuple(pairs)
            self._bcache[(s, action)] = pairs
        return pairs

    def __post_init__(self):
        self._bcache = {}


def closures(lts: Lts) -> Closures:
    if lts.truncated:
        raise SaturationOnTruncated("closures need a complete graph")
    n = lts.num_states()
    reach = _tau_reach_sets(lts)
    delay = [{} for _ in range(n)]
    weak = [{} for _ in range(n)]
    for s in range(n):
        dmap = {}
        for mid in reach[s]:
            for a, t in lts.succ(mid):
                if a.is_tau:
                    continue
                dmap.setdefault(a, set()).add(t)
        delay[s] = {a: frozenset(ts) for a, ts in dmap.items()}
        wmap = {TAU: frozenset(reach[s])}
        for a, ts in delay[s].items():
            targets = set()
            for t in ts:
                targets |= reach[t]
            wmap[a] = frozenset(targets)
        weak[s] = wmap
    return Closures(lts, reach, weak, delay)


@dataclass
class SaturatedLts:
    """A complete graph together with one mode's derived transitions."""

    lts: Lts
    mode: str  # 'weak' | 'delay'
    derived: list  # (src, Action, dst) incl. reflexive => as (s, tau, s)

    def primitive_edges(self):
        return list(self.lts.edges)


def saturate(lts: Lts, mode: str) -> SaturatedLts:
    if mode not in ("weak", "delay"):
        raise ValueError(f"unknown saturation mode {mode!r}")
    cls = closures(lts)
    derived = []
    for s in range(lts.num_states()):
        if mode == "weak":
            for a, ts in cls.weak[s].items():
                for t in sorted(ts):
                    derived.append((s, a, t))
        else:
            for t in sorted(cls.tau_reach[s]):
                if t != s:
                    derived.append((s, TAU, t))
            for a, ts in cls.delay[s].items():
                for t in sorted(ts):
                    derived.append((s, a, t))
    derived.sort(key=lambda e: (e[0], e[1].sort_key(), e[2]))
    return SaturatedLts(lts, mode, derived)
