"""Behavioral equivalence checkers over complete graphs, plus bounded
on-the-fly games for graphs that cannot be fully explored.

Five relations are supported, all divergence-sensitive: strong, weak and
branching bisimilarity are computed as partitions by signature refinement;
quasi-strong and quasi-strong-branching bisimilarity are computed as pair
relations by greatest-fixpoint deletion. Refuted pairs come with a minimal,
replayable attacker trace.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from . import semantics
from .semantics import Action, Bounds, Closures, Lts, closures, step, union_lts
from .syntax import Term, canonicalize, render, sc_equal, term_key

PARTITION_KINDS = ("strong", "weak", "branching")
PAIR_KINDS = ("quasi-strong", "qs-branching")
CCSM_KINDS = PARTITION_KINDS + PAIR_KINDS


class TruncatedInput(ValueError):
    pass


class InvalidRequest(ValueError):
    pass


# ---------------------------------------------------------------------------
# Witness values


@dataclass
class Partition:
    kind: str
    block_of: tuple
    iterations: int = 0

    def relates(self, s: int, t: int) -> bool:
        return self.block_of[s] == self.block_of[t]

    @property
    def blocks(self):
        groups = {}
        for s, b in enumerate(self.block_of):
            groups.setdefault(b, []).append(s)
        return tuple(tuple(g) for _b, g in sorted(groups.items()))

    def pairs(self) -> frozenset:
        out = set()
        for block in self.blocks:
            for i, j in itertools.combinations(block, 2):
                out.add((i, j))
        return frozenset(out)

    def to_json(self) -> dict:
        return {"kind": self.kind, "blocks": [list(b) for b in self.blocks]}


@dataclass
class PairRelation:
    kind: str
    pairs: frozenset  # normalized (i, j) with i <= j, identity included
    iterations: int = 0

    def relates(self, s: int, t: int) -> bool:
        return (min(s, t), max(s, t)) in self.pairs

    def to_json(self) -> dict:
        return {"kind": self.kind, "pairs": sorted([list(p) for p in self.pairs])}


@dataclass
class TraceStep:
    side: str  # 'left' | 'right'
    action: Action
    after: tuple  # (left term, right term)
    rolled_back: bool = False  # defender advanced to an intermediate state only

    def to_json(self) -> dict:
        out = {
            "side": self.side,
            "action": self.action.label(),
            "after": [render(self.after[0], compact=True), render(self.after[1], compact=True)],
        }
        if self.rolled_back:
            out["rolled_back"] = True
        return out


@dataclass
class AttackerTrace:
    kind: str
    start: tuple  # (left term, right term)
    steps: tuple
    reason: str  # 'no-match' | 'divergence-mismatch'
    final_side: str = ""
    final_action: Optional[Action] = None

    def __len__(self):
        n = len(self.steps)
        if self.reason == "no-match":
            n += 1
        return n

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "start": [render(self.start[0], compact=True), render(self.start[1], compact=True)],
            "steps": [s.to_json() for s in self.steps],
            "reason": self.reason,
        }
        if self.reason == "no-match":
            out["final"] = {"side": self.final_side, "action": self.final_action.label()}
        return out


@dataclass
class Verdict:
    outcome: str  # 'equivalent' | 'inequivalent' | 'unknown'
    kind: str
    witness: object = None
    trace: Optional[AttackerTrace] = None
    bound_report: Optional[dict] = None
    stats: dict = field(default_factory=dict)

    def to_json(self, with_millis: bool = True) -> dict:
        out = {"outcome": self.outcome, "kind": self.kind}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.trace is not None:
            out["trace"] = self.trace.to_json()
        if self.bound_report is not None:
            out["bound"] = self.bound_report
        stats = dict(self.stats)
        if not with_millis:
            stats.pop("millis", None)
        out["stats"] = stats
        return out


# ---------------------------------------------------------------------------
# Partition refinement


def compute_partition(lts: Lts, kind: str) -> Partition:
    """Coarsest divergence-sensitive partition for the given transfer style.

    The initial partition splits by the divergence flag; each round then
    splits blocks by transition signatures until nothing changes.
    """
    if kind not in PARTITION_KINDS:
        raise ValueError(f"not a partition kind: {kind!r}")
    if lts.truncated:
        raise TruncatedInput("partitions need a complete graph")
    n = lts.num_states()
    cls = closures(lts) if kind in ("weak", "branching") else None
    block_of = _index_groups([(lts.diverges[s],) for s in range(n)])
    iterations = 0
    while True:
        iterations += 1
        sigs = [_signature(lts, cls, kind, block_of, s) for s in range(n)]
        new_block_of = _index_groups([(block_of[s], sigs[s]) for s in range(n)])
        if max(new_block_of, default=-1) == max(block_of, default=-1):
            return Partition(kind, tuple(new_block_of), iterations)
        block_of = new_block_of


def _index_groups(keys):
    ids = {}
    out = []
    for k in keys:
        if k not in ids:
            ids[k] = len(ids)
        out.append(ids[k])
    return out


def _signature(lts: Lts, cls, kind: str, block_of, s: int):
    if kind == "strong":
        return frozenset((a.sort_key(), block_of[t]) for a, t in lts.succ(s))
    if kind == "weak":
        sig = set()
        for a, ts in cls.weak[s].items():
            for t in ts:
                sig.add((a.sort_key(), block_of[t]))
        return frozenset(sig)
    # branching: tau-paths inside the own block, then one exit step; a tau
    # step back into the own block is not an observation.
    own = block_of[s]
    internal = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for a, t in lts.succ(u):
            if a.is_tau and block_of[t] == own and t not in internal:
                internal.add(t)
                stack.append(t)
    sig = set()
    for u in internal:
        for a, t in lts.succ(u):
            if a.is_tau and block_of[t] == own:
                continue
            sig.add((a.sort_key(), block_of[t]))
    return frozenset(sig)


# ---------------------------------------------------------------------------
# Pair-relation greatest fixpoints
#
# A defender answer is a tuple of continuation pairs; the attacker then picks
# one of them. This uniformly covers the intermediate-state condition of the
# branching styles, whose answers expose both (challenger, mid) and
# (derivative, target).


def _norm(i, j):
    return (i, j) if i <= j else (j, i)


def _answers(lts: Lts, cls: Closures, kind: str, chal: int, defn: int, action: Action, deriv: int, left_is_chal: bool):
    """All defender answers; each is a tuple of (left, right) continuations."""

    def orient(c, d):
        return (c, d) if left_is_chal else (d, c)

    out = []
    if kind == "strong":
        for a, t in lts.succ(defn):
            if a == action:
                out.append((orient(deriv, t),))
    elif kind == "weak":
        targets = cls.tau_reach[defn] if action.is_tau else cls.weak[defn].get(action, ())
        for t in sorted(targets):
            out.append((orient(deriv, t),))
    elif kind == "quasi-strong":
        if action.is_tau:
            for a, t in lts.succ(defn):
                if a.is_tau:
                    out.append((orient(deriv, t),))
        else:
            for t in sorted(cls.delay[defn].get(action, ())):
                out.append((orient(deriv, t),))
    elif kind == "branching":
        if action.is_tau:
            out.append((orient(deriv, defn),))
        for mid, t in cls.bpairs(defn, action):
            out.append((orient(chal, mid), orient(deriv, t)))
    elif kind == "qs-branching":
        if action.is_tau:
            for a, t in lts.succ(defn):
                if a.is_tau:
                    out.append((orient(deriv, t),))
        else:
            for mid, t in cls.bpairs(defn, action):
                out.append((orient(chal, mid), orient(deriv, t)))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return out


def _pair_ok(lts: Lts, cls: Closures, kind: str, pair, relate) -> bool:
    l, r = pair
    if lts.diverges[l] != lts.diverges[r]:
        return False
    for chal, defn, left_is_chal in ((l, r, True), (r, l, False)):
        for action, deriv in lts.succ(chal):
            found = False
            for ans in _answers(lts, cls, kind, chal, defn, action, deriv, left_is_chal):
                if all(relate(a, b) for a, b in ans):
                    found = True
                    break
            if not found:
                return False
    return True


def pair_gfp(lts: Lts, kind: str, seed_pairs, cls: Closures = None) -> PairRelation:
    """Largest kind-bisimulation contained in the seed (normalized pairs)."""
    if lts.truncated:
        raise TruncatedInput("pair relations need a complete graph")
    if cls is None:
        cls = closures(lts)
    R = {_norm(i, j) for i, j in seed_pairs}
    R.update((s, s) for s in range(lts.num_states()))

    def relate(a, b):
        return _norm(a, b) in R

    iterations = 0
    changed = True
    while changed:
        iterations += 1
        changed = False
        for pair in sorted(R):
            if not _pair_ok(lts, cls, kind, pair, relate):
                R.discard(pair)
                changed = True
    return PairRelation(kind, frozenset(R), iterations)


def relation_pairs(lts: Lts, kind: str, parts: dict = None, cls: Closures = None):
    """Normalized equivalent-pair set for any of the five kinds."""
    if kind in PARTITION_KINDS:
        part = parts[kind] if parts and kind in parts else compute_partition(lts, kind)
        pairs = set(part.pairs())
        pairs.update((s, s) for s in range(lts.num_states()))
        return frozenset(pairs), part
    if kind == "quasi-strong":
        weak = parts["weak"] if parts and "weak" in parts else compute_partition(lts, "weak")
        rel = pair_gfp(lts, kind, weak.pairs(), cls)
    else:
        bran = parts["branching"] if parts and "branching" in parts else compute_partition(lts, "branching")
        rel = pair_gfp(lts, kind, bran.pairs(), cls)
    return rel.pairs, rel


# ---------------------------------------------------------------------------
# Refutation: ranked attacker game and trace extraction


def _rank_game(lts: Lts, cls: Closures, kind: str, start, relates):
    """Ranks of attacker-won pairs reachable from start; rank = moves to win."""
    start = tuple(start)
    universe = set()
    queue = [start]
    while queue:
        pair = queue.pop()
        if pair in universe:
            continue
        universe.add(pair)
        l, r = pair
        if relates(l, r):
            continue
        for chal, defn, left_is_chal in ((l, r, True), (r, l, False)):
            for action, deriv in lts.succ(chal):
                for ans in _answers(lts, cls, kind, chal, defn, action, deriv, left_is_chal):
                    for c in ans:
                        if c not in universe:
                            queue.append(c)
    ranks = {}
    for pair in universe:
        l, r = pair
        if not relates(l, r) and lts.diverges[l] != lts.diverges[r]:
            ranks[pair] = 0
    while start not in ranks:
        newly = []
        for pair in universe:
            if pair in ranks or relates(*pair):
                continue
            if _best_challenge(lts, cls, kind, pair, ranks) is not None:
                newly.append(pair)
        if not newly:
            break
        rnd = max(ranks.values(), default=0) + 1
        for pair in newly:
            ranks[pair] = rnd
    return ranks


def _best_challenge(lts: Lts, cls: Closures, kind: str, pair, ranks, below=None):
    """A challenge all of whose answers contain a ranked continuation.

    With a bound, only continuations of rank strictly below it count, which is
    what trace extraction needs to make progress. Challenges are tried in
    (action, side, derivative) order so traces are deterministic and
    tie-broken by action order.
    """

    def counts(c):
        return c in ranks and (below is None or ranks[c] < below)

    l, r = pair
    options = []
    for side, chal, defn, left_is_chal in (("left", l, r, True), ("right", r, l, False)):
        for action, deriv in lts.succ(chal):
            options.append(
                ((action.sort_key(), 0 if side == "left" else 1, deriv), action, deriv, side, chal, defn, left_is_chal)
            )
    options.sort(key=lambda o: o[0])
    for _key_, action, deriv, side, chal, defn, left_is_chal in options:
        answers = _answers(lts, cls, kind, chal, defn, action, deriv, left_is_chal)
        if all(any(counts(c) for c in ans) for ans in answers):
            return side, action, deriv, answers
    return None


def extract_trace(lts: Lts, kind: str, start, relates, cls: Closures = None) -> AttackerTrace:
    """Minimal attacker trace refuting the start pair; raises if it survives."""
    if cls is None:
        cls = closures(lts)
    start = tuple(start)
    if relates(*start):
        raise InvalidRequest("pair is equivalent; nothing to refute")
    ranks = _rank_game(lts, cls, kind, start, relates)
    if start not in ranks:
        raise InvalidRequest("refutation rank search did not converge")
    steps = []
    pair = start
    while True:
        if ranks[pair] == 0:
            return AttackerTrace(
                kind,
                (lts.states[start[0]], lts.states[start[1]]),
                tuple(steps),
                "divergence-mismatch",
            )
        bound = ranks[pair]
        side, action, deriv, answers = _best_challenge(lts, cls, kind, pair, ranks, below=bound)
        if not answers:
            chal = pair[0] if side == "left" else pair[1]
            return AttackerTrace(
                kind,
                (lts.states[start[0]], lts.states[start[1]]),
                tuple(steps),
                "no-match",
                final_side=side,
                final_action=action,
            )
        # defender plays the answer that survives longest; the attacker then
        # follows the lowest-ranked continuation of that answer
        best_ans, best_val = None, -1
        for ans in answers:
            val = min(ranks[c] for c in ans if c in ranks and ranks[c] < bound)
            if val > best_val:
                best_ans, best_val = ans, val
        nxt = min(
            (c for c in best_ans if c in ranks and ranks[c] < bound),
            key=lambda c: (ranks[c], c),
        )
        rolled = len(best_ans) > 1 and nxt == best_ans[0]
        steps.append(
            TraceStep(side, action, (lts.states[nxt[0]], lts.states[nxt[1]]), rolled_back=rolled)
        )
        pair = nxt


# ---------------------------------------------------------------------------
# Public checks on complete graphs


def check_pair(lts: Lts, s: int, t: int, kind: str) -> Verdict:
    """Decide a pair under quasi-strong or qs-branching bisimilarity."""
    if kind not in PAIR_KINDS:
        raise ValueError(f"check_pair handles {PAIR_KINDS}, not {kind!r}")
    if lts.truncated:
        raise TruncatedInput("check_pair needs a complete graph")
    cls = closures(lts)
    pairs, rel = relation_pairs(lts, kind, cls=cls)
    stats = {"states": lts.num_states(), "iterations": getattr(rel, "iterations", 0)}
    if (min(s, t), max(s, t)) in pairs:
        return Verdict("equivalent", kind, witness=rel, stats=stats)
    trace = extract_trace(lts, kind, (s, t), lambda a, b: (min(a, b), max(a, b)) in pairs, cls)
    return Verdict("inequivalent", kind, trace=trace, stats=stats)


@dataclass
class TauClassification:
    """Per-tau-edge labels plus the per-state stabilization distance k.

    An edge is state-preserving iff its endpoints share a weak block; k is the
    least number of tau steps to a state whose entire tau-closure stays in one
    weak block (finite on complete finite graphs; None encodes unbounded).
    """

    edge_labels: dict  # (src, dst) -> 'state-preserving' | 'state-changing'
    k: tuple
    weak: Partition

    def to_json(self) -> dict:
        return {
            "edges": [
                {"src": s, "dst": t, "label": lab}
                for (s, t), lab in sorted(self.edge_labels.items())
            ],
            "k": list(self.k),
        }


def classify_tau(lts: Lts, weak: Partition = None) -> TauClassification:
    if lts.truncated:
        raise TruncatedInput("tau classification needs a complete graph")
    if weak is None:
        weak = compute_partition(lts, "weak")
    labels = {}
    for s, a, t in lts.edges:
        if a.is_tau:
            lab = "state-preserving" if weak.relates(s, t) else "state-changing"
            labels[(s, t)] = lab
    cls = closures(lts)
    n = lts.num_states()
    stable = [all(weak.relates(s, t) for t in cls.tau_reach[s]) for s in range(n)]
    # multi-source BFS over reversed tau edges from the stable states
    rev = [[] for _ in range(n)]
    for s, a, t in lts.edges:
        if a.is_tau:
            rev[t].append(s)
    k = [None] * n
    frontier = [s for s in range(n) if stable[s]]
    for s in frontier:
        k[s] = 0
    d = 0
    while frontier:
        d += 1
        nxt = []
        for t in frontier:
            for s in rev[t]:
                if k[s] is None:
                    k[s] = d
                    nxt.append(s)
        frontier = nxt
    return TauClassification(labels, tuple(k), weak)


@dataclass
class CoincidenceReport:
    """Pairwise comparison of the five relations on one complete graph."""

    states: int
    equal_weak_qs: bool
    equal_weak_qsb: bool
    equal_weak_branching: bool
    strong_in_qs: bool
    qs_in_weak: bool
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "states": self.states,
            "weak=quasi-strong": self.equal_weak_qs,
            "weak=qs-branching": self.equal_weak_qsb,
            "weak=branching": self.equal_weak_branching,
            "strong<=quasi-strong": self.strong_in_qs,
            "quasi-strong<=weak": self.qs_in_weak,
            "violations": self.violations,
        }


def coincidence_report(lts: Lts) -> CoincidenceReport:
    if lts.truncated:
        raise TruncatedInput("coincidence report needs a complete graph")
    cls = closures(lts)
    parts = {k: compute_partition(lts, k) for k in PARTITION_KINDS}
    weak_pairs, _ = relation_pairs(lts, "weak", parts, cls)
    strong_pairs, _ = relation_pairs(lts, "strong", parts, cls)
    branching_pairs, _ = relation_pairs(lts, "branching", parts, cls)
    qs_pairs, _ = relation_pairs(lts, "quasi-strong", parts, cls)
    qsb_pairs, _ = relation_pairs(lts, "qs-branching", parts, cls)
    violations = []

    def diff(name, left, right):
        for pair in sorted(left ^ right):
            violations.append({"relation": name, "pair": list(pair)})

    diff("weak vs quasi-strong", weak_pairs, qs_pairs)
    diff("weak vs qs-branching", weak_pairs, qsb_pairs)
    diff("weak vs branching", weak_pairs, branching_pairs)
    for pair in sorted(strong_pairs - qs_pairs):
        violations.append({"relation": "strong not within quasi-strong", "pair": list(pair)})
    for pair in sorted(qs_pairs - weak_pairs):
        violations.append({"relation": "quasi-strong not within weak", "pair": list(pair)})
    return CoincidenceReport(
        lts.num_states(),
        weak_pairs == qs_pairs,
        weak_pairs == qsb_pairs,
        weak_pairs == branching_pairs,
        strong_pairs <= qs_pairs,
        qs_pairs <= weak_pairs,
        violations,
    )


# ---------------------------------------------------------------------------
# Bounded on-the-fly games
#
# For graphs that truncate, equivalence is semi-decided: a refutation found
# within the depth bound is sound, everything else is only "no distinction up
# to this depth". Defender weak moves explore at most tau_bound silent steps
# on each side of the answer.

_TAU_CAP = 4096


class _OnTheFly:
    def __init__(self, kind, tau_bound):
        self.kind = kind
        self.tau_bound = tau_bound
        self._closure_cache = {}
        self._step_cache = {}

    def moves(self, p):
        ms = self._step_cache.get(p)
        if ms is None:
            ms = step(p)
            self._step_cache[p] = ms
        return ms

    def tau_closure(self, p):
        seen = self._closure_cache.get(p)
        if seen is not None:
            return seen
        seen = {p: 0}
        queue = [p]
        while queue:
            u = queue.pop(0)
            if seen[u] >= self.tau_bound:
                continue
            for a, t in self.moves(u):
                if a.is_tau and t not in seen and len(seen) < _TAU_CAP:
                    seen[t] = seen[u] + 1
                    queue.append(t)
        out = tuple(sorted(seen, key=term_key))
        self._closure_cache[p] = out
        return out

    def answers(self, chal, defn, action, deriv, left_is_chal):
        def orient(c, d):
            return (c, d) if left_is_chal else (d, c)

        kind = self.kind
        out = []
        if kind == "strong":
            for a, t in self.moves(defn):
                if a == action:
                    out.append((orient(deriv, t),))
        elif kind == "weak":
            if action.is_tau:
                for t in self.tau_closure(defn):
                    out.append((orient(deriv, t),))
            else:
                seen = set()
                for pre in self.tau_closure(defn):
                    for a, mid in self.moves(pre):
                        if a == action:
                            for t in self.tau_closure(mid):
                                if t not in seen:
                                    seen.add(t)
                                    out.append((orient(deriv, t),))
        elif kind == "quasi-strong":
            if action.is_tau:
                for a, t in self.moves(defn):
                    if a.is_tau:
                        out.append((orient(deriv, t),))
            else:
                seen = set()
                for pre in self.tau_closure(defn):
                    for a, t in self.moves(pre):
                        if a == action and t not in seen:
                            seen.add(t)
                            out.append((orient(deriv, t),))
        elif kind == "branching":
            if action.is_tau:
                out.append((orient(deriv, defn),))
            for pre in self.tau_closure(defn):
                for a, t in self.moves(pre):
                    if a == action:
                        out.append((orient(chal, pre), orient(deriv, t)))
        elif kind == "qs-branching":
            if action.is_tau:
                for a, t in self.moves(defn):
                    if a.is_tau:
                        out.append((orient(deriv, t),))
            else:
                for pre in self.tau_closure(defn):
                    for a, t in self.moves(pre):
                        if a == action:
                            out.append((orient(chal, pre), orient(deriv, t)))
        else:
            raise ValueError(f"unknown kind {kind!r}")
        return out

    def attack(self, l, r, budget, safe):
        """Refutation steps from (l, r) within budget, or None."""
        if l == r or budget <= 0:
            return None
        key = (l, r)
        if safe.get(key, -1) >= budget:
            return None
        options = []
        for side, chal, defn, left_is_chal in (("left", l, r, True), ("right", r, l, False)):
            for action, deriv in self.moves(chal):
                options.append((action.sort_key(), 0 if side == "left" else 1, term_key(deriv), side, action, deriv, chal, defn, left_is_chal))
        options.sort(key=lambda o: o[:3])
        for _ak, _sd, _dk, side, action, deriv, chal, defn, left_is_chal in options:
            answers = self.answers(chal, defn, action, deriv, left_is_chal)
            if not answers:
                return [(side, action, None, False)]
            # every answer must offer a refutable continuation
            per_answer = []
            ok = True
            for ans in answers:
                chosen = None
                for cont in ans:
                    tail = self.attack(cont[0], cont[1], budget - 1, safe)
                    if tail is not None:
                        chosen = (cont, tail, len(ans) > 1 and cont == ans[0])
                        break
                if chosen is None:
                    ok = False
                    break
                per_answer.append(chosen)
            if ok:
                # show the defender answer whose refutation is longest
                cont, tail, rolled = max(per_answer, key=lambda c: len(c[1]))
                return [(side, action, cont, rolled)] + tail
        safe[key] = budget
        return None


def bounded_game(p: Term, q: Term, kind: str, depth: int, tau_bound: int = None) -> Verdict:
    """Semi-decide a pair by a depth-bounded game directly over terms.

    A returned refutation is a concrete attacker strategy and is sound as long
    as tau_bound covers the defender's silent moves; otherwise the verdict is
    unknown with a no-distinction bound report.
    """
    if kind not in CCSM_KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    p, q = canonicalize(p), canonicalize(q)
    if tau_bound is None:
        tau_bound = max(depth, 4)
    game = _OnTheFly(kind, tau_bound)
    found = None
    for budget in range(1, depth + 1):
        found = game.attack(p, q, budget, {})
        if found is not None:
            break
    if found is None:
        return Verdict(
            "unknown",
            kind,
            bound_report={"no_distinction_up_to": depth, "tau_bound": tau_bound},
            stats={"depth": depth},
        )
    steps = []
    cur = (p, q)
    reason = "no-match"
    final_side, final_action = "", None
    for side, action, cont, rolled in found:
        if cont is None:
            final_side, final_action = side, action
            break
        steps.append(TraceStep(side, action, cont, rolled_back=rolled))
        cur = cont
    trace = AttackerTrace(kind, (p, q), tuple(steps), reason, final_side, final_action)
    return Verdict("inequivalent", kind, trace=trace, stats={"depth": depth})


# ---------------------------------------------------------------------------
# Orchestration: exact when the graph completes, bounded otherwise


def decide(p: Term, q: Term, kind: str, bounds: Bounds = Bounds(), game_depth: int = 6, tau_bound: int = None) -> Verdict:
    """Full decision pipeline for one first-order equivalence."""
    if kind == "sc":
        eq = sc_equal(p, q)
        return Verdict("equivalent" if eq else "inequivalent", "sc", stats={})
    if kind not in CCSM_KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    lts = union_lts([p, q], bounds)
    s, t = lts.initials[0], lts.initials[-1]
    stats = {"states": lts.num_states()}
    if not lts.truncated:
        if kind in PARTITION_KINDS:
            part = compute_partition(lts, kind)
            stats["iterations"] = part.iterations
            if part.relates(s, t):
                return Verdict("equivalent", kind, witness=part, stats=stats)
            trace = extract_trace(lts, kind, (s, t), part.relates)
            return Verdict("inequivalent", kind, trace=trace, stats=stats)
        verdict = check_pair(lts, s, t, kind)
        verdict.stats.update(stats)
        return verdict
    # truncated: sound refutations only
    div_l, div_r = lts.diverges[s], lts.diverges[t]
    if {div_l, div_r} == {semantics.DIV_YES, semantics.DIV_NO}:
        trace = AttackerTrace(kind, (lts.states[s], lts.states[t]), (), "divergence-mismatch")
        return Verdict("inequivalent", kind, trace=trace, stats=stats)
    verdict = bounded_game(p, q, kind, game_depth, tau_bound)
    verdict.stats.update(stats)
    return verdict
