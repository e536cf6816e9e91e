"""Certificates and counterexample evidence.

A certificate is a finite candidate relation checked against the up-to-context
discipline: every transition of one side must be answered weakly by the other
so that, after stripping a common parallel context, the residues are again in
the relation (or already known equivalent, or syntactically equal). A
certified relation is contained in weak bisimilarity, so certification is a
sound equivalence proof even for infinite-state terms.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from . import equivalence, semantics
from .equivalence import AttackerTrace, InvalidRequest, compute_partition, extract_trace, relation_pairs
from .semantics import Action, Bounds, Lts, build_lts, closures, components, step, union_lts
from .syntax import Term, canonical_par, canonicalize, parse, render, term_key


class ReplayError(AssertionError):
    pass


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class Certificate:
    pairs: tuple  # ((Term, Term), ...), canonicalized
    discipline: str = "upto-context"  # 'plain' | 'upto-context'
    closure_budget: int = 256

    def __post_init__(self):
        if self.discipline not in ("plain", "upto-context"):
            raise ValueError(f"unknown discipline {self.discipline!r}")
        if self.closure_budget < 1:
            raise ValueError("closure budget must be positive")
        self.pairs = tuple((canonicalize(p), canonicalize(q)) for p, q in self.pairs)

    @staticmethod
    def from_json(data: dict) -> "Certificate":
        pairs = tuple((parse(a), parse(b)) for a, b in data["pairs"])
        return Certificate(
            pairs,
            discipline=data.get("discipline", "upto-context"),
            closure_budget=int(data.get("budget", 256)),
        )

    def to_json(self) -> dict:
        return {
            "discipline": self.discipline,
            "budget": self.closure_budget,
            "pairs": [[render(p, compact=True), render(q, compact=True)] for p, q in self.pairs],
        }


@dataclass
class Obligation:
    pair: tuple
    direction: str  # which side fired the challenge
    action: Action
    derivative: Term
    answer: Optional[Term]
    context: Optional[Term]  # the stripped parallel part; None means [.]
    via: str  # 'equal' | 'pair' | 'known'

    def to_json(self) -> dict:
        ctx = "[.]" if self.context is None else render(self.context, compact=True) + " | [.]"
        return {
            "pair": [render(self.pair[0], compact=True), render(self.pair[1], compact=True)],
            "direction": self.direction,
            "action": self.action.label(),
            "derivative": render(self.derivative, compact=True),
            "answer": render(self.answer, compact=True) if self.answer is not None else None,
            "context": ctx,
            "via": self.via,
        }


@dataclass
class CertResult:
    outcome: str  # 'certified' | 'refuted' | 'budget-exhausted'
    obligations: list
    failure: Optional[dict] = None

    def to_json(self) -> dict:
        out = {
            "outcome": self.outcome,
            "obligations": [o.to_json() for o in self.obligations],
        }
        if self.failure is not None:
            out["failure"] = self.failure
        return out


class KnownEquivalence:
    """Finite-state weak-equivalence lookups to discharge certificate residues."""

    def __init__(self, lts: Lts, partition):
        self.lts = lts
        self.partition = partition
        self._index = {s: i for i, s in enumerate(lts.states)}

    @staticmethod
    def from_terms(terms, bounds: Bounds = Bounds(512, 64)) -> Optional["KnownEquivalence"]:
        lts = union_lts(list(terms), bounds)
        if lts.truncated:
            return None
        return KnownEquivalence(lts, compute_partition(lts, "weak"))

    def relates(self, p: Term, q: Term) -> bool:
        i = self._index.get(canonicalize(p))
        j = self._index.get(canonicalize(q))
        return i is not None and j is not None and self.partition.relates(i, j)


class _LazyClosure:
    """Silent closure of one term, explored breadth-first on demand."""

    def __init__(self, root: Term, budget: int):
        self.budget = budget
        self.order = [root]
        self.seen = {root}
        self.pos = 0
        self.capped = False

    def _extend(self) -> bool:
        if self.pos >= len(self.order):
            return False
        u = self.order[self.pos]
        self.pos += 1
        for a, t in step(u):
            if not a.is_tau or t in self.seen:
                continue
            if len(self.order) >= self.budget:
                self.capped = True
                continue
            self.seen.add(t)
            self.order.append(t)
        return True

    def __iter__(self):
        i = 0
        while True:
            while i >= len(self.order):
                if not self._extend():
                    return
            yield self.order[i]
            i += 1

    @property
    def complete(self) -> bool:
        return not self.capped and self.pos >= len(self.order)


class _TauExplorer:
    """Budget-capped weak-answer enumeration, closest candidates first."""

    def __init__(self, budget: int):
        self.budget = budget
        self._closures = {}

    def closure(self, p: Term) -> _LazyClosure:
        c = self._closures.get(p)
        if c is None:
            c = _LazyClosure(p, self.budget)
            self._closures[p] = c
        return c

    def weak_answers(self, q: Term, action: Action):
        """Yields candidate answers lazily; call completeness() after draining."""
        used = [self.closure(q)]
        capped = [False]

        def gen():
            if action.is_tau:
                yield from used[0]
                return
            emitted = set()
            for u in used[0]:
                for a, v in step(u):
                    if a != action:
                        continue
                    post = self.closure(v)
                    used.append(post)
                    for w in post:
                        if w not in emitted:
                            emitted.add(w)
                            yield w
                        if len(emitted) >= self.budget:
                            capped[0] = True
                            return

        def completeness():
            return not capped[0] and all(c.complete for c in used)

        return gen(), completeness


def _strip_candidates(x: Term, y: Term, discipline: str):
    """Residue pairs after removing a shared parallel part, largest part first.

    Yields (context_term_or_None, residue_x, residue_y); restricted to parallel
    contexts T | [.], with T = 0 giving plain matching.
    """
    yield None, x, y
    if discipline != "upto-context":
        return
    cx, cy = components(x), components(y)
    common = cx & cy
    if not common:
        return
    items = sorted(common.items(), key=lambda kv: term_key(kv[0]))
    choices = [range(count, -1, -1) for _t, count in items]
    vectors = sorted(
        itertools.product(*choices),
        key=lambda v: (-sum(v), v),
    )
    for vec in vectors:
        if not any(vec):
            continue
        taken = Counter()
        for (t, _c), k in zip(items, vec):
            if k:
                taken[t] = k
        rx = canonical_par(list((cx - taken).elements()))
        ry = canonical_par(list((cy - taken).elements()))
        yield canonical_par(list(taken.elements())), rx, ry


def check_certificate(cert: Certificate, known_equiv: Optional[KnownEquivalence] = None) -> CertResult:
    """Discharge every transition obligation of every pair, both directions.

    Refuted only when the weak-answer search space was exhausted within the
    budget; a capped search that found nothing is budget exhaustion, not a
    refutation.
    """
    rel = set()
    for p, q in cert.pairs:
        rel.add((p, q))
        rel.add((q, p))

    def membership(a: Term, b: Term) -> Optional[str]:
        if a == b:
            return "equal"
        if (a, b) in rel:
            return "pair"
        if known_equiv is not None and known_equiv.relates(a, b):
            return "known"
        return None

    explorer = _TauExplorer(cert.closure_budget)
    obligations = []
    exhausted = False
    probe = Bounds(min(cert.closure_budget, 64), 16)
    for pair in cert.pairs:
        flags = [build_lts(side, probe).diverges[0] for side in pair]
        if {flags[0], flags[1]} == {semantics.DIV_YES, semantics.DIV_NO}:
            return CertResult(
                "refuted",
                obligations,
                failure={
                    "pair": [render(pair[0], compact=True), render(pair[1], compact=True)],
                    "reason": "divergence-mismatch",
                    "flags": flags,
                },
            )
        if semantics.DIV_UNKNOWN in flags:
            exhausted = True
        for chal, defn, direction in ((pair[0], pair[1], "left"), (pair[1], pair[0], "right")):
            for action, deriv in step(chal):
                candidates, completeness = explorer.weak_answers(defn, action)
                found = None
                for answer in candidates:
                    for ctx, rx, ry in _strip_candidates(deriv, answer, cert.discipline):
                        via = membership(rx, ry)
                        if via is not None:
                            found = Obligation(pair, direction, action, deriv, answer, ctx, via)
                            break
                    if found is not None:
                        break
                if found is not None:
                    obligations.append(found)
                elif completeness():
                    return CertResult(
                        "refuted",
                        obligations,
                        failure={
                            "pair": [render(pair[0], compact=True), render(pair[1], compact=True)],
                            "direction": direction,
                            "action": action.label(),
                            "derivative": render(deriv, compact=True),
                            "reason": "no-answer",
                        },
                    )
                else:
                    exhausted = True
    if exhausted:
        return CertResult("budget-exhausted", obligations)
    return CertResult("certified", obligations)


# ---------------------------------------------------------------------------
# Modal distinguishing formulas (diamond, conjunction, negation)


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class DiamondF:
    action: Action
    sub: object


@dataclass(frozen=True)
class AndF:
    subs: tuple


@dataclass(frozen=True)
class NotF:
    sub: object


def formula_str(f) -> str:
    if isinstance(f, TrueF):
        return "tt"
    if isinstance(f, DiamondF):
        return f"<{f.action.label()}>{formula_str(f.sub)}"
    if isinstance(f, AndF):
        if not f.subs:
            return "tt"
        return "(" + " & ".join(formula_str(s) for s in f.subs) + ")"
    if isinstance(f, NotF):
        return "~" + formula_str(f.sub)
    raise TypeError(f"not a formula: {f!r}")


def satisfies(lts: Lts, s: int, f) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, DiamondF):
        return any(a == f.action and satisfies(lts, t, f.sub) for a, t in lts.succ(s))
    if isinstance(f, AndF):
        return all(satisfies(lts, s, sub) for sub in f.subs)
    if isinstance(f, NotF):
        return not satisfies(lts, s, f.sub)
    raise TypeError(f"not a formula: {f!r}")


def distinguishing_formula(lts: Lts, s: int, t: int):
    """Formula true at s and false at t, from divergence-blind strong
    refinement rounds; None when only divergence separates the states."""
    n = lts.num_states()
    history = [[0] * n]
    while True:
        prev = history[-1]
        sigs = [
            frozenset((a.sort_key(), prev[v]) for a, v in lts.succ(u)) for u in range(n)
        ]
        nxt = equivalence._index_groups([(prev[u], sigs[u]) for u in range(n)])
        if max(nxt) == max(prev):
            break
        history.append(nxt)
    if history[-1][s] == history[-1][t]:
        return None

    def rank(u, v):
        for i, blk in enumerate(history):
            if blk[u] != blk[v]:
                return i
        raise AssertionError("states not separated")

    def build(u, v):
        r = rank(u, v)
        blk = history[r - 1]
        su = {(a, blk[x]) for a, x in lts.succ(u)}
        sv = {(a, blk[x]) for a, x in lts.succ(v)}
        only_u = sorted(su - sv, key=lambda o: (o[0].sort_key(), o[1]))
        if only_u:
            action, target_blk = only_u[0]
            u2 = min(
                (x for a, x in lts.succ(u) if a == action and blk[x] == target_blk),
            )
            subs = tuple(build(u2, v2) for a, v2 in lts.succ(v) if a == action)
            return DiamondF(action, AndF(subs) if subs else TrueF())
        return NotF(build(v, u))

    return build(s, t)


# ---------------------------------------------------------------------------
# Distinguishing evidence


@dataclass
class Evidence:
    trace: AttackerTrace
    formula: object = None

    def to_json(self) -> dict:
        out = {"trace": self.trace.to_json()}
        if self.formula is not None:
            out["formula"] = formula_str(self.formula)
        return out


def distinguishing_evidence(lts: Lts, s: int, t: int, kind: str) -> Evidence:
    """Minimal attacker trace for an inequivalent pair; for the strong kind a
    modal distinguishing formula is synthesized too when one exists."""
    if lts.truncated:
        raise equivalence.TruncatedInput("evidence extraction needs a complete graph")
    cls = closures(lts)
    pairs, _rel = relation_pairs(lts, kind, cls=cls)
    if (min(s, t), max(s, t)) in pairs:
        raise InvalidRequest("states are equivalent under this kind")
    trace = extract_trace(lts, kind, (s, t), lambda a, b: (min(a, b), max(a, b)) in pairs, cls)
    replay_trace(trace, tau_bound=lts.num_states())
    formula = distinguishing_formula(lts, s, t) if kind == "strong" else None
    if formula is not None:
        if not satisfies(lts, s, formula) or satisfies(lts, t, formula):
            raise ReplayError("formula does not separate the pair")
    return Evidence(trace, formula)


# ---------------------------------------------------------------------------
# Trace replay
#
# Traces carry canonical terms, so they replay directly through the transition
# engine without the graph they were extracted from.


def replay_trace(trace: AttackerTrace, tau_bound: int = 8, tau_cap: int = 4096) -> bool:
    game = equivalence._OnTheFly(trace.kind, tau_bound)
    cur = tuple(canonicalize(t) for t in trace.start)
    for st in trace.steps:
        chal_i = 0 if st.side == "left" else 1
        defn_i = 1 - chal_i
        after = (canonicalize(st.after[0]), canonicalize(st.after[1]))
        if st.rolled_back:
            if after[chal_i] != cur[chal_i]:
                raise ReplayError("rolled-back step moved the challenger")
            if after[defn_i] not in game.tau_closure(cur[defn_i]):
                raise ReplayError("intermediate state not silently reachable")
        else:
            targets = [t for a, t in step(cur[chal_i]) if a == st.action]
            if after[chal_i] not in targets:
                raise ReplayError(
                    f"challenger has no {st.action.label()} step to {render(after[chal_i])}"
                )
            if not _defender_reaches(game, trace.kind, cur[defn_i], st.action, after[defn_i]):
                raise ReplayError("defender answer is not a legal response")
        cur = after
    if trace.reason == "no-match":
        chal_i = 0 if trace.final_side == "left" else 1
        defn_i = 1 - chal_i
        derivs = [t for a, t in step(cur[chal_i]) if a == trace.final_action]
        if not derivs:
            raise ReplayError("final challenge is not a real transition")
        if all(
            game.answers(cur[chal_i], cur[defn_i], trace.final_action, deriv, chal_i == 0)
            for deriv in derivs
        ):
            raise ReplayError("defender still has an answer to the final challenge")
    else:
        probe = Bounds(512, 32)
        flags = {build_lts(side, probe).diverges[0] for side in cur}
        if flags != {semantics.DIV_YES, semantics.DIV_NO}:
            raise ReplayError("terminal pair does not mismatch on divergence")
    return True


def _defender_reaches(game, kind: str, source: Term, action: Action, target: Term) -> bool:
    if kind == "strong":
        return any(a == action and t == target for a, t in step(source))
    if action.is_tau:
        if kind in ("quasi-strong", "qs-branching"):
            return any(a.is_tau and t == target for a, t in step(source))
        if kind == "branching":
            if target == source:
                return True
            return any(
                any(a.is_tau and t == target for a, t in step(mid))
                for mid in game.tau_closure(source)
            )
        return target in game.tau_closure(source)
    for mid in game.tau_closure(source):
        for a, t in step(mid):
            if a != action:
                continue
            if kind in ("quasi-strong", "qs-branching", "branching"):
                if t == target:
                    return True
            else:
                if target in game.tau_closure(t):
                    return True
    return False


# ---------------------------------------------------------------------------
# Certificate files


def load_certificate(path: str) -> Certificate:
    with open(path, "r", encoding="utf-8") as fh:
        return Certificate.from_json(json.load(fh))
