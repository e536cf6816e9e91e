"""Higher-order semantics: substitution, derived replication, transitions
with process payloads, and a bounded context-bisimulation game.

The input rule is infinitely branching, so visible input transitions are
instantiated over a finite test family; communication always transmits the
actual payload. Because the output clause quantifies over all receiving
contexts, equivalence is never claimed: verdicts are either a concrete
refutation or "no distinction up to the given depth".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .syntax import (
    NIL,
    GuardedRepl,
    HoInput,
    HoOutput,
    Nil,
    Par,
    Repl,
    Term,
    Var,
    canonicalize,
    free_vars,
    is_closed,
    names,
    render,
    subterms,
    term_key,
)


class OpenTermError(ValueError):
    pass


@dataclass(frozen=True)
class HoAction:
    kind: str  # 'tau' | 'in' | 'out'
    channel: str = ""
    payload: Term = NIL

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((self.kind, self.channel, self.payload)))

    def __hash__(self):
        return self._h

    @property
    def is_tau(self) -> bool:
        return self.kind == "tau"

    def sort_key(self):
        return ({"tau": 0, "in": 1, "out": 2}[self.kind], self.channel, term_key(self.payload))

    def label(self) -> str:
        if self.kind == "tau":
            return "tau"
        if self.kind == "in":
            return f"{self.channel}({render(self.payload, compact=True)})"
        return f"'{self.channel}<{render(self.payload, compact=True)}>"


HO_TAU = HoAction("tau")


# ---------------------------------------------------------------------------
# Substitution


def ho_subst(p: Term, x: str, a: Term) -> Term:
    """P{A/X} for closed A, canonicalized. Binders shadowing x are left alone."""
    if not is_closed(a):
        raise OpenTermError(f"payload must be closed: {render(a)}")
    return canonicalize(_subst(p, x, a))


def _subst(p: Term, x: str, a: Term) -> Term:
    if isinstance(p, Var):
        return a if p.name == x else p
    if isinstance(p, Nil):
        return p
    if isinstance(p, HoInput):
        if p.var == x:
            return p
        return HoInput(p.channel, p.var, _subst(p.body, x, a))
    if isinstance(p, HoOutput):
        return HoOutput(p.channel, _subst(p.message, x, a), _subst(p.cont, x, a))
    if isinstance(p, Par):
        return Par(tuple(_subst(q, x, a) for q in p.parts))
    raise TypeError(f"not a higher-order term: {p!r}")


# ---------------------------------------------------------------------------
# Derived replication
#
#   !P      =  'c<Q>.0 | Q      where Q = c(X).('c<X>.0 | X | P)
#   !g f.P  =  'c<Q>.0 | Q      where Q = c(X).(f.('c<X>.0 | X | P))
#
# c is a replicator name, chosen fresh deterministically as the first of
# c0, c1, ... not occurring in the subject term nor in the avoid set.


def _fresh_replicator(avoid) -> str:
    i = 0
    while True:
        cand = f"c{i}"
        if cand not in avoid:
            return cand
        i += 1


def _fresh_var(terms) -> str:
    used = set()
    for t in terms:
        for sub in subterms(t):
            if isinstance(sub, Var):
                used.add(sub.name)
            elif isinstance(sub, HoInput):
                used.add(sub.var)
    if "X" not in used:
        return "X"
    i = 0
    while f"X{i}" in used:
        i += 1
    return f"X{i}"


def derived_replication(p: Term, guard: Optional[Term] = None, avoid=()) -> Term:
    """Replication encoding of p; guard carries the prefix of the guarded form
    (an input or output node whose own continuation is ignored)."""
    if free_vars(p):
        raise OpenTermError(f"replication body must be closed: {render(p)}")
    return _build_replication(p, guard, avoid)


def _build_replication(p: Term, guard: Optional[Term], avoid) -> Term:
    avoid = set(avoid) | names(p)
    if guard is not None:
        avoid |= names(guard)
    c = _fresh_replicator(avoid)
    x = _fresh_var((p, guard) if guard is not None else (p,))
    inner = Par((HoOutput(c, Var(x), NIL), Var(x), p))
    if guard is None:
        body = inner
    elif isinstance(guard, HoInput):
        body = HoInput(guard.channel, guard.var, inner)
    elif isinstance(guard, HoOutput):
        body = HoOutput(guard.channel, guard.message, inner)
    else:
        raise TypeError(f"guard must be a prefix: {guard!r}")
    q = HoInput(c, x, body)
    return Par((HoOutput(c, q, NIL), q))


def expand_replications(term: Term) -> Term:
    """Replace every replication macro in a parsed higher-order term.

    Expansion runs bottom-up, left to right; every expansion avoids all names
    seen so far, so distinct macros get distinct replicator names c0, c1, ...
    """
    used = set(names(term))

    def walk(t):
        if isinstance(t, (Nil, Var)):
            return t
        if isinstance(t, HoInput):
            return HoInput(t.channel, t.var, walk(t.body))
        if isinstance(t, HoOutput):
            return HoOutput(t.channel, walk(t.message), walk(t.cont))
        if isinstance(t, Par):
            return Par(tuple(walk(q) for q in t.parts))
        if isinstance(t, Repl):
            body = walk(t.body)
            exp = _build_replication(body, None, used)
            used.update(names(exp))
            return exp
        if isinstance(t, GuardedRepl):
            pre = t.prefix
            if isinstance(pre, HoInput):
                guard, body = HoInput(pre.channel, pre.var, NIL), walk(pre.body)
            else:
                guard, body = HoOutput(pre.channel, walk(pre.message), NIL), walk(pre.cont)
            exp = _build_replication(body, guard, used)
            used.update(names(exp))
            return exp
        raise TypeError(f"not a higher-order term: {t!r}")

    return walk(term)


# ---------------------------------------------------------------------------
# Test families


@dataclass(frozen=True)
class Context:
    """A term with hole occurrences, encoded as free occurrences of hole."""

    term: Term
    hole: str = "X"

    def apply(self, a: Term) -> Term:
        return ho_subst(self.term, self.hole, a)

    def label(self) -> str:
        return render(self.term, compact=True).replace(self.hole, "[.]")


@dataclass
class TestFamilies:
    """Finite stand-ins for the quantifiers of the context-bisimulation game.

    inputs instantiate received payloads; contexts close the output clause.
    Both always contain the identity/degenerate members and fresh-name
    triggers, so refutations found with them are genuine.
    """

    __test__ = False  # not a pytest class

    inputs: tuple
    contexts: tuple
    size_bound: int = 8

    @staticmethod
    def default(p: Term, q: Term, size_bound: int = 8) -> "TestFamilies":
        used = names(p) | names(q)
        m = "m"
        i = 0
        while m in used:
            m = f"m{i}"
            i += 1
        payloads = []
        seen = set()
        for t in (p, q):
            for sub in subterms(t):
                if isinstance(sub, HoOutput):
                    msg = canonicalize(sub.message)
                    if not free_vars(sub.message) and msg not in seen:
                        seen.add(msg)
                        payloads.append(msg)
        payloads.sort(key=term_key)
        trigger_in = canonicalize(HoInput(m, "X", NIL))
        trigger_out = canonicalize(HoOutput(m, NIL, NIL))
        inputs = [NIL] + [t for t in payloads if t != NIL] + [trigger_in, trigger_out]
        hole = Var("X")
        contexts = (
            Context(hole),
            Context(Par((hole, HoInput(m, "Y", NIL)))),
            Context(Par((hole, HoOutput(m, NIL, NIL)))),
            Context(Par((HoInput(m, "Y", NIL), hole))),
            Context(Par((hole, hole))),
        )
        return TestFamilies(tuple(dict.fromkeys(inputs)), contexts, size_bound)

    def to_json(self) -> dict:
        return {
            "inputs": [render(t, compact=True) for t in self.inputs],
            "contexts": [c.label() for c in self.contexts],
            "size_bound": self.size_bound,
        }


# ---------------------------------------------------------------------------
# Transitions


def ho_step(p: Term, fam: TestFamilies):
    """Transitions of a closed canonical term; inputs range over fam.inputs,
    communication uses the actual transmitted payload."""
    p = canonicalize(p)
    if free_vars(p):
        raise OpenTermError(f"term must be closed: {render(p)}")
    moves = set()
    _ho_moves(p, fam, moves)
    return tuple(sorted(moves, key=lambda m: (m[0].sort_key(), term_key(m[1]))))


def _ho_moves(p: Term, fam: TestFamilies, moves: set):
    if isinstance(p, Nil):
        return
    if isinstance(p, HoInput):
        for a in fam.inputs:
            moves.add((HoAction("in", p.channel, a), ho_subst(p.body, p.var, a)))
        return
    if isinstance(p, HoOutput):
        moves.add((HoAction("out", p.channel, canonicalize(p.message)), canonicalize(p.cont)))
        return
    if isinstance(p, Par):
        parts = p.parts
        for i, part in enumerate(parts):
            sub = set()
            _ho_moves(part, fam, sub)
            for act, t in sub:
                moves.add((act, _ho_par_replace(parts, i, t)))
        for i, recv in enumerate(parts):
            if not isinstance(recv, HoInput):
                continue
            for j, send in enumerate(parts):
                if i == j or not isinstance(send, HoOutput):
                    continue
                if recv.channel != send.channel:
                    continue
                ti = ho_subst(recv.body, recv.var, canonicalize(send.message))
                tj = canonicalize(send.cont)
                moves.add((HO_TAU, _ho_par_replace2(parts, i, ti, j, tj)))
        return
    raise TypeError(f"not a closed higher-order term: {p!r}")


def _ho_par_replace(parts, i, t) -> Term:
    return canonicalize(Par(tuple(t if k == i else q for k, q in enumerate(parts))))


def _ho_par_replace2(parts, i, ti, j, tj) -> Term:
    repl = list(parts)
    repl[i] = ti
    repl[j] = tj
    return canonicalize(Par(tuple(repl)))


# ---------------------------------------------------------------------------
# Bounded context-bisimulation game


@dataclass
class HoTraceStep:
    side: str
    action: HoAction
    after: tuple  # (left term, right term)
    context: str = ""  # context picked at an output fork, if any

    def to_json(self) -> dict:
        out = {
            "side": self.side,
            "action": self.action.label(),
            "after": [render(self.after[0], compact=True), render(self.after[1], compact=True)],
        }
        if self.context:
            out["context"] = self.context
        return out


@dataclass
class HoVerdict:
    outcome: str  # 'inequivalent' | 'no-distinction'
    mode: str
    depth: int
    trace: Optional[list] = None
    families: Optional[TestFamilies] = None
    start: tuple = ()
    final: tuple = ()  # (side, action) of the unanswered challenge
    stats: dict = field(default_factory=dict)

    def to_json(self, with_millis: bool = True) -> dict:
        out = {
            "outcome": self.outcome,
            "kind": f"context-{self.mode}",
            "equivalence_claimed": False,
        }
        if self.outcome == "no-distinction":
            out["bound"] = {"no_distinction_up_to": self.depth}
        if self.trace is not None:
            out["trace"] = {
                "start": [render(self.start[0], compact=True), render(self.start[1], compact=True)],
                "steps": [s.to_json() for s in self.trace],
                "reason": "no-match",
                "final": {"side": self.final[0], "action": self.final[1].label()},
            }
        if self.families is not None:
            out["families_used"] = self.families.to_json()
        stats = dict(self.stats)
        if not with_millis:
            stats.pop("millis", None)
        out["stats"] = stats
        return out


class _HoGame:
    def __init__(self, mode, fam, tau_bound, tau_cap=2048):
        self.mode = mode
        self.fam = fam
        self.tau_bound = tau_bound
        self.tau_cap = tau_cap
        self._moves = {}
        self._closure = {}

    def moves(self, p):
        ms = self._moves.get(p)
        if ms is None:
            ms = ho_step(p, self.fam)
            self._moves[p] = ms
        return ms

    def tau_closure(self, p):
        out = self._closure.get(p)
        if out is not None:
            return out
        seen = {p: 0}
        queue = [p]
        while queue:
            u = queue.pop(0)
            if seen[u] >= self.tau_bound:
                continue
            for a, t in self.moves(u):
                if a.is_tau and t not in seen and len(seen) < self.tau_cap:
                    seen[t] = seen[u] + 1
                    queue.append(t)
        out = tuple(sorted(seen, key=term_key))
        self._closure[p] = out
        return out

    def _matching(self, defn, action):
        """Defender transitions answering the given action shape."""
        if self.mode == "strong":
            if action.is_tau:
                return [t for a, t in self.moves(defn) if a.is_tau]
            if action.kind == "in":
                return [t for a, t in self.moves(defn) if a == action]
            return [(a.payload, t) for a, t in self.moves(defn) if a.kind == "out" and a.channel == action.channel]
        if action.is_tau:
            return list(self.tau_closure(defn))
        out = []
        seen = set()
        for pre in self.tau_closure(defn):
            for a, mid in self.moves(pre):
                if action.kind == "in" and a == action:
                    for t in self.tau_closure(mid):
                        if t not in seen:
                            seen.add(t)
                            out.append(t)
                elif action.kind == "out" and a.kind == "out" and a.channel == action.channel:
                    for t in self.tau_closure(mid):
                        if (a.payload, t) not in seen:
                            seen.add((a.payload, t))
                            out.append((a.payload, t))
        return out

    def answers(self, action, deriv, defn, left_is_chal):
        def orient(c, d):
            return (c, d) if left_is_chal else (d, c)

        out = []
        if action.kind in ("tau", "in"):
            for t in self._matching(defn, action):
                out.append(((orient(deriv, t), ""),))
        else:
            payload_a = action.payload
            for payload_b, t in self._matching(defn, action):
                conts = []
                for ctx in self.fam.contexts:
                    ca = canonicalize(Par((ctx.apply(payload_a), deriv)))
                    cb = canonicalize(Par((ctx.apply(payload_b), t)))
                    conts.append((orient(ca, cb), ctx.label()))
                out.append(tuple(conts))
        return out

    def attack(self, l, r, budget, safe):
        if l == r or budget <= 0:
            return None
        if safe.get((l, r), -1) >= budget:
            return None
        options = []
        for side, chal, defn, left_is_chal in (("left", l, r, True), ("right", r, l, False)):
            for action, deriv in self.moves(chal):
                options.append(
                    ((action.sort_key(), 0 if side == "left" else 1, term_key(deriv)), side, action, deriv, defn, left_is_chal)
                )
        options.sort(key=lambda o: o[0])
        for _k, side, action, deriv, defn, left_is_chal in options:
            answers = self.answers(action, deriv, defn, left_is_chal)
            if not answers:
                return [(side, action, None, "")]
            per_answer = []
            ok = True
            for ans in answers:
                chosen = None
                for cont, ctx_label in ans:
                    tail = self.attack(cont[0], cont[1], budget - 1, safe)
                    if tail is not None:
                        chosen = (cont, ctx_label, tail)
                        break
                if chosen is None:
                    ok = False
                    break
                per_answer.append(chosen)
            if ok:
                cont, ctx_label, tail = max(per_answer, key=lambda c: len(c[2]))
                return [(side, action, cont, ctx_label)] + tail
        safe[(l, r)] = budget
        return None


def context_game(p: Term, q: Term, mode: str, depth: int, fam: TestFamilies = None, tau_bound: int = None) -> HoVerdict:
    """Alternating game to the given depth; inputs and contexts range over fam.

    An inequivalence verdict carries a winning attacker strategy over concrete
    payloads and contexts. The converse direction is never claimed.
    """
    if mode not in ("strong", "weak"):
        raise ValueError(f"unknown mode {mode!r}")
    p, q = canonicalize(p), canonicalize(q)
    if free_vars(p) or free_vars(q):
        raise OpenTermError("context game needs closed terms")
    if fam is None:
        fam = TestFamilies.default(p, q)
    if not fam.inputs or not fam.contexts:
        raise ValueError("test families must not be empty")
    if tau_bound is None:
        tau_bound = max(depth, 4)
    game = _HoGame(mode, fam, tau_bound)
    found = None
    for budget in range(1, depth + 1):
        found = game.attack(p, q, budget, {})
        if found is not None:
            break
    if found is None:
        return HoVerdict("no-distinction", mode, depth, families=fam, start=(p, q), stats={"depth": depth})
    steps = []
    final = ()
    for side, action, cont, ctx_label in found:
        if cont is None:
            final = (side, action)
            break
        steps.append(HoTraceStep(side, action, cont, ctx_label))
    return HoVerdict(
        "inequivalent", mode, depth, trace=steps, families=fam, start=(p, q), final=final, stats={"depth": depth}
    )


def conjecture_probe(pairs, depth: int = 4) -> list:
    """Search for strong-game-indistinguishable yet not structurally congruent
    pairs. Reports findings only; neither direction of the conjecture that
    strong context bisimilarity coincides with structural congruence is
    asserted."""
    from .syntax import sc_equal

    findings = []
    for p, q in pairs:
        congruent = sc_equal(p, q)
        verdict = context_game(p, q, "strong", depth)
        findings.append(
            {
                "pair": [render(p, compact=True), render(q, compact=True)],
                "sc_equal": congruent,
                "strong_game": verdict.outcome,
                "candidate_counterexample": (not congruent) and verdict.outcome == "no-distinction",
            }
        )
    return findings
