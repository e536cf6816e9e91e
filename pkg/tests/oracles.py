"""Independent reference implementations used only to cross-check the package.

The step oracle matches the derivation rules literally on a binary reading of
parallel composition; the relation oracle is a plain greatest-fixpoint
deletion over all state pairs, one literal clause per equivalence. Both stay
deliberately naive and share no code with the checked paths.
"""

from pcalc.semantics import TAU, Action
from pcalc.syntax import (
    InputPrefix,
    Nil,
    OutputPrefix,
    Par,
    Repl,
    canonicalize,
)


def naive_step(p):
    """Transition set by direct rule matching, Par treated as nested binary."""
    if isinstance(p, Nil):
        return set()
    if isinstance(p, InputPrefix):
        return {(Action("in", p.name), canonicalize(p.cont))}
    if isinstance(p, OutputPrefix):
        return {(Action("out", p.name), canonicalize(p.cont))}
    if isinstance(p, Repl):
        inner = naive_step(p.body)
        out = set()
        for act, t in inner:
            out.add((act, canonicalize(Par((t, p)))))
        for a1, t1 in inner:
            if a1.kind != "in":
                continue
            for a2, t2 in inner:
                if a2.kind == "out" and a2.name == a1.name:
                    out.add((TAU, canonicalize(Par((t1, Par((t2, p)))))))
        return out
    if isinstance(p, Par):
        if len(p.parts) == 0:
            return set()
        if len(p.parts) == 1:
            return naive_step(p.parts[0])
        left = p.parts[0]
        right = p.parts[1] if len(p.parts) == 2 else Par(p.parts[1:])
        lmoves = naive_step(left)
        rmoves = naive_step(right)
        out = set()
        for act, t in lmoves:
            out.add((act, canonicalize(Par((t, right)))))
        for act, t in rmoves:
            out.add((act, canonicalize(Par((left, t)))))
        for a1, t1 in lmoves:
            if a1.is_tau:
                continue
            comp = a1.complement()
            for a2, t2 in rmoves:
                if a2 == comp:
                    out.add((TAU, canonicalize(Par((t1, t2)))))
        return out
    raise TypeError(f"not a first-order term: {p!r}")


def naive_explore(p, max_states=4000):
    """States and edges reachable from p, using the step oracle only."""
    root = canonicalize(p)
    states = {root}
    edges = set()
    frontier = [root]
    while frontier:
        s = frontier.pop()
        for a, t in naive_step(s):
            edges.add((s, a, t))
            if t not in states:
                if len(states) >= max_states:
                    raise RuntimeError("oracle exploration exceeded its cap")
                states.add(t)
                frontier.append(t)
    return states, edges


def _tau_reach(lts):
    reach = []
    for s in range(lts.num_states()):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for a, t in lts.succ(u):
                if a.is_tau and t not in seen:
                    seen.add(t)
                    stack.append(t)
        reach.append(seen)
    return reach


def naive_relation(lts, kind):
    """Largest divergence-sensitive kind-bisimulation by pair deletion,
    returned as normalized (i, j) pairs with identity included."""
    n = lts.num_states()
    reach = _tau_reach(lts)

    def delay(q, a):
        return [t for m in reach[q] for b, t in lts.succ(m) if b == a]

    def bpairs(q, a):
        return [(m, t) for m in reach[q] for b, t in lts.succ(m) if b == a]

    def weak(q, a):
        if a.is_tau:
            return list(reach[q])
        out = []
        for m in reach[q]:
            for b, t in lts.succ(m):
                if b == a:
                    out.extend(reach[t])
        return out

    R = {(i, j) for i in range(n) for j in range(n) if lts.diverges[i] == lts.diverges[j]}
    changed = True
    while changed:
        changed = False
        for p, q in sorted(R):
            ok = True
            for pp, qq in ((p, q), (q, p)):
                for a, d in lts.succ(pp):
                    if kind == "strong":
                        good = any(b == a and (d, t) in R for b, t in lts.succ(qq))
                    elif kind == "weak":
                        good = any((d, t) in R for t in weak(qq, a))
                    elif kind == "quasi-strong":
                        if a.is_tau:
                            good = any(b.is_tau and (d, t) in R for b, t in lts.succ(qq))
                        else:
                            good = any((d, t) in R for t in delay(qq, a))
                    elif kind == "branching":
                        good = (a.is_tau and (d, qq) in R) or any(
                            (pp, m) in R and (d, t) in R for m, t in bpairs(qq, a)
                        )
                    elif kind == "qs-branching":
                        if a.is_tau:
                            good = any(b.is_tau and (d, t) in R for b, t in lts.succ(qq))
                        else:
                            good = any((pp, m) in R and (d, t) in R for m, t in bpairs(qq, a))
                    else:
                        raise ValueError(kind)
                    if not good:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                R.discard((p, q))
                R.discard((q, p))
                changed = True
    return frozenset((min(p, q), max(p, q)) for p, q in R)
