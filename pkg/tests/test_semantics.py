import json

import pytest

from oracles import naive_explore, naive_step
from pcalc.genterms import random_ccsm, rng_from_env
from pcalc.semantics import (
    TAU,
    Action,
    Bounds,
    SaturationOnTruncated,
    build_lts,
    closures,
    diverges,
    saturate,
    step,
    union_lts,
)
from pcalc.syntax import NIL, InputPrefix, Par, canonicalize, parse, render


def moves(text):
    return {(a.label(), render(t, compact=True)) for a, t in step(parse(text))}


def test_step_prefix_axioms():
    assert moves("a.0") == {("a", "0")}
    assert moves("'a.0") == {("'a", "0")}
    assert step(NIL) == ()


def test_step_replication_unfolds_onto_itself():
    assert moves("!a.0") == {("a", "!a")}


def test_step_replicated_handshake():
    # all four rule instances fire, including the self-communication that
    # unfolds a fresh copy of both halves
    assert moves("!(a.0 | 'a.0)") == {
        ("a", "'a | !(a | 'a)"),
        ("'a", "a | !(a | 'a)"),
        ("tau", "!(a | 'a)"),
        ("tau", "a | 'a | !(a | 'a)"),
    }


def test_step_communication():
    assert moves("a.'b.0 | 'a.0") == {
        ("a", "'a | 'b"),
        ("'a", "a.'b"),
        ("tau", "'b"),
    }


def test_step_matches_oracle_on_random_terms():
    rng = rng_from_env(21)
    for _ in range(3_000):
        t = random_ccsm(rng, rng.randint(1, 10))
        assert set(step(t)) == naive_step(canonicalize(t)), render(t)


def test_congruence_is_strong_bisimulation_for_step():
    rng = rng_from_env(22)
    for _ in range(500):
        t = random_ccsm(rng, rng.randint(2, 9))
        if not isinstance(t, Par):
            t = Par((t, InputPrefix("e", NIL)))
        parts = list(t.parts)
        rng.shuffle(parts)
        assert set(step(t)) == set(step(Par(tuple(parts))))


def test_build_lts_handshake_graph():
    lts = build_lts(parse("a.'b.0 | 'a.0"), Bounds(100, 100))
    oracle_states, oracle_edges = naive_explore(parse("a.'b.0 | 'a.0"))
    assert not lts.truncated
    assert lts.num_states() == len(oracle_states) == 6
    got_edges = {(lts.states[s], a, lts.states[t]) for s, a, t in lts.edges}
    assert got_edges == oracle_edges
    assert sum(1 for _s, a, _t in lts.edges if a.is_tau) == 1


def test_build_lts_deterministic():
    a = build_lts(parse("!c.d | !'c | d"), Bounds(60, 10))
    b = build_lts(parse("!c.d | !'c | d"), Bounds(60, 10))
    assert a.states == b.states
    assert a.edges == b.edges
    assert a.to_json() == b.to_json()


def test_build_lts_truncates_growing_terms():
    lts = build_lts(parse("!c.d | !'c | d"), Bounds(8, 3))
    assert lts.truncated
    assert lts.frontier
    # the replicated handshake also grows without bound
    lts2 = build_lts(parse("!(a | 'a)"), Bounds(10, 10))
    assert lts2.truncated
    assert (lts2.initial, TAU, lts2.initial) in [(s, a, t) for s, a, t in lts2.edges]


def test_union_lts_merges_congruent_roots():
    lts = union_lts([parse("a | b"), parse("b | a")], Bounds(50, 50))
    assert lts.initials == (0, 0)


def test_tau_edges_decompose_into_visible_pairs():
    rng = rng_from_env(23)
    checked = 0
    for _ in range(300):
        t = random_ccsm(rng, rng.randint(2, 8), allow_repl=False)
        lts = build_lts(t, Bounds(300, 64))
        if lts.truncated:
            continue
        for s, a, u in lts.edges:
            if not a.is_tau:
                continue
            checked += 1
            found = False
            for b, mid in lts.succ(s):
                if b.is_tau:
                    continue
                comp = b.complement()
                if any(c == comp and v == u for c, v in lts.succ(mid)):
                    found = True
                    break
            assert found, render(lts.states[s])
    assert checked > 50


@pytest.mark.parametrize(
    "text,expected,bounds",
    [
        ("!(a | 'a)", "yes", Bounds(64, 16)),
        ("!a | !'a", "yes", Bounds(64, 16)),
        ("a.'b | 'a", "no", Bounds(64, 16)),
        ("!c.d | !'c | d", "yes", Bounds(8, 3)),
    ],
)
def test_divergence_verdicts(text, expected, bounds):
    lts = build_lts(parse(text), bounds)
    assert diverges(lts, lts.initial) == expected


def test_divergence_unknown_on_blind_truncation():
    # a silent chain longer than the depth bound, with no cycle or growth
    term = parse("a.(a.(a | 'a) | 'a) | 'a")
    lts = build_lts(term, Bounds(100, 2))
    assert lts.truncated
    assert diverges(lts, lts.initial) == "unknown"


def test_divergence_no_states_are_cycle_free():
    lts = build_lts(parse("a.'b | 'a | !c"), Bounds(64, 16))
    cls = closures(lts)
    for s in range(lts.num_states()):
        if lts.diverges[s] != "no":
            continue
        for u in cls.tau_reach[s]:
            for a, v in lts.succ(u):
                assert not (a.is_tau and u in cls.tau_reach[v]), "cycle under a no-state"


def test_diverges_unknown_state():
    lts = build_lts(parse("a.0"), Bounds(10, 10))
    with pytest.raises(KeyError):
        diverges(lts, 99)


def test_saturate_weak_adds_reflexive_and_mirrored_edges():
    lts = build_lts(parse("a.0"), Bounds(10, 10))
    sat = saturate(lts, "weak")
    assert (0, TAU, 0) in sat.derived
    assert (1, TAU, 1) in sat.derived
    assert (0, Action("in", "a"), 1) in sat.derived


def test_saturate_delay_includes_leading_tau():
    # finite fragment of the growth pair's simulation: one silent step, then d
    lts = build_lts(parse("a.d | 'a"), Bounds(50, 50))
    sat = saturate(lts, "delay")
    init = lts.initial
    dests = {t for s, a, t in sat.derived if s == init and a == Action("in", "d")}
    assert dests, "delay closure must see d through the leading tau"


def test_saturate_tau_free_equals_primitive():
    lts = build_lts(parse("a.b | c"), Bounds(50, 50))
    weak = saturate(lts, "weak")
    delay = saturate(lts, "delay")
    reflexive = {(s, TAU, s) for s in range(lts.num_states())}
    assert set(weak.derived) == set(lts.edges) | reflexive
    assert set(delay.derived) == set(lts.edges)


def test_saturate_refuses_truncated():
    lts = build_lts(parse("!c.d | !'c | d"), Bounds(8, 3))
    with pytest.raises(SaturationOnTruncated):
        saturate(lts, "weak")


def test_lts_exports():
    lts = build_lts(parse("a.'b | 'a"), Bounds(50, 50))
    blob = lts.to_json()
    assert blob["initial"] == 0
    assert not blob["truncated"]
    assert len(blob["states"]) == lts.num_states()
    assert all(label in ("tau", "a", "'a", "b", "'b") for _s, label, _t in blob["edges"])
    json.dumps(blob)
    dot = lts.to_dot()
    assert dot.startswith("digraph") and "doublecircle" not in dot
    divergent = build_lts(parse("!a | !'a"), Bounds(10, 10))
    assert "doublecircle" in divergent.to_dot()
