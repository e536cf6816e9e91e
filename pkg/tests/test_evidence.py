import json

import pytest

from pcalc.equivalence import InvalidRequest, decide
from pcalc.evidence import (
    AndF,
    Certificate,
    DiamondF,
    KnownEquivalence,
    NotF,
    ReplayError,
    TrueF,
    check_certificate,
    distinguishing_evidence,
    distinguishing_formula,
    formula_str,
    replay_trace,
    satisfies,
)
from pcalc.semantics import Action, Bounds, build_lts, step, union_lts
from pcalc.syntax import canonicalize, parse


def tau_derivatives(text):
    bang = canonicalize(parse(text))
    return bang, [t for a, t in step(bang) if a.is_tau]


def test_certificate_rep_invariance_parallel_context():
    bang, derivs = tau_derivatives("!(a.'b | 'a)")
    assert derivs
    for deriv in derivs:
        cert = Certificate(((bang, deriv),), "upto-context", 128)
        result = check_certificate(cert)
        assert result.outcome == "certified"
        shapes = {o.to_json()["context"] for o in result.obligations}
        assert any(ctx.endswith("| [.]") for ctx in shapes), shapes


def test_certificate_refuted_on_disjoint_alphabets():
    cert = Certificate(((parse("a.0"), parse("'a.0")),), "upto-context", 64)
    result = check_certificate(cert)
    assert result.outcome == "refuted"
    assert result.failure["reason"] == "no-answer"
    assert result.failure["action"] == "a"


def test_certificate_identity_pair():
    bang = canonicalize(parse("!(a | b)"))
    result = check_certificate(Certificate(((bang, bang),), "upto-context", 64))
    assert result.outcome == "certified"
    assert all(o.via == "equal" for o in result.obligations)
    assert all(o.context is None for o in result.obligations)


def test_certificate_plain_discipline_needs_direct_membership():
    bang, derivs = tau_derivatives("!(a.'b | 'a)")
    grower = [d for d in derivs if len(d.parts) > 2][0]
    plain = check_certificate(Certificate(((bang, grower),), "plain", 64))
    assert plain.outcome in ("refuted", "budget-exhausted")
    upto = check_certificate(Certificate(((bang, grower),), "upto-context", 64))
    assert upto.outcome == "certified"


def test_certificate_divergence_mismatch():
    cert = Certificate(((parse("!(a | 'a)"), parse("a.0")),), "upto-context", 64)
    result = check_certificate(cert)
    assert result.outcome == "refuted"
    assert result.failure["reason"] == "divergence-mismatch"


def test_certificate_budget_exhausted_on_growth_pair():
    # the two-sided growth pair has no finite parallel-context certificate
    # that this discipline can discharge; the checker reports the budget
    # honestly instead of guessing
    cert = Certificate(
        ((parse("!c.d | !'c | d"), parse("!c.d | !'c | !c")),),
        "upto-context",
        48,
    )
    result = check_certificate(cert)
    assert result.outcome == "budget-exhausted"


def test_certificate_known_equivalence_discharge():
    p = parse("e.(a | a)")
    q = parse("e.(a.a)")
    known = KnownEquivalence.from_terms([parse("a | a"), parse("a.a")])
    assert known is not None
    refused = check_certificate(Certificate(((p, q),), "upto-context", 64))
    assert refused.outcome == "refuted"
    accepted = check_certificate(Certificate(((p, q),), "upto-context", 64), known_equiv=known)
    assert accepted.outcome == "certified"
    assert any(o.via == "known" for o in accepted.obligations)


def test_certificate_json_roundtrip(tmp_path):
    cert = Certificate(((parse("!a.0"), parse("!a.0")),), "upto-context", 32)
    blob = cert.to_json()
    again = Certificate.from_json(json.loads(json.dumps(blob)))
    assert again.pairs == cert.pairs
    assert again.discipline == cert.discipline
    assert again.closure_budget == cert.closure_budget


def test_certificate_rejects_bad_arguments():
    with pytest.raises(ValueError):
        Certificate(((parse("a"), parse("a")),), "upto-everything", 8)
    with pytest.raises(ValueError):
        Certificate(((parse("a"), parse("a")),), "plain", 0)


def test_distinguishing_evidence_strong_formula():
    lts = union_lts([parse("a.'b | 'a"), parse("'b")], Bounds(64, 64))
    s, t = lts.initials
    evidence = distinguishing_evidence(lts, s, t, "strong")
    assert evidence.trace.reason in ("no-match", "divergence-mismatch")
    assert evidence.formula is not None
    assert satisfies(lts, s, evidence.formula)
    assert not satisfies(lts, t, evidence.formula)


def test_distinguishing_evidence_rejects_equivalent_pairs():
    lts = union_lts([parse("a | b"), parse("b | a")], Bounds(32, 32))
    with pytest.raises(InvalidRequest):
        distinguishing_evidence(lts, lts.initials[0], lts.initials[1], "strong")


def test_formula_only_divergence_separates():
    # same action structure modulo divergence: no modal formula exists
    lts = union_lts([parse("!a | !'a"), parse("!a | !'a | b.0")], Bounds(64, 16))
    s, t = lts.initials
    assert distinguishing_formula(lts, s, t) is not None
    lts2 = build_lts(parse("!a | !'a"), Bounds(16, 16))
    assert distinguishing_formula(lts2, 0, 0) is None


def test_formula_satisfaction_basics():
    lts = build_lts(parse("a.b | c"), Bounds(32, 32))
    dia = DiamondF(Action("in", "a"), TrueF())
    assert satisfies(lts, lts.initial, dia)
    assert not satisfies(lts, lts.initial, DiamondF(Action("in", "z"), TrueF()))
    assert satisfies(lts, lts.initial, AndF((dia, NotF(DiamondF(Action("out", "a"), TrueF())))))
    assert "tt" in formula_str(dia)


def test_weak_refutation_trace_replays():
    verdict = decide(parse("!a.c"), parse("c | !a.c"), "weak", game_depth=6)
    assert verdict.outcome == "inequivalent"
    assert replay_trace(verdict.trace)


def test_strong_refutation_trace_replays():
    verdict = decide(parse("!c.d | !'c | d"), parse("!c.d | !'c | !c"), "strong", game_depth=6)
    assert replay_trace(verdict.trace)


def test_replay_rejects_forged_trace():
    verdict = decide(parse("!a.c"), parse("c | !a.c"), "weak", game_depth=6)
    trace = verdict.trace
    forged = type(trace)(
        trace.kind, trace.start, trace.steps, "no-match", trace.final_side, Action("in", "zz")
    )
    with pytest.raises(ReplayError):
        replay_trace(forged)


def test_exact_inequivalence_traces_replay_for_all_kinds():
    lts = union_lts([parse("a.'b | 'a"), parse("'b")], Bounds(64, 64))
    s, t = lts.initials
    for kind in ("strong", "weak", "branching", "quasi-strong", "qs-branching"):
        evidence = distinguishing_evidence(lts, s, t, kind)
        assert replay_trace(evidence.trace, tau_bound=lts.num_states())


def test_certification_is_sound_on_finite_pairs():
    # whatever certifies must land in one weak block of the union graph
    from pcalc.equivalence import compute_partition
    from pcalc.genterms import random_ccsm, rng_from_env

    rng = rng_from_env(51)
    certified = 0
    for _ in range(600):
        # a tiny alphabet makes behavioral coincidences common
        p = canonicalize(random_ccsm(rng, rng.randint(1, 6), allow_repl=False, names=("a", "b")))
        q = canonicalize(random_ccsm(rng, rng.randint(1, 6), allow_repl=False, names=("a", "b")))
        result = check_certificate(Certificate(((p, q),), "upto-context", 64))
        if result.outcome != "certified":
            continue
        certified += 1
        lts = union_lts([p, q], Bounds(800, 128))
        assert not lts.truncated
        weak = compute_partition(lts, "weak")
        assert weak.relates(lts.initials[0], lts.initials[1]), (render(p), render(q))
    assert certified >= 3


def test_certification_sound_on_equivalent_shapes():
    pairs = [
        (parse("a.(b | c)"), parse("a.(c | b | 0)")),
        (parse("!(a | 'a)"), parse("!(a | 'a) | 0")),
    ]
    for p, q in pairs:
        result = check_certificate(Certificate(((p, q),), "upto-context", 64))
        assert result.outcome == "certified"
