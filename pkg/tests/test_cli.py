import json

import pytest

from pcalc.cli import run


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def growth_pair(tmp_path):
    p1 = write(tmp_path, "p1.proc", "!c.d | !'c | d\n")
    p2 = write(tmp_path, "p2.proc", "!c.d | !'c | !c\n")
    return p1, p2


def test_parse_command(tmp_path, capsys):
    path = write(tmp_path, "t.proc", "a.0 | 0 | 'b.0\n")
    assert run(["parse", path]) == 0
    assert capsys.readouterr().out.strip() == "a | 'b"


def test_parse_json_reports_open_terms(tmp_path, capsys):
    path = write(tmp_path, "t.proc", "X | a(Y).Y\n")
    assert run(["parse", "--json", path]) == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["dialect"] == "hoccsm"
    assert blob["open"] and blob["free_vars"] == ["X"]


def test_parse_syntax_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, "bad.proc", "a..0\n")
    assert run(["parse", path]) == 3
    assert "error" in capsys.readouterr().err


def test_check_strong_growth_pair(growth_pair, capsys):
    assert run(["check", "--equiv", "strong", *growth_pair]) == 1
    out = capsys.readouterr().out
    assert "inequivalent" in out and "plays d" in out


def test_check_weak_growth_pair_bounded(growth_pair, capsys):
    code = run(["check", "--equiv", "weak", "--game-depth", "4", "--json", *growth_pair])
    assert code == 2
    blob = json.loads(capsys.readouterr().out)
    assert blob["outcome"] == "unknown"
    assert blob["bound"]["no_distinction_up_to"] == 4


def test_check_sc(tmp_path):
    a = write(tmp_path, "a.proc", "a.0 | b.0\n")
    b = write(tmp_path, "b.proc", "b | a\n")
    assert run(["check", "--equiv", "sc", a, b]) == 0


def test_check_pair_file(tmp_path):
    pair = write(tmp_path, "pair.proc", "a.0\n---\n'a.0\n")
    assert run(["check", "--equiv", "strong", pair]) == 1


def test_check_context_kinds(tmp_path, capsys):
    left = write(tmp_path, "l.proc", "!('d<0>.0)\n")
    right = write(tmp_path, "r.proc", "!('d<0>.0) | 'd<0>.0\n")
    assert run(["check", "--equiv", "context-strong", "--json", left, right]) == 1
    blob = json.loads(capsys.readouterr().out)
    assert blob["equivalence_claimed"] is False
    assert "families_used" in blob
    same = write(tmp_path, "s.proc", "a(X).X\n")
    assert run(["check", "--equiv", "context-weak", same, same]) == 2


def test_check_context_family_flags(tmp_path, capsys):
    left = write(tmp_path, "l.proc", "a(X).X\n")
    right = write(tmp_path, "r.proc", "a(X).0\n")
    code = run(
        [
            "check",
            "--equiv",
            "context-strong",
            "--inputs-family",
            "0, 'm<0>.0",
            "--contexts-family",
            "X, X | n(Y).0",
            "--json",
            left,
            right,
        ]
    )
    assert code == 1
    blob = json.loads(capsys.readouterr().out)
    assert blob["families_used"]["inputs"] == ["0", "'m"]


def test_check_rejects_ho_terms_for_first_order_kinds(tmp_path, capsys):
    a = write(tmp_path, "a.proc", "a(X).X\n")
    assert run(["check", "--equiv", "weak", a, a]) == 3


def test_lts_command(tmp_path, capsys):
    path = write(tmp_path, "t.proc", "a.'b | 'a\n")
    dot = str(tmp_path / "out.dot")
    assert run(["lts", path, "--max-states", "50", "--max-depth", "10", "--dot", dot, "--json"]) == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["truncated"] is False
    assert (tmp_path / "out.dot").read_text().startswith("digraph")


def test_diverges_exit_codes(tmp_path):
    yes = write(tmp_path, "yes.proc", "!a | !'a\n")
    no = write(tmp_path, "no.proc", "a.'b | 'a\n")
    unknown = write(tmp_path, "u.proc", "a.(a.(a | 'a) | 'a) | 'a\n")
    assert run(["diverges", yes]) == 0
    assert run(["diverges", no]) == 1
    assert run(["diverges", unknown, "--max-depth", "2"]) == 2


def test_tau_classify(tmp_path, capsys):
    path = write(tmp_path, "t.proc", "a.'b | 'a\n")
    assert run(["tau-classify", path, "--json"]) == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["edges"][0]["label"] == "state-changing"
    truncated = write(tmp_path, "grow.proc", "!c.d | !'c | d\n")
    assert run(["tau-classify", truncated, "--max-states", "8"]) == 2


def test_certify_command(tmp_path, capsys):
    cert = {
        "discipline": "upto-context",
        "budget": 64,
        "pairs": [["!(a | 'a)", "a | 'a | !(a | 'a)"]],
    }
    path = write(tmp_path, "cert.json", json.dumps(cert))
    assert run(["certify", "--relation", path]) == 0
    bad = write(
        tmp_path, "bad.json", json.dumps({"discipline": "plain", "budget": 16, "pairs": [["a.0", "'a.0"]]})
    )
    assert run(["certify", "--relation", bad]) == 1


def test_paper_examples_list_and_run(capsys):
    assert run(["paper-examples", "--list"]) == 0
    names = capsys.readouterr().out.split()
    assert "repl-growth-pair" in names
    assert run(["paper-examples", "--run", "repl-growth-pair"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result[0]["pass"]
    assert run(["paper-examples", "--run", "no-such-entry"]) == 3


def test_paper_examples_run_all_deterministic(capsys):
    assert run(["paper-examples", "--run-all"]) == 0
    first = capsys.readouterr().out
    assert run(["paper-examples", "--run-all"]) == 0
    second = capsys.readouterr().out
    assert first == second
    results = json.loads(first)
    assert all(r["pass"] for r in results)


def test_probe_replfree(capsys):
    assert run(["paper-examples", "--probe-replfree", "20"]) == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["probed"] == 20
    assert "strong_equals_weak_everywhere" in blob


def test_usage_errors():
    assert run(["check", "--equiv", "nonsense", "x", "y"]) == 3
    assert run(["no-such-command"]) == 3
    assert run(["check", "--equiv", "strong", "/nonexistent/file"]) == 3
