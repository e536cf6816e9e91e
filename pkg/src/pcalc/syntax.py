"""Term syntax shared by the first-order and the higher-order calculus.

Terms are immutable trees. Parallel composition is n-ary (a multiset view),
so structural congruence collapses to plain equality of canonical forms:
canonicalization drops nil components, flattens nested parallels, sorts the
components by a fixed total term order, and (for higher-order terms) renames
binders to position-determined names.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class ParseError(ValueError):
    """Syntax error carrying a 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class DialectMismatch(TypeError):
    pass


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class Nil:
    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Nil",)))


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Var", self.name)))


@dataclass(frozen=True)
class InputPrefix:
    name: str
    cont: "Term"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("In", self.name, self.cont)))


@dataclass(frozen=True)
class OutputPrefix:
    name: str
    cont: "Term"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Out", self.name, self.cont)))


@dataclass(frozen=True)
class Repl:
    body: "Term"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Repl", self.body)))


@dataclass(frozen=True)
class Par:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Par",) + self.parts))


@dataclass(frozen=True)
class HoInput:
    channel: str
    var: str
    body: "Term"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("HoIn", self.channel, self.var, self.body)))


@dataclass(frozen=True)
class HoOutput:
    channel: str
    message: "Term"
    cont: "Term"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("HoOut", self.channel, self.message, self.cont)))


@dataclass(frozen=True)
class GuardedRepl:
    """Transient parse node for the guarded-replication macro; never canonical."""

    prefix: "Term"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("GRepl", self.prefix)))


Term = Union[Nil, Var, InputPrefix, OutputPrefix, Repl, Par, HoInput, HoOutput]

for _cls in (Nil, Var, InputPrefix, OutputPrefix, Repl, Par, HoInput, HoOutput, GuardedRepl):
    _cls.__hash__ = lambda self: self._h  # hash cached at construction

NIL = Nil()


def subterms(p: Term) -> Iterator[Term]:
    """Pre-order traversal of p, including p itself."""
    stack = [p]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, (InputPrefix, OutputPrefix)):
            stack.append(t.cont)
        elif isinstance(t, Repl):
            stack.append(t.body)
        elif isinstance(t, GuardedRepl):
            stack.append(t.prefix)
        elif isinstance(t, Par):
            stack.extend(t.parts)
        elif isinstance(t, HoInput):
            stack.append(t.body)
        elif isinstance(t, HoOutput):
            stack.append(t.message)
            stack.append(t.cont)


def names(p: Term) -> frozenset:
    """Channel names occurring anywhere in p."""
    out = set()
    for t in subterms(p):
        if isinstance(t, (InputPrefix, OutputPrefix)):
            out.add(t.name)
        elif isinstance(t, (HoInput, HoOutput)):
            out.add(t.channel)
    return frozenset(out)


def free_vars(p: Term) -> frozenset:
    fv = getattr(p, "_fv", None)
    if fv is not None:
        return fv
    if isinstance(p, Var):
        fv = frozenset((p.name,))
    elif isinstance(p, Nil):
        fv = frozenset()
    elif isinstance(p, (InputPrefix, OutputPrefix)):
        fv = free_vars(p.cont)
    elif isinstance(p, Repl):
        fv = free_vars(p.body)
    elif isinstance(p, GuardedRepl):
        fv = free_vars(p.prefix)
    elif isinstance(p, Par):
        fv = frozenset().union(*(free_vars(q) for q in p.parts)) if p.parts else frozenset()
    elif isinstance(p, HoInput):
        fv = free_vars(p.body) - {p.var}
    elif isinstance(p, HoOutput):
        fv = free_vars(p.message) | free_vars(p.cont)
    else:
        raise TypeError(f"not a term: {p!r}")
    object.__setattr__(p, "_fv", fv)
    return fv


def is_closed(p: Term) -> bool:
    return not free_vars(p)


def dialect_of(p: Term) -> str:
    """'ccsm', 'hoccsm', or 'either' for terms built from shared constructors only."""
    first = higher = False
    for t in subterms(p):
        if isinstance(t, (InputPrefix, OutputPrefix, Repl)):
            first = True
        elif isinstance(t, (Var, HoInput, HoOutput)):
            higher = True
    if first and higher:
        raise DialectMismatch("term mixes first-order and higher-order constructors")
    if first:
        return "ccsm"
    if higher:
        return "hoccsm"
    return "either"


# ---------------------------------------------------------------------------
# Term order
#
# Rank order: Nil < Var < input prefix < output prefix < Repl < Par, with
# lexicographic tie-breaking. Bound variables are keyed by binder index so the
# order is invariant under alpha-renaming; the order is purely syntactic.

_HAS_VAR_CACHE = "_hv"


def _has_var(p: Term) -> bool:
    hv = getattr(p, _HAS_VAR_CACHE, None)
    if hv is None:
        hv = any(isinstance(t, Var) for t in subterms(p))
        object.__setattr__(p, _HAS_VAR_CACHE, hv)
    return hv


def _key(p: Term, env: dict, depth: int):
    if not _has_var(p):
        k = getattr(p, "_k", None)
        if k is not None:
            return k
        k = _key_compute(p, env, depth)
        object.__setattr__(p, "_k", k)
        return k
    return _key_compute(p, env, depth)


def _key_compute(p: Term, env: dict, depth: int):
    if isinstance(p, Nil):
        return (0,)
    if isinstance(p, Var):
        lvl = env.get(p.name)
        if lvl is None:
            return (1, 0, p.name)
        return (1, 1, lvl)
    if isinstance(p, InputPrefix):
        return (2, p.name, _key(p.cont, env, depth))
    if isinstance(p, HoInput):
        inner = dict(env)
        inner[p.var] = depth
        return (2, p.channel, _key(p.body, inner, depth + 1))
    if isinstance(p, OutputPrefix):
        return (3, p.name, _key(p.cont, env, depth))
    if isinstance(p, HoOutput):
        return (3, p.channel, _key(p.message, env, depth), _key(p.cont, env, depth))
    if isinstance(p, Repl):
        return (4, _key(p.body, env, depth))
    if isinstance(p, Par):
        return (5, tuple(_key(q, env, depth) for q in p.parts))
    raise TypeError(f"not a term: {p!r}")


def term_key(p: Term):
    """Sort key realizing the total term order on canonical terms."""
    return _key(p, {}, 0)


# ---------------------------------------------------------------------------
# Canonical form

_canon_cache: dict = {}
_intern: dict = {}


def canonicalize(p: Term) -> Term:
    """Unique representative of p's structural-congruence class.

    Drops nil components, flattens and sorts parallels, and renames
    higher-order binders to X0, X1, ... in traversal order. Idempotent.
    """
    rep = _canon_cache.get(p)
    if rep is not None:
        return rep
    q = _canon(p, {}, 0)
    if _needs_rename(q):
        q = _rename(q, {}, [0], free_vars(q))
    rep = _intern.setdefault(q, q)
    _canon_cache[p] = rep
    _canon_cache[rep] = rep
    return rep


def _needs_rename(p: Term) -> bool:
    return any(isinstance(t, HoInput) for t in subterms(p))


def _canon(p: Term, env: dict, depth: int) -> Term:
    if isinstance(p, Nil):
        return NIL
    if isinstance(p, Var):
        return p
    if isinstance(p, InputPrefix):
        return InputPrefix(p.name, _canon(p.cont, env, depth))
    if isinstance(p, OutputPrefix):
        return OutputPrefix(p.name, _canon(p.cont, env, depth))
    if isinstance(p, Repl):
        return Repl(_canon(p.body, env, depth))
    if isinstance(p, HoInput):
        inner = dict(env)
        inner[p.var] = depth
        return HoInput(p.channel, p.var, _canon(p.body, inner, depth + 1))
    if isinstance(p, HoOutput):
        return HoOutput(p.channel, _canon(p.message, env, depth), _canon(p.cont, env, depth))
    if isinstance(p, Par):
        parts = []
        for q in p.parts:
            c = _canon(q, env, depth)
            if isinstance(c, Nil):
                continue
            if isinstance(c, Par):
                parts.extend(c.parts)
            else:
                parts.append(c)
        if not parts:
            return NIL
        if len(parts) == 1:
            return parts[0]
        parts.sort(key=lambda t: _key(t, env, depth))
        return Par(tuple(parts))
    raise TypeError(f"cannot canonicalize: {p!r}")


def _rename(p: Term, mapping: dict, counter: list, avoid: frozenset) -> Term:
    if isinstance(p, (Nil,)):
        return p
    if isinstance(p, Var):
        return Var(mapping.get(p.name, p.name))
    if isinstance(p, InputPrefix):
        return InputPrefix(p.name, _rename(p.cont, mapping, counter, avoid))
    if isinstance(p, OutputPrefix):
        return OutputPrefix(p.name, _rename(p.cont, mapping, counter, avoid))
    if isinstance(p, Repl):
        return Repl(_rename(p.body, mapping, counter, avoid))
    if isinstance(p, HoInput):
        fresh = _next_binder(counter, avoid)
        inner = dict(mapping)
        inner[p.var] = fresh
        return HoInput(p.channel, fresh, _rename(p.body, inner, counter, avoid))
    if isinstance(p, HoOutput):
        msg = _rename(p.message, mapping, counter, avoid)
        cont = _rename(p.cont, mapping, counter, avoid)
        return HoOutput(p.channel, msg, cont)
    if isinstance(p, Par):
        return Par(tuple(_rename(q, mapping, counter, avoid) for q in p.parts))
    raise TypeError(f"cannot rename: {p!r}")


def _next_binder(counter: list, avoid: frozenset) -> str:
    while True:
        cand = f"X{counter[0]}"
        counter[0] += 1
        if cand not in avoid:
            return cand


def canonical_par(parts) -> Term:
    """Canonical parallel composition of already-canonical first-order parts.

    Fast path for the transition engine: skips the recursive rewrite and only
    flattens, drops nil, sorts, and interns. Not for higher-order terms, whose
    canonical binder names depend on the whole term.
    """
    flat = []
    for q in parts:
        if isinstance(q, Nil):
            continue
        if isinstance(q, Par):
            flat.extend(q.parts)
        else:
            flat.append(q)
    if not flat:
        return NIL
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=term_key)
    par = Par(tuple(flat))
    rep = _intern.setdefault(par, par)
    _canon_cache.setdefault(rep, rep)
    return rep


_intern[NIL] = NIL
_canon_cache[NIL] = NIL


def sc_equal(p: Term, q: Term) -> bool:
    """Decide structural congruence via canonical-form equality."""
    dp, dq = dialect_of(p), dialect_of(q)
    if "either" not in (dp, dq) and dp != dq:
        raise DialectMismatch(f"cannot compare a {dp} term with a {dq} term")
    return canonicalize(p) == canonicalize(q)


# ---------------------------------------------------------------------------
# Rendering
#
# Emits text in the concrete grammar below; parse(render(p)) equals p
# canonically (and structurally for canonical terms in the default mode).


def render(p: Term, compact: bool = False) -> str:
    return _render_par(p, compact)


def _render_par(p: Term, compact: bool) -> str:
    if isinstance(p, Par):
        return " | ".join(_render_seq(q, compact) for q in p.parts)
    return _render_seq(p, compact)


def _render_seq(p: Term, compact: bool) -> str:
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Var):
        return p.name
    if isinstance(p, Par):
        return "(" + _render_par(p, compact) + ")"
    if isinstance(p, Repl):
        return "!" + _render_seq(p.body, compact)
    if isinstance(p, InputPrefix):
        if compact and isinstance(p.cont, Nil):
            return p.name
        return f"{p.name}.{_render_seq(p.cont, compact)}"
    if isinstance(p, OutputPrefix):
        if compact and isinstance(p.cont, Nil):
            return f"'{p.name}"
        return f"'{p.name}.{_render_seq(p.cont, compact)}"
    if isinstance(p, HoInput):
        if compact and isinstance(p.body, Nil):
            return p.channel
        return f"{p.channel}({p.var}).{_render_seq(p.body, compact)}"
    if isinstance(p, HoOutput):
        if compact and isinstance(p.message, Nil):
            if isinstance(p.cont, Nil):
                return f"'{p.channel}"
            return f"'{p.channel}.{_render_seq(p.cont, compact)}"
        return f"'{p.channel}<{_render_par(p.message, compact)}>.{_render_seq(p.cont, compact)}"
    raise TypeError(f"cannot render: {p!r}")


# ---------------------------------------------------------------------------
# Concrete grammar
#
#   proc   := par
#   par    := seq { "|" seq }
#   seq    := "0" | bang | prefix | "(" proc ")" | VAR          (VAR: hoccsm)
#   bang   := "!" seq                                            (ccsm native; hoccsm macro)
#            | "!g" prefix                                       (hoccsm macro; "!g" needs a
#                                                                 following blank, else "!" + name)
#   prefix := NAME "." seq | "'" NAME "." seq
#            | NAME "(" VAR ")" "." seq                          (hoccsm)
#            | "'" NAME "<" proc ">" "." seq                     (hoccsm)
#            | NAME | "'" NAME                                   (trailing .0 elided)
#   NAME   := [a-z][a-zA-Z0-9_]*     VAR := [A-Z][a-zA-Z0-9_]*
#
# "#" starts a comment running to end of line.


_SYMBOLS = {"(": "lpar", ")": "rpar", "|": "pipe", ".": "dot", "<": "lt", ">": "gt", "'": "quote"}


def _tokenize(text: str):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "!":
            if i + 2 < n and text[i + 1] == "g" and text[i + 2] in " \t":
                tokens.append(("bangg", "!g", line, col))
                i += 2
                col += 2
            else:
                tokens.append(("bang", "!", line, col))
                i += 1
                col += 1
            continue
        if ch == "0" and (i + 1 >= n or not (text[i + 1].isalnum() or text[i + 1] == "_")):
            tokens.append(("zero", "0", line, col))
            i += 1
            col += 1
            continue
        if ch in _SYMBOLS:
            tokens.append((_SYMBOLS[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isalpha():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "name" if ch.islower() else "var"
            tokens.append((kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens, dialect):
        self.tokens = tokens
        self.pos = 0
        self.ho = dialect == "hoccsm"

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2], tok[3])
        return tok

    def fail(self, msg):
        tok = self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def parse_proc(self):
        parts = [self.parse_seq()]
        while self.peek()[0] == "pipe":
            self.next()
            parts.append(self.parse_seq())
        if len(parts) == 1:
            return parts[0]
        return Par(tuple(parts))

    def parse_seq(self):
        kind, value, line, col = self.peek()
        if kind == "zero":
            self.next()
            return NIL
        if kind == "lpar":
            self.next()
            p = self.parse_proc()
            self.expect("rpar")
            return p
        if kind == "bang":
            self.next()
            return Repl(self.parse_seq())
        if kind == "bangg":
            self.next()
            if not self.ho:
                raise ParseError("guarded replication is a hoccsm macro", line, col)
            node = self.parse_prefix()
            if not isinstance(node, (HoInput, HoOutput)):
                raise ParseError("guarded replication needs a prefixed body", line, col)
            return GuardedRepl(node)
        if kind == "var":
            self.next()
            if not self.ho:
                raise ParseError("process variables require the hoccsm dialect", line, col)
            return Var(value)
        if kind in ("name", "quote"):
            return self.parse_prefix()
        self.fail(f"expected a process, found {value!r}")

    def parse_prefix(self):
        kind, value, line, col = self.next()
        if kind == "quote":
            name = self.expect("name")[1]
            nxt = self.peek()[0]
            if nxt == "lt":
                if not self.ho:
                    raise ParseError("process output requires the hoccsm dialect", line, col)
                self.next()
                msg = self.parse_proc()
                self.expect("gt")
                self.expect("dot")
                return HoOutput(name, msg, self.parse_seq())
            if nxt == "dot":
                self.next()
                cont = self.parse_seq()
                return HoOutput(name, NIL, cont) if self.ho else OutputPrefix(name, cont)
            return HoOutput(name, NIL, NIL) if self.ho else OutputPrefix(name, NIL)
        if kind == "name":
            nxt = self.peek()[0]
            if nxt == "lpar" and self.ho:
                self.next()
                var = self.expect("var")[1]
                self.expect("rpar")
                self.expect("dot")
                return HoInput(value, var, self.parse_seq())
            if nxt == "dot":
                self.next()
                cont = self.parse_seq()
                return self._ho_input(value, cont) if self.ho else InputPrefix(value, cont)
            return self._ho_input(value, NIL) if self.ho else InputPrefix(value, NIL)
        raise ParseError(f"expected a prefix, found {value!r}", line, col)

    @staticmethod
    def _ho_input(channel, cont):
        # "a.P" abbreviates an input with an unused binder.
        fv = free_vars(cont)
        var = "X"
        i = 0
        while var in fv:
            var = f"X{i}"
            i += 1
        return HoInput(channel, var, cont)


def parse(text: str, dialect: str = "ccsm", expand_replication: bool = True) -> Term:
    """Parse text in the given dialect ('ccsm' or 'hoccsm').

    In the hoccsm dialect, ! and !g are macros: by default they are expanded
    into the derived-replication encoding; with expand_replication=False their
    mere presence is an error. Open higher-order terms parse fine; callers
    needing closed terms check is_closed.
    """
    if dialect not in ("ccsm", "hoccsm"):
        raise ValueError(f"unknown dialect {dialect!r}")
    parser = _Parser(_tokenize(text), dialect)
    term = parser.parse_proc()
    tok = parser.peek()
    if tok[0] != "eof":
        raise ParseError(f"trailing input {tok[1]!r}", tok[2], tok[3])
    if dialect == "hoccsm":
        has_macro = any(isinstance(t, (Repl, GuardedRepl)) for t in subterms(term))
        if has_macro:
            if not expand_replication:
                raise ParseError("replication in hoccsm requires macro expansion", 1, 1)
            from . import hocore

            term = hocore.expand_replications(term)
    return term


def infer_dialect(text: str) -> str:
    """'hoccsm' when higher-order syntax is present, else 'ccsm'."""
    try:
        tokens = _tokenize(text)
    except ParseError:
        return "ccsm"
    for kind, _value, _line, _col in tokens:
        if kind in ("var", "lt", "bangg"):
            return "hoccsm"
    return "ccsm"


def split_pair_file(text: str):
    """Split a pair file on a line containing only '---'; returns 1 or 2 chunks."""
    lines = text.splitlines()
    for i, raw in enumerate(lines):
        if raw.strip() == "---":
            return ["\n".join(lines[:i]), "\n".join(lines[i + 1 :])]
    return [text]
