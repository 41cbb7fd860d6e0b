"""HyperLTL formulas: concrete syntax, AST, desugaring, NNF, negation.

Formulas are prenex: a chain of trace quantifiers in front of a
quantifier-free temporal body. Atoms are written `p[X]` where X is a
trace variable bound in the prefix; the reserved atom `@halt[X]` is true
exactly on the halt states of X's structure.
"""

import re
from dataclasses import dataclass


class FormulaError(Exception):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message, pos):
        super().__init__(f"at offset {pos}: {message}")
        self.pos = pos


class UnboundVariableError(FormulaError):
    def __init__(self, var):
        super().__init__(f"unbound trace variable {var!r}")
        self.var = var


@dataclass(frozen=True)
class Body:
    pass


@dataclass(frozen=True)
class Const(Body):
    value: bool


@dataclass(frozen=True)
class Atom(Body):
    ap: str
    var: str


@dataclass(frozen=True)
class NegAtom(Body):
    ap: str
    var: str


@dataclass(frozen=True)
class Not(Body):
    sub: Body


@dataclass(frozen=True)
class And(Body):
    left: Body
    right: Body


@dataclass(frozen=True)
class Or(Body):
    left: Body
    right: Body


@dataclass(frozen=True)
class Implies(Body):
    left: Body
    right: Body


@dataclass(frozen=True)
class Iff(Body):
    left: Body
    right: Body


@dataclass(frozen=True)
class Next(Body):
    sub: Body


@dataclass(frozen=True)
class Eventually(Body):
    sub: Body


@dataclass(frozen=True)
class Always(Body):
    sub: Body


@dataclass(frozen=True)
class Until(Body):
    left: Body
    right: Body


@dataclass(frozen=True)
class Release(Body):
    left: Body
    right: Body


@dataclass(frozen=True)
class WeakUntil(Body):
    left: Body
    right: Body


TRUE = Const(True)
FALSE = Const(False)

FORALL = "forall"
EXISTS = "exists"


@dataclass(frozen=True)
class HyperFormula:
    prefix: tuple  # ((quantifier, trace variable), ...)
    body: Body

    def variables(self):
        return tuple(v for _, v in self.prefix)


_TOKEN = re.compile(
    r"\s+|(?P<lp>\()|(?P<rp>\))|(?P<lb>\[)|(?P<rb>\])|(?P<dot>\.)"
    r"|(?P<iff><->)|(?P<imp>->)|(?P<and>&)|(?P<or>\|)|(?P<not>!)"
    r"|(?P<id>@halt|[A-Za-z_][A-Za-z0-9_]*)"
)

_RESERVED = {"forall", "exists", "true", "false", "U", "R", "W", "X", "F", "G"}


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if not m.group().isspace():
            kind = m.lastgroup
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", pos))
    return tokens


class _FormulaParser:
    """Recursive descent; precedence !XFG > U/R/W > & > | > -> > <->."""

    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg):
        kind, val, pos = self.peek()
        raise FormulaSyntaxError(msg + (f" (found {val!r})" if val else ""), pos)

    def expect(self, kind):
        if self.peek()[0] != kind:
            self.error(f"expected {kind}")
        return self.next()

    def parse(self):
        prefix = []
        while self.peek()[0] == "id" and self.peek()[1] in (FORALL, EXISTS):
            quant = self.next()[1]
            kind, var, _ = self.expect("id")
            if var in _RESERVED:
                self.error(f"reserved word {var!r} cannot name a trace variable")
            self.expect("dot")
            prefix.append((quant, var))
        body = self.parse_iff()
        kind, val, pos = self.peek()
        if kind != "eof":
            if val in (FORALL, EXISTS):
                raise FormulaSyntaxError("quantifier after body start", pos)
            self.error("trailing input")
        f = HyperFormula(prefix=tuple(prefix), body=body)
        _check_closed(f)
        return f

    def parse_iff(self):
        left = self.parse_implies()
        if self.peek()[0] == "iff":
            self.next()
            return Iff(left, self.parse_iff())
        return left

    def parse_implies(self):
        left = self.parse_or()
        if self.peek()[0] == "imp":
            self.next()
            return Implies(left, self.parse_implies())
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.peek()[0] == "or":
            self.next()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_binary_temporal()
        while self.peek()[0] == "and":
            self.next()
            left = And(left, self.parse_binary_temporal())
        return left

    def parse_binary_temporal(self):
        left = self.parse_unary()
        kind, val, _ = self.peek()
        if kind == "id" and val in ("U", "R", "W"):
            self.next()
            right = self.parse_binary_temporal()
            if val == "U":
                return Until(left, right)
            if val == "R":
                return Release(left, right)
            return WeakUntil(left, right)
        return left

    def parse_unary(self):
        kind, val, pos = self.peek()
        if kind == "not":
            self.next()
            return Not(self.parse_unary())
        if kind == "id" and val in ("X", "F", "G"):
            self.next()
            sub = self.parse_unary()
            if val == "X":
                return Next(sub)
            if val == "F":
                return Eventually(sub)
            return Always(sub)
        return self.parse_atom()

    def parse_atom(self):
        kind, val, pos = self.peek()
        if kind == "lp":
            self.next()
            body = self.parse_iff()
            self.expect("rp")
            return body
        if kind == "id":
            if val == "true":
                self.next()
                return TRUE
            if val == "false":
                self.next()
                return FALSE
            if val in (FORALL, EXISTS):
                raise FormulaSyntaxError("quantifier after body start", pos)
            if val in _RESERVED and val != "@halt":
                self.error(f"reserved word {val!r} cannot name a proposition")
            self.next()
            self.expect("lb")
            _, var, _ = self.expect("id")
            self.expect("rb")
            return Atom(val, var)
        self.error("expected atom, unary operator, or '('")


def parse_formula(text: str) -> HyperFormula:
    """Parse a closed prenex HyperLTL formula."""
    return _FormulaParser(text).parse()


def _body_vars(body, out):
    if isinstance(body, (Atom, NegAtom)):
        out.add(body.var)
    elif isinstance(body, (Not, Next, Eventually, Always)):
        _body_vars(body.sub, out)
    elif isinstance(body, (And, Or, Implies, Iff, Until, Release, WeakUntil)):
        _body_vars(body.left, out)
        _body_vars(body.right, out)


def _check_closed(f: HyperFormula):
    bound = set()
    for _, v in f.prefix:
        if v in bound:
            raise FormulaError(f"trace variable {v!r} quantified twice")
        bound.add(v)
    used = set()
    _body_vars(f.body, used)
    for v in sorted(used - bound):
        raise UnboundVariableError(v)


def desugar(f: HyperFormula) -> HyperFormula:
    """Rewrite derived operators into the core with Not still allowed.

    Implies(x,y) -> !x | y;  Iff(x,y) -> (x & y) | (!x & !y);
    F x -> true U x;  G x -> false R x;  x W y -> y R (x | y).
    """

    def go(b):
        if isinstance(b, (Const, Atom, NegAtom)):
            return b
        if isinstance(b, Not):
            return Not(go(b.sub))
        if isinstance(b, And):
            return And(go(b.left), go(b.right))
        if isinstance(b, Or):
            return Or(go(b.left), go(b.right))
        if isinstance(b, Implies):
            return Or(Not(go(b.left)), go(b.right))
        if isinstance(b, Iff):
            left, right = go(b.left), go(b.right)
            return Or(And(left, right), And(Not(left), Not(right)))
        if isinstance(b, Next):
            return Next(go(b.sub))
        if isinstance(b, Eventually):
            return Until(TRUE, go(b.sub))
        if isinstance(b, Always):
            return Release(FALSE, go(b.sub))
        if isinstance(b, Until):
            return Until(go(b.left), go(b.right))
        if isinstance(b, Release):
            return Release(go(b.left), go(b.right))
        if isinstance(b, WeakUntil):
            left, right = go(b.left), go(b.right)
            return Release(right, Or(left, right))
        raise FormulaError(f"unexpected node {b!r}")

    return HyperFormula(prefix=f.prefix, body=go(f.body))


def _nnf(b, neg):
    if isinstance(b, Const):
        return Const(b.value != neg)
    if isinstance(b, Atom):
        return NegAtom(b.ap, b.var) if neg else b
    if isinstance(b, NegAtom):
        return Atom(b.ap, b.var) if neg else b
    if isinstance(b, Not):
        return _nnf(b.sub, not neg)
    if isinstance(b, And):
        l, r = _nnf(b.left, neg), _nnf(b.right, neg)
        return Or(l, r) if neg else And(l, r)
    if isinstance(b, Or):
        l, r = _nnf(b.left, neg), _nnf(b.right, neg)
        return And(l, r) if neg else Or(l, r)
    if isinstance(b, Next):
        return Next(_nnf(b.sub, neg))
    if isinstance(b, Until):
        l, r = _nnf(b.left, neg), _nnf(b.right, neg)
        return Release(l, r) if neg else Until(l, r)
    if isinstance(b, Release):
        l, r = _nnf(b.left, neg), _nnf(b.right, neg)
        return Until(l, r) if neg else Release(l, r)
    raise FormulaError(f"desugar before NNF: {b!r}")


def to_nnf(f: HyperFormula) -> HyperFormula:
    """Push negation to the atoms of a desugared formula."""
    return HyperFormula(prefix=f.prefix, body=_nnf(f.body, False))


def normalize(f: HyperFormula) -> HyperFormula:
    """Desugar then convert to NNF; idempotent."""
    return to_nnf(desugar(f))


def negate(f: HyperFormula) -> HyperFormula:
    """Negation of a closed formula: dualize the prefix, negate the body in NNF."""
    prefix = tuple((EXISTS if q == FORALL else FORALL, v) for q, v in f.prefix)
    body = _nnf(desugar(f).body, True)
    return HyperFormula(prefix=prefix, body=body)


SYNTACTIC_SAFETY = "SYNTACTIC_SAFETY"
SYNTACTIC_COSAFETY = "SYNTACTIC_COSAFETY"
NEITHER = "NEITHER"


def _contains(body, kinds):
    if isinstance(body, kinds):
        return True
    if isinstance(body, (Not, Next, Eventually, Always)):
        return _contains(body.sub, kinds)
    if isinstance(body, (And, Or, Implies, Iff, Until, Release, WeakUntil)):
        return _contains(body.left, kinds) or _contains(body.right, kinds)
    return False


def classify_fragment(f: HyperFormula) -> str:
    """Syntactic fragment of an NNF body; drives advisory hints only."""
    body = normalize(f).body
    if not _contains(body, Until):
        return SYNTACTIC_SAFETY
    if not _contains(body, Release):
        return SYNTACTIC_COSAFETY
    return NEITHER


def render_body(b: Body) -> str:
    if isinstance(b, Const):
        return "true" if b.value else "false"
    if isinstance(b, Atom):
        return f"{b.ap}[{b.var}]"
    if isinstance(b, NegAtom):
        return f"!{b.ap}[{b.var}]"
    if isinstance(b, Not):
        return f"!({render_body(b.sub)})"
    if isinstance(b, Next):
        return f"X ({render_body(b.sub)})"
    if isinstance(b, Eventually):
        return f"F ({render_body(b.sub)})"
    if isinstance(b, Always):
        return f"G ({render_body(b.sub)})"
    ops = {And: "&", Or: "|", Implies: "->", Iff: "<->", Until: "U", Release: "R", WeakUntil: "W"}
    op = ops[type(b)]
    return f"({render_body(b.left)} {op} {render_body(b.right)})"


def render_formula(f: HyperFormula) -> str:
    prefix = "".join(f"{q} {v}. " for q, v in f.prefix)
    return prefix + render_body(f.body)
