"""Ground-truth bounded evaluator over explicitly enumerated trace prefixes.

This is the reference implementation the circuit encoder is tested against:
a literal recursion over the bounded satisfaction rules, with quantifiers
ranging over enumerated prefixes. It trades all efficiency for obviousness.
"""

from . import hyperltl as hl
from .kripke import HALT_AP, enumerate_prefixes

PES = "pes"
OPT = "opt"
HPES = "hpes"
HOPT = "hopt"
CLASSIC = "classic"
CLASSIC_DUAL = "classic-dual"  # internal: dual of the fixed base-case scheme

SEMANTICS = (PES, OPT, HPES, HOPT, CLASSIC)

ENUMERATION_CAP = 10**6


class OracleError(Exception):
    pass


class UnassignedVariableError(OracleError):
    def __init__(self, var):
        super().__init__(f"trace variable {var!r} has no assigned prefix")
        self.var = var


class ExplosionGuardError(OracleError):
    def __init__(self, count):
        super().__init__(f"{count} prefix combinations exceed the enumeration cap")
        self.count = count


def dual(sem: str) -> str:
    return {
        PES: OPT,
        OPT: PES,
        HPES: HOPT,
        HOPT: HPES,
        CLASSIC: CLASSIC_DUAL,
        CLASSIC_DUAL: CLASSIC,
    }[sem]


def _halted(assignment, k):
    return all(prefix.halted[k] for prefix in assignment.values())


def eval_body(assignment, i, body, k, sem, paper_literal=False):
    """Bounded truth of an NNF body at step i under one semantics.

    `assignment` maps every trace variable mentioned by the body to a
    TracePrefix of length k+1. The temporal cases at i=k branch on the
    semantics; everything below k is shared by all of them. Results are
    memoized per (subformula, step) for the duration of one call.
    """
    memo = {}

    def go(b, i):
        key = (id(b), i)
        if key in memo:
            return memo[key]
        value = run(b, i)
        memo[key] = value
        return value

    def run(b, i):
        if isinstance(b, hl.Const):
            return b.value
        if isinstance(b, (hl.Atom, hl.NegAtom)):
            prefix = assignment.get(b.var)
            if prefix is None:
                raise UnassignedVariableError(b.var)
            if b.ap == HALT_AP:
                holds = prefix.halted[i]
            else:
                holds = b.ap in prefix.letters[i]
            return holds if isinstance(b, hl.Atom) else not holds
        if isinstance(b, hl.And):
            return go(b.left, i) and go(b.right, i)
        if isinstance(b, hl.Or):
            return go(b.left, i) or go(b.right, i)

        if isinstance(b, hl.Next):
            if i < k:
                return go(b.sub, i + 1)
            if sem in (PES, CLASSIC):
                return False
            if sem in (OPT, CLASSIC_DUAL):
                return True
            at_k = go(b.sub, k)
            return _halted(assignment, k) and at_k if sem == HPES else not _halted(assignment, k) or at_k

        if isinstance(b, hl.Until):
            if i < k:
                return go(b.right, i) or (go(b.left, i) and go(b, i + 1))
            if sem == PES:
                return False
            if sem == OPT:
                return True
            if sem == CLASSIC:
                return go(b.right, k)
            if sem == CLASSIC_DUAL:
                return go(b.right, k) or go(b.left, k)
            at_k = go(b.right, k)
            return _halted(assignment, k) and at_k if sem == HPES else not _halted(assignment, k) or at_k

        if isinstance(b, hl.Release):
            if i < k:
                return go(b.right, i) and (go(b.left, i) or go(b, i + 1))
            if sem == PES:
                return False
            if sem == OPT:
                return True
            if sem == CLASSIC:
                return go(b.right, k) and go(b.left, k)
            if sem == CLASSIC_DUAL:
                return go(b.right, k)
            # The printed rule tests the left argument here; that breaks both
            # monotonicity and exactness on halted traces, so the default tests
            # the right one and paper_literal restores the printed behavior.
            arm = b.left if paper_literal else b.right
            at_k = go(arm, k)
            return _halted(assignment, k) and at_k if sem == HPES else not _halted(assignment, k) or at_k

        raise OracleError(f"body not in NNF core: {b!r}")

    return go(body, i)


def check_bounded(models, formula, k, sem, paper_literal=False):
    """Evaluate a closed NNF formula: quantifiers by enumeration, body at i=0."""
    prefix_sets = {}
    total = 1
    for _, var in formula.prefix:
        structure = models[var]
        key = id(structure)
        if key not in prefix_sets:
            prefix_sets[key] = enumerate_prefixes(structure, k)
        total *= len(prefix_sets[key])
        if total > ENUMERATION_CAP:
            raise ExplosionGuardError(total)

    def quantify(idx, assignment):
        if idx == len(formula.prefix):
            return eval_body(assignment, 0, formula.body, k, sem, paper_literal)
        quant, var = formula.prefix[idx]
        prefixes = prefix_sets[id(models[var])]
        if quant == hl.EXISTS:
            return any(quantify(idx + 1, {**assignment, var: t}) for t in prefixes)
        return all(quantify(idx + 1, {**assignment, var: t}) for t in prefixes)

    return quantify(0, {})


def verify_witness(witness, models, formula, k, sem, paper_literal=False):
    """Bounded truth of `formula` with a leading block of variables pinned.

    `witness` maps a prefix of the quantifier variables to concrete trace
    prefixes; the remaining quantifiers are evaluated by enumeration. For an
    existential witness the caller expects True, for a universal countermodel
    False.
    """
    n = len(witness)
    leading = [v for _, v in formula.prefix[:n]]
    if set(leading) != set(witness):
        raise OracleError("witness must cover a leading block of the prefix")
    rest = hl.HyperFormula(prefix=formula.prefix[n:], body=formula.body)

    prefix_sets = {var: enumerate_prefixes(models[var], k) for _, var in rest.prefix}
    total = 1
    for _, var in rest.prefix:
        total *= len(prefix_sets[var])
        if total > ENUMERATION_CAP:
            raise ExplosionGuardError(total)

    def quantify(idx, assignment):
        if idx == len(rest.prefix):
            return eval_body(assignment, 0, rest.body, k, sem, paper_literal)
        quant, var = rest.prefix[idx]
        if quant == hl.EXISTS:
            return any(quantify(idx + 1, {**assignment, var: t}) for t in prefix_sets[var])
        return all(quantify(idx + 1, {**assignment, var: t}) for t in prefix_sets[var])

    return quantify(0, dict(witness))
