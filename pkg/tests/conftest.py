"""Shared helpers: random instance generators and independent reference oracles."""

import random
from collections import deque

import pytest

from hyperbmc import hyperltl as hl
from hyperbmc import oracle
from hyperbmc.kripke import KripkeStructure, validate
from hyperbmc.models import DIRS


def rand_kripke(rng, max_states=4, max_aps=2, halting=False, dense=False):
    n = rng.randint(1, max_states)
    states = tuple(f"s{i}" for i in range(n))
    aps = tuple("ab"[: rng.randint(1, max_aps)])
    labels = {s: frozenset(a for a in aps if rng.random() < 0.5) for s in states}
    trans = set()
    fanout = rng.randint(1, min(3 if dense else 2, n))
    for s in states:
        for d in rng.sample(states, rng.randint(1, fanout)):
            trans.add((s, d))
    halt = set()
    if halting:
        # halting states must truly absorb (only the self-loop), otherwise
        # the halting semantics' one-sided conclusions are unsound
        for s in rng.sample(states, rng.randint(1, n)):
            halt.add(s)
            trans = {(a, b) for a, b in trans if a != s}
            trans.add((s, s))
    k = KripkeStructure(
        states=states,
        init="s0",
        trans=frozenset(trans),
        labels=labels,
        halt=frozenset(halt),
        aps=aps,
    )
    validate(k)
    return k


def rand_acyclic_halting(rng, max_states=4, max_aps=2):
    """DAG whose leaves carry halting self-loops: full-depth truth is computable."""
    n = rng.randint(1, max_states)
    states = tuple(f"s{i}" for i in range(n))
    aps = tuple("ab"[: rng.randint(1, max_aps)])
    labels = {s: frozenset(a for a in aps if rng.random() < 0.5) for s in states}
    trans = set()
    for i in range(n):
        succs = [j for j in range(i + 1, n) if rng.random() < 0.6]
        for j in succs:
            trans.add((states[i], states[j]))
    halt = set()
    for i in range(n):
        if not any(s == states[i] for s, _ in trans):
            trans.add((states[i], states[i]))
            halt.add(states[i])
    k = KripkeStructure(
        states=states,
        init="s0",
        trans=frozenset(trans),
        labels=labels,
        halt=frozenset(halt),
        aps=aps,
    )
    validate(k)
    return k


def halt_depth(k: KripkeStructure) -> int:
    """Smallest bound by which every initialized path sits on a halt state."""
    depth = 0
    frontier = {k.init}
    while not frontier <= k.halt:
        depth += 1
        frontier = {d for s, d in k.trans if s in frontier}
        if depth > 3 * len(k.states):
            raise AssertionError("structure does not halt on all paths")
    return depth


_SUGARED = ("not", "and", "or", "implies", "iff", "next", "until", "release", "F", "G", "W")


def rand_body(rng, variables, aps, depth):
    if depth == 0 or rng.random() < 0.15:
        r = rng.random()
        if r < 0.08:
            return hl.TRUE
        if r < 0.16:
            return hl.FALSE
        atom = hl.Atom(rng.choice(aps), rng.choice(variables))
        return hl.Not(atom) if rng.random() < 0.3 else atom
    op = rng.choice(_SUGARED)
    a = rand_body(rng, variables, aps, depth - 1)
    if op == "not":
        return hl.Not(a)
    if op == "next":
        return hl.Next(a)
    if op == "F":
        return hl.Eventually(a)
    if op == "G":
        return hl.Always(a)
    b = rand_body(rng, variables, aps, depth - 1)
    return {
        "and": hl.And,
        "or": hl.Or,
        "implies": hl.Implies,
        "iff": hl.Iff,
        "until": hl.Until,
        "release": hl.Release,
        "W": hl.WeakUntil,
    }[op](a, b)


def rand_instance(rng, max_quants=2, depth=3, halting=False, dense=False):
    """A random (models, normalized formula) pair over shared propositions."""
    nq = rng.randint(1, max_quants)
    variables = ["A", "B", "C"][:nq]
    models = {}
    shared = None
    for v in variables:
        m = rand_kripke(rng, halting=halting, dense=dense)
        models[v] = m
        shared = set(m.aps) if shared is None else shared & set(m.aps)
    if not shared:
        # regenerate the last model with at least proposition 'a'
        models[variables[-1]] = rand_kripke(rng, max_aps=2, halting=halting, dense=dense)
        shared = {"a"}
    prefix = tuple((rng.choice([hl.FORALL, hl.EXISTS]), v) for v in variables)
    body = rand_body(rng, variables, sorted(shared), rng.randint(1, depth))
    formula = hl.normalize(hl.HyperFormula(prefix=prefix, body=body))
    return models, formula


# ---------------------------------------------------------------------------
# Independent reference: naive recursive QBF evaluation


def naive_qbf(blocks, matrix_eval, default=None):
    """Decide a prenex QBF by recursing over blocks and enumerating leaves.

    `matrix_eval` gets a dict var -> bool covering every block variable.
    """
    variables = [v for _, vs in blocks for v in vs]
    quants = {}
    for quant, vs in blocks:
        for v in vs:
            quants[v] = quant

    def go(idx, assignment):
        if idx == len(variables):
            return matrix_eval(assignment)
        v = variables[idx]
        results = []
        for value in (False, True):
            assignment[v] = value
            results.append(go(idx + 1, assignment))
            del assignment[v]
            if quants[v] == "exists" and results[-1]:
                return True
            if quants[v] == "forall" and not results[-1]:
                return False
        return results[-1] if quants[v] == "exists" else True

    return go(0, {})


# ---------------------------------------------------------------------------
# Independent reference: LTL on stutter-extended finite traces

def eval_stutter(body, letters, i=0):
    """Truth of a (possibly sugared) single-trace body over a finite trace,
    reading the last letter as repeating forever. Used to validate rewrite
    identities; W is defined directly as (x U y) | G x.
    """
    last = len(letters) - 1

    def ev(b, i):
        j = min(i, last)
        if isinstance(b, hl.Const):
            return b.value
        if isinstance(b, hl.Atom):
            return b.ap in letters[j]
        if isinstance(b, hl.NegAtom):
            return b.ap not in letters[j]
        if isinstance(b, hl.Not):
            return not ev(b.sub, i)
        if isinstance(b, hl.And):
            return ev(b.left, i) and ev(b.right, i)
        if isinstance(b, hl.Or):
            return ev(b.left, i) or ev(b.right, i)
        if isinstance(b, hl.Implies):
            return not ev(b.left, i) or ev(b.right, i)
        if isinstance(b, hl.Iff):
            return ev(b.left, i) == ev(b.right, i)
        if isinstance(b, hl.Next):
            return ev(b.sub, i + 1)
        if isinstance(b, hl.Eventually):
            return any(ev(b.sub, j) for j in range(i, last + 1))
        if isinstance(b, hl.Always):
            return all(ev(b.sub, j) for j in range(i, last + 1))
        if isinstance(b, hl.Until):
            for j in range(i, last + 1):
                if ev(b.right, j):
                    return True
                if not ev(b.left, j):
                    return False
            return False
        if isinstance(b, hl.Release):
            for j in range(i, last + 1):
                if not ev(b.right, j):
                    return False
                if ev(b.left, j):
                    return True
            return True  # right holds through the repeating tail
        if isinstance(b, hl.WeakUntil):
            return ev(hl.Or(hl.Until(b.left, b.right), hl.Always(b.left)), i)
        raise AssertionError(b)

    return ev(body, i)


def all_letter_traces(aps, length):
    letters = []
    n = len(aps)
    for mask in range(2**n):
        letters.append(frozenset(a for j, a in enumerate(aps) if (mask >> j) & 1))
    if length == 1:
        return [(l,) for l in letters]
    out = []
    for rest in all_letter_traces(aps, length - 1):
        for l in letters:
            out.append((l, *rest))
    return out


# ---------------------------------------------------------------------------
# Independent reference: grid BFS

def bfs_distance(width, height, obstacles, start, goals):
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        cell, dist = queue.popleft()
        if cell in goals:
            return dist
        x, y = cell
        for dx, dy in DIRS:
            nxt = (x + dx, y + dy)
            if (
                0 <= nxt[0] < width
                and 0 <= nxt[1] < height
                and nxt not in obstacles
                and nxt not in seen
            ):
                seen.add(nxt)
                queue.append((nxt, dist + 1))
    return None


@pytest.fixture
def rng():
    return random.Random(20240817)
