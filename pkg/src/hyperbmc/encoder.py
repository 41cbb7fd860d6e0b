"""Compile a model map, formula, bound, and semantics into a prenex QBF.

Each trace variable gets one quantifier block holding, per step, one
Boolean variable per atomic proposition, one for the reserved @halt
proposition, and ceil(log2 |S|) state bits. The state bits are what make
the transition relation well defined when distinct states carry equal
labels; the proposition bits are functionally tied to them, so the body
encoding still reads only proposition variables.
"""

import math
from dataclasses import dataclass, field

from . import circuit as ct
from . import hyperltl as hl
from . import oracle
from .circuit import Circuit
from .kripke import HALT_AP
from .qbf import PrenexQBF, make_prenex


class EncodeError(Exception):
    pass


@dataclass
class VarLayout:
    """Variable numbering for every (trace variable, step) pair.

    Ids are dense and follow quantifier-prefix order; within a block the
    order is step, then proposition declaration order, then @halt, then
    state bits. Block order therefore equals prefix order.
    """

    bound: int
    blocks: list = field(default_factory=list)  # (quantifier, var, [ids])
    names: dict = field(default_factory=dict)  # id -> name
    _ap_ids: dict = field(default_factory=dict)  # (var, step, ap) -> id
    _sb_ids: dict = field(default_factory=dict)  # (var, step) -> [ids]

    def ap_id(self, var, step, ap):
        return self._ap_ids[(var, step, ap)]

    def sb_ids(self, var, step):
        return self._sb_ids[(var, step)]

    def trace_vars(self):
        return [v for _, v, _ in self.blocks]

    def block_ids(self, var):
        for _, v, ids in self.blocks:
            if v == var:
                return ids
        raise KeyError(var)


def state_bit_count(n_states: int) -> int:
    return max(0, math.ceil(math.log2(n_states))) if n_states > 1 else 0


def build_layout(models, formula, k) -> VarLayout:
    layout = VarLayout(bound=k)
    next_id = 0
    seen_names = {}
    for quant, var in formula.prefix:
        structure = models[var]
        ids = []
        nbits = state_bit_count(len(structure.states))
        for step in range(k + 1):
            for ap in structure.aps:
                layout._ap_ids[(var, step, ap)] = next_id
                layout.names[next_id] = f"{ap}_{var}_{step}"
                ids.append(next_id)
                next_id += 1
            layout._ap_ids[(var, step, HALT_AP)] = next_id
            layout.names[next_id] = f"halt_{var}_{step}"
            ids.append(next_id)
            next_id += 1
            bits = []
            for j in range(nbits):
                bits.append(next_id)
                layout.names[next_id] = f"sb{j}_{var}_{step}"
                ids.append(next_id)
                next_id += 1
            layout._sb_ids[(var, step)] = bits
        layout.blocks.append((quant, var, ids))
    for vid, name in layout.names.items():
        prev = seen_names.get(name)
        if prev is not None:
            raise EncodeError(f"variable name collision: {name!r}")
        seen_names[name] = vid
    return layout


def unroll_structure(structure, var, k, layout, circ: Circuit) -> int:
    """Circuit over var's block that holds exactly on encodings of its paths.

    A satisfying assignment fixes, per step, state bits spelling a state
    index, proposition and @halt bits equal to that state's labeling, the
    step-0 state to the initial one, and consecutive states to transitions.
    """
    index = {s: i for i, s in enumerate(structure.states)}
    nbits = state_bit_count(len(structure.states))

    def at(step, state):
        bits = layout.sb_ids(var, step)
        idx = index[state]
        lits = []
        for j in range(nbits):
            v = circ.var(bits[j])
            lits.append(v if (idx >> j) & 1 else circ.not_(v))
        return circ.and_(lits)

    def labels_ok(step, state):
        lits = []
        for ap in structure.aps:
            v = circ.var(layout.ap_id(var, step, ap))
            lits.append(v if ap in structure.labels[state] else circ.not_(v))
        hv = circ.var(layout.ap_id(var, step, HALT_AP))
        lits.append(hv if state in structure.halt else circ.not_(hv))
        return circ.and_(lits)

    parts = [at(0, structure.init)]
    for step in range(k + 1):
        parts.append(circ.or_([circ.and_([at(step, s), labels_ok(step, s)]) for s in structure.states]))
    order = {s: i for i, s in enumerate(structure.states)}
    edges = sorted(structure.trans, key=lambda e: (order[e[0]], order[e[1]]))
    for step in range(k):
        parts.append(circ.or_([circ.and_([at(step, s), at(step + 1, d)]) for s, d in edges]))
    return circ.and_(parts)


def encode_body(body, k, sem, layout, circ: Circuit, paper_literal=False) -> int:
    """Fixpoint expansion of an NNF body at step 0, memoized on (node, step)."""
    memo = {}
    halted_k = circ.and_(
        [circ.var(layout.ap_id(v, k, HALT_AP)) for v in layout.trace_vars()]
    )

    def enc(b, i):
        key = (b, i)
        if key in memo:
            return memo[key]
        node = _enc(b, i)
        memo[key] = node
        return node

    def _enc(b, i):
        if isinstance(b, hl.Const):
            return circ.const(b.value)
        if isinstance(b, (hl.Atom, hl.NegAtom)):
            if (b.var, i, b.ap) not in layout._ap_ids:
                raise EncodeError(f"proposition {b.ap!r} not declared for trace variable {b.var!r}")
            v = circ.var(layout.ap_id(b.var, i, b.ap))
            return v if isinstance(b, hl.Atom) else circ.not_(v)
        if isinstance(b, hl.And):
            return circ.and_([enc(b.left, i), enc(b.right, i)])
        if isinstance(b, hl.Or):
            return circ.or_([enc(b.left, i), enc(b.right, i)])

        if isinstance(b, hl.Next):
            if i < k:
                return enc(b.sub, i + 1)
            # at the bound, i+1 falls off the unrolling
            if sem in (oracle.PES, oracle.CLASSIC):
                return ct.FALSE
            if sem in (oracle.OPT, oracle.CLASSIC_DUAL):
                return ct.TRUE
            return _halting(enc(b.sub, k))
        if isinstance(b, hl.Until):
            if i < k:
                return circ.or_([enc(b.right, i), circ.and_([enc(b.left, i), enc(b, i + 1)])])
            if sem == oracle.PES:
                return ct.FALSE
            if sem == oracle.OPT:
                return ct.TRUE
            if sem == oracle.CLASSIC:
                return enc(b.right, k)
            if sem == oracle.CLASSIC_DUAL:
                return circ.or_([enc(b.right, k), enc(b.left, k)])
            return _halting(enc(b.right, k))
        if isinstance(b, hl.Release):
            if i < k:
                return circ.and_([enc(b.right, i), circ.or_([enc(b.left, i), enc(b, i + 1)])])
            if sem == oracle.PES:
                return ct.FALSE
            if sem == oracle.OPT:
                return ct.TRUE
            if sem == oracle.CLASSIC:
                return circ.and_([enc(b.right, k), enc(b.left, k)])
            if sem == oracle.CLASSIC_DUAL:
                return enc(b.right, k)
            arm = b.left if paper_literal else b.right
            return _halting(enc(arm, k))
        raise EncodeError(f"body not in NNF core: {b!r}")

    def _halting(arm):
        if sem == oracle.HPES:
            return circ.and_([halted_k, arm])
        if sem == oracle.HOPT:
            return circ.or_([circ.not_(halted_k), arm])
        raise EncodeError(f"unknown semantics {sem!r}")

    return enc(body, 0)


def assemble_qbf(formula, models, k, sem, paper_literal=False, layout=None) -> PrenexQBF:
    """Full encoding: per-quantifier unrollings chained onto the body.

    The matrix associates to the right: the structure of the innermost
    quantifier combines with the body first, each outer structure wraps
    the rest with AND for an existential and implication for a universal.
    """
    if sem not in (*oracle.SEMANTICS, oracle.CLASSIC_DUAL):
        raise EncodeError(f"unknown semantics {sem!r}")
    circ = Circuit()
    if layout is None:
        layout = build_layout(models, formula, k)
    matrix = encode_body(formula.body, k, sem, layout, circ, paper_literal)
    for quant, var in reversed(formula.prefix):
        unrolled = unroll_structure(models[var], var, k, layout, circ)
        if quant == hl.EXISTS:
            matrix = circ.and_([unrolled, matrix])
        else:
            matrix = circ.implies(unrolled, matrix)
    blocks = [(quant, tuple(ids)) for quant, _, ids in layout.blocks]
    return make_prenex(circ, blocks, matrix, layout.names)
