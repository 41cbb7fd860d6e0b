"""Bound-iteration loop, sound verdict interpretation, witness handling.

check() encodes the selected formula for k = kFrom..kMax, solves each
bound, and stops at the first verdict the one-sided soundness results
license: a pessimistic-family TRUE establishes the checked formula, an
optimistic-family FALSE refutes it, everything else is inconclusive.
With negate-first workflows the verdict then maps back to the original
formula, turning an established negation into a refutation with a
counterexample and vice versa.
"""

import os
from dataclasses import dataclass

from . import hyperltl as hl
from . import oracle, qbf
from .encoder import assemble_qbf, build_layout
from .kripke import KripkeStructure, TracePrefix, make_prefix, validate

HOLDS = "HOLDS"
FAILS = "FAILS"
UNKNOWN = "UNKNOWN"

SOLVER_ENV = "HYPERBMC_SOLVER"


class DriverError(Exception):
    pass


class ConfigError(DriverError):
    pass


class InvalidWitnessError(DriverError):
    """A decoded assignment violates the structure; an encoder or solver bug."""


@dataclass
class CheckConfig:
    formula: hl.HyperFormula
    models: dict  # trace variable -> KripkeStructure
    k_from: int = 0
    k_max: int = 10
    semantics: str = oracle.PES
    negate_first: bool = False
    paper_literal: bool = False
    solver: str = "builtin"  # or an external command template with {file}
    emit_qcir_path: str | None = None
    node_cap: int = qbf.DEFAULT_NODE_CAP
    solver_timeout: float | None = None


@dataclass
class Verdict:
    k: int
    qbf_value: bool
    interpretation: str
    witness: dict | None  # trace variable -> TracePrefix
    fragment_hint: str
    checked_negation: bool


def interpret(qbf_value: bool, sem: str) -> str:
    """Sound reading of a raw QBF verdict for the formula actually encoded."""
    if sem in (oracle.PES, oracle.HPES) and qbf_value:
        return HOLDS
    if sem in (oracle.OPT, oracle.HOPT) and not qbf_value:
        return FAILS
    return UNKNOWN


def _flip(interpretation: str) -> str:
    if interpretation == HOLDS:
        return FAILS
    if interpretation == FAILS:
        return HOLDS
    return UNKNOWN


def extract_witness(assignment, layout, var, structure: KripkeStructure) -> TracePrefix:
    """Decode one trace variable's block of a solver assignment into a prefix."""
    states = []
    for step in range(layout.bound + 1):
        idx = 0
        for j, bit in enumerate(layout.sb_ids(var, step)):
            if assignment[bit]:
                idx |= 1 << j
        if idx >= len(structure.states):
            raise InvalidWitnessError(f"state index {idx} out of range at step {step}")
        states.append(structure.states[idx])
    if states[0] != structure.init:
        raise InvalidWitnessError(f"decoded path starts at {states[0]!r}, not the initial state")
    for a, b in zip(states, states[1:]):
        if (a, b) not in structure.trans:
            raise InvalidWitnessError(f"decoded path uses missing transition {a!r} -> {b!r}")
    return make_prefix(structure, tuple(states))


def _validate_config(cfg: CheckConfig):
    if cfg.k_from > cfg.k_max:
        raise ConfigError(f"kFrom {cfg.k_from} exceeds kMax {cfg.k_max}")
    if cfg.k_from < 0:
        raise ConfigError("bounds must be nonnegative")
    if cfg.semantics not in oracle.SEMANTICS:
        raise ConfigError(f"unknown semantics {cfg.semantics!r}")
    for _, var in cfg.formula.prefix:
        if var not in cfg.models:
            raise ConfigError(f"no model assigned to trace variable {var!r}")
        validate(cfg.models[var])
    if cfg.semantics in (oracle.HPES, oracle.HOPT):
        for _, var in cfg.formula.prefix:
            if not cfg.models[var].halt:
                raise ConfigError(
                    f"semantics {cfg.semantics!r} requires halt states, but the model "
                    f"for {var!r} declares none"
                )


def _validate_aps(formula, models):
    used = {}
    _collect_atoms(formula.body, used)
    for var, aps in used.items():
        declared = set(models[var].aps)
        for ap in sorted(aps):
            if ap != "@halt" and ap not in declared:
                raise ConfigError(
                    f"formula mentions {ap!r} on trace variable {var!r}, "
                    f"which its model does not declare"
                )


def _collect_atoms(body, out):
    if isinstance(body, (hl.Atom, hl.NegAtom)):
        out.setdefault(body.var, set()).add(body.ap)
    elif isinstance(body, (hl.Not, hl.Next, hl.Eventually, hl.Always)):
        _collect_atoms(body.sub, out)
    elif isinstance(body, (hl.And, hl.Or, hl.Implies, hl.Iff, hl.Until, hl.Release, hl.WeakUntil)):
        _collect_atoms(body.left, out)
        _collect_atoms(body.right, out)


def check(cfg: CheckConfig) -> Verdict:
    """Run the bounded check loop and return the first conclusive verdict.

    Any reported witness has been re-verified against the brute-force
    evaluator first; a failed re-verification raises InvalidWitnessError
    instead of reporting, since it can only mean an internal bug.
    """
    _validate_config(cfg)
    checked = hl.negate(cfg.formula) if cfg.negate_first else hl.normalize(cfg.formula)
    _validate_aps(checked, cfg.models)
    hint = hl.classify_fragment(checked)

    verdict = None
    for k in range(cfg.k_from, cfg.k_max + 1):
        layout = build_layout(cfg.models, checked, k)
        q = assemble_qbf(checked, cfg.models, k, cfg.semantics, cfg.paper_literal, layout)
        if cfg.emit_qcir_path:
            with open(cfg.emit_qcir_path, "w") as fh:
                fh.write(qbf.emit_qcir(q))
        if cfg.solver == "builtin":
            result = qbf.solve(q, node_cap=cfg.node_cap)
        else:
            result = qbf.run_external(cfg.solver, q, timeout=cfg.solver_timeout)

        witness = None
        if result.outer_witness is not None and checked.prefix:
            outer_quant = checked.prefix[0][0]
            n_outer = 0
            for q_, _ in checked.prefix:
                if q_ != outer_quant:
                    break
                n_outer += 1
            traces = {}
            for _, var in checked.prefix[:n_outer]:
                traces[var] = extract_witness(
                    result.outer_witness, layout, var, cfg.models[var]
                )
            try:
                confirmed = oracle.verify_witness(
                    traces, cfg.models, checked, k, cfg.semantics, cfg.paper_literal
                )
            except oracle.ExplosionGuardError:
                # Too many residual prefixes to re-check; the decoded paths are
                # still structure-valid, but an unverified witness is never
                # reported.
                traces = None
            else:
                # An existential witness must make the rest true (value TRUE),
                # a universal countermodel must make it false (value FALSE);
                # either way the substituted residual must equal the value.
                expected = result.value
                if confirmed is not expected:
                    raise InvalidWitnessError(
                        "solver witness failed independent re-verification "
                        f"(bound {k}, value {result.value})"
                    )
            if traces is not None and outer_quant == hl.EXISTS and result.value:
                witness = traces

        interpretation = interpret(result.value, cfg.semantics)
        reported = _flip(interpretation) if cfg.negate_first else interpretation
        verdict = Verdict(
            k=k,
            qbf_value=result.value,
            interpretation=reported,
            witness=witness,
            fragment_hint=hint,
            checked_negation=cfg.negate_first,
        )
        if reported != UNKNOWN:
            return verdict
    return verdict


def resolve_solver(flag: str | None) -> str:
    """Solver selection: explicit flag, then the environment, then builtin."""
    if flag:
        if flag == "builtin":
            return "builtin"
        if flag.startswith("external:"):
            return flag[len("external:") :]
        raise ConfigError(f"bad --solver value {flag!r}")
    env = os.environ.get(SOLVER_ENV)
    return env if env else "builtin"


def format_witness(witness, models) -> str:
    """Witness file body: one line per trace variable, one letter set per step."""
    lines = []
    for var in sorted(witness):
        prefix = witness[var]
        aps = models[var].aps
        sets = []
        for letter in prefix.letters:
            sets.append("{" + ",".join(a for a in aps if a in letter) + "}")
        lines.append(f"{var}: " + " ".join(sets))
    return "\n".join(lines) + "\n"
