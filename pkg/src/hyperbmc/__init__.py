"""Bounded model checking for HyperLTL by reduction to QBF."""

from .driver import FAILS, HOLDS, UNKNOWN, CheckConfig, Verdict, check, interpret
from .encoder import assemble_qbf
from .hyperltl import HyperFormula, classify_fragment, negate, normalize, parse_formula
from .kripke import KripkeStructure, TracePrefix, enumerate_prefixes, parse_kripke, render, validate
from .models import builtin_spec, gen_bakery, gen_grid, gen_nonrepudiation
from .oracle import check_bounded, eval_body, verify_witness
from .qbf import PrenexQBF, SolveResult, emit_qcir, parse_qcir, run_external, solve

__all__ = [
    "CheckConfig",
    "FAILS",
    "HOLDS",
    "HyperFormula",
    "KripkeStructure",
    "PrenexQBF",
    "SolveResult",
    "TracePrefix",
    "UNKNOWN",
    "Verdict",
    "assemble_qbf",
    "builtin_spec",
    "check",
    "check_bounded",
    "classify_fragment",
    "emit_qcir",
    "enumerate_prefixes",
    "eval_body",
    "gen_bakery",
    "gen_grid",
    "gen_nonrepudiation",
    "interpret",
    "negate",
    "normalize",
    "parse_formula",
    "parse_kripke",
    "parse_qcir",
    "render",
    "run_external",
    "solve",
    "validate",
    "verify_witness",
]
