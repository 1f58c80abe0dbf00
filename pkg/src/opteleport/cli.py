"""Command-line front door: parse inclusion descriptions, run the
constructions and verifications, emit JSON certificates.

Input documents describe an inclusion N ⊆ M_n(C):

    {
      "ambient_dim": 2,
      "N_blocks": [[1, 1], [1, 1]],
      "embedding": "block_diagonal",          # or {"explicit": [matrix, ...]}
      "trace": "markov"                        # or a weight list per M-block
    }

Matrices are nested row-major arrays of [re, im] pairs.  For the
direct-sum teleportation scheme the N_blocks describe the block layout of
the algebra being teleported (the inclusion is scalars ⊆ that algebra).

Certificates are emitted on stdout as JSON with sorted keys: byte-identical
reruns for identical (input, seed, version).  Exit codes: 0 all requested
checks passed, 1 a check failed, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from . import linalg as la
from .algebra import StarAlgebra, Trace
from .bases import (
    PimsnerPopaBasis,
    character_basis,
    commutant_factor_basis,
    homogeneity_test,
    shift_basis,
    verify_basis,
    weyl_basis,
)
from .errors import OpteleportError
from .inclusion import Inclusion, markov_trace
from .linalg import Tolerance
from .qgraph import (
    basis_colouring,
    basis_lower_bound,
    chromatic_bounds,
    factor_colouring,
    factor_lower_bound,
    gns_graph,
    graphs_from_inclusion,
    verify_colouring,
)
from .reporting import Report
from .teleport import (
    classify,
    commutant_trace_is_markov,
    direct_sum_scheme,
    extract_tight_scheme,
    standard_scheme,
    tight_scheme_from_basis,
    unbiased_scheme,
    verify_scheme,
)
from .tower import basic_construction


class InputError(Exception):
    """Bad input document or incompatible command options."""


def parse_matrix(data: object, n: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"matrix must be square with [re, im] entries, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InputError(f"matrix size {arr.shape[0]} does not match ambient {n}")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_matrix(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]


def parse_inclusion_spec(doc: dict) -> tuple[Inclusion, dict]:
    """Build the inclusion N ⊆ M_n described by the input document."""
    if not isinstance(doc, dict):
        raise InputError("input document must be a JSON object")
    try:
        n = int(doc["ambient_dim"])
        blocks = [(int(b), int(m)) for b, m in doc["N_blocks"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"ambient_dim and N_blocks are required: {exc}") from exc
    if n < 1 or any(b < 1 or m < 1 for b, m in blocks):
        raise InputError("dimensions and multiplicities must be positive")
    embedding = doc.get("embedding", "block_diagonal")
    if embedding == "block_diagonal":
        if sum(b * m for b, m in blocks) != n:
            raise InputError("block layout does not fill the ambient (unital inclusions only)")
        small = StarAlgebra.block_diagonal(blocks)
    elif isinstance(embedding, dict) and "explicit" in embedding:
        gens = [parse_matrix(g, n) for g in embedding["explicit"]]
        small = StarAlgebra.from_generators(gens, n)
        if sorted(small.blocks) != sorted(blocks):
            raise InputError(
                f"generated algebra has blocks {small.blocks}, document says {blocks}"
            )
    else:
        raise InputError("embedding must be 'block_diagonal' or {'explicit': [...]}")
    big = StarAlgebra.full(n)
    trace_spec = doc.get("trace", "markov")
    if trace_spec == "markov":
        trace = markov_trace(small, big)
    else:
        trace = Trace(big, [float(w) for w in trace_spec])
        if not (trace.is_state() and trace.is_faithful()):
            raise InputError("explicit trace weights must define a faithful state")
    echo = {
        "ambient_dim": n,
        "N_blocks": [list(b) for b in blocks],
        "embedding": "block_diagonal" if embedding == "block_diagonal" else "explicit",
        "trace": "markov" if trace_spec == "markov" else [float(w) for w in trace_spec],
    }
    return Inclusion(small, big, trace), echo


def load_document(path: str | None) -> dict:
    try:
        if path in (None, "-"):
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    except OSError as exc:
        raise InputError(str(exc)) from exc


def certificate(args, command: str, echo: dict, report: Report, derived: dict) -> dict:
    return {
        "certificate": derived,
        "checks": [c.as_dict() for c in report.checks],
        "command": command,
        "input": echo,
        "passed": report.passed,
        "seed": args.seed,
        "tolerance": {"abs": args.tol.abs, "rel": args.tol.rel},
        "tool": {"name": "opteleport", "version": __version__},
    }


# -- commands -----------------------------------------------------------------


def cmd_inclusion_info(args) -> dict:
    inc, echo = parse_inclusion_spec(load_document(args.input))
    rep = Report()
    connected = inc.connected
    rep.add_flag("connected", True, detail=f"flag {connected}")
    derived = {
        "N_blocks": [list(b) for b in inc.small.blocks],
        "M_blocks": [list(b) for b in inc.big.blocks],
        "connected": connected,
        "dim_N": inc.small.dim,
        "dim_M": inc.big.dim,
        "inclusion_matrix": inc.matrix.tolist(),
        "markov_weights": [float(w) for w in markov_trace(inc.small, inc.big).weights],
        "index": float(inc.index) if connected else None,
    }
    exp = inc.expectation
    rng = la.rng_from(None)
    n = inc.big.ambient_dim
    worst_idem = worst_trace = 0.0
    for _ in range(8):
        x = la.random_hermitian(n, rng)
        ex = exp(x)
        worst_idem = max(worst_idem, la.frobenius_distance(exp(ex), ex))
        worst_trace = max(worst_trace, abs(inc.trace(ex) - inc.trace(x)))
    rep.add("expectation_idempotent", worst_idem, args.tol.bound(1.0) * 10)
    rep.add("expectation_trace_preserving", worst_trace, args.tol.bound(1.0) * 10)
    return certificate(args, "inclusion-info", echo, rep, derived)


def _basis_for_family(inc: Inclusion, family: str) -> PimsnerPopaBasis:
    n = inc.big.ambient_dim
    small = inc.small
    if family == "weyl":
        if small.dim != 1:
            raise InputError("weyl family needs N = scalars")
        b = weyl_basis(n)
    elif family == "shifts":
        if small.blocks != [(1, 1)] * n:
            raise InputError("shift family needs N = diagonals")
        b = shift_basis(n)
    elif family == "characters":
        if small.blocks != [(1, 1)] * n:
            raise InputError("character family needs N = diagonals")
        b = character_basis(n)
    elif family == "homogeneous":
        if any(m != 1 for _, m in small.blocks):
            raise InputError("homogeneous family needs a multiplicity-free N")
        flag, witness, why = homogeneity_test(inc)
        if not flag or witness is None:
            raise InputError(f"N is not homogeneous: {why}")
        return witness
    else:
        raise InputError(f"unknown family {family!r}")
    b.inclusion = inc
    return b


def cmd_basis(args) -> dict:
    doc = load_document(args.input)
    inc, echo = parse_inclusion_spec(doc)
    if args.elements:
        mats = [parse_matrix(m, inc.big.ambient_dim) for m in load_document(args.elements)]
        basis = PimsnerPopaBasis(inc, mats)
        source = "explicit"
    else:
        basis = _basis_for_family(inc, args.family)
        source = args.family
    tower = basic_construction(inc)
    rep = verify_basis(tower, basis, args.tol)
    derived = {
        "source": source,
        "size": basis.size,
        "orthonormal": basis.orthonormal,
        "unitary": basis.unitary,
        "in_normaliser": basis.in_normaliser,
        "index": float(inc.index),
    }
    return certificate(args, "basis", echo, rep, derived)


def cmd_teleport(args) -> dict:
    doc = load_document(args.input)
    params = load_document(args.params) if args.params else {}
    derived: dict = {"scheme": args.scheme}
    if args.scheme == "direct-sum":
        # N_blocks describe the algebra being teleported (scalars ⊆ M)
        blocks = [(int(b), int(m)) for b, m in doc["N_blocks"]]
        m_alg = StarAlgebra.block_diagonal(blocks)
        echo = {"M_blocks": [list(b) for b in blocks]}
        scheme = direct_sum_scheme(m_alg, args.tol)
        inc_for_extract = None
    else:
        inc, echo = parse_inclusion_spec(doc)
        if args.scheme == "standard":
            if inc.small.dim != 1:
                raise InputError("standard scheme needs N = scalars")
            basis = _basis_for_family(inc, "weyl")
            scheme = standard_scheme(inc.big.ambient_dim, basis)
        elif args.scheme == "unbiased":
            basis = _infer_normaliser_basis(inc)
            tower = basic_construction(inc, args.tol)
            verify_basis(tower, basis, args.tol)
            scheme = unbiased_scheme(tower, basis, args.tol)
        elif args.scheme == "werner":
            basis = _infer_normaliser_basis(inc)
            tower = basic_construction(inc, args.tol)
            verify_basis(tower, basis, args.tol)
            u = parse_matrix(params["u"], inc.big.ambient_dim) if params.get("u") else None
            z = None
            if params.get("z_weights"):
                weights = [float(w) for w in params["z_weights"]]
                if len(weights) != len(inc.small.central_projections):
                    raise InputError("one z weight per central projection of N required")
                z = sum(w * p for w, p in zip(weights, inc.small.central_projections))
            scheme = tight_scheme_from_basis(inc, basis, u=u, z=z, tol=args.tol)
        else:
            raise InputError(f"unknown scheme {args.scheme!r}")
        inc_for_extract = inc
    rep = verify_scheme(scheme, args.tol, strict=False)
    flags = classify(scheme, args.tol)
    rep.merge(flags.report, prefix="classify.")
    derived.update(
        {
            "outcomes": scheme.outcomes,
            "tight": flags.tight,
            "unbiased": flags.unbiased,
            "unbiased_value": flags.unbiased_value,
            "faithful": flags.faithful,
            "minimal": flags.minimal,
            "witness": flags.witness,
        }
    )
    if args.extract:
        if args.scheme not in ("standard", "werner"):
            raise InputError("--extract applies to standard and werner schemes")
        basis_out, u_out, z_out, xrep = extract_tight_scheme(scheme, inc_for_extract, args.tol)
        rep.merge(xrep, prefix="extract.")
        derived["extracted"] = {
            "basis_size": basis_out.size,
            "u": encode_matrix(u_out),
            "z": encode_matrix(z_out),
        }
    return certificate(args, "teleport", echo, rep, derived)


def _infer_normaliser_basis(inc: Inclusion) -> PimsnerPopaBasis:
    small = inc.small
    if small.dim == 1:
        b = weyl_basis(inc.big.ambient_dim)
        b.inclusion = inc
        return b
    if len(small.blocks) == 1:
        return commutant_factor_basis(inc)
    if all(m == 1 for _, m in small.blocks):
        flag, witness, why = homogeneity_test(inc)
        if flag and witness is not None:
            return witness
        raise InputError(f"no normaliser basis constructor applies: {why}")
    raise InputError("no normaliser basis constructor applies to this inclusion")


def cmd_graph(args) -> dict:
    inc, echo = parse_inclusion_spec(load_document(args.input))
    rep = Report()
    derived: dict = {"mode": args.mode}
    if args.mode == "colour-factor":
        col = factor_colouring(inc, args.tol)
        _, g2 = graphs_from_inclusion(inc)
        rep.merge(verify_colouring(g2, col, args.tol), prefix="colouring.")
        rep.merge(factor_lower_bound(inc, col, args.tol), prefix="certificate.")
        derived.update({"colours": col.colours, "aux_dim": col.aux_dim})
    elif args.mode == "colour-basis":
        basis = _infer_normaliser_basis(inc)
        tower = basic_construction(inc, args.tol)
        verify_basis(tower, basis, args.tol)
        col = basis_colouring(tower, basis, args.tol)
        rep.merge(verify_colouring(gns_graph(tower), col, args.tol), prefix="colouring.")
        rep.merge(basis_lower_bound(tower, basis, col, args.tol), prefix="certificate.")
        derived.update({"colours": col.colours, "aux_dim": 1})
    elif args.mode == "bounds":
        bounds = chromatic_bounds(inc, args.tol)
        derived.update(
            {
                "lower": bounds.lower,
                "upper": bounds.upper,
                "tight": bounds.tight,
                "warnings": bounds.warnings,
                "certificates": [
                    {
                        "graph": c["graph"],
                        "kind": c["kind"],
                        "ambient_dim": c["ambient_dim"],
                        "colours": c["colours"],
                        "aux_dim": c["aux_dim"],
                        "lower_bound": c["lower_bound"],
                    }
                    for c in bounds.certificates
                ],
            }
        )
        for c in bounds.certificates:
            rep.merge(c["colouring_report"], prefix=f"{c['kind']}.colouring.")
            rep.merge(c["certificate_report"], prefix=f"{c['kind']}.certificate.")
        rep.add_flag("bounds_available", bounds.upper is not None, detail=str(bounds.warnings))
    else:
        raise InputError(f"unknown mode {args.mode!r}")
    return certificate(args, "graph", echo, rep, derived)


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opteleport",
        description="teleportation schemes, towers and quantum-graph certificates "
        "for finite-dimensional inclusions",
    )
    parser.add_argument("--tol", type=float, default=1e-9, help="absolute/relative tolerance")
    parser.add_argument("--seed", type=int, default=42, help="seed for randomized checks")
    parser.add_argument("--json-indent", type=int, default=2, help="certificate indentation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_info = sub.add_parser("inclusion-info", help="blocks, inclusion matrix, Markov trace, index")
    p_info.add_argument("input", nargs="?", help="inclusion JSON (default stdin)")
    p_info.set_defaults(func=cmd_inclusion_info)

    p_basis = sub.add_parser("basis", help="construct or verify a Pimsner-Popa basis")
    p_basis.add_argument("input", nargs="?", help="inclusion JSON (default stdin)")
    p_basis.add_argument(
        "--family",
        choices=["weyl", "shifts", "characters", "homogeneous"],
        default="weyl",
    )
    p_basis.add_argument("--elements", help="JSON file with explicit basis matrices")
    p_basis.set_defaults(func=cmd_basis)

    p_tel = sub.add_parser("teleport", help="build, verify and classify a teleportation scheme")
    p_tel.add_argument("input", nargs="?", help="inclusion JSON (default stdin)")
    p_tel.add_argument(
        "--scheme", choices=["standard", "direct-sum", "unbiased", "werner"], default="standard"
    )
    p_tel.add_argument("--params", help="JSON file with scheme parameters (u, z_weights)")
    p_tel.add_argument("--extract", action="store_true", help="run the rigidity round-trip")
    p_tel.set_defaults(func=cmd_teleport)

    p_graph = sub.add_parser("graph", help="quantum-graph colourings and chromatic bounds")
    p_graph.add_argument("input", nargs="?", help="inclusion JSON (default stdin)")
    p_graph.add_argument(
        "--mode", choices=["colour-factor", "colour-basis", "bounds"], default="bounds"
    )
    p_graph.set_defaults(func=cmd_graph)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.tol = Tolerance(abs=args.tol, rel=args.tol)
    la.set_default_seed(args.seed)
    try:
        cert = args.func(args)
    except (InputError, OpteleportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    indent = args.json_indent if args.json_indent >= 0 else None
    print(json.dumps(cert, sort_keys=True, indent=indent))
    if not cert["passed"]:
        print("one or more checks failed", file=sys.stderr)
        return 1
    print(f"{cert['command']}: all checks passed", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
