"""Command-line front end.

Every subcommand reads one JSON document (a file argument, or standard
input when the argument is omitted or "-") and writes one JSON report to
standard output.  Reports carry the command, a digest of the inputs, the
seed, and the provenance of their numbers, so checks compose in pipelines
such as ``ncpb gallery heisenberg | ncpb check-ncp``.

Exit codes: 0 for definite results, 2 when a verdict is unknown, 1 for
input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from typing import Any, Sequence

from . import findim, gallery, simbase
from .bundle import FlatAlgebraBundle, NcTorusFiber
from .exactnum import PhaseQ, tolerance, tolerance_override
from .nctorus import (
    NcTorusElement,
    ThetaMatrix,
    act,
    certify_invertible,
    multiply,
    star,
)
from .speclocal import (
    localization_spectrum,
    localize_bundle_system,
    section_characters,
    spectrum_covering,
    system_from_json,
)
from .verdicts import (
    UNKNOWN,
    check_ncp,
    check_trivial_ncp,
    fundamental_group,
    reconstruct_principal_data,
    star_family,
    vertex_family,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2


class InputError(Exception):
    def __init__(self, message: str, source: str = "", position: dict | None = None):
        super().__init__(message)
        self.source = source
        self.position = position


def _read_json(path: str | None, stdin=None) -> tuple[Any, bytes, str]:
    if path in (None, "-"):
        raw = (stdin or sys.stdin).read()
        raw = raw.encode() if isinstance(raw, str) else raw
        name = "<stdin>"
    else:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}", path) from None
        name = path
    try:
        return json.loads(raw.decode("utf-8")), raw, name
    except UnicodeDecodeError as exc:
        raise InputError(f"{name}: not UTF-8 ({exc.reason})", name, {"byte": exc.start}) from None
    except json.JSONDecodeError as exc:
        pos = {"line": exc.lineno, "column": exc.colno, "offset": exc.pos}
        raise InputError(f"{name}:{exc.lineno}:{exc.colno}: {exc.msg}", name, pos) from None


def _unwrap(obj: Any) -> Any:
    # reports from other subcommands carry their payload under "system"
    if isinstance(obj, dict) and "system" in obj and "schema_version" in obj:
        return obj["system"]
    return obj


def _theta(obj, n: int | None = None) -> ThetaMatrix | None:
    if obj is None:
        return None
    if isinstance(obj, (list, tuple)):
        return ThetaMatrix(obj)
    return ThetaMatrix.two(obj)


def _element(obj, theta: ThetaMatrix | None = None) -> NcTorusElement:
    if theta is None and "theta" in obj:
        theta = _theta(obj["theta"])
    return NcTorusElement.from_json(obj, theta)


def _float_prov() -> str:
    return f"float:{tolerance():g}"


def _param_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


# ----------------------------------------------------------------------
# Subcommands.  Each returns (payload, exit code).


def cmd_mul(args, doc):
    theta = _theta(doc.get("theta"))
    a = _element(doc["a"], theta)
    b = _element(doc["b"], a.theta)
    return {"product": multiply(a, b).to_json(), "provenance": {"coefficients": _float_prov(), "phases": "exact"}}, EXIT_OK


def cmd_star(args, doc):
    a = _element(doc)
    return {"star": star(a).to_json(), "provenance": {"coefficients": _float_prov(), "phases": "exact"}}, EXIT_OK


def cmd_act(args, doc):
    a = _element(doc["element"], _theta(doc.get("theta")))
    t = [PhaseQ(x) for x in doc["t"]]
    return {"t": [x.to_json() for x in t], "result": act(t, a).to_json(), "provenance": {"coefficients": _float_prov(), "phases": "exact"}}, EXIT_OK


def cmd_invert(args, doc):
    v = certify_invertible(_element(doc))
    code = EXIT_OK if v.tag in ("invertible", "zero") else EXIT_UNKNOWN
    return {**v.to_json(), "provenance": {"residual": "float:1e-06", "coefficients": _float_prov()}}, code


def cmd_radical(args, doc):
    A = findim.StructureAlgebra.from_json(doc)
    R = findim.radical(A)
    Q = findim.semisimple_quotient(A)
    out = {
        "dim": A.dim,
        "radical": R.to_json(),
        "radical_dim": R.dim,
        "quotient_dim": len(Q.lift),
        "commutative": A.is_commutative(),
        "provenance": "exact",
    }
    return out, EXIT_OK


def cmd_characters(args, doc):
    A = findim.StructureAlgebra.from_json(doc)
    chars = findim.characters(A, args.seed)
    out = {
        "count": len(chars),
        "characters": [c.to_json() for c in chars],
        "provenance": f"float:{findim.CHARACTER_TOL:g}",
    }
    return out, EXIT_OK


def cmd_cover(args, doc):
    B = FlatAlgebraBundle.from_json(_unwrap(doc))
    cov = spectrum_covering(B, args.seed)
    chars = section_characters(B, cov, samples=args.samples, seed=args.seed)
    out = {**cov.to_json(), "section_characters_verified": len(chars), "provenance": {"permutations": "exact", "characters": "float:1e-06"}}
    if args.dot:
        out["dot"] = cov.to_dot()
    return out, EXIT_OK


def cmd_h(args, doc):
    doc = _unwrap(doc)
    K = simbase.SimplicialBase.from_json(doc.get("base", doc))
    top = max((len(s) - 1 for s in K.all_simplices()), default=0)
    groups = [simbase.homology(K, d).to_json() for d in range(top + 1)]
    return {"homology": groups, "euler_characteristic": K.euler_characteristic(), "provenance": "exact"}, EXIT_OK


def cmd_abelianize(args, doc):
    doc = _unwrap(doc)
    if "generators" in doc:
        G = simbase.GroupPresentation.from_json(doc)
    else:
        G = fundamental_group(FlatAlgebraBundle.from_json(doc))
    ab = simbase.abelianization(G)
    return {"presentation": G.to_json(), "abelianization": ab.to_json(), "provenance": "exact"}, EXIT_OK


def _family(args, K):
    if args.family_file:
        doc, _, _ = _read_json(args.family_file)
        items = doc if isinstance(doc, list) else doc["weights"]
        return [simbase.WeightFunction.from_json(w, K) for w in items]
    return star_family(K) if args.family == "star" else vertex_family(K)


def _verdict_provenance(system) -> dict:
    out = {"verdict": "exact", "coefficients": _float_prov()}
    if isinstance(system, FlatAlgebraBundle) and not isinstance(system.fiber, NcTorusFiber):
        out["verdict"] = f"float:{findim.CHARACTER_TOL:g}"
    return out


def cmd_check_trivial(args, doc):
    system = system_from_json(_unwrap(doc))
    v = check_trivial_ncp(system)
    out = {**v.to_json(), "provenance": _verdict_provenance(system)}
    if isinstance(doc, dict) and "gallery" in doc:
        out["gallery"] = doc["gallery"]
    return out, EXIT_UNKNOWN if v.tag == UNKNOWN else EXIT_OK


def cmd_check_ncp(args, doc):
    system = system_from_json(_unwrap(doc))
    ncp = check_ncp(system, _family(args, system.base))
    triv = check_trivial_ncp(system)
    out = {
        "verdict": ncp.tag,
        "trivial": triv.tag,
        "trivial_scope": triv.scope,
        **({"certificate": triv.certificate} if triv.certificate is not None else {}),
        **({"witnesses": [w.to_json() for w in triv.witnesses]} if triv.witnesses else {}),
        "patches": [p.to_json() for p in ncp.patches],
        "provenance": _verdict_provenance(system),
    }
    if ncp.failing is not None:
        out["failing_patch"] = list(ncp.failing)
    if ncp.reason:
        out["reason"] = ncp.reason
    if isinstance(doc, dict) and "gallery" in doc:
        out["gallery"] = doc["gallery"]
    return out, EXIT_UNKNOWN if ncp.tag == UNKNOWN else EXIT_OK


def cmd_reconstruct(args, doc):
    system = system_from_json(_unwrap(doc))
    if not isinstance(system, FlatAlgebraBundle):
        raise InputError("reconstruct needs a flat bundle system")
    ncp = check_ncp(system, _family(args, system.base))
    if ncp.tag != "ncp":
        code = EXIT_UNKNOWN if ncp.tag == UNKNOWN else EXIT_OK
        return {"verdict": ncp.tag, "reason": "reconstruction needs an ncp verdict"}, code
    rep = reconstruct_principal_data(system, ncp, seed=args.seed)
    return {"verdict": ncp.tag, **rep.to_json(), "provenance": {"holonomies": "exact", "freeness": "float:1e-06"}}, EXIT_OK


def cmd_gallery(args, doc):
    params = {}
    for p in args.param or []:
        if "=" not in p:
            raise InputError(f"--param expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        params[k.replace("-", "_")] = _param_value(v)
    if args.name is None:
        return {"available": sorted(gallery.GALLERY)}, EXIT_OK
    system = gallery.example_gallery(args.name, **params)
    return {"gallery": args.name, "params": params, "system": system.to_json(), "provenance": "exact"}, EXIT_OK


def cmd_localize(args, doc):
    doc = _unwrap(doc)
    if "constants" in doc:
        if not args.element:
            raise InputError("localizing an algebra needs --element")
        a, _, _ = _read_json(args.element)
        A = findim.StructureAlgebra.from_json(doc)
        idx = localization_spectrum(A, a if isinstance(a, list) else a["vector"], args.seed)
        zero = not idx
        return {"spectrum": idx, "zero_system": zero, "characters": len(findim.characters(A, args.seed)), "provenance": _float_prov()}, EXIT_OK
    if not args.f:
        raise InputError("localizing a system needs --f weight.json")
    system = system_from_json(doc)
    fdoc, _, _ = _read_json(args.f)
    f = simbase.WeightFunction.from_json(fdoc, system.base)
    loc = localize_bundle_system(system, f)
    return {**loc.to_json(), "provenance": "exact"}, EXIT_OK


COMMANDS = {
    "mul": (cmd_mul, "multiply two quantum-torus elements {a, b, theta}"),
    "star": (cmd_star, "involution of a quantum-torus element"),
    "act": (cmd_act, "torus action {t, element}"),
    "invert": (cmd_invert, "certify invertibility of an element"),
    "radical": (cmd_radical, "radical and semisimple quotient of an algebra"),
    "characters": (cmd_characters, "characters of a commutative algebra"),
    "cover": (cmd_cover, "spectrum of a bundle with commutative finite fiber"),
    "h": (cmd_h, "simplicial homology"),
    "abelianize": (cmd_abelianize, "abelianization of a presentation or a bundle's fundamental group"),
    "check-trivial": (cmd_check_trivial, "trivial-NCP verdict"),
    "check-ncp": (cmd_check_ncp, "NCP verdict by localization"),
    "reconstruct": (cmd_reconstruct, "principal data from an NCP verdict"),
    "gallery": (cmd_gallery, "build a prebuilt system"),
    "localize": (cmd_localize, "localize a system at a weight function"),
}

NO_INPUT = {"gallery"}


def _common(default) -> argparse.ArgumentParser:
    # subcommands use SUPPRESS so a flag given before the subcommand survives
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default, help="random seed (default: $NCPB_SEED or 0)")
    common.add_argument("--tol", type=float, default=default, help="numerical tolerance")
    common.add_argument("--format", choices=["json"], default="json" if default is None else default)
    return common


def _parser() -> argparse.ArgumentParser:
    common = _common(argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="ncpb", description="Noncommutative principal torus bundle toolkit.", parents=[_common(None)])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext, parents=[common])
        if name == "gallery":
            sp.add_argument("name", nargs="?")
            sp.add_argument("--param", action="append", metavar="KEY=JSON")
            continue
        sp.add_argument("input", nargs="?", default="-")
        if name in ("check-ncp", "reconstruct"):
            sp.add_argument("--family", choices=["vertex", "star"], default="vertex")
            sp.add_argument("--family-file")
        if name == "cover":
            sp.add_argument("--dot", action="store_true")
            sp.add_argument("--samples", type=int, default=100)
        if name == "localize":
            sp.add_argument("--f", dest="f")
            sp.add_argument("--element")
    return p


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("NCPB_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"NCPB_SEED is not an integer: {env!r}") from None
    return 0


def run(argv: Sequence[str] | None = None, stdin=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = _parser().parse_args(argv)
    start = time.perf_counter()
    report: dict = {"schema_version": SCHEMA_VERSION, "command": args.command}
    try:
        args.seed = _seed(args.seed)
        report["seed"] = args.seed
        doc, raw = None, b""
        if args.command not in NO_INPUT:
            doc, raw, _ = _read_json(args.input, stdin)
        digest = hashlib.sha256(raw)
        digest.update(json.dumps(list(argv if argv is not None else sys.argv[1:])).encode())
        report["inputs"] = {"sha256": digest.hexdigest()}
        handler = COMMANDS[args.command][0]
        with tolerance_override(args.tol if args.tol is not None else tolerance()):
            report["tol"] = tolerance()
            payload, code = handler(args, doc)
    except InputError as exc:
        report["error"] = {"message": str(exc), **({"position": exc.position} if exc.position else {})}
        code = EXIT_INPUT
    except (ValueError, KeyError, TypeError, IndexError, ArithmeticError, ZeroDivisionError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        report["error"] = {"message": msg, "type": type(exc).__name__}
        code = EXIT_INPUT
    else:
        report.update(payload)
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    json.dump(report, stdout, sort_keys=False)
    stdout.write("\n")
    if "error" in report:
        print(f"ncpb {args.command}: {report['error']['message']}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
