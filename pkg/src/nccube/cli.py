"""Command-line front end with JSON input and output.

Subcommands: ``classify`` (box against the non-signalling / LHV /
moment-relaxation hierarchy), ``bell`` (functional bounds and violation
ratio), ``steer`` (steering functionals and assemblages), ``approx``
(finite-dimensional approximation), ``gen`` (fixture files) and ``cube``
(coefficient-array queries).  Every command prints one CommandResult JSON
object with sorted keys and floats rounded to 12 significant digits, so
repeated runs are byte-identical.

Exit codes: 0 success, 2 invalid input, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import approx as approx_mod
from . import boxes, bounds, cube, npa, sdp, steering

EXIT_BAD_INPUT = 2
EXIT_SOLVER = 3


def _round_sig(v: float, sig: int = 12) -> float:
    if v == 0 or not np.isfinite(v):
        return float(v)
    return float(f"{v:.{sig}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round_sig(float(obj))
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _emit(command: str, inputs: dict, outputs: dict, diagnostics: dict,
          out_path: str | None):
    result = _clean({"command": command, "inputs": inputs,
                     "outputs": outputs, "diagnostics": diagnostics})
    text = json.dumps(result, sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    return 0


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _cmd_classify(args) -> int:
    box = boxes.Box.from_json(_load_json(args.box))
    t0 = time.perf_counter()
    ns = boxes.is_nonsignalling(box, args.tol)
    lhv = bounds.lhv_membership(box)
    outputs = {"nonsignalling": ns["ok"],
               "nonsignalling_violation": ns["max_violation"],
               "lhv": lhv["member"]}
    if not lhv["member"]:
        outputs["separating_functional"] = lhv["functional"].to_json()
        outputs["lhv_gap"] = lhv["gap"]
    verdict = npa.npa_feasible(box, level=args.level, tol=args.tol)
    outputs["npa_feasible_at_level"] = verdict.feasible
    outputs["npa_margin"] = verdict.margin
    diag = {"elapsed_s": time.perf_counter() - t0, "level": args.level}
    return _emit("classify", {"box": args.box, "level": args.level,
                              "tol": args.tol}, outputs, diag, args.out)


def _cmd_bell(args) -> int:
    t = bounds.BellFunctional.from_json(_load_json(args.functional))
    t0 = time.perf_counter()
    r = bounds.violation_ratio(t, level=args.level, dA=args.dims[0],
                               dB=args.dims[1], restarts=args.restarts,
                               seed=args.seed)
    diag = {"elapsed_s": time.perf_counter() - t0, "level": args.level,
            "seed": args.seed}
    return _emit("bell", {"functional": args.functional, "level": args.level,
                          "dims": list(args.dims), "seed": args.seed},
                 r, diag, args.out)


def _cmd_steer(args) -> int:
    obj = _load_json(args.file)
    t0 = time.perf_counter()
    if "F" in obj:
        F = steering.SteeringFunctional.from_json(obj)
        if args.mode == "bound":
            outputs = {"lhs": steering.lhs_bound(F),
                       "quantum": steering.assemblage_bound(F)}
        else:
            outputs = steering.steering_violation(F)
    elif "sigma" in obj:
        s = steering.Assemblage.from_json(obj)
        r = steering.lhs_membership(s, tol=args.tol)
        outputs = {"member": r["member"], "margin": r["margin"]}
        if not r["member"]:
            outputs["functional"] = r["functional"].to_json()
            outputs["gap"] = r["gap"]
    else:
        raise ValueError("input is neither a steering functional (key 'F') "
                         "nor an assemblage (key 'sigma')")
    diag = {"elapsed_s": time.perf_counter() - t0}
    return _emit("steer", {"file": args.file, "mode": args.mode,
                           "tol": args.tol}, outputs, diag, args.out)


def _cmd_approx(args) -> int:
    r = approx_mod.TwoQubitRealization.from_json(_load_json(args.realization))
    t0 = time.perf_counter()
    out = approx_mod.approximate(r, args.eps)
    outputs = {"N": out["N"], "k0": out["k0"], "l0": out["l0"],
               "distance": out["distance"], "box": out["box"].to_json()}
    diag = {"elapsed_s": time.perf_counter() - t0}
    return _emit("approx", {"realization": args.realization, "eps": args.eps},
                 outputs, diag, args.out)


_FIXTURES = {
    "pr": lambda a: boxes.pr_box().to_json(),
    "uniform": lambda a: boxes.uniform_box(2, 2).to_json(),
    "isotropic": lambda a: boxes.isotropic_box(a.v).to_json(),
    "tsirelson": lambda a: boxes.tsirelson_box().to_json(),
    "chsh": lambda a: bounds.chsh_functional().to_json(),
    "all-ones": lambda a: bounds.all_ones_functional().to_json(),
    "zx-functional": lambda a: steering.zx_functional().to_json(),
    "phi-plus-assemblage": lambda a: steering.phi_plus_zx_assemblage().to_json(),
    "tsirelson-two-qubit": lambda a: approx_mod.tsirelson_two_qubit().to_json(),
}


def _cmd_gen(args) -> int:
    payload = _FIXTURES[args.fixture](args)
    text = json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_cube(args) -> int:
    el = cube.CubeElement.from_json(_load_json(args.element))
    outputs = {"is_zero": cube.is_zero(el),
               "is_positive": cube.is_positive(el),
               "canonical_rep": cube.canonical_rep(el).to_json()}
    return _emit("cube", {"element": args.element}, outputs, {}, args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nccube",
        description="Correlation-box classification, Bell/steering bounds "
                    "and finite-dimensional approximation.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--level", type=int, default=1)
        p.add_argument("--tol", type=float, default=1e-7)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)

    p = sub.add_parser("classify", help="classify a box file")
    p.add_argument("box")
    common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("bell", help="bounds for a Bell functional file")
    p.add_argument("functional")
    p.add_argument("--dims", type=int, nargs=2, default=(2, 2))
    p.add_argument("--restarts", type=int, default=10)
    common(p)
    p.set_defaults(func=_cmd_bell)

    p = sub.add_parser("steer", help="steering functional or assemblage file")
    p.add_argument("file")
    p.add_argument("--mode", choices=("violation", "membership", "bound"),
                   default="violation")
    common(p)
    p.set_defaults(func=_cmd_steer)

    p = sub.add_parser("approx", help="finite-dimensional approximation")
    p.add_argument("--realization", required=True)
    p.add_argument("--eps", type=float, required=True)
    common(p)
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("gen", help="write a named fixture file")
    p.add_argument("fixture", choices=sorted(_FIXTURES))
    p.add_argument("--v", type=float, default=0.5,
                   help="visibility for the isotropic fixture")
    common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("cube", help="coefficient-array queries")
    p.add_argument("element")
    common(p)
    p.set_defaults(func=_cmd_cube)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (sdp.SolverError, RuntimeError) as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
