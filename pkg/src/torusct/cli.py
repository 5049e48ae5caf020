"""Command-line pipeline: phantom -> directions -> forward -> noise -> reconstruct.

Every stage reads and writes JSON files.  Reports are CSV, images are
binary PGM.  Exit codes: 2 schema, 3 covering, 4 weight, 5 numeric.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import phantoms
from .errors import NumericError, SchemaError, TorusError
from .grassmann import covering_directions, direction_set_from_json, direction_set_to_json
from .radon import (
    forward,
    invert_bp_sum,
    invert_filtered_adjoint,
    invert_slice,
    sinogram_from_json,
    sinogram_to_json,
)
from .regular import (
    TikhonovConfig,
    draw_noise,
    rate_bound,
    regime_violations,
    regstrat_experiment,
    regularized_inverse,
    reports_to_csv,
    sqrt_rule,
    stability_report,
    stability_to_csv,
    tikhonov_solve,
    weight_constants,
)
from .spectrum import FreqBox, evaluate_grid, hs_norm, spectrum_from_json, spectrum_to_json
from .weights import normal_multiplier, validate, weight_from_config

DEFAULT_WEIGHTS = {
    "filtered-adjoint": {"kind": "constant"},
    "bp-sum": {"kind": "partition"},
    "tikhonov": {"kind": "normalized"},
    "slice": {"kind": "constant"},
}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TORUSCT_THREADS", "1")))
    except ValueError:
        return 1


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None


def _write(path: str, text: str, inputs=()):
    out = Path(path).resolve()
    if any(out == Path(p).resolve() for p in inputs if p):
        raise SchemaError(f"output path {path} must differ from the input paths")
    out.write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _weight_cfg(arg: str | None, mode: str) -> dict:
    if arg is None:
        return DEFAULT_WEIGHTS[mode]
    if arg.lstrip().startswith("{"):
        try:
            return json.loads(arg)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"bad inline weight JSON: {exc}") from None
    return _read_json(arg)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# commands


def cmd_phantom(args) -> int:
    box = FreqBox(args.n, args.K)
    if args.kind == "delta":
        if not args.at:
            raise SchemaError("--kind delta needs --at k1,k2,...")
        k = [int(v) for v in args.at.split(",")]
        if len(k) != args.n or k not in box:
            raise SchemaError(f"--at {args.at} is not a frequency of the box")
        f = phantoms.delta_phantom(box, k, real=args.real)
    elif args.kind == "bump":
        f = phantoms.bump_phantom(box)
    else:
        f = phantoms.random_phantom(box, np.random.default_rng(args.seed), real=args.real)
    _write(args.out, _dump(spectrum_to_json(f)))
    return 0


def cmd_directions(args) -> int:
    D = covering_directions(args.n, args.d, FreqBox(args.n, args.K), args.extra)
    _write(args.out, _dump(direction_set_to_json(D)))
    return 0


def cmd_forward(args) -> int:
    f = spectrum_from_json(_read_json(args.phantom))
    D = direction_set_from_json(_read_json(args.directions))
    if f.n != D.n:
        raise SchemaError(f"phantom is on T^{f.n} but directions live in Q^{D.n}")
    _write(args.out, _dump(sinogram_to_json(forward(f, D))), [args.phantom, args.directions])
    return 0


def cmd_noise(args) -> int:
    g = sinogram_from_json(_read_json(args.sinogram))
    w = weight_from_config(_weight_cfg(args.weight, "tikhonov"), g.directions, g.box)
    noise = draw_noise(g.directions, g.box, w, args.t, args.eps, np.random.default_rng(args.seed))
    _write(args.out, _dump(sinogram_to_json(g + noise)), [args.sinogram])
    return 0


def cmd_reconstruct(args) -> int:
    g = sinogram_from_json(_read_json(args.sinogram))
    D, box = g.directions, g.box
    w = weight_from_config(_weight_cfg(args.weight, args.mode), D, box)
    W = normal_multiplier(w, D, box)
    bound = None
    if args.mode == "filtered-adjoint":
        f = invert_filtered_adjoint(g, w)
    elif args.mode == "bp-sum":
        f = invert_bp_sum(g, w)
    elif args.mode == "slice":
        f = invert_slice(g)
    else:
        cfg = TikhonovConfig(args.alpha, w, args.s, args.r, args.t, args.delta)
        if args.assert_bound:
            # Regularization strategy: P^alpha_{w,s} R^* g, error measured in H^r.
            f = regularized_inverse(g, w, cfg.s, cfg.alpha)
        else:
            f = tikhonov_solve(g, cfg)
    truth = spectrum_from_json(_read_json(args.truth)) if args.truth else None
    max_err = hs_err = ""
    passed = ""
    if truth is not None:
        if truth.box != box:
            raise SchemaError("ground truth uses a different frequency box")
        max_err = repr(f.max_abs_diff(truth))
        hs_err = repr(hs_norm(f - truth, args.r if args.mode == "tikhonov" else args.s))
    if args.mode == "tikhonov" and args.assert_bound:
        if truth is None or args.eps is None:
            raise SchemaError("--assert-bound needs --truth and --eps")
        cfg = TikhonovConfig(args.alpha, w, args.s, args.r, args.t, args.delta)
        bad = regime_violations(cfg, weight_constants(w)[0])
        if bad:
            raise NumericError("; ".join(bad))
        bound = rate_bound(cfg, hs_norm(truth, args.r + args.delta), args.eps)
        passed = str(float(hs_err) <= bound).lower()
    _write(args.out, _dump(spectrum_to_json(f)), [args.sinogram, args.truth])
    if args.summary:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["mode", "max_err", "hs_err", "W_min", "W_max", "bound", "pass"])
        writer.writerow([args.mode, max_err, hs_err, repr(W.min), repr(W.max),
                         "" if bound is None else repr(bound), passed])
        _write(args.summary, buf.getvalue(), [args.sinogram, args.truth, args.out])
    if passed == "false":
        print(f"error {hs_err} exceeds the rate bound {bound!r}", file=sys.stderr)
        return 5
    return 0


def cmd_validate_weight(args) -> int:
    D = direction_set_from_json(_read_json(args.directions))
    box = FreqBox(D.n, args.K)
    w = weight_from_config(_weight_cfg(args.weight, "filtered-adjoint"), D, box)
    report = validate(w, D, box)
    _write(args.out, report.to_csv(), [args.directions])
    return 0 if report.passed else 4


def _experiment_inputs(args):
    if args.phantom:
        f = spectrum_from_json(_read_json(args.phantom))
    else:
        f = phantoms.random_phantom(FreqBox(args.n, args.K), np.random.default_rng(args.seed), real=True)
    if args.directions:
        D = direction_set_from_json(_read_json(args.directions))
    else:
        D = covering_directions(f.n, args.d or f.n - 1, f.box)
    w = weight_from_config(_weight_cfg(args.weight, "tikhonov"), D, f.box)
    return f, D, w


def cmd_experiment(args) -> int:
    f, D, w = _experiment_inputs(args)
    if args.kind == "regstrat":
        cfg = TikhonovConfig(1.0, w, args.s, args.r, args.t, args.delta)
        rule = sqrt_rule if args.alpha is None else (lambda eps: args.alpha)
        reports = regstrat_experiment(f, cfg, _floats(args.eps_grid), D, rule,
                                      np.random.default_rng(args.seed), workers=_threads())
        text = reports_to_csv(reports, args.seed)
    else:
        reports = [stability_report(f, w, D, args.s, p) for p in _floats(args.p_grid)]
        text = stability_to_csv(reports, args.seed)
    _write(args.out, text, [args.phantom, args.directions])
    return 0


def write_pgm(values: np.ndarray) -> bytes:
    lo, hi = float(values.min()), float(values.max())
    if hi > lo:
        pix = np.round((values - lo) / (hi - lo) * 255.0)
    else:
        pix = np.zeros_like(values)
    rows, cols = values.shape
    header = f"P5\n# min={lo!r} max={hi!r}\n{cols} {rows}\n255\n".encode()
    return header + pix.astype(np.uint8).tobytes()


def cmd_render(args) -> int:
    f = spectrum_from_json(_read_json(args.spectrum))
    if f.n != 2:
        raise SchemaError(f"render needs n = 2, got n = {f.n}")
    values = np.real(evaluate_grid(f, args.N))
    out = Path(args.out)
    if out.resolve() == Path(args.spectrum).resolve():
        raise SchemaError("output path must differ from the input path")
    out.write_bytes(write_pgm(values))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torusct", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write a test function as Spectrum JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--kind", choices=["random", "delta", "bump"], default="random")
    p.add_argument("--at", help="frequency for --kind delta, e.g. 0,1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--real", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("directions", help="write a covering DirectionSet JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--extra", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_directions)

    p = sub.add_parser("forward", help="noiseless Radon data")
    p.add_argument("--phantom", required=True)
    p.add_argument("--directions", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("noise", help="add Gaussian noise of a given data norm")
    p.add_argument("--sinogram", required=True)
    p.add_argument("--weight", help="weight config JSON (path or inline)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("reconstruct", help="invert Radon data")
    p.add_argument("--sinogram", required=True)
    p.add_argument("--mode", choices=sorted(DEFAULT_WEIGHTS), default="filtered-adjoint")
    p.add_argument("--weight")
    p.add_argument("--alpha", type=float, default=1e-3)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--eps", type=float)
    p.add_argument("--truth", help="ground-truth Spectrum JSON for the error columns")
    p.add_argument("--assert-bound", action="store_true",
                   help="tikhonov: reconstruct with P^alpha_{w,s} R^* and check the rate bound")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="CSV summary path")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("validate-weight", help="check weight properties, CSV report")
    p.add_argument("--weight")
    p.add_argument("--directions", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validate_weight)

    p = sub.add_parser("experiment", help="regularization-strategy or stability experiment")
    p.add_argument("kind", choices=["regstrat", "stability"])
    p.add_argument("--phantom")
    p.add_argument("--directions")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--d", type=int)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--weight")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--alpha", type=float, help="fixed alpha instead of sqrt(eps)")
    p.add_argument("--eps-grid", default="1e-2,1e-4,1e-6")
    p.add_argument("--p-grid", default="1.5,2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("render", help="PGM image of a 2-D spectrum")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--N", type=int, default=128)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TorusError as exc:
        print(f"torusct {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"torusct {args.command}: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
