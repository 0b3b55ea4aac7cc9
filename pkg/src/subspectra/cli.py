"""Command-line entry point.

Exit codes: 0 success, 2 configuration or input error, 3 numerical
failure, 4 size cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dynamics import DegenerateSampleError
from .eigensolver import ConvergenceError, SizeCapError
from .fcidump import FCIDumpError, read_fcidump, table_checksum
from .fock import FockError
from .pipeline import (
    CONFIG_KEYS,
    ConfigError,
    PipelineError,
    load_config,
    reference_spectrum,
    run_pipeline,
    run_scaling_sweep,
    run_variance_study,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_SIZE = 0, 2, 3, 4


def _exit_code(exc):
    if isinstance(exc, PipelineError):
        exc = exc.cause
    if isinstance(exc, SizeCapError):
        return EXIT_SIZE
    if isinstance(exc, (ConfigError, FCIDumpError, OSError)):
        return EXIT_CONFIG
    if isinstance(exc, (ConvergenceError, DegenerateSampleError, FockError, ArithmeticError, ValueError)):
        return EXIT_NUMERICAL
    raise exc


def _add_config_flags(p):
    p.add_argument("config", nargs="?", help="INI configuration file")
    for key, (section, kind) in CONFIG_KEYS.items():
        if kind == "bool":
            p.add_argument(f"--{key}", dest=key, choices=["true", "false"], default=None,
                           help=f"[{section}] {key}")
        else:
            p.add_argument(f"--{key}", dest=key, default=None, metavar=key.upper().replace("-", "_"),
                           help=f"[{section}] {key}")


def _config(args):
    overrides = {key: getattr(args, key) for key in CONFIG_KEYS}
    return load_config(args.config, **overrides)


def _floats(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from None


def _cmd_run(args):
    res = run_pipeline(_config(args))
    s = res.manifest["subspaces"]
    print(f"E0 = {res.e0:.10f}  <A^dag A> = {res.a_norm2:.6f}")
    print(f"configurations: {s['n_configurations']}  max dim S_x: {s['max_dim']}")
    print("peaks (Ha): " + " ".join(f"{p.omega:.4f}" for p in res.spectrum.peaks))
    if res.comparison is not None:
        c = res.manifest["comparison"]
        print(f"matched {c['n_matched']} (+{c['n_merged']} merged), misses {c['n_misses']}, "
              f"spurious {c['n_spurious']}, max error {c['max_abs_error']:.2e}")
    print(f"outputs in {res.config.output_dir}")
    return EXIT_OK


def _cmd_sweep(args):
    cfg = _config(args)
    shots = [int(x) for x in _floats(args.shots_list)]
    seeds = [int(x) for x in _floats(args.seeds)] if args.seeds else None
    rows = run_scaling_sweep(cfg, shots, seeds)
    for r in rows:
        print(f"seed {r['seed']} shots {r['shots']:>6}  max dim {r['max_dim']:>4}  "
              f"level error {r['level_error']:.2e}  (pi/T = {r['resolution']:.2e})")
    return EXIT_OK


def _cmd_variance(args):
    cfg = _config(args)
    estimators = ("sampling", "alternative") if args.estimator == "both" else (args.estimator,)
    rows = run_variance_study(cfg, _floats(args.times), args.draws, estimators)
    for name, t, emp, pred, exact, bound, *_ in rows:
        print(f"{name:<11} t={t:<8g} exact {exact:.6e}  predicted {pred:.6e}  empirical {emp:.6e}  bound {bound:.6e}")
    return EXIT_OK


def _cmd_validate(args):
    table = read_fcidump(args.path)
    print(json.dumps({
        "norb": table.norb, "nelec": table.nelec, "ms2": table.ms2, "e_core": table.e_core,
        "checksum": table_checksum(table),
    }, indent=2))
    return EXIT_OK


def _cmd_reference(args):
    cfg = _config(args)
    ref = reference_spectrum(cfg)
    gaps, weights = ref.levels()
    for g, w in zip(gaps, weights):
        if w > cfg.threshold:
            print(f"{g:.6f}  {w:.6f}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="subspectra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full hybrid run")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("scaling-sweep", help="peak error versus shots per round")
    _add_config_flags(p)
    p.add_argument("--shots-list", default=" ".join(str(2**k) for k in range(4, 15)))
    p.add_argument("--seeds", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("variance-study", help="estimator variances by enumeration")
    _add_config_flags(p)
    p.add_argument("--times", default="0 1 2 5 10 20 50")
    p.add_argument("--draws", type=int, default=0)
    p.add_argument("--estimator", choices=["sampling", "alternative", "both"], default="both")
    p.set_defaults(func=_cmd_variance)

    p = sub.add_parser("validate-fcidump", help="parse and summarise an integral file")
    p.add_argument("path")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("reference-spectrum", help="dense reference levels")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_reference)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # mapped to exit codes; anything unexpected re-raises
        code = _exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, PipelineError) and exc.outputs:
            print(f"partial outputs: {', '.join(exc.outputs)}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
