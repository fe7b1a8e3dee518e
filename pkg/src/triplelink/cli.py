"""Command-line entry point ``triplelink``.

Exit codes: 0 ok, 2 uncertified or failed check, 3 precondition failure,
4 input/output or parse error.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from .curves import Link3
from .errors import (GenericityError, NonBorromean, NonExactForm, NotClosed, SeparationError,
                     TubeError)

EXIT_OK, EXIT_UNCERTIFIED, EXIT_PRECONDITION, EXIT_IO = 0, 2, 3, 4
PRECONDITIONS = (SeparationError, NonBorromean, NonExactForm, NotClosed, GenericityError,
                 TubeError)


class InputError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def emit(payload, out=None):
    out = out or sys.stdout
    json.dump(_jsonable(payload), out, sort_keys=True, indent=2)
    out.write("\n")


def _load_link(path):
    try:
        return Link3.load(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read link from {path}: {exc}") from exc


def _load_tubes(path):
    from .tubes import FluxTube
    try:
        with open(path) as fh:
            data = json.load(fh)
        if "tubes" not in data:
            raise ValueError("missing 'tubes' list")
        return [FluxTube.from_dict(t) for t in data["tubes"]]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read tubes from {path}: {exc}") from exc


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def cmd_mu12(args):
    from .invariants import mu12_crossings, mu12_gauss
    link = _load_link(args.link)
    i, j = args.pair
    comps = list(link)
    if not (1 <= i <= len(comps) and 1 <= j <= len(comps)) or i == j:
        raise InputError(f"bad component pair {i} {j}")
    n = args.n
    rep = mu12_gauss(comps[i - 1], comps[j - 1], ns=(n // 2, n, 2 * n))
    rep.meta["crossings"] = mu12_crossings(comps[i - 1], comps[j - 1])
    rep.meta["pair"] = [i, j]
    emit(rep.to_dict())
    return EXIT_OK if rep.certified else EXIT_UNCERTIFIED


def cmd_mu123(args):
    from .invariants import mu123_hopf
    link = _load_link(args.link)
    n = args.n
    ns = (n // 2, n, 2 * n) if args.refine else (n // 2, n)
    rep = mu123_hopf(link, ns=ns)
    emit(rep.to_dict())
    return EXIT_OK if rep.certified else EXIT_UNCERTIFIED


def _table(checks):
    return {"checks": [c.to_dict() for c in checks], "passed": all(c.passed for c in checks)}


def cmd_confcheck(args):
    from .verify import quick_checks
    keep = {"duality matrix", "projection degrees", "relation residual", "Whitehead identities",
            "permutation identities"}
    checks = [c for c in quick_checks(args.n) if c.name in keep]
    if not args.all:
        checks = [c for c in checks if c.name in ("duality matrix", "projection degrees")]
    table = _table(checks)
    emit(table)
    return EXIT_OK if table["passed"] else EXIT_UNCERTIFIED


def cmd_helicity(args):
    from .helicity import estimate_H123
    tubes = _load_tubes(args.tubes)
    series = estimate_H123(tubes, T_list=tuple(_int_list(args.T)), samples=args.samples,
                           seed=args.seed, mode=args.mode, short_paths=args.short_paths)
    d = series.to_dict()
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "estimate", "stderr", "aborted_samples", "uncertified"])
        for row in d["series"]:
            w.writerow([row["T"], repr(row["estimate"]), repr(row["stderr"]),
                        row["aborted_samples"], row["uncertified"]])
        sys.stdout.write(buf.getvalue())
    else:
        emit(d)
    return EXIT_OK


def cmd_energy(args):
    from .energy import bound_report
    tubes = _load_tubes(args.tubes)
    rep = bound_report(tubes, seed=args.seed, voxel_h=args.voxel, samples=args.samples,
                       wedge_samples=args.wedge_samples, scaling=args.scaling)
    emit(rep.to_dict())
    return EXIT_OK


def cmd_verify(args):
    from .verify import full_checks, quick_checks
    checks = quick_checks(args.n) if args.level == "quick" else full_checks(
        args.n, samples=args.samples, seed=args.seed)
    table = _table(checks)
    emit(table)
    return EXIT_OK if table["passed"] else EXIT_UNCERTIFIED


def build_parser():
    p = argparse.ArgumentParser(prog="triplelink",
                                description="Linking invariants, helicity and energy bounds.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mu12", help="pairwise linking number (Gauss integral)")
    s.add_argument("link")
    s.add_argument("--pair", nargs=2, type=int, default=(1, 2), metavar=("I", "J"))
    s.add_argument("--n", type=int, default=64)
    s.set_defaults(func=cmd_mu12)

    s = sub.add_parser("mu123", help="triple linking number of a Borromean-type link")
    s.add_argument("link")
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--refine", action="store_true", help="add a 2n level to the n/2, n pair")
    s.set_defaults(func=cmd_mu123)

    s = sub.add_parser("confcheck", help="configuration-space identities")
    s.add_argument("--all", action="store_true")
    s.add_argument("--n", type=int, default=64)
    s.set_defaults(func=cmd_confcheck)

    s = sub.add_parser("helicity", help="third-order helicity of three flux tubes")
    s.add_argument("tubes")
    s.add_argument("--T", default="1,2,3", help="comma-separated transit counts")
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--mode", choices=("flux", "volume"), default="flux")
    s.add_argument("--short-paths", choices=("radial", "tube-linear"), default="radial")
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_helicity)

    s = sub.add_parser("energy-bound", help="ingredients of the energy lower bound")
    s.add_argument("tubes")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--voxel", type=float, default=0.02)
    s.add_argument("--samples", type=int, default=10 ** 6)
    s.add_argument("--wedge-samples", type=int, default=10 ** 5)
    s.add_argument("--scaling", action="store_true", help="include the dilation audit")
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("verify", help="run the self-check suite")
    s.add_argument("level", nargs="?", choices=("quick", "full"), default="quick")
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--samples", type=int, default=16)
    s.add_argument("--seed", type=int, default=7)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PRECONDITIONS as exc:
        print(f"precondition failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
