"""Command-line entry point.

Every command writes its results into ``--out`` (default ``tangentlab-out``)
and prints a one-line summary.  Exit codes: 0 success, 1 a checked verdict
failed, 2 usage or resource error.

Settings come from, in increasing priority: built-in defaults, a flat
``key = value`` config file (``--config``) and command-line flags.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from pathlib import Path

import numpy as np

from . import banach as B
from .davis import certify_davis, davis_split
from .estimator import decoupling_ratio, weak_type_constant
from .experiments import EXPERIMENTS, run_experiment
from .martingale import check_ci, check_tangent, decouple, load_kernel, random_kernel, save_kernel
from .probspace import AtomCapError, set_atom_cap, uniform
from .search import SearchConfig, dimension_sweep, hill_climb, umd_constant_exact

COMMANDS = ("ratio", "weak-type", "umd", "sweep", "experiment", "certify", "check")

DEFAULTS = {
    "space": "lp:dim=2,p=inf",
    "p": 1.0,
    "n": 3,
    "arity": 2,
    "engine": "exact",
    "seed": 0,
    "budget": 10_000,
    "restarts": 4,
    "samples": 20_000,
    "out": "tangentlab-out",
    "atom_cap": None,
    "threads": 1,
    "kernel": None,
    "against": None,
    "dims": "2,4,8",
    "mode": "decoupling",
    "svg": False,
}

# experiment keyword for each setting that experiments understand
_EXPERIMENT_KEYS = {"dims": "dims", "n": "N", "p": "p", "seed": "seed", "budget": "budget",
                    "restarts": "restarts", "space": "space", "threads": "workers"}


class UsageError(Exception):
    pass


def _int(text, key):
    try:
        return int(text)
    except (TypeError, ValueError):
        raise UsageError(f"--{key.replace('_', '-')}: expected an integer, got {text!r}") from None


def _float(text, key):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise UsageError(f"--{key.replace('_', '-')}: expected a number, got {text!r}") from None


def _bool(text, key):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"--{key}: expected true/false, got {text!r}")


_CONVERT = {
    "p": _float, "n": _int, "arity": _int, "seed": _int, "budget": _int, "restarts": _int, "samples": _int,
    "atom_cap": _int, "threads": _int, "svg": _bool,
}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment.  Unknown keys are errors."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for i, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {i} is not key = value: {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"--config: unknown key {key!r} on line {i}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tangentlab", description="Decoupling constants of vector-valued martingales.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value settings file")
        sp.add_argument("--space", help="space descriptor, e.g. lp:dim=4,p=inf")
        sp.add_argument("--p", help="exponent p >= 1")
        sp.add_argument("--n", help="depth N")
        sp.add_argument("--arity", help="outcomes per coordinate for random kernels")
        sp.add_argument("--seed", help="random seed")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--atom-cap", dest="atom_cap", help="override the atom cap")
        sp.add_argument("--threads", help="worker count (results do not depend on it)")
        sp.add_argument("--kernel", help="serialized kernel file")

    sp = sub.add_parser("ratio", help="decoupling ratio of a kernel")
    common(sp)
    sp.add_argument("--engine", choices=("exact", "mc"))
    sp.add_argument("--samples", help="Monte Carlo sample count")
    sp = sub.add_parser("weak-type", help="weak-type constant of a kernel")
    common(sp)
    sp = sub.add_parser("umd", help="UMD ratio by sign enumeration (searches when no kernel is given)")
    common(sp)
    sp.add_argument("--budget")
    sp.add_argument("--restarts")
    sp = sub.add_parser("sweep", help="best-found constants across dimensions")
    common(sp)
    sp.add_argument("--dims", help="comma-separated sizes")
    sp.add_argument("--mode", choices=("decoupling", "umd_exact", "garling_forward", "garling_reverse"))
    sp.add_argument("--budget")
    sp.add_argument("--restarts")
    sp = sub.add_parser("experiment", help="run a named experiment")
    sp.add_argument("name", choices=sorted(EXPERIMENTS))
    common(sp)
    sp.add_argument("--dims", help="comma-separated sizes")
    sp.add_argument("--budget")
    sp.add_argument("--restarts")
    sp.add_argument("--svg", action="store_const", const="true", help="also write a line chart")
    sp = sub.add_parser("certify", help="Davis decomposition certificates")
    common(sp)
    sp = sub.add_parser("check", help="tangency and (CI) of a decoupled kernel")
    common(sp)
    sp.add_argument("--against", help="take the decoupled sequence from this kernel instead")
    return ap


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags; convert and validate values."""
    given = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "name", "config")}
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(read_config(args.config))
    settings.update(given)
    settings["explicit"] = set(given) | (set(read_config(args.config)) if args.config else set())
    for key, conv in _CONVERT.items():
        if settings[key] is not None:
            settings[key] = conv(settings[key], key)
    try:
        settings["space"] = B.parse_space(settings["space"])
    except (B.DescriptorError, ValueError) as exc:
        raise UsageError(f"--space: {exc}") from None
    if settings["p"] < 1 or settings["p"] == float("inf"):
        raise UsageError(f"--p: must be in [1, inf), got {settings['p']}")
    if settings["n"] < 1:
        raise UsageError(f"--n: must be positive, got {settings['n']}")
    if settings["arity"] < 2:
        raise UsageError(f"--arity: must be at least 2, got {settings['arity']}")
    for key in ("budget", "restarts", "samples", "threads"):
        if settings[key] < 1:
            raise UsageError(f"--{key}: must be positive, got {settings[key]}")
    if settings["engine"] not in ("exact", "mc"):
        raise UsageError(f"--engine: expected exact or mc, got {settings['engine']!r}")
    try:
        settings["dims"] = [int(d) for d in str(settings["dims"]).split(",") if d.strip()]
    except ValueError:
        raise UsageError(f"--dims: expected comma-separated integers, got {settings['dims']!r}") from None
    if not settings["dims"] or min(settings["dims"]) < 1:
        raise UsageError("--dims: need at least one positive size")
    return settings


def _kernel(s: dict, key: str = "kernel"):
    """The kernel from ``--kernel`` (checked against ``--space``/``--n``) or a seeded random one."""
    path = s[key]
    if path is not None:
        try:
            k = load_kernel(path)
        except OSError as exc:
            raise UsageError(f"--{key}: cannot read {path}: {exc.strerror}") from None
        except ValueError as exc:
            raise UsageError(f"--{key}: {exc}") from None
        if "space" in s["explicit"] and s["space"] != k.banach:
            raise UsageError(f"--space: {B.format_space(s['space'])} does not match the kernel's "
                             f"{B.format_space(k.banach)}")
        if "n" in s["explicit"] and s["n"] > k.N:
            raise UsageError(f"--n: kernel has depth {k.N}, got {s['n']}")
        return k
    rng = np.random.default_rng(s["seed"])
    return random_kernel(uniform(s["n"], s["arity"]), s["space"], rng)


def _depth(s: dict, k) -> int:
    return s["n"] if "n" in s["explicit"] else k.N


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n")


def _default(o):
    if isinstance(o, (np.generic,)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, tuple)):
        return list(o)
    raise TypeError(type(o))


def _fmt(x: float) -> str:
    return repr(round(float(x), 12))


# commands --------------------------------------------------------------------

def cmd_ratio(s, out):
    k = _kernel(s)
    est = decoupling_ratio(k, s["p"], N=_depth(s, k), engine=s["engine"], samples=s["samples"], seed=s["seed"],
                           workers=s["threads"])
    est.seed = s["seed"]
    _write_json(out / "ratio.json", {**est.to_dict(), "space": B.format_space(k.banach)})
    save_kernel(k, out / "kernel.txt")
    se = f" +- {est.std_error:.3g}" if est.std_error else ""
    print(f"ratio {_fmt(est.value)}{se} ({est.engine}, fingerprint {est.fingerprint}, seed {s['seed']})")
    return 0


def cmd_weak_type(s, out):
    k = _kernel(s)
    est = weak_type_constant(k, N=_depth(s, k))
    est.seed = s["seed"]
    _write_json(out / "weak_type.json", {**est.to_dict(), "space": B.format_space(k.banach)})
    print(f"weak-type {_fmt(est.value)} (fingerprint {est.fingerprint}, seed {s['seed']})")
    return 0


def cmd_umd(s, out):
    if s["kernel"] is not None:
        k = _kernel(s)
        if not k.space.is_rademacher:
            raise UsageError("--kernel: UMD enumeration needs a Rademacher (arity 2) kernel")
        est = umd_constant_exact(k, s["p"])
    else:
        cfg = SearchConfig(s["space"], p=s["p"], N=s["n"], mode="umd_exact", budget=s["budget"], seed=s["seed"],
                           restarts=s["restarts"])
        res = hill_climb(cfg, workers=s["threads"])
        k, est = res.kernel, res.estimate
    est.seed = s["seed"]
    _write_json(out / "umd.json", {**est.to_dict(), "space": B.format_space(k.banach)})
    save_kernel(k, out / "umd_kernel.txt")
    print(f"umd {_fmt(est.value)} (fingerprint {est.fingerprint}, seed {s['seed']})")
    # the all-plus sign vector gives ratio 1, so the maximum cannot fall below it
    return 0 if est.degenerate or est.value >= 1.0 - 1e-12 else 1


def cmd_sweep(s, out):
    cfg = SearchConfig(s["space"], p=s["p"], N=s["n"], mode=s["mode"], budget=s["budget"], seed=s["seed"],
                       restarts=s["restarts"], arity=s["arity"])
    tab = dimension_sweep(cfg, s["dims"], workers=s["threads"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(tab.to_csv())
    for row, res in zip(tab.rows, tab.results):
        save_kernel(res.kernel, out / f"sweep_dim{row['dim']}.txt")
    best = tab.column("best_constant")
    ok = all(b >= a for a, b in zip(best, best[1:]))
    print(f"sweep {s['mode']} {','.join(_fmt(b) for b in best)} (seed {s['seed']}, {len(best)} rows)")
    return 0 if ok else 1


def cmd_experiment(s, out, name):
    fn = EXPERIMENTS[name]
    accepted = inspect.signature(fn).parameters
    params = {}
    if "workers" in accepted:
        params["workers"] = s["threads"]
    for key, kw in _EXPERIMENT_KEYS.items():
        if key == "threads" or key not in s["explicit"]:
            continue
        if key == "dims" and "ks" in accepted:
            kw = "ks"
        if kw not in accepted:
            raise UsageError(f"--{key}: not a parameter of experiment {name}")
        params[kw] = tuple(s[key]) if key == "dims" else s[key]
    rep = run_experiment(name, **params)
    paths = rep.write(out, svg=s["svg"])
    status = "pass" if rep.passed else "FAIL"
    print(f"experiment {name} {status}: {len(rep.rows)} rows, {sum(v.passed for v in rep.verdicts)}/"
          f"{len(rep.verdicts)} verdicts, {paths['csv']}")
    return 0 if rep.passed else 1


def cmd_certify(s, out):
    k = _kernel(s)
    cert = certify_davis(davis_split(k), strict=False)
    payload = json.loads(cert.to_json())
    payload.update(fingerprint=k.fingerprint, seed=s["seed"], space=B.format_space(k.banach))
    _write_json(out / "certificate.json", payload)
    worst = min(e["slack"] for e in cert.entries.values())
    print(f"certify {'pass' if cert.passed else 'FAIL'}: worst slack {worst:.3e} (fingerprint {k.fingerprint})")
    return 0 if cert.passed else 1


def cmd_check(s, out):
    k = _kernel(s)
    pair = decouple(k)
    e = pair.e
    if s["against"] is not None:
        other = decouple(_kernel(s, "against"))
        if other.doubled != pair.doubled or other.e.diffs.shape != e.diffs.shape:
            raise UsageError("--against: kernel lives on a different space")
        e = other.e
    tan = check_tangent(pair.d, e)
    ci = check_ci(e, pair.doubled.x_axes)
    _write_json(out / "check.json", {"tangent": tan.ok, "ci": ci.ok, "tangent_witness": tan.witness,
                                     "ci_witness": ci.witness, "fingerprint": k.fingerprint, "seed": s["seed"]})
    yn = {True: "yes", False: "no"}
    print(f"tangent: {yn[tan.ok]}, CI: {yn[ci.ok]}")
    return 0 if tan.ok and ci.ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        s = resolve(args)
        old = set_atom_cap(s["atom_cap"]) if s["atom_cap"] is not None else None
        out = Path(s["out"])
        try:
            cmd = args.command
            if cmd == "experiment":
                return cmd_experiment(s, out, args.name)
            return {"ratio": cmd_ratio, "weak-type": cmd_weak_type, "umd": cmd_umd, "sweep": cmd_sweep,
                    "certify": cmd_certify, "check": cmd_check}[cmd](s, out)
        finally:
            if old is not None:
                set_atom_cap(old)
    except UsageError as exc:
        print(f"tangentlab: error: {exc}", file=sys.stderr)
        return 2
    except AtomCapError as exc:
        print(f"tangentlab: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"tangentlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
