"""Command-line front end: ``eval``, ``verify`` and ``sweep``.

Exit codes: 0 success, 1 a verification assertion failed, 2 invalid
configuration, 3 math-domain error (singular or non-convergent input).

``verify`` and ``sweep`` write a CSV report and a JSON manifest into the
output directory (``--out``, else ``$LAGUERRE_RIESZ_OUT``, else
``./laguerre-riesz-out``).  CSV content depends only on the configuration;
the manifest adds wall-clock fields and SHA-256 digests of its outputs.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import harness
from .laguerre_ops import (
    ConvergenceError, as_multi_index, as_nu, delta_k_heat_kernel_nd, gamma_nu,
    heat_kernel_nd,
)
from .special_fn import laguerre_fn_nd
from .spectral import riesz_kernel

OUT_ENV = "LAGUERRE_RIESZ_OUT"
DEFAULT_OUT = "laguerre-riesz-out"

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3

SUITES = ("bessel", "kernel-identities", "bounds", "odd-improvement", "convolution",
          "majorants", "offdiagonal", "spectral")


class ConfigError(ValueError):
    """Invalid command-line configuration."""


@dataclass
class RunConfig:
    command: str
    argv: list
    nu: tuple = ()
    k: tuple = ()
    sizes: tuple = ()
    out_dir: str = ""
    seed: int = 0
    workers: int = 1
    options: dict = field(default_factory=dict)


# --- parsing -----------------------------------------------------------------

def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--seed", type=int, default=0, help="seed for random probes")

    p = _Parser(prog="laguerre-riesz", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", parents=[common], help="evaluate a kernel or basis function")
    ev.add_argument("kind", choices=("kernel", "delta-kernel", "riesz-kernel", "basis"))
    ev.add_argument("--nu", type=_floats, required=True)
    ev.add_argument("--k", type=_ints)
    ev.add_argument("--t", type=_floats)
    ev.add_argument("--x", type=_floats, required=True)
    ev.add_argument("--y", type=_floats)

    vf = sub.add_parser("verify", parents=[common], help="run a verification suite")
    vf.add_argument("suite", choices=SUITES)
    vf.add_argument("--nu", type=_floats)
    vf.add_argument("--k", type=_ints)
    vf.add_argument("--alpha", type=_floats, help="orders (bessel) or majorant exponent")
    vf.add_argument("--beta", type=float)
    vf.add_argument("--a", type=float, help="convolution exponent")
    vf.add_argument("--c", type=float, help="convolution Gaussian rate")
    vf.add_argument("--p", type=float)
    vf.add_argument("--q", type=float)
    vf.add_argument("--t", type=float)
    vf.add_argument("--profile-a", type=float)
    vf.add_argument("--profile-ex", type=_floats)
    vf.add_argument("--profile-ey", type=_floats)
    vf.add_argument("--profile-c", type=float)
    vf.add_argument("--tol", type=float)

    sw = sub.add_parser("sweep", parents=[common], help="weighted norm sweep")
    sw.add_argument("--nu", type=_floats, default=(-0.75,))
    sw.add_argument("--k", type=_ints, default=(2,))
    sw.add_argument("--p", type=_floats, default=(1.1, 4.0 / 3.0 + 0.05, 2.0, 3.9, 6.0))
    sw.add_argument("--alpha", type=_floats, default=(0.0,))
    sw.add_argument("--sizes", type=_ints, default=(256, 512, 1024))
    sw.add_argument("--threshold", type=float, default=1.5)
    return p


def make_config(args, argv):
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    out = args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    opts = {key: val for key, val in vars(args).items()
            if key not in ("command", "nu", "k", "sizes", "out", "seed", "workers")}
    cfg = RunConfig(args.command, list(argv),
                    nu=tuple(args.nu or ()), k=tuple(getattr(args, "k", None) or ()),
                    sizes=tuple(getattr(args, "sizes", None) or ()), out_dir=out,
                    seed=args.seed, workers=args.workers, options=opts)
    if cfg.nu:
        try:
            as_nu(cfg.nu)
        except ValueError as exc:
            raise ConfigError(str(exc))
    if cfg.k:
        try:
            as_multi_index(cfg.k)
        except ValueError as exc:
            raise ConfigError(str(exc))
        if cfg.nu and len(cfg.k) != len(cfg.nu):
            raise ConfigError("--nu and --k must have the same length")
    return cfg


# --- output ------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def rows_to_csv(rows):
    """Serialise a list of dicts; columns in first-seen order."""
    cols = []
    for r in rows:
        for key in r:
            if key not in cols:
                cols.append(key)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[c]) if c in r else "" for c in cols])
    return buf.getvalue()


def _atomic_write(path, data):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(cfg, stem, rows, passes, failures, started):
    """Write ``<stem>.csv`` and its manifest ``<stem>.manifest.json``."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    text = rows_to_csv(rows)
    csv_path = os.path.join(cfg.out_dir, stem + ".csv")
    _atomic_write(csv_path, text)
    manifest = {
        "artifact": "laguerre-riesz",
        "version": __version__,
        "config": {
            "command": cfg.command,
            "argv": cfg.argv,
            "nu": list(cfg.nu),
            "k": list(cfg.k),
            "sizes": list(cfg.sizes),
            "seed": cfg.seed,
            "workers": cfg.workers,
            "options": {key: (list(v) if isinstance(v, tuple) else v)
                        for key, v in cfg.options.items()},
        },
        "started": started,
        "elapsed_s": time.time() - started,
        "passes": passes,
        "failures": failures,
        "outputs": {os.path.basename(csv_path):
                    hashlib.sha256(text.encode()).hexdigest()},
    }
    _atomic_write(os.path.join(cfg.out_dir, stem + ".manifest.json"),
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return csv_path


# --- commands ----------------------------------------------------------------

def cmd_eval(cfg, out=None):
    out = sys.stdout if out is None else out
    o = cfg.options
    kind = o["kind"]
    nu = as_nu(cfg.nu)
    n = len(nu)
    xs = o["x"]
    ys = o.get("y")
    ts = o.get("t")
    need_y = kind != "basis"
    if need_y and not ys:
        raise ConfigError(f"eval {kind} needs --y")
    if kind in ("kernel", "delta-kernel") and not ts:
        raise ConfigError(f"eval {kind} needs --t")
    if kind in ("delta-kernel", "riesz-kernel", "basis") and not cfg.k:
        raise ConfigError(f"eval {kind} needs --k")
    k = as_multi_index(cfg.k) if cfg.k else None
    # one dimension: lists of points; higher dimension: one point each
    if n == 1:
        xp = [(v,) for v in xs]
        yp = [(v,) for v in ys] if need_y else [None]
    else:
        if len(xs) != n or (need_y and len(ys) != n):
            raise ConfigError(f"--x and --y must carry {n} coordinates")
        xp, yp = [tuple(xs)], [tuple(ys)] if need_y else [None]
    rows = []
    for x in xp:
        for y in yp:
            for t in (ts or (None,)):
                if kind == "kernel":
                    v = heat_kernel_nd(nu, t, np.array(x), np.array(y))
                elif kind == "delta-kernel":
                    v = delta_k_heat_kernel_nd(nu, k, t, np.array(x), np.array(y))
                elif kind == "riesz-kernel":
                    v = riesz_kernel(nu, k, np.array(x), np.array(y))
                else:
                    v = laguerre_fn_nd(k, nu, np.array(x))
                rows.append({"kind": kind, "nu": ";".join(_fmt(a) for a in nu),
                             "k": ";".join(str(a) for a in k) if k else "",
                             "t": "" if t is None else t,
                             "x": ";".join(_fmt(a) for a in x),
                             "y": "" if y is None else ";".join(_fmt(a) for a in y),
                             "value": float(v)})
    text = rows_to_csv(rows)
    out.write(text)
    if o.get("out") or os.environ.get(OUT_ENV):
        write_report(cfg, f"eval-{kind}", rows, len(rows), 0, time.time())
    return EXIT_OK


def _report_rows(reports, role="claim", expect_pass=True):
    rows = []
    for r in reports:
        row = {"role": role, "expected": "pass" if expect_pass else "fail"}
        row.update(r.row())
        row["ok"] = int(r.passed == expect_pass)
        rows.append(row)
    return rows


def _suite_rows(cfg):
    o = cfg.options
    name = o["suite"]
    if name == "bessel":
        alphas = o.get("alpha") or (-0.9, -0.5, 0.0, 1.3)
        return _report_rows(harness.verify_bessel_suite(alphas, tol=o.get("tol") or 1e-9))
    if name == "kernel-identities":
        nus = cfg.nu or (-0.75, 0.0, 1.5)
        return _report_rows(harness.verify_kernel_identities(nus, tol=o.get("tol") or 1e-8))
    if name == "bounds":
        nu = cfg.nu or (-0.75,)
        k = cfg.k or (1,) * len(nu)
        if len(k) != len(nu):
            raise ConfigError("--nu and --k must have the same length")
        base = harness.theorem_profile(nu, k)
        custom = any(o.get(key) is not None for key in
                     ("profile_a", "profile_ex", "profile_ey", "profile_c"))
        if custom:
            prof = harness.BoundProfile(
                a=base.a if o.get("profile_a") is None else o["profile_a"],
                e_x=_broadcast(o.get("profile_ex"), base.e_x),
                e_y=_broadcast(o.get("profile_ey"), base.e_y),
                c=o.get("profile_c"))
            return _report_rows([harness.verify_bounds(nu, k, profile=prof)])
        rows = _report_rows([harness.verify_bounds(nu, k)])
        # controls: a too-strong time singularity, and dropping the y factor
        controls = [harness.BoundProfile(a=base.a - 0.5, e_x=base.e_x, e_y=base.e_y)]
        if any(g > 0 for g in gamma_nu(nu).per_coordinate):
            controls.append(harness.BoundProfile(a=base.a, e_x=base.e_x,
                                                 e_y=(0.0,) * len(nu)))
        rows += _report_rows([harness.verify_bounds(nu, k, profile=c) for c in controls],
                             role="control", expect_pass=False)
        return rows
    if name == "odd-improvement":
        nu = (cfg.nu or (0.5,))[0]
        k = (cfg.k or (1,))[0]
        if len(cfg.nu or ()) > 1 or len(cfg.k or ()) > 1:
            raise ConfigError("odd-improvement is one-dimensional")
        rows = _report_rows([harness.verify_odd_improvement(nu, k)])
        rows += _report_rows([harness.verify_odd_improvement(nu, k + 1, control=True)],
                             role="control", expect_pass=False)
        return rows
    if name == "convolution":
        a = 0.25 if o.get("a") is None else o["a"]
        c = 1.0 if o.get("c") is None else o["c"]
        rows = _report_rows([harness.verify_H_convolution(a, c)])
        rows += _report_rows([harness.verify_H_convolution(a, c, rhs_factor=1.0)],
                             role="control", expect_pass=False)
        return rows
    if name == "majorants":
        alphas = o.get("alpha") or (0.2,)
        beta = 0.2 if o.get("beta") is None else o["beta"]
        nu = (cfg.nu or (-0.75,))[0]
        reps = harness.verify_majorant_suite(alpha=alphas[0], beta=beta, nu=nu)
        return _report_rows(reps)
    if name == "offdiagonal":
        p = o.get("p") or 2.0
        q = o.get("q") or p
        beta = 0.25 if o.get("beta") is None else o["beta"]
        t = o.get("t") or 0.25
        return _report_rows([harness.verify_offdiagonal(beta=beta, sigma=beta, p=p, q=q, t=t),
                             harness.verify_on_diagonal(beta=beta, sigma=beta, p=p)])
    if name == "spectral":
        return _report_rows(harness.verify_spectral_suite(cfg.nu or (-0.75, 0.5)))
    raise ConfigError(f"unknown suite {name!r}")


def _broadcast(vals, like):
    if vals is None:
        return like
    if len(vals) == 1:
        return tuple(vals) * len(like)
    if len(vals) != len(like):
        raise ConfigError("profile exponent vector has the wrong length")
    return tuple(vals)


def cmd_verify(cfg):
    started = time.time()
    try:
        rows = _suite_rows(cfg)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc))
    passes = sum(r["ok"] for r in rows)
    failures = len(rows) - passes
    path = write_report(cfg, f"verify-{cfg.options['suite']}", rows, passes, failures, started)
    print(f"{passes}/{len(rows)} checks as expected; report {path}")
    for r in rows:
        if not r["ok"]:
            print(f"unexpected {'pass' if r['pass'] else 'failure'}: {r['name']}")
    return EXIT_OK if failures == 0 else EXIT_FAIL


def cmd_sweep(cfg):
    o = cfg.options
    started = time.time()
    if not o["p"]:
        raise ConfigError("empty p list")
    if not o["alpha"]:
        raise ConfigError("empty alpha list")
    if len(cfg.nu) != 1 or len(cfg.k) != 1:
        raise ConfigError("sweeps are one-dimensional: give a single --nu and --k")
    if any(b <= a for a, b in zip(cfg.sizes, cfg.sizes[1:])) or len(cfg.sizes) < 2:
        raise ConfigError("--sizes needs at least two strictly increasing values")
    if any(not p > 1 or math.isinf(p) for p in o["p"]):
        raise ConfigError("every p must be finite and exceed 1")
    rows = harness.norm_sweep(cfg.nu, cfg.k, o["p"], o["alpha"], sizes=cfg.sizes,
                              threshold=o["threshold"], workers=cfg.workers, seed=cfg.seed)
    table = [r.row() for r in rows]
    path = write_report(cfg, "sweep", table, len(table), 0, started)
    print(f"{len(table)} rows; report {path}")
    return EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args, argv)
        if cfg.command == "eval":
            return cmd_eval(cfg)
        if cfg.command == "verify":
            return cmd_verify(cfg)
        return cmd_sweep(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ConvergenceError) as exc:
        print(f"math-domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
