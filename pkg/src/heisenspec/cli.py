"""heisenspec command-line front end.

Every subcommand prints one document: a JSON envelope
``{"tool", "version", "params", "result"}`` or CSV for table-shaped output.
Exit codes: 0 success, 2 violated precondition or bad input, 3 numerical
failure.  Error documents are ``{"error": code, "detail": {...}}``.

Examples
--------
    heisenspec nu --n 1 --mu 0
    heisenspec weyl-table --coeff gamma --n 1
    heisenspec nilmanifold --N 16 --count 300 --format csv
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, hypo, mehler, oracle, weyl
from .errors import HeisenspecError, InvalidArgument

TOOL = "heisenspec"


# -- deterministic serialization -------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode({"re": obj.real, "im": obj.imag})
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + _encode(v) for k, v in items) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj) + "\n"


def _csv_value(v):
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    return str(v)


def _envelope(params, result):
    return dumps({"tool": TOOL, "version": __version__, "params": params, "result": result})


# -- argument parsing ---------------------------------------------------------

class ArgumentError(InvalidArgument):
    code = "InvalidArgument"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)

    def _print_message(self, message, file=None):
        # --help / --version text is returned by dispatch, not printed here
        if message:
            self._pending = getattr(self, "_pending", "") + message

    def exit(self, status=0, message=None):
        if status:
            raise ArgumentError(message or "argument parsing failed")
        text, self._pending = getattr(self, "_pending", ""), ""
        raise _HelpExit(text or self.format_help())


class _HelpExit(Exception):
    pass


def _finite(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def _positive(text):
    v = _finite(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog=TOOL, description="Heat kernels, hypoellipticity checks and Weyl asymptotics "
                                       "on Heisenberg manifolds.")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("nu", help="the constant nu(mu)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--mu", type=_finite, required=True)
    s.add_argument("--rel-tol", type=_positive, default=mehler.NU_REL_TOL)

    s = sub.add_parser("heat-kernel", help="heat kernel k_mu(x0, x', t)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--mu", type=_finite, required=True)
    s.add_argument("--x0", type=_finite, required=True)
    s.add_argument("--r2", type=_finite, required=True, help="|x'|^2")
    s.add_argument("--t", type=_finite, required=True)
    s.add_argument("--rel-tol", type=_positive, default=mehler.KERNEL_REL_TOL)

    s = sub.add_parser("check", help="hypoellipticity conditions")
    s.add_argument("--file", help="model JSON {abs_eigs, d, mu: [{re, im}], tol}")
    s.add_argument("--condition", required=True, choices=["rockland", "weaker", "Yq", "Xk", "Ypq"])
    for flag in ("n", "kappa", "r", "p", "q", "k", "d", "rank"):
        s.add_argument(f"--{flag}", type=int)

    s = sub.add_parser("weyl-table", help="alpha/beta/gamma coefficient tables")
    s.add_argument("--coeff", required=True, choices=["alpha", "beta", "gamma"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--kappa", type=int, default=0)
    s.add_argument("--rel-tol", type=_positive, default=mehler.NU_REL_TOL)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("--vol-integral", type=_finite, help="also report the CR volume of this integral")
    s.add_argument("--volume-convention", choices=[weyl.VOLUME_INTRO, weyl.VOLUME_DEFINITION],
                   default=weyl.VOLUME_INTRO)

    s = sub.add_parser("predict", help="leading Weyl asymptotics")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--nu0", type=_finite, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=_finite)
    g.add_argument("--k", type=_finite)
    g.add_argument("--t", type=_finite)

    s = sub.add_parser("karamata", help="fit nu0 from heat-trace samples")
    s.add_argument("--samples", required=True, help="CSV with columns t,trace")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--terms", type=int, default=2)

    s = sub.add_parser("mellin", help="partial power P^{-s} by the Mellin integral")
    s.add_argument("--matrix", required=True, help='JSON {"matrix": [[...]]} or a bare nested list')
    s.add_argument("--s", type=_finite, required=True)
    s.add_argument("--step", type=_positive, default=0.05)

    s = sub.add_parser("nilmanifold", help="discrete spectrum on the Heisenberg nilmanifold")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--mu", type=_finite, default=0.0)
    s.add_argument("--format", choices=["json", "csv"], default="json")

    s = sub.add_parser("mass", help="total mass of the mu = 0 heat kernel")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=_finite, required=True)
    s.add_argument("--trunc", type=_finite, required=True)
    s.add_argument("--rel-tol", type=_positive, default=1e-8)
    return p


# -- commands -------------------------------------------------------------------

def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc.strerror}", path=path)
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path} is not valid JSON: {exc.msg}", path=path)


def _cmd_nu(a):
    v = mehler.nu(a.n, a.mu, a.rel_tol, full_output=True)
    return v.to_dict()


def _cmd_heat_kernel(a):
    return mehler.heat_kernel(mehler.HeatQuery(a.n, a.mu, a.x0, a.r2, a.t, a.rel_tol)).to_dict()


def load_model(obj) -> hypo.SublaplacianModel:
    """Parse {"abs_eigs": [...], "d": int, "mu": [{"re", "im"}], "tol": float}."""
    try:
        levi = hypo.LeviData(int(obj["d"]), tuple(float(v) for v in obj["abs_eigs"]))
        mus = tuple(complex(float(z["re"]), float(z.get("im", 0.0))) for z in obj["mu"])
        tol = float(obj.get("tol", hypo.DEFAULT_TOL))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InvalidArgument(f"malformed model: {exc}")
    return hypo.SublaplacianModel(levi, mus, tol)


def _need(a, *names):
    missing = [n for n in names if getattr(a, n) is None]
    if missing:
        raise InvalidArgument("missing flags: " + ", ".join("--" + n for n in missing))


def _cmd_check(a):
    c = a.condition
    if c in ("rockland", "weaker"):
        if a.file is None:
            raise InvalidArgument("--file is required for this condition")
        model = load_model(_read_json(a.file))
        v = hypo.rockland_verdict(model) if c == "rockland" else hypo.weaker_verdict(model)
        return v.to_dict()
    if c == "Yq":
        _need(a, "n", "kappa", "r", "q")
        ok = hypo.y_condition(a.n, a.kappa, a.r, a.q)
    elif c == "Xk":
        _need(a, "d", "rank", "k")
        ok = hypo.x_condition(a.d, a.rank, a.k)
    else:
        _need(a, "n", "kappa", "r", "p", "q")
        ok = hypo.ypq_condition(a.n, a.kappa, a.r, a.p, a.q)
    return hypo.Verdict(c, ok).to_dict()


def _cmd_weyl_table(a):
    rows = list(weyl.table(a.coeff, a.n, a.kappa, a.rel_tol))
    volume = None
    if a.vol_integral is not None:
        setting = weyl.CRSetting(a.n, a.kappa, a.vol_integral)
        volume = {"pseudohermitian": weyl.pseudohermitian_volume(setting, a.volume_convention),
                  "contact": weyl.contact_volume(a.n, a.vol_integral),
                  "convention": a.volume_convention}
    if a.coeff == "gamma":
        header = ["n", "k", "value"]
        data = [[*key, val] for key, val in rows if val is not None]
        skipped = [key for key, val in rows if val is None]
        skip_lines = [f"# skipped n={n},k={k}: ConditionViolated" for n, k in skipped]
    else:
        header = ["n", "kappa", "p", "q", "coefficient", "value"]
        data = [[*key, a.coeff, val] for key, val in rows if val is not None]
        skipped = [key for key, val in rows if val is None]
        skip_lines = [f"# skipped n={n},kappa={k},p={p},q={q}: ConditionViolated" for n, k, p, q in skipped]
    if a.format == "json":
        result = {"columns": header, "rows": data,
                  "skipped": [dict(zip(header, key)) for key in skipped]}
        if volume is not None:
            result["volume"] = volume
        return result
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in data:
        w.writerow([_csv_value(v) for v in row])
    for line in skip_lines:
        buf.write(line + "\n")
    if volume is not None:
        buf.write(f"# volume pseudohermitian={_fmt_float(volume['pseudohermitian'])},"
                  f"contact={_fmt_float(volume['contact'])},convention={a.volume_convention}\n")
    return buf.getvalue()


def _cmd_predict(a):
    model = weyl.AsymptoticModel(a.d, a.m, a.nu0)
    if a.lam is not None:
        q, kind = weyl.Counting(a.lam), "counting"
    elif a.k is not None:
        q, kind = weyl.Eigen(a.k), "eigenvalue"
    else:
        q, kind = weyl.HeatLeading(a.t), "heat_leading"
    return {"kind": kind, "value": weyl.predict(model, q), "exponent": model.exponent}


def read_samples(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        return [(float(r["t"]), float(r["trace"])) for r in rows]
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc.strerror}", path=path)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"{path}: expected CSV columns t,trace ({exc})", path=path)


def _cmd_karamata(a):
    nu0, quality = weyl.karamata_fit(read_samples(a.samples), a.d, a.m, a.terms)
    return {"nu0": nu0, "quality": quality}


def _cmd_mellin(a):
    obj = _read_json(a.matrix)
    mat = obj.get("matrix") if isinstance(obj, dict) else obj
    try:
        arr = np.array(mat, dtype=float)
    except (TypeError, ValueError):
        raise InvalidArgument("matrix must be a nested list of numbers")
    out = oracle.mellin_power(oracle.MatrixOperator(arr), a.s, step=a.step)
    return {"matrix": out}


def _cmd_nilmanifold(a):
    t0 = time.perf_counter()
    sp = oracle.nilmanifold_spectrum(oracle.NilmanifoldGrid(a.N, a.mu), a.count)
    if a.format == "csv":
        return sp.to_csv()
    return {"N": a.N, "mu": a.mu, "count": a.count, "eigenvalues": sp.expanded(),
            "wallclock": time.perf_counter() - t0}


def _cmd_mass(a):
    return mehler.total_mass(a.n, a.t, a.trunc, a.rel_tol).to_dict()


COMMANDS = {
    "nu": _cmd_nu,
    "heat-kernel": _cmd_heat_kernel,
    "check": _cmd_check,
    "weyl-table": _cmd_weyl_table,
    "predict": _cmd_predict,
    "karamata": _cmd_karamata,
    "mellin": _cmd_mellin,
    "nilmanifold": _cmd_nilmanifold,
    "mass": _cmd_mass,
}


def _error_doc(code, message, detail=None):
    d = {"message": message}
    d.update(detail or {})
    return dumps({"error": code, "detail": d})


def dispatch(argv) -> tuple[int, bytes]:
    """Run one invocation; returns (exit_code, document)."""
    try:
        args = build_parser().parse_args(list(argv))
        params = dict(vars(args))
        result = COMMANDS[args.command](args)
        if isinstance(result, str):
            return 0, result.encode()
        return 0, _envelope(params, result).encode()
    except _HelpExit as h:
        return 0, str(h).encode()
    except HeisenspecError as exc:
        return exc.exit_code, _error_doc(exc.code, str(exc), _plain(exc.detail)).encode()
    except Exception as exc:  # malformed input must not escape as a traceback
        return 3, _error_doc("InternalError", f"{type(exc).__name__}: {exc}").encode()


def _plain(detail):
    out = {}
    for k, v in detail.items():
        try:
            _encode(v)
            out[k] = v
        except TypeError:
            out[k] = repr(v)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    threads = os.environ.get("HEISENSPEC_THREADS")
    if threads:
        try:
            limit = int(threads)
            if limit < 1:
                raise ValueError
        except ValueError:
            sys.stderr.write(_error_doc("InvalidArgument", f"HEISENSPEC_THREADS={threads!r} is not a positive integer"))
            return 2
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=limit):
            code, doc = dispatch(argv)
    else:
        code, doc = dispatch(argv)
    stream = sys.stdout if code == 0 else sys.stderr
    stream.buffer.write(doc) if hasattr(stream, "buffer") else stream.write(doc.decode())
    stream.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
