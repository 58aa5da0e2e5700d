"""Command-line front end: ``polyschwarz <subcommand> [flags]``.

Reports go to stdout (or ``--out``) as JSON with sorted keys, complex numbers
as ``[re, im]`` and reals printed with 17 significant digits.  Exit status is
0 on success, 1 when a checked inequality fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import math
import sys

import numpy as np

from . import __version__
from .bergman import DEFAULT_BUDGET, operator_norm, sup_norm
from .comparison import BoundParams, OdeOutcome, linear_comparison_check, riccati_solve, transport_ray, vanish_radius
from .errors import PolySchwarzError
from .mapio import dump_map, load_map, map_to_dict
from .maps import make_normalizer, normalize
from .order import covering_estimate, moebius_order, mu_r_lower
from .schwarzian import canonical_residual, schwarzian_tensor
from .verify import default_config, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- serialization ----------------------------------------------------------------

def to_plain(obj):
    """Reduce results to JSON-ready Python values (complex -> [re, im])."""
    if isinstance(obj, OdeOutcome):
        out = {"status": obj.status_dict(), "samples": to_plain(obj.samples), "warnings": list(obj.warnings)}
        if obj.envelope_ok is not None:
            out["envelope_ok"] = obj.envelope_ok
            out["worst_margin"] = obj.worst_margin
        if obj.log_rim_bracket is not None:
            out["log_rim_bracket"] = to_plain(obj.log_rim_bracket)
        return out
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 1, level: int = 0) -> str:
    """JSON text with sorted keys and 17 significant digits for every real."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(k)}: {dumps(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if obj is None:
        return "null"
    return _json_str(obj)


def _json_str(s) -> str:
    import json

    return json.dumps(str(s))


def emit_report(result, fmt: str = "json", argv=None, seed=None) -> str:
    if fmt == "csv":
        if not isinstance(result, OdeOutcome):
            raise UsageError("csv output is only available for sampled curves")
        return samples_csv(result.samples)
    doc = {"command": list(argv or []), "seed": seed, "version": __version__, "result": to_plain(result)}
    return dumps(doc) + "\n"


def samples_csv(samples) -> str:
    samples = np.asarray(samples)
    buf = io.StringIO()
    cplx = np.iscomplexobj(samples)
    cols = samples.shape[1]
    if cplx:
        header = ["t"] + [f"{p}{j}" for j in range(1, cols) for p in ("re", "im")]
    else:
        header = ["t"] + [f"c{j}" for j in range(1, cols)]
    buf.write(",".join(header) + "\n")
    for row in samples:
        vals = [row[0].real] + ([x for v in row[1:] for x in (v.real, v.imag)] if cplx else list(row[1:]))
        buf.write(",".join(format(float(v), ".17g") for v in vals) + "\n")
    return buf.getvalue()


# -- argument parsing ---------------------------------------------------------------

def parse_vector(text: str) -> np.ndarray:
    """Comma-separated complex literals such as ``0.1,0.2-0.3i``."""
    out = []
    for tok in text.split(","):
        tok = tok.strip().replace("i", "j").replace("I", "j")
        try:
            out.append(complex(tok))
        except ValueError:
            raise UsageError(f"bad complex literal {tok!r}") from None
    return np.array(out, complex)


def _common(p, *, seed=True):
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="csv only for sampled curves")
    p.add_argument("--threads", type=int, default=None, help="accepted for compatibility; runs are single-threaded")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyschwarz", description="Schwarzian tensor experiments on the polydisk.",
                                     allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, allow_abbrev=False, **kw)

    p = add("tensor", help="S^k_ij and S^0_ij at a point")
    p.add_argument("--map", required=True)
    p.add_argument("--z", required=True)
    _common(p)

    p = add("opnorm", help="operator norm at a point")
    p.add_argument("--map", required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="random restarts (default %(default)s)")
    p.add_argument("--tol", type=float, default=1e-10)
    _common(p)

    p = add("supnorm", help="grid lower bound for the sup-norm on |z|_inf <= radius")
    p.add_argument("--map", required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--grid", type=int, default=None, help="radii and phases per axis (default by dimension)")
    p.add_argument("--refine", type=int, default=2)
    p.add_argument("--budget", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    _common(p)

    p = add("normalize", help="post-compose with the normalizing Moebius map")
    p.add_argument("--map", required=True)
    p.add_argument("--map-out", help="write the normalized map description here")
    _common(p)

    p = add("transport", help="integrate the second-order system along a ray")
    p.add_argument("--map", required=True)
    p.add_argument("--zeta", required=True)
    p.add_argument("--t-end", type=float, default=0.99)
    p.add_argument("--normalized", action="store_true", help="start from u = 1, grad u = 0 instead of J^(-1/(n+1))")
    _common(p)

    p = add("riccati", help="Riccati threshold ODE: completion or blow-up")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--x-end", type=float, default=0.999)
    p.add_argument("--log-rim-end", type=float, default=None, help="integrate to x = 1 - exp(-S) instead")
    p.add_argument("--tol", type=float, default=1e-11)
    _common(p)

    p = add("compare", help="linear comparison ODE against its closed-form envelope")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--x-end", type=float, default=0.99)
    _common(p)

    p = add("vanish", help="first zero of the vanish-radius ODE")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--n", type=int, help="derive eps, delta, gamma from n and alpha")
    p.add_argument("--alpha", type=float)
    p.add_argument("--power", type=int, default=2, choices=(1, 2))
    _common(p)

    p = add("order", help="Moebius order and a search lower bound for mu_r")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=None, help="restriction radius r for mu_r")
    p.add_argument("--budget", type=int, default=4)
    _common(p)

    p = add("cover", help="boundary-image distance on the torus of given radius")
    p.add_argument("--map", required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--grid", type=int, default=32, help="phases per axis")
    _common(p)

    p = add("verify", help="run the inequality suites")
    p.add_argument("--config", help="JSON config; default runs the built-in suite")
    _common(p)
    return parser


# -- dispatch ------------------------------------------------------------------------

def _run(args):
    """Returns (result, exit code)."""
    cmd = args.command
    if cmd == "tensor":
        f = load_map(args.map)
        T = schwarzian_tensor(f, parse_vector(args.z))
        return {"n": T.n, "z": T.point, "S": T.S, "S0": T.S0, "jacobian_det": np.linalg.det(T.jacobian),
                "canonical_residual": canonical_residual(T)}, EXIT_OK
    if cmd == "opnorm":
        f = load_map(args.map)
        return operator_norm(f, parse_vector(args.z), args.budget, args.tol, args.seed), EXIT_OK
    if cmd == "supnorm":
        f = load_map(args.map)
        return sup_norm(f, args.radius, grid=args.grid, refine=args.refine, budget=args.budget, tol=args.tol,
                        seed=args.seed), EXIT_OK
    if cmd == "normalize":
        f = load_map(args.map)
        g = normalize(f)
        if args.map_out:
            dump_map(g, args.map_out)
        return {"a": make_normalizer(f).a, "map": map_to_dict(g)}, EXIT_OK
    if cmd == "transport":
        f = load_map(args.map)
        zeta = parse_vector(args.zeta)
        if args.normalized:
            u0, g0 = 1.0, None
        else:
            u = schwarzian_tensor(f, np.zeros(f.n, complex)).u0
            u0, g0 = complex(u.value), u.grad
        return transport_ray(f, zeta, u0, g0, args.t_end), EXIT_OK
    if cmd == "riccati":
        out = riccati_solve(args.c, args.x_end, rtol=args.tol, atol=args.tol * 1e-2, log_rim_end=args.log_rim_end)
        # blow-up is a result; a completed run must respect the envelope
        return out, EXIT_OK if out.status == "blowup_at" or out.envelope_ok else EXIT_FAIL
    if cmd == "compare":
        out = linear_comparison_check(args.a, args.b, args.x_end)
        return out, EXIT_OK if out.envelope_ok else EXIT_FAIL
    if cmd == "vanish":
        if args.n is not None:
            if args.alpha is None:
                raise UsageError("--n needs --alpha")
            bp = BoundParams(args.n, args.alpha)
            eps, delta = bp.vanish_constants()
            gamma = bp.gamma
        else:
            if args.eps is None or args.delta is None:
                raise UsageError("give --eps and --delta, or --n and --alpha")
            eps, delta, gamma = args.eps, args.delta, args.gamma
        return vanish_radius(eps, delta, gamma, args.power), EXIT_OK
    if cmd == "order":
        mo = moebius_order(args.n, seed=args.seed)
        out = {"moebius_order": mo}
        if args.radius is not None:
            out["mu_r_lower"] = mu_r_lower(args.n, args.alpha, args.radius, args.budget, args.seed)
        return out, EXIT_OK
    if cmd == "cover":
        f = load_map(args.map)
        return covering_estimate(f, args.radius, args.grid), EXIT_OK
    if cmd == "verify":
        if args.config:
            import json

            try:
                with open(args.config) as fh:
                    config = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config: {exc}") from None
        else:
            config = default_config(args.seed)
        rep = run_suite(config)
        return rep, EXIT_OK if rep.status == "pass" else EXIT_FAIL
    raise UsageError(f"unknown command {cmd}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        result, code = _run(args)
        text = emit_report(result, args.format, argv, getattr(args, "seed", None))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PolySchwarzError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
