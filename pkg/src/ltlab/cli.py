"""Command-line front end.

    ltlab det     --p 3 --n 2 --g "1; 1"
    ltlab zeta    --p 3 --n 2 --k 5 --g "1+t; 2"
    ltlab t0      --p 3 --n 2 --j 3 --g "1; 1"
    ltlab act     --p 3 --n 2 --j 3 --g "1; 1" [--emit-fixture out.json]
    ltlab verify  --p 5 --n 2 --trials 100 --seed 1
    ltlab shifts  --p 3 --n 2 --k 2
    ltlab moore   --p 3 --k 2 --s 1
    ltlab anss    hyp|sparse|torsion|vanishing --p 5 [--n 2] [--t 3] [--two-t 12]
    ltlab zn      --p 3 --n 2 --k 4

With ``--json`` every command prints one JSON document per result, each with
``"schema": "ltlab/1"``.  Exit status: 0 pass, 1 verification failure,
2 usage error, 3 internal post-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, dataclass, field

from . import __version__
from .base import WittCtx, is_prime, zn_canonical, zn_reduce
from .errors import ConfigError, LtlabError, PostCheckFailure, SelfMapUnavailable
from .stabilizer import StabElt, r_of, stab_det, stab_theta, stab_zeta

SCHEMA = "ltlab/1"

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_POSTCHECK = 0, 1, 2, 3

#: subcommands that run the Lubin-Tate solver (n ≤ 2)
SOLVER_COMMANDS = {"t0", "act", "verify"}
#: subcommands that work in the endomorphism ring (n ≤ 3)
RING_COMMANDS = {"det", "zeta", "zn"}


@dataclass
class RunConfig:
    command: str
    p: int = 3
    n: int = 2
    k: int | None = None
    j: int = 3
    N: int | None = None
    seed: int = 0
    trials: int = 10
    g: str | None = None
    json: bool = False
    emit_fixture: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if not is_prime(self.p) or self.p > 13:
            raise ConfigError(f"p must be a prime ≤ 13 (got {self.p})")
        if self.command in SOLVER_COMMANDS:
            if not 1 <= self.n <= 2:
                raise ConfigError(f"n must be 1 or 2 for {self.command} (got {self.n})")
            if self.p == 2:
                raise ConfigError(f"{self.command} needs an odd prime")
        elif not 1 <= self.n <= 3:
            raise ConfigError(f"n must be between 1 and 3 (got {self.n})")
        if not 2 <= self.j <= 4:
            raise ConfigError(f"j must be between 2 and 4 (got {self.j})")
        if self.N is not None and not 1 <= self.N <= 200:
            raise ConfigError(f"N must be between 1 and 200 (got {self.N})")
        if self.k is not None and not 1 <= self.k <= 12:
            raise ConfigError(f"k must be between 1 and 12 (got {self.k})")
        if self.trials < 0 or self.trials > 100000:
            raise ConfigError("trials must be between 0 and 100000")
        return self

    def witt_k(self, default: int) -> int:
        return self.k if self.k is not None else default


# ---------------------------------------------------------------------------
# output helpers


class Output:
    def __init__(self, as_json: bool, stream=None):
        self.as_json = as_json
        self.stream = stream or sys.stdout

    def doc(self, kind: str, payload: dict, human: str) -> None:
        if self.as_json:
            d = {"schema": SCHEMA, "kind": kind}
            d.update(payload)
            self.stream.write(json.dumps(d, sort_keys=True) + "\n")
        else:
            self.stream.write(human.rstrip("\n") + "\n")


def _elt(cfg: RunConfig, k: int) -> StabElt:
    if cfg.g is None:
        raise ConfigError("this command needs --g")
    return StabElt.parse(WittCtx(cfg.p, cfg.n, k), cfg.g)


def _verdict_human(v) -> str:
    return f"[{v.outcome.upper()}] {v.rule} {json.dumps(v.inputs, sort_keys=True)}  ({v.reference})"


# ---------------------------------------------------------------------------
# commands


def cmd_det(cfg: RunConfig, out: Output) -> int:
    g = _elt(cfg, cfg.witt_k(4))
    d = stab_det(g)
    a0r = g.coeffs[0] ** r_of(cfg.p, cfg.n)
    payload = {"g": str(g), "det": str(d), "det_int": d.to_int(), "a0_r_mod_p": str(a0r.reduce()),
               "p": cfg.p, "n": cfg.n, "k": g.ctx.k}
    out.doc("det", payload, f"g = {g}\ndet(g) = {d}  (mod p^{g.ctx.k})\na_0^r(n) mod p = {a0r.reduce()}")
    return EXIT_PASS


def cmd_zeta(cfg: RunConfig, out: Output) -> int:
    g = _elt(cfg, cfg.witt_k(5))
    th = stab_theta(g)
    z = stab_zeta(g)
    payload = {"g": str(g), "theta": th, "zeta": z, "zeta_modulus": cfg.p ** (g.ctx.k - 2),
               "p": cfg.p, "n": cfg.n, "k": g.ctx.k}
    out.doc("zeta", payload, f"g = {g}\ntheta(g) = {th} mod {cfg.p}^{g.ctx.k}\nzeta(g) = {z} mod {cfg.p}^{g.ctx.k - 2}")
    return EXIT_PASS


def _emit(cfg: RunConfig, obj: dict) -> None:
    if cfg.emit_fixture:
        with open(cfg.emit_fixture, "w", encoding="utf-8") as fh:
            json.dump({"schema": SCHEMA, **obj}, fh, sort_keys=True, indent=1)
            fh.write("\n")


def cmd_t0(cfg: RunConfig, out: Output) -> int:
    from .lubin_tate import lt_action

    g = _elt(cfg, cfg.witt_k(cfg.j + 2))
    res = lt_action(g, cfg.j, cfg.N)
    _emit(cfg, {"kind": "ltresult", "result": res.to_json()})
    payload = {"g": str(g), "t0": str(res.t0), "j": cfg.j, "residual": res.residual}
    out.doc("t0", payload, f"g = {g}\nt_0(g) = {res.t0}  in E_0/m^{cfg.j}")
    return EXIT_PASS


def cmd_act(cfg: RunConfig, out: Output) -> int:
    from .lubin_tate import lt_action

    g = _elt(cfg, cfg.witt_k(cfg.j + 2))
    res = lt_action(g, cfg.j, cfg.N)
    data = res.to_json()
    _emit(cfg, {"kind": "ltresult", "result": data})
    lines = [f"g = {g}"]
    lines += [f"phi({k}) = {v}" for k, v in data["phi"].items()]
    lines += [f"t_{i} = {t}" for i, t in enumerate(data["t_list"])]
    lines.append(f"psi = {data['psi']}")
    lines.append(f"verified mod m^{res.residual['m_order']} through degree {res.residual['x_degree']}"
                 f" (series of g faithful through degree {res.effective_degree})")
    out.doc("act", data, "\n".join(lines))
    return EXIT_PASS


def cmd_verify(cfg: RunConfig, out: Output) -> int:
    from .verdicts import verify_suite

    rules = tuple(cfg.extra.get("rules") or ("fund_alpha", "detred", "modp_class"))
    verdicts = verify_suite(cfg.p, cfg.n, cfg.trials, cfg.seed, cfg.j, cfg.N, cfg.witt_k(cfg.j + 2), rules)
    npass = sum(v.passed for v in verdicts)
    for v in verdicts:
        if cfg.json or not v.passed:
            out.doc("verdict", v.to_json(), _verdict_human(v))
    summary = {"p": cfg.p, "n": cfg.n, "j": cfg.j, "seed": cfg.seed, "trials": cfg.trials,
               "rules": list(rules), "checks": len(verdicts), "passed": npass,
               "all_pass": npass == len(verdicts)}
    human = f"{npass}/{len(verdicts)} checks passed ({cfg.trials} trials at p={cfg.p}, n={cfg.n}, j={cfg.j}, seed={cfg.seed})"
    out.doc("summary", summary, ("ALL PASS: " if summary["all_pass"] else "FAILURES: ") + human)
    return EXIT_PASS if summary["all_pass"] else EXIT_FAIL


def cmd_shifts(cfg: RunConfig, out: Output) -> int:
    from .verdicts import duality_shifts

    r = duality_shifts(cfg.p, cfg.n, cfg.witt_k(1))
    out.doc("shifts", r.to_json(), f"bc_shift = {r.bc_shift}\nalg_shift = {r.alg_shift}")
    return EXIT_PASS


def cmd_moore(cfg: RunConfig, out: Output) -> int:
    from .verdicts import moore_duality_report

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SelfMapUnavailable)
        r = moore_duality_report(cfg.p, cfg.witt_k(1), cfg.extra["s"])
    lines = [f"bc_shift = {r.bc_shift}", f"alg_shift = {r.alg_shift}", f"d_shift = {r.d_shift}", f"net = {r.net}"]
    if r.fixture:
        f = r.fixture
        lines.append(f"net mod {f['period']} = {f['net_mod_period']}, known {f['known']}, discrepancy {f['discrepancy']}")
    if r.warning:
        lines.append(f"warning: {r.warning}")
    out.doc("moore", r.to_json(), "\n".join(lines))
    return EXIT_PASS


def cmd_anss(cfg: RunConfig, out: Output) -> int:
    from . import verdicts as V

    rule = cfg.extra["rule"]
    if rule == "hyp":
        v = V.hyp_check(cfg.p, cfg.n)
    elif rule == "vanishing":
        v = V.vanishing_line(cfg.p, cfg.n)
    elif rule == "sparse":
        if cfg.extra.get("t") is None:
            raise ConfigError("anss sparse needs --t")
        v = V.sparse_zero(cfg.p, cfg.extra["t"])
    elif rule == "torsion":
        if cfg.extra.get("two_t") is None:
            raise ConfigError("anss torsion needs --two-t")
        v = V.torsion_exponent(cfg.p, cfg.extra["two_t"])
    else:  # pragma: no cover - argparse restricts the choices
        raise ConfigError(f"unknown rule {rule}")
    detail = ", ".join(f"{k}={val}" for k, val in sorted(v.details.items()))
    out.doc("verdict", v.to_json(), _verdict_human(v) + (f"\n  {detail}" if detail else ""))
    return EXIT_PASS


def cmd_zn(cfg: RunConfig, out: Output) -> int:
    K = cfg.witt_k(4)
    zc = zn_canonical(cfg.p, cfg.n, K)
    a, lam = zc["alpha"], zc["lambda"]
    mod = cfg.p**K * (cfg.p**cfg.n - 1)
    payload = {
        "p": cfg.p, "n": cfg.n, "K": K, "r": zc["r"],
        "alpha": {"zp": a.zp, "res": a.res, "int": zn_reduce(a, K), "additive_order": a.additive_order()},
        "lambda": {"zp": lam.zp, "res": lam.res, "int": zn_reduce(lam, K), "additive_order": lam.additive_order()},
        "modulus": mod,
    }
    human = (f"Z_n = Z_p x Z/(p^n-1), truncated mod {mod}\n"
             f"alpha = {zn_reduce(a, K)} (additive order {a.additive_order()})\n"
             f"lambda = {zn_reduce(lam, K)} (additive order {lam.additive_order()}, r(n) = {zc['r']})")
    out.doc("zn", payload, human)
    return EXIT_PASS


COMMANDS = {
    "det": cmd_det, "zeta": cmd_zeta, "t0": cmd_t0, "act": cmd_act, "verify": cmd_verify,
    "shifts": cmd_shifts, "moore": cmd_moore, "anss": cmd_anss, "zn": cmd_zn,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit with status 2 (argparse default) and a structured line
        self.print_usage(sys.stderr)
        sys.stderr.write(json.dumps({"schema": SCHEMA, "error": "usage", "message": message}) + "\n")
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=3, help="prime p (≤ 13)")
    common.add_argument("--json", action="store_true", help="emit JSON documents")

    ring = argparse.ArgumentParser(add_help=False)
    ring.add_argument("--n", type=int, default=2, help="height n")
    ring.add_argument("--k", type=int, default=None, help="Witt precision (p-adic digits)")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--j", type=int, default=3, help="m-adic truncation of E_0")
    solver.add_argument("--N", type=int, default=None, help="series degree (default p^2+1 at n=2, p+1 at n=1)")
    solver.add_argument("--emit-fixture", dest="emit_fixture", default=None, metavar="PATH",
                        help="write the LTResult JSON to PATH")

    elt = argparse.ArgumentParser(add_help=False)
    elt.add_argument("--g", required=True, help='element "a_0; a_1; ..." with a_i polynomials in t')

    parser = _Parser(prog="ltlab", description="Lubin-Tate actions and Morava stabilizer group computations")
    parser.add_argument("--version", action="version", version=f"ltlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("det", parents=[common, ring, elt], help="determinant of g")
    sub.add_parser("zeta", parents=[common, ring, elt], help="theta(g) and zeta(g)")
    sub.add_parser("t0", parents=[common, ring, solver, elt], help="t_0(g) in E_0/m^j")
    sub.add_parser("act", parents=[common, ring, solver, elt], help="phi_g, psi_g and t_i(g)")
    v = sub.add_parser("verify", parents=[common, ring, solver], help="seeded verification suite")
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--rules", default=None,
                   help="comma-separated subset of fund_alpha,detred,modp_class,crossed")
    sh = sub.add_parser("shifts", parents=[common, ring], help="duality suspension shifts")
    sh.set_defaults(k=None)
    m = sub.add_parser("moore", parents=[common], help="Moore-spectrum shift report (n = 2)")
    m.add_argument("--k", type=int, default=1)
    m.add_argument("--s", type=int, required=True)
    a = sub.add_parser("anss", parents=[common], help="Adams-Novikov constraint rules")
    a.add_argument("rule", choices=["hyp", "sparse", "torsion", "vanishing"])
    a.add_argument("--n", type=int, default=2)
    a.add_argument("--t", type=int, default=None)
    a.add_argument("--two-t", dest="two_t", type=int, default=None)
    sub.add_parser("zn", parents=[common, ring], help="the canonical elements alpha and lambda of Z_n")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    extra = {}
    for key in ("s", "t", "two_t", "rule"):
        if hasattr(ns, key):
            extra[key] = getattr(ns, key)
    if getattr(ns, "rules", None):
        extra["rules"] = [r.strip() for r in ns.rules.split(",") if r.strip()]
    cfg = RunConfig(
        command=ns.command,
        p=ns.p,
        n=getattr(ns, "n", 2),
        k=getattr(ns, "k", None),
        j=getattr(ns, "j", 3),
        N=getattr(ns, "N", None),
        seed=getattr(ns, "seed", 0),
        trials=getattr(ns, "trials", 10),
        g=getattr(ns, "g", None),
        json=ns.json,
        emit_fixture=getattr(ns, "emit_fixture", None),
        extra=extra,
    )
    return cfg.validate()


def run_command(cfg: RunConfig, stream=None) -> int:
    out = Output(cfg.json, stream)
    return COMMANDS[cfg.command](cfg, out)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        # buffer the output so a failure never leaves a partial report
        import io

        buf = io.StringIO()
        status = run_command(cfg, buf)
        sys.stdout.write(buf.getvalue())
        return status
    except PostCheckFailure as e:
        _report_error(e, ns.json)
        return EXIT_POSTCHECK
    except LtlabError as e:
        _report_error(e, ns.json)
        return EXIT_USAGE


def _report_error(e: LtlabError, as_json: bool) -> None:
    d = {"schema": SCHEMA, **e.to_json()}
    if as_json:
        sys.stdout.write(json.dumps(d, sort_keys=True) + "\n")
    sys.stderr.write(f"error ({d['error']}): {e}\n")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
