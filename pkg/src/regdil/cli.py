"""Command-line entry point.

Exit codes: 0 pass, 1 the mathematical condition fails, 2 input error,
3 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import dilation as dil
from . import fock as fk
from . import generators as gen
from .errors import (
    CoherenceError,
    DilationRefused,
    DimensionError,
    DomainError,
    PreconditionError,
    ResourceError,
)
from .gradedspace import MultiIndex, ProductSystem
from .representation import consdc_suite, is_doubly_commuting, validate
from .serialize import (
    SchemaError,
    dumps,
    load_json,
    poly_from_json,
    rep_from_json,
    rep_to_json,
    system_from_json,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    system: str | None = None
    rep: str | None = None
    poly: str | None = None
    box: tuple | None = None
    tol_psd: float = dil.TOL_PSD
    tol_res: float = dil.DILATION_TOL
    null_cut: float = dil.NULL_CUT
    trials: int = 100
    seed: int = 0
    cap: int = 20000
    fmt: str = "text"
    out: str | None = None
    point: list = field(default_factory=list)
    kind: str = "scalar"

    def __post_init__(self):
        if self.box is not None and any(b < 0 for b in self.box):
            raise UsageError("box entries must be >= 0")
        for name in ("tol_psd", "tol_res", "null_cut"):
            if getattr(self, name) <= 0:
                raise UsageError(f"{name} must be positive")
        if self.cap < 1:
            raise UsageError("cap must be >= 1")
        if self.subcommand == "search" and self.trials < 1:
            raise UsageError("trials must be >= 1")


def _parse_box(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad box {text!r}") from exc


def _parse_point(text: str) -> list:
    try:
        return [complex(x.replace(" ", "")) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad point {text!r}") from exc


SUBCOMMANDS = ("validate", "brehmer", "dcheck", "dilate", "comp-identities", "fock", "vn", "chars", "search")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regdil", description="Regular dilation toolkit for product systems.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--system", help="product system JSON file")
    ap.add_argument("--rep", help="representation JSON file")
    ap.add_argument("--poly", help="polynomial JSON file")
    ap.add_argument("--box", type=_parse_box, help="truncation box, e.g. 2,2")
    ap.add_argument("--tol-psd", type=float, default=dil.TOL_PSD)
    ap.add_argument("--tol-res", type=float, default=dil.DILATION_TOL)
    ap.add_argument("--null-cut", type=float, default=dil.NULL_CUT)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cap", type=int, default=20000)
    ap.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--point", type=_parse_point, default=[], help="character point, e.g. 0.5,0")
    ap.add_argument("--kind", choices=("scalar", "commuting"), default="scalar", help="search family")
    return ap


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(**vars(ns))


# -- loading -------------------------------------------------------------------


def _load_system(cfg: RunConfig) -> ProductSystem | None:
    return system_from_json(load_json(cfg.system)) if cfg.system else None


def _load_rep(cfg: RunConfig):
    if not cfg.rep:
        raise UsageError("--rep is required")
    rep = rep_from_json(load_json(cfg.rep), _load_system(cfg))
    rep.cap = cfg.cap
    return rep


def _box(cfg: RunConfig, k: int) -> MultiIndex:
    box = cfg.box if cfg.box is not None else (2,) * k
    if len(box) != k:
        raise UsageError(f"box has {len(box)} entries, need k={k}")
    return MultiIndex(box)


# -- subcommands ---------------------------------------------------------------


def cmd_validate(cfg: RunConfig):
    rep = _load_rep(cfg)
    r = validate(rep)
    return (EXIT_OK if r.valid else EXIT_FAIL), r.to_dict()


def cmd_brehmer(cfg: RunConfig):
    rep = _load_rep(cfg)
    cert = dil.check_regular_dilation(rep, cfg.tol_psd)
    return (EXIT_OK if cert.holds else EXIT_FAIL), cert.to_dict()


def cmd_dcheck(cfg: RunConfig):
    rep = _load_rep(cfg)
    r = is_doubly_commuting(rep, cfg.tol_res)
    report = r.to_dict()
    if r.doubly_commuting:
        report["consdc"] = consdc_suite(rep, _box(cfg, rep.k))
    return (EXIT_OK if r.doubly_commuting else EXIT_FAIL), report


def cmd_comp_identities(cfg: RunConfig):
    rep = _load_rep(cfg)
    r = dil.verify_comp_identities(rep, _box(cfg, rep.k))
    ok = max(r.values()) <= cfg.tol_res
    return (EXIT_OK if ok else EXIT_FAIL), r


def cmd_dilate(cfg: RunConfig):
    rep = _load_rep(cfg)
    box = _box(cfg, rep.k)
    try:
        d = dil.construct_dilation(rep, box, cfg.null_cut, cfg.tol_psd)
    except DilationRefused as exc:
        return EXIT_FAIL, {"refused": str(exc), "certificate": exc.certificate.to_dict()}
    report = {"dilation": d.to_dict(), "verification": dil.verify_dilation(rep, d, cfg.tol_res)}
    ok = report["verification"]["passed"]
    if is_doubly_commuting(rep).doubly_commuting:
        dc = dil.dilation_doubly_commuting(d, cfg.tol_res)
        report["doubly_commuting_dilation"] = dc
        ok = ok and dc["doubly_commuting"]
    return (EXIT_OK if ok else EXIT_FAIL), report


def cmd_fock(cfg: RunConfig):
    system = _load_system(cfg)
    if system is None:
        system = _load_rep(cfg).system
    r = fk.fock_checks(system, _box(cfg, system.k))
    worst = max(v for key, v in r.items() if key in ("toeplitz", "commutation", "oracle"))
    nica_ok = all(v["status"] != "fail" for v in r["nica"].values())
    return (EXIT_OK if worst <= cfg.tol_res and nica_ok else EXIT_FAIL), r


def cmd_vn(cfg: RunConfig):
    rep = _load_rep(cfg)
    if not cfg.poly:
        raise UsageError("--poly is required")
    p = poly_from_json(load_json(cfg.poly))
    sizes = range(1, (max(cfg.box) if cfg.box else 4) + 1)
    try:
        r = fk.vn_margin(rep, p, sizes=sizes)
    except PreconditionError as exc:
        return EXIT_FAIL, {"error": str(exc)}
    ok = r.margin >= -cfg.tol_res and r.monotone
    return (EXIT_OK if ok else EXIT_FAIL), r.to_dict()


def cmd_chars(cfg: RunConfig):
    system = _load_system(cfg)
    if system is None or not system.is_scalar():
        raise UsageError("chars needs --system with one-dimensional fibers")
    if not cfg.point:
        raise UsageError("--point is required")
    r = fk.character_set(system.lambda_matrix(), cfg.point)
    report = r.to_dict()
    if r.accepted:
        report["is_representation"] = fk.character_is_representation(system, cfg.point)
    return (EXIT_OK if r.accepted else EXIT_FAIL), report


def _search_sample(kind: str, rng):
    if kind == "scalar":
        k = int(rng.integers(2, 4))
        system = ProductSystem.scalar(gen.random_scalar_lambda(k, rng))
        return gen.scalar_tuple(system, rng=rng)
    # commuting untwisted k = 3, h = 2; half the draws come from the nilpotent family
    if rng.random() < 0.5:
        S = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        N = S @ np.array([[0, 1], [0, 0]]) @ np.linalg.inv(S)
        N /= np.linalg.norm(N, 2)
        c = rng.uniform(0.3, 1.0, 3)
        return gen.Representation(ProductSystem((1, 1, 1)), 2, [[ci * N] for ci in c])
    return gen.random_cc(ProductSystem((1, 1, 1)), 2, rng)


def cmd_search(cfg: RunConfig):
    """Classify random instances by validity, double commutation and condition (D)."""
    rng = np.random.default_rng(cfg.seed)
    counts = {"valid": 0, "doubly_commuting": 0, "condition_D": 0, "violations": 0, "counterexamples": 0}
    violations, counterexamples = [], []
    for trial in range(cfg.trials):
        rep = _search_sample(cfg.kind, rng)
        if not validate(rep).valid:
            continue
        counts["valid"] += 1
        dc = is_doubly_commuting(rep, cfg.tol_res).doubly_commuting
        cert = dil.check_regular_dilation(rep, cfg.tol_psd)
        counts["doubly_commuting"] += dc
        counts["condition_D"] += cert.holds
        entry = {"trial": trial, "rep": rep_to_json(rep), "certificate": cert.to_dict()}
        if dc and not cert.holds:
            counts["violations"] += 1
            violations.append({"label": "THEOREM-VIOLATION", **entry})
        elif not cert.holds:
            counts["counterexamples"] += 1
            if len(counterexamples) < 10:
                counterexamples.append({"label": "expected-counterexample", **entry})
    report = {
        "kind": cfg.kind,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "counts": counts,
        "violations": violations,
        "counterexamples": counterexamples,
    }
    return (EXIT_FAIL if violations else EXIT_OK), report


COMMANDS = {
    "validate": cmd_validate,
    "brehmer": cmd_brehmer,
    "dcheck": cmd_dcheck,
    "dilate": cmd_dilate,
    "comp-identities": cmd_comp_identities,
    "fock": cmd_fock,
    "vn": cmd_vn,
    "chars": cmd_chars,
    "search": cmd_search,
}


def _render_text(report, prefix="") -> list:
    lines = []
    if isinstance(report, dict):
        for key in sorted(report, key=str):
            value = report[key]
            if isinstance(value, (dict, list)) and value and not _is_flat(value):
                lines.append(f"{prefix}{key}:")
                lines.extend(_render_text(value, prefix + "  "))
            else:
                lines.append(f"{prefix}{key}: {_fmt(value)}")
    elif isinstance(report, list):
        for idx, value in enumerate(report):
            lines.append(f"{prefix}[{idx}]")
            lines.extend(_render_text(value, prefix + "  "))
    else:
        lines.append(f"{prefix}{_fmt(report)}")
    return lines


def _is_flat(value) -> bool:
    items = value.values() if isinstance(value, dict) else value
    return all(not isinstance(v, (dict, list)) for v in items)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(value.items(), key=str))
    if isinstance(value, list):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def run(cfg: RunConfig) -> tuple[int, str]:
    try:
        code, report = COMMANDS[cfg.subcommand](cfg)
    except ResourceError as exc:
        code, report = EXIT_CAP, {"error": str(exc)}
    except (UsageError, SchemaError, DimensionError, DomainError, CoherenceError, OSError) as exc:
        code, report = EXIT_INPUT, {"error": f"{type(exc).__name__}: {exc}"}
    report = {"command": cfg.subcommand, "exit_code": code, "report": report}
    text = dumps(report) if cfg.fmt == "json" else "\n".join(_render_text(report))
    return code, text + "\n"


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    code, text = run(cfg)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
