"""Command-line front end: ``hardy-verify <verify|sharpness|optimize|sweep> [flags]``."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from hardy_verify.errors import ConfigError, HardyError, MembershipError
from hardy_verify.extremals import FAMILY_PARAMETER, FamilyId, MembershipSet, MembershipSetId, make_family
from hardy_verify.optimizer import QuotientKernel, minimize_quotient, refine_and_extrapolate
from hardy_verify.params import derive_params, p_harmonic_profile
from hardy_verify.profiles import RadialProfile
from hardy_verify.quadrature import ORACLE_SPEC
from hardy_verify.verifier import (
    EQ_TOL,
    ClaimId,
    Status,
    random_admissible_profile,
    verify_examples,
    verify_prop1,
    verify_prop2,
    verify_prop3,
    verify_thm1,
)

SCHEMA_ID = "hardy-verify/1"
SCHEMA_PATH = Path(__file__).with_name("schema") / "report.schema.json"
CSV_HEADER = ["claim_id", "p", "n", "r", "R", "family", "param", "lhs", "rhs", "slack", "rel_gap", "status"]
COMMANDS = ("verify", "sharpness", "optimize", "sweep")

EXIT_OK, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_CONFIG = 0, 1, 2, 64

DEFAULT_FAMILY = {
    ClaimId.P1_I: FamilyId.U_ALPHA,
    ClaimId.P1_II: FamilyId.U_K,
    ClaimId.P1_III: FamilyId.U_Q,
    ClaimId.P2_I: FamilyId.U_EPS,
    ClaimId.P2_II: FamilyId.U_S,
    ClaimId.P2_III: FamilyId.U_ETA,
    ClaimId.P3: FamilyId.U_BETA,
    ClaimId.EX1: FamilyId.U_K,
    ClaimId.EX2: FamilyId.U_BETA,
}

DEFAULT_PARAMETER = {"alpha": 1.0, "k": None, "q": -1.0, "eps": 0.3, "s": 1.0, "eta": 0.5, "beta": 1.0}

CLAIM_SET = {
    ClaimId.THM1: MembershipSetId.M1_ANNULUS,
    ClaimId.P1_I: MembershipSetId.M1_EXT,
    ClaimId.P1_II: MembershipSetId.M1_EXT,
    ClaimId.P1_III: MembershipSetId.M1_EXT,
    ClaimId.P2_I: MembershipSetId.M2_EXT,
    ClaimId.P2_II: MembershipSetId.M2_EXT,
    ClaimId.P2_III: MembershipSetId.M2_EXT,
    ClaimId.P3: MembershipSetId.M_EXT,
    ClaimId.EX1: MembershipSetId.M1_EXT,
    ClaimId.EX2: MembershipSetId.M_EXT,
}

PSI_POWER = 2.0  # default THM1 profile psi_1^2


@dataclass
class RunConfig:
    command: str = "verify"
    claims: List[str] = field(default_factory=list)
    p: List[float] = field(default_factory=list)
    n: List[int] = field(default_factory=list)
    r: List[float] = field(default_factory=lambda: [1.0])
    R: List[float] = field(default_factory=lambda: [math.inf])
    family: Optional[str] = None
    profile: str = "extremal"  # or "random"
    family_params: Dict[str, List[float]] = field(default_factory=dict)
    M: Optional[float] = None
    which: int = 1
    seed: int = 1
    rel_tol: float = ORACLE_SPEC.rel_tol
    abs_tol: float = ORACLE_SPEC.abs_tol
    eq_tol: float = EQ_TOL
    literal: bool = False
    kernel: Optional[str] = None
    grid: List[int] = field(default_factory=lambda: [2000])
    t_max: Optional[float] = None
    max_iters: int = 20000
    step_rule: str = "auto"
    out: Optional[str] = "hardy-out"
    formats: List[str] = field(default_factory=lambda: ["json", "csv"])

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"field 'command': expected one of {COMMANDS}, got {self.command!r}")
        for name in ("p", "n", "r", "R"):
            if not getattr(self, name):
                raise ConfigError(f"field {name!r}: empty grid")
        if self.command == "optimize":
            if self.kernel is None:
                raise ConfigError("field 'kernel': required for optimize")
            try:
                QuotientKernel(self.kernel)
            except ValueError:
                raise ConfigError(f"field 'kernel': unknown kernel {self.kernel!r}") from None
            if not self.grid:
                raise ConfigError("field 'grid': empty")
        else:
            if not self.claims:
                raise ConfigError("field 'claims': no claims selected")
            for c in self.claims:
                try:
                    ClaimId(c)
                except ValueError:
                    raise ConfigError(f"field 'claims': unknown claim {c!r}") from None
        if self.family is not None:
            try:
                FamilyId(self.family)
            except ValueError:
                raise ConfigError(f"field 'family': unknown family {self.family!r}") from None
        if self.profile not in ("extremal", "random"):
            raise ConfigError(f"field 'profile': expected 'extremal' or 'random', got {self.profile!r}")
        for key in self.family_params:
            if key not in DEFAULT_PARAMETER:
                raise ConfigError(f"field 'family_params': unknown parameter {key!r}")
        for fmt in self.formats:
            if fmt not in ("json", "csv"):
                raise ConfigError(f"field 'formats': unknown format {fmt!r}")


_LIST_FIELDS = {f.name for f in fields(RunConfig)
                if f.name in ("claims", "p", "n", "r", "R", "grid", "formats")}


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    known = {f.name for f in fields(RunConfig)} | set(DEFAULT_PARAMETER)
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}: field {key!r}: unknown")
    return data


def _coerce(data: dict) -> RunConfig:
    cfg = RunConfig()
    fam = dict(cfg.family_params)
    for key, value in data.items():
        if value is None:
            continue
        if key in DEFAULT_PARAMETER:
            fam[key] = [_float(v, key) for v in _as_list(value)]
            continue
        if key == "family_params":
            if not isinstance(value, dict):
                raise ConfigError("field 'family_params': expected an object")
            for k, v in value.items():
                fam[k] = [_float(x, k) for x in _as_list(v)]
            continue
        try:
            if key in _LIST_FIELDS:
                items = _as_list(value)
                if key == "claims":
                    value = [str(c).upper() for c in items]
                elif key == "n" or key == "grid":
                    value = [_int(v, key) for v in items]
                elif key == "formats":
                    value = [str(v).lower() for v in items]
                else:
                    value = [_float(v) for v in items]
            elif key in ("which", "seed", "max_iters"):
                value = _int(value, key)
            elif key in ("rel_tol", "abs_tol", "eq_tol", "t_max", "M"):
                value = _float(value)
            elif key == "literal":
                value = bool(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field {key!r}: {exc}") from None
        setattr(cfg, key, value)
    cfg.family_params = fam
    return cfg


def _float(v, name=None) -> float:
    if isinstance(v, str) and v.lower() in ("inf", "infinity", "+inf"):
        return math.inf
    if name is None or isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"field {name!r}: not a number: {v!r}") from None


def _int(v, name) -> int:
    f = float(v)
    if f != int(f):
        raise ValueError(f"{name} must be an integer, got {v!r}")
    return int(f)


# -- row execution -------------------------------------------------------------------


def _claim_order(c: str) -> int:
    return list(ClaimId).index(ClaimId(c))


def _grid_points(cfg: RunConfig):
    fam_keys = sorted(cfg.family_params)
    axes = [sorted(set(cfg.p)), sorted(set(cfg.n)), sorted(set(cfg.r)), sorted(set(cfg.R))]
    axes += [sorted(set(cfg.family_params[k])) for k in fam_keys]
    for combo in itertools.product(*axes):
        point = {"p": combo[0], "n": combo[1], "r": combo[2], "R": combo[3]}
        point["family_params"] = dict(zip(fam_keys, combo[4:]))
        yield point


def build_rows(cfg: RunConfig) -> List[dict]:
    rows = []
    if cfg.command == "optimize":
        for point in _grid_points(cfg):
            rows.append({"kind": "optimize", **point})
        return rows
    claims = sorted(set(cfg.claims), key=_claim_order)
    for point in _grid_points(cfg):
        for c in claims:
            if cfg.command == "sharpness" and not _applicable(ClaimId(c), point):
                continue
            rows.append({"kind": "verify", "claim": c, **point})
    return rows


def _applicable(claim: ClaimId, point: dict) -> bool:
    """Sharpness runs skip claims whose regime differs from the grid point's."""
    try:
        params = derive_params(point["p"], point["n"], point["r"], point["R"])
    except HardyError:
        return True
    need = _CLAIM_REGIME_TEXT.get(claim)
    return need is None or params.regime.value == need[0]


def _family_parameters(fid: FamilyId, params, point, cfg: RunConfig) -> Dict[str, float]:
    name = FAMILY_PARAMETER[fid]
    value = point["family_params"].get(name, DEFAULT_PARAMETER[name])
    if value is None:  # k defaults to p' + 1
        value = params.p_conj + 1.0
    out = {name: value}
    if fid is FamilyId.U_ETA and cfg.M is not None:
        out["M"] = cfg.M
    return out


def _profile_for(claim: ClaimId, params, point, cfg: RunConfig):
    """(profile or family, family label, parameter label)."""
    if cfg.profile == "random" and cfg.family is None:
        set_id = CLAIM_SET[claim]
        if claim is ClaimId.THM1 and cfg.which == 2:
            set_id = MembershipSetId.M2_ANNULUS
        u = random_admissible_profile(cfg.seed, MembershipSet(set_id, params))
        return u, "random", f"seed={cfg.seed}"
    if claim is ClaimId.THM1 and cfg.family is None:
        psi = p_harmonic_profile(cfg.which, params)
        t = PSI_POWER
        u = RadialProfile(
            value=lambda x: psi.value(x) ** t,
            derivative=lambda x: t * psi.value(x) ** (t - 1.0) * psi.derivative(x),
            support_left=psi.support_left,
            support_right=psi.support_right,
            label=f"psi{cfg.which}^{t:g}",
            value_log=lambda s: psi.u_log(s) ** t,
            derivative_log=lambda s: t * psi.u_log(s) ** (t - 1.0) * psi.du_log(s),
        )
        return u, f"psi{cfg.which}", f"t={t:g}"
    fid = FamilyId(cfg.family) if cfg.family is not None else DEFAULT_FAMILY[claim]
    par = _family_parameters(fid, params, point, cfg)
    fam = make_family(fid, par, params.with_outer(math.inf) if params.bounded else params)
    label = ";".join(f"{k}={float(v)!r}" for k, v in fam.parameters.items())
    return fam, fid.value, label


def _spec(cfg: RunConfig):
    return ORACLE_SPEC.with_(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)


def _dispatch(claim: ClaimId, u, params, cfg: RunConfig):
    spec, tol = _spec(cfg), cfg.eq_tol
    if claim is ClaimId.THM1:
        return verify_thm1(u, params, which=cfg.which, spec=spec, eq_tol=tol)
    if claim in (ClaimId.P1_I, ClaimId.P1_II, ClaimId.P1_III):
        return verify_prop1(claim.value.split("_")[1].lower(), u, params, spec=spec, eq_tol=tol)
    if claim in (ClaimId.P2_I, ClaimId.P2_II, ClaimId.P2_III):
        return verify_prop2(claim.value.split("_")[1].lower(), u, params, spec=spec, eq_tol=tol)
    if claim is ClaimId.P3:
        return verify_prop3(u, params, spec=spec, eq_tol=tol)
    which = 1 if claim is ClaimId.EX1 else 2
    return verify_examples(which, u, params, spec=spec, eq_tol=tol, literal=cfg.literal)


def _base_record(row: dict) -> dict:
    return {
        "claim_id": row.get("claim") or f"OPT:{row.get('kernel', '')}",
        "p": row["p"],
        "n": row["n"],
        "r": row["r"],
        "R": row["R"],
        "family": "",
        "param": "",
        "lhs": math.nan,
        "rhs": math.nan,
        "slack": math.nan,
        "rel_gap": math.nan,
        "status": "CONFIG_ERROR",
        "result": None,
        "error": None,
    }


def execute_row(row: dict, cfg: RunConfig) -> dict:
    """Run one grid row; never raises (errors become the row status)."""
    rec = _base_record(row)
    try:
        params = derive_params(row["p"], row["n"], row["r"], row["R"])
    except HardyError as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    if row["kind"] == "optimize":
        return _execute_optimize(row, cfg, params, rec)
    claim = ClaimId(row["claim"])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            u, fam_label, par_label = _profile_for(claim, params, row, cfg)
        rec["family"], rec["param"] = fam_label, par_label
        res = _dispatch(claim, u, params, cfg)
    except (ConfigError, MembershipError, ValueError) as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    except HardyError as exc:
        rec["status"] = Status.INCONCLUSIVE.value
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    rec.update(lhs=res.lhs, rhs=res.rhs, slack=res.slack, rel_gap=res.rel_gap, status=res.status.value,
               result=res.to_dict())
    return rec


def _execute_optimize(row, cfg, params, rec):
    rec["claim_id"] = f"OPT:{cfg.kernel}"
    rec["family"] = "discrete"
    try:
        reports = [minimize_quotient(params, cfg.kernel, g, cfg.t_max, cfg.max_iters, cfg.step_rule, seed=cfg.seed)
                   for g in cfg.grid]
    except (ValueError, HardyError) as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    best = reports[-1]
    rec["param"] = f"grid={best.grid_size};t_max={float(best.t_max)!r}"
    extra = None
    if len(reports) == 3:
        try:
            ex = refine_and_extrapolate(reports)
            extra = {"value": ex.value, "order": ex.order, "sequence": list(ex.sequence)}
        except HardyError as exc:
            extra = {"error": f"{type(exc).__name__}: {exc}"}
        except ValueError:
            extra = None
    est, target = best.estimated_constant, best.target_constant
    slack = est - target
    if not all(r.converged for r in reports):
        status = Status.INCONCLUSIVE
    elif slack < -1e-9 * target:
        status = Status.VIOLATION
    else:
        status = Status.HOLDS
    rec.update(lhs=est, rhs=target, slack=slack, rel_gap=slack / max(abs(est), abs(target)), status=status.value,
               result={"reports": [r.to_dict() for r in reports], "extrapolation": extra})
    return rec


def _workers(n_rows: int) -> int:
    cap = os.environ.get("HARDY_VERIFY_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, min(limit, int(cap)))
        except ValueError:
            raise ConfigError(f"HARDY_VERIFY_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(limit, n_rows))


def _execute_packed(packed):
    row, cfg_dict = packed
    return execute_row(row, RunConfig(**cfg_dict))


def execute(cfg: RunConfig) -> List[dict]:
    rows = build_rows(cfg)
    workers = _workers(len(rows))
    if workers == 1:
        return [execute_row(row, cfg) for row in rows]
    cfg_dict = asdict(cfg)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute_packed, [(row, cfg_dict) for row in rows]))


# -- reporting -----------------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def summary_csv(records: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow([rec["claim_id"], _num(rec["p"]), str(int(rec["n"])), _num(rec["r"]), _num(rec["R"]),
                    rec["family"], rec["param"], _num(rec["lhs"]), _num(rec["rhs"]), _num(rec["slack"]),
                    _num(rec["rel_gap"]), rec["status"]])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def report_json(cfg: RunConfig, records: Sequence[dict], code: int) -> str:
    doc = {"schema": SCHEMA_ID, "command": cfg.command, "config": asdict(cfg), "exit_code": code,
           "records": list(records)}
    return json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"


def exit_code(records: Sequence[dict]) -> int:
    statuses = {rec["status"] for rec in records}
    if Status.VIOLATION.value in statuses:
        return EXIT_VIOLATION
    if statuses - {Status.HOLDS.value, Status.EQUALITY.value, Status.SANDWICH_OK.value}:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def format_table(records: Sequence[dict]) -> str:
    head = f"{'claim':<24} {'p':>5} {'n':>3} {'r':>6} {'family':<10} {'param':<22} {'lhs':>14} {'rhs':>14} {'rel_gap':>10}  status"
    lines = [head, "-" * len(head)]
    for rec in records:
        def g(x, w=14):
            return f"{x:>{w}.7g}" if isinstance(x, float) and math.isfinite(x) else f"{_num(x):>{w}}"
        lines.append(f"{rec['claim_id']:<24} {rec['p']:>5g} {int(rec['n']):>3} {rec['r']:>6g} {rec['family']:<10.10} "
                     f"{rec['param']:<22.22} {g(rec['lhs'])} {g(rec['rhs'])} {g(rec['rel_gap'], 10)}  {rec['status']}")
    return "\n".join(lines)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute ``cfg``, write the report files, print the table; returns the exit code."""
    stdout = stdout or sys.stdout
    cfg.validate()
    if cfg.command == "verify":
        # every grid point must be valid up front
        for point in _grid_points(cfg):
            try:
                params = derive_params(point["p"], point["n"], point["r"], point["R"])
            except HardyError as exc:
                raise ConfigError(f"grid point {point}: {exc}") from None
            for c in cfg.claims:
                _check_claim_regime(ClaimId(c), params, cfg)
    records = execute(cfg)
    code = exit_code(records)
    if cfg.out:
        out = Path(cfg.out)
        if "json" in cfg.formats:
            _atomic_write(out / "report.json", report_json(cfg, records, code))
        if "csv" in cfg.formats:
            _atomic_write(out / "summary.csv", summary_csv(records))
    print(format_table(records), file=stdout)
    return code


_CLAIM_REGIME_TEXT = {
    ClaimId.P1_I: ("M_POSITIVE", "m > 0 requires p > n"),
    ClaimId.P2_I: ("M_POSITIVE", "m > 0 requires p > n"),
    ClaimId.P1_II: ("M_NEGATIVE", "m < 0 requires p < n"),
    ClaimId.P2_II: ("M_NEGATIVE", "m < 0 requires p < n"),
    ClaimId.P3: ("M_NEGATIVE", "m < 0 requires p < n"),
    ClaimId.P1_III: ("M_ZERO", "m = 0 requires p = n"),
    ClaimId.P2_III: ("M_ZERO", "m = 0 requires p = n"),
}


def _check_claim_regime(claim: ClaimId, params, cfg: RunConfig):
    need = _CLAIM_REGIME_TEXT.get(claim)
    if need is not None and params.regime.value != need[0]:
        raise ConfigError(f"claim {claim.value} at {params.describe()}: regime mismatch ({need[1]})")
    if claim in (ClaimId.EX1, ClaimId.EX2):
        if params.p != 2.0 or params.n < 3 or (claim is ClaimId.EX1 and params.r != 1.0):
            raise ConfigError(f"claim {claim.value} needs p = 2, n >= 3" + (", r = 1" if claim is ClaimId.EX1 else ""))
    if claim is ClaimId.THM1 and cfg.family is None and not params.bounded:
        raise ConfigError("claim THM1 needs a finite R")


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardy-verify", description="Numerical checks of Hardy-type inequalities "
                                 "in annuli and exteriors of balls.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration; flags override its fields")
    ap.add_argument("--claims", nargs="+", help="claim ids, e.g. P1_II P3 (comma-separated also accepted)")
    ap.add_argument("--p", nargs="+", type=_float)
    ap.add_argument("--n", nargs="+", type=int)
    ap.add_argument("--r", nargs="+", type=_float)
    ap.add_argument("--R", nargs="+", type=_float, help="outer radius; 'inf' for the exterior (default)")
    ap.add_argument("--family", choices=[f.value for f in FamilyId])
    ap.add_argument("--profile", choices=("extremal", "random"))
    for name in DEFAULT_PARAMETER:
        ap.add_argument(f"--{name}", nargs="+", type=float, help=f"family parameter {name}")
    ap.add_argument("--M", type=float, help="kink radius of u_eta (default: smallest admissible)")
    ap.add_argument("--which", type=int, choices=(1, 2), help="p-harmonic weight index for THM1")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--rel-tol", dest="rel_tol", type=float)
    ap.add_argument("--abs-tol", dest="abs_tol", type=float)
    ap.add_argument("--eq-tol", dest="eq_tol", type=float)
    ap.add_argument("--literal", action="store_true", default=None,
                    help="EX1/EX2: evaluate the unexpanded alternative forms instead of the p = 2 expansion")
    ap.add_argument("--kernel", choices=[k.value for k in QuotientKernel])
    ap.add_argument("--grid", nargs="+", type=int, help="optimizer grid size(s); three doubling sizes extrapolate")
    ap.add_argument("--t-max", dest="t_max", type=_float)
    ap.add_argument("--max-iters", dest="max_iters", type=int)
    ap.add_argument("--step-rule", dest="step_rule", choices=("auto", "eigen", "inverse-power", "armijo"))
    ap.add_argument("--out", help="output directory for report.json and summary.csv (default hardy-out)")
    ap.add_argument("--formats", nargs="+", choices=("json", "csv"))
    return ap


def config_from_args(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise ConfigError("invalid command line") from None
    data = load_config_file(ns.config) if ns.config else {}
    flags = {k: v for k, v in vars(ns).items() if v is not None and k != "config"}
    if "claims" in flags:
        flags["claims"] = [c for item in flags["claims"] for c in item.split(",") if c]
    data.update(flags)
    if ns.command == "sharpness" and not data.get("claims"):
        data["claims"] = _sharpness_claims(data)
    return _coerce(data)


def _sharpness_claims(data: dict) -> List[str]:
    claims = []
    if data.get("eps") is not None or data.get("family") == FamilyId.U_EPS.value:
        claims.append("P2_I")
    if data.get("eta") is not None or data.get("family") == FamilyId.U_ETA.value:
        claims.append("P2_III")
    return claims or ["P2_I", "P2_III"]


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(config_from_args(argv))
    except ConfigError as exc:
        print(f"hardy-verify: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
