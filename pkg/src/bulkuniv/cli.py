"""
Command-line driver: runs verification suites and writes CSV/JSON reports plus
a manifest.

Exit codes: 0 when every selected suite passes, 1 when a suite fails or
errors, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import random
import shutil
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import gmpy2
import numpy as np

from . import __version__

SUITES = ("recurrence", "kernel", "limits", "dets", "riccati", "appendix", "universality")
_EVEN_N_SUITES = ("kernel", "universality")
_MIN_M2_SUITES = ("dets", "limits")

__all__ = ["RunConfig", "Manifest", "ConfigError", "run_suite", "cache_ops", "main", "SUITES"]


class ConfigError(ValueError):
    """Invalid run configuration."""


# ----------------------------------------------------------------------------
# configuration and manifest
# ----------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Inputs of a verification run.

    ``potential`` is a spec string such as ``"k4=1"`` (used by the recurrence
    and kernel suites); ``m_list`` drives the determinant, limit, Riccati and
    universality suites, the latter on V = x^(2m).
    """

    potential: str = "k4=1"
    N_list: list = field(default_factory=lambda: [20])
    m_list: list = field(default_factory=lambda: [2])
    precision_bits: int = 256
    jmax: int = 64
    mesh: dict = field(default_factory=dict)
    out_dir: str = "bulkuniv_out"
    suites: list = field(default_factory=list)
    r: float = 0.0
    theta: float = 0.5
    jobs: int = 1
    cache_dir: str | None = None
    betas: list = field(default_factory=lambda: [1, 4])
    grid: list = field(default_factory=lambda: [-1.0, -0.5, 0.0, 0.5, 1.0])
    q_max: int | None = None

    _FIELDS = ("potential", "N_list", "m_list", "precision_bits", "jmax", "mesh", "out_dir",
               "suites", "r", "theta", "jobs", "cache_dir", "betas", "grid", "q_max")
    _ALIASES = {"N": "N_list", "m": "m_list", "bits": "precision_bits", "out": "out_dir"}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        kw = {}
        for k, v in d.items():
            k = cls._ALIASES.get(k, k)
            if k not in cls._FIELDS:
                raise ConfigError(f"unknown config key {k!r}")
            if k in ("N_list", "m_list", "betas", "grid") and not isinstance(v, list):
                v = [v]
            kw[k] = v
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s): {', '.join(bad)}")
        for name in ("N_list", "m_list"):
            vals = getattr(self, name)
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in vals):
                raise ConfigError(f"{name} must contain integers")
        if any(s in self.suites for s in _EVEN_N_SUITES):
            odd = [N for N in self.N_list if N % 2]
            if odd:
                raise ConfigError(f"N must be even for the beta = 1, 4 suites (got {odd})")
        if any(s in self.suites for s in _MIN_M2_SUITES) and any(m < 2 for m in self.m_list):
            raise ConfigError("m >= 2 required for the determinant and limit suites")
        if any(m < 1 for m in self.m_list):
            raise ConfigError("m >= 1 required")
        if self.precision_bits < 64:
            raise ConfigError("precision_bits >= 64 required")
        if any(b not in (1, 4) for b in self.betas):
            raise ConfigError("betas must be drawn from {1, 4}")
        if self.q_max is not None and (self.q_max < 1 or self.q_max % 2 == 0):
            raise ConfigError("q_max must be a positive odd integer")
        if self.jmax < 1:
            raise ConfigError("jmax >= 1 required")
        if self.jobs < 1:
            raise ConfigError("jobs >= 1 required")
        if not self.theta > 0:
            raise ConfigError("theta must be positive")
        from .orthopoly import Potential
        try:
            Potential.parse(self.potential)
        except ValueError as exc:
            raise ConfigError(f"bad potential {self.potential!r}: {exc}") from None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self._FIELDS}

    def config_hash(self) -> str:
        d = self.to_dict()
        # output location and parallelism do not change results
        for k in ("out_dir", "jobs", "cache_dir"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class Manifest:
    config_hash: str
    version: str
    suites: dict = field(default_factory=dict)
    cache_keys: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s["status"] == "pass" for s in self.suites.values())

    @property
    def failed(self) -> list:
        return [k for k, s in self.suites.items() if s["status"] != "pass"]

    def to_dict(self) -> dict:
        return asdict(self)


# ----------------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------------

def _dec(v) -> str:
    """Full-precision decimal string."""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, type(gmpy2.mpfr(0))):
        return str(v)
    return repr(float(v))


def _disp(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    try:
        return f"{float(v):.6g}"
    except (TypeError, ValueError):
        return str(v)


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (bool, np.bool_)):
        return bool(o)
    if isinstance(o, (int, np.integer)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else str(f)
    if isinstance(o, Fraction):
        return _dec(o)
    if o is None or isinstance(o, str):
        return o
    return str(o)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n")


def _pmap(fn, items, jobs: int):
    """Map over items sorted by key; results come back in that order."""
    items = sorted(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ----------------------------------------------------------------------------
# suites
# ----------------------------------------------------------------------------

def _table(cfg: RunConfig, V, Jmax=None):
    from .orthopoly import recurrence_table
    return recurrence_table(V, Jmax or cfg.jmax, precision_bits=cfg.precision_bits,
                            cache_dir=cfg.cache_dir)


def _jmax_for(cfg: RunConfig, m: int, N_list) -> int:
    # D entries up to index N + 2m - 2 need j + k + 2m - 1 <= 2 Jmax
    need = max(N_list) + 2 * m + 1 if N_list else 1
    return max(cfg.jmax, need)


def _suite_recurrence(cfg: RunConfig, out: Path) -> dict:
    from .orthopoly import Potential, gram_matrix
    V = Potential.parse(cfg.potential)
    tab = _table(cfg, V)
    rows = [(j, a, b, _disp(float(b))) for j, (a, b) in enumerate(zip(tab.a_str, tab.b_str))]
    _write_csv(out / "recurrence.csv", ["j", "a", "b", "b_display"], rows)
    G = gram_matrix(tab, min(tab.Jmax, 40))
    orth = float(np.max(np.abs(G - np.eye(len(G)))))
    res = {"potential": V.spec(), "Jmax": tab.Jmax, "precision_bits": tab.precision_bits,
           "orthonormality_dev": orth, "b_positive": bool(np.all(tab.b > 0))}
    ok = orth < 1e-12 and res["b_positive"]
    if tab.Jmax >= 20:
        res["b_ratio_trend"] = abs(tab.b[-1] / tab.b[-2] - 1)
        ok = ok and res["b_ratio_trend"] < 0.2
    _write_json(out / "recurrence.json", res)
    return {"pass": ok, "outputs": ["recurrence.csv", "recurrence.json"], "cache_keys": [tab.cache_key()]}


def _suite_kernel(cfg: RunConfig, out: Path) -> dict:
    from .orthopoly import Potential
    from .widom_kernels import (WidomKernel, ba_reflection_defect, build_blocks, d_matrix,
                                d_entry_derivative_route, section_identity_check)
    V = Potential.parse(cfg.potential)
    tab = _table(cfg, V, _jmax_for(cfg, V.m, cfg.N_list))
    D, valid = d_matrix(tab)
    rows, report, ok = [], {}, True
    for N in sorted(cfg.N_list):
        chk = section_identity_check(tab, None, N)
        chk["reflection_defect"] = ba_reflection_defect(build_blocks(tab, None, N))
        J = min(N + V.n, tab.Jmax)
        chk["derivative_route_gap"] = max(abs(D[j, k] - d_entry_derivative_route(tab, j, k))
                                 for j in range(J) for k in range(J) if valid[j, k])
        report[str(N)] = chk
        devs = ("D_eps_identity_dev", "upper_left_identity_dev", "lower_left_max",
                "lower_right_vs_C11_dev", "BAC_11_max", "BAC_12_max", "derivative_route_gap")
        ok = ok and all(chk[k] < 1e-8 for k in devs) and chk["reflection_defect"] < 0.1
        for k in sorted(chk):
            if isinstance(chk[k], (int, float)):
                rows.append((N, k, _dec(chk[k]), _disp(chk[k])))
    _write_csv(out / "kernel.csv", ["N", "quantity", "value", "display"], rows)
    _write_json(out / "kernel.json", report)
    erows = []
    g = np.asarray(cfg.grid, dtype=float)
    X, Y = np.meshgrid(g, g, indexing="ij")
    for N in sorted(cfg.N_list):
        bl = build_blocks(tab, None, N)
        for beta in sorted(set(cfg.betas)):
            E = WidomKernel(bl, tab, beta).matrix(X, Y).entries()
            for (a, c), x in np.ndenumerate(X):
                y = Y[a, c]
                erows.append((N, beta, _dec(x), _dec(y)) + tuple(_dec(E[a, c, i, j]) for i in (0, 1) for j in (0, 1)))
    _write_csv(out / "kernel_entries.csv", ["N", "beta", "x", "y", "K11", "K12", "K21", "K22"], erows)
    return {"pass": ok, "outputs": ["kernel.csv", "kernel.json", "kernel_entries.csv"],
            "cache_keys": [tab.cache_key()]}


def _limits_one(args) -> dict:
    m, q_max = args
    from .asymptotics import iq_table
    from .widom_kernels import toeplitz_inverse_crosscheck
    tab = iq_table(m, q_max)
    qs = sorted(tab.values)
    rows = [(m, q, _dec(tab.I(q)), _dec(tab.Itilde(q)), _disp(tab.Itilde(q))) for q in qs]
    cap = 4 * math.sqrt(m + 0.5) / math.pi
    bound_ok = all(abs(tab.Itilde(q)) <= cap / q for q in qs if 3 <= q <= 4 * m - 5)
    tp = toeplitz_inverse_crosscheck(m, 40) if m <= 4 else {"max_relative_gap": None}
    return {"m": m, "rows": rows, "bound_ok": bound_ok, "toeplitz_N40_gap": tp["max_relative_gap"]}


def _suite_limits(cfg: RunConfig, out: Path) -> dict:
    res = _pmap(_limits_one, [(m, cfg.q_max) for m in sorted(set(cfg.m_list))], cfg.jobs)
    rows = [r for d in res for r in d["rows"]]
    _write_csv(out / "iq.csv", ["m", "q", "I", "Itilde", "Itilde_display"], rows)
    summ = {str(d["m"]): {"bound_ok": d["bound_ok"], "toeplitz_N40_gap": d["toeplitz_N40_gap"]} for d in res}
    _write_json(out / "limits.json", summ)
    return {"pass": all(d["bound_ok"] for d in res), "outputs": ["iq.csv", "limits.json"]}


def _dets_one(m: int) -> dict:
    from .limit_determinants import certify, det_report
    rep = det_report(m)
    bounds = [(b.route, b.bound_value, b.passes, b.criterion) for b in certify(m)]
    return {"m": m, "report": rep, "bounds": bounds}


def _suite_dets(cfg: RunConfig, out: Path) -> dict:
    res = _pmap(_dets_one, sorted(set(cfg.m_list)), cfg.jobs)
    rows, brows, ok = [], [], True
    for d in res:
        r = d["report"]
        rows.append((d["m"], _dec(r["det_Tm_prime"]), _dec(r["det_Tm_minus1"]), _dec(r["relative_gap"]),
                     _disp(r["det_Tm_minus1"])))
        ok = ok and r["relative_gap"] < 1e-9
        for route, val, passes, crit in d["bounds"]:
            brows.append((d["m"], route, _dec(val), str(bool(passes)), crit))
            ok = ok and passes
    _write_csv(out / "dets.csv", ["m", "det_Tm_prime", "det_Tm_minus1", "relative_gap", "det_display"], rows)
    _write_csv(out / "bounds.csv", ["m", "route", "value", "pass", "criterion"], brows)
    _write_json(out / "dets.json", {str(d["m"]): d for d in res})
    return {"pass": ok, "outputs": ["dets.csv", "bounds.csv", "dets.json"]}


def _riccati_one(m: int) -> dict:
    from .asymptotics import h_structure_check, theta_ode_check
    from .riccati_bounds import riccati_residual, y_m_eval, y_m_profile
    h = h_structure_check(m)
    th = theta_ode_check(m)
    rr = riccati_residual(m)
    tmin, ymin, uni = y_m_profile(m)

    return {
        "m": m,
        "h_ode_residual_exact": h["ode_residual_exact"],
        "theta_ode_residual": th["max_residual"],
        "riccati_residual": rr["max_residual"],
        "y_at_0": float(y_m_eval(m, 0.0)),
        "y_at_half_pi": float(y_m_eval(m, math.pi / 2)),
        "theta_min": tmin,
        "y_min": ymin,
        "unimodal": uni,
    }


def _suite_riccati(cfg: RunConfig, out: Path) -> dict:
    res = _pmap(_riccati_one, sorted(set(cfg.m_list)), cfg.jobs)
    keys = ["h_ode_residual_exact", "theta_ode_residual", "riccati_residual", "y_at_0", "y_at_half_pi",
            "theta_min", "y_min", "unimodal"]
    rows = [(d["m"], k, _dec(d[k]), _disp(d[k])) for d in res for k in keys]
    _write_csv(out / "riccati.csv", ["m", "quantity", "value", "display"], rows)
    _write_json(out / "riccati.json", {str(d["m"]): d for d in res})
    ok = all(d["h_ode_residual_exact"] == 0 and d["theta_ode_residual"] < 1e-10
             and d["riccati_residual"] < 1e-6 and d["unimodal"] for d in res)
    return {"pass": ok, "outputs": ["riccati.csv", "riccati.json"]}


def _suite_appendix(cfg: RunConfig, out: Path) -> dict:
    from .riccati_bounds import verify_H_integral, verify_L_bound
    mesh = dict(cfg.mesh)
    lkw = {k: int(mesh[k]) for k in ("Ne", "Ni") if k in mesh}
    hkw = {k: int(mesh[k]) for k in ("Ne0", "Ni0", "Ne1") if k in mesh}
    try:
        Ls, Lseg = verify_L_bound(**lkw)
        Hs, Hseg = verify_H_integral(**hkw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = []
    for name, led in list(Lseg.items()) + [("L summary", Ls)] + list(Hseg.items()) + [("H summary", Hs)]:
        rows.append((name, _dec(led.value), _dec(led.radius), _dec(led.target), led.direction,
                     str(led.passed)))
    _write_csv(out / "appendix.csv", ["segment", "value", "radius", "target", "direction", "pass"], rows)
    _write_json(out / "appendix.json", {
        "L": {"summary": Ls.to_dict(), "segments": {k: v.to_dict() for k, v in Lseg.items()}},
        "H": {"summary": Hs.to_dict(), "segments": {k: v.to_dict() for k, v in Hseg.items()}},
    })
    ok = Ls.passed and Ls.details.get("segments_pass", False) and Hs.passed and Hs.details.get("segments_pass", False)
    return {"pass": bool(ok), "outputs": ["appendix.csv", "appendix.json"]}


def _universality_one(args) -> dict:
    m, N, cfgd = args
    from .orthopoly import Potential
    from .universality_harness import GapSpec, diagonal_ratio, gap_probability, scaled_kernel_error
    from .widom_kernels import build_blocks
    cfg = RunConfig(**cfgd)
    V = Potential.monomial(2 * m)
    tab = _table(cfg, V, _jmax_for(cfg, m, cfg.N_list))
    bl = build_blocks(tab, None, N)
    grid = np.linspace(-1.0, 1.0, 21)
    errs = {b: scaled_kernel_error(bl if b != 2 else None, tab, N, b, cfg.r, grid).tolist() for b in (1, 2, 4)}
    ratios = {b: diagonal_ratio(bl, tab, N, b, cfg.r) for b in (1, 4)}
    gaps = {}
    for b in (1, 2, 4):
        spec = GapSpec(cfg.theta, 40, b)
        gaps[b] = {"finite": gap_probability(spec, "finite", bl, tab, N, cfg.r),
                   "limit": gap_probability(spec, "limit")}
    return {"m": m, "N": N, "errors": errs, "diag_ratio": ratios, "gaps": gaps, "cache_key": tab.cache_key()}


_ENTRY = {(0, 0): "11", (0, 1): "12", (1, 0): "21", (1, 1): "22"}


def _suite_universality(cfg: RunConfig, out: Path) -> dict:
    cfgd = cfg.to_dict()
    pairs = sorted({(m, N) for m in cfg.m_list for N in cfg.N_list})
    res = _pmap(_universality_one, [(m, N, cfgd) for m, N in pairs], cfg.jobs)
    rows, grows = [], []
    for d in res:
        for b in (1, 4):
            for (i, j), name in _ENTRY.items():
                e = d["errors"][b][i][j]
                rows.append((d["m"], d["N"], b, name, _dec(e), _disp(e)))
        e2 = d["errors"][2][0][0]
        rows.append((d["m"], d["N"], 2, "11", _dec(e2), _disp(e2)))
        for b in (1, 2, 4):
            g = d["gaps"][b]
            grows.append((d["m"], d["N"], b, _dec(cfg.theta), _dec(g["finite"]), _dec(g["limit"])))
    _write_csv(out / "universality_errors.csv", ["m", "N", "beta", "entry", "error", "display"], rows)
    _write_csv(out / "universality_gaps.csv", ["m", "N", "beta", "theta", "finite", "limit"], grows)
    verdict, ok = {}, True
    for m in sorted(set(cfg.m_list)):
        runs = sorted((d for d in res if d["m"] == m), key=lambda d: d["N"])
        vm = {}
        for b in (1, 4):
            for (i, j), name in _ENTRY.items():
                seq = [d["errors"][b][i][j] for d in runs]
                dec = all(b2 < a2 for a2, b2 in zip(seq, seq[1:]))
                vm[f"beta{b}_{name}"] = {"errors": seq, "decreasing": dec}
                ok = ok and dec
        for d in runs:
            for b in (1, 4):
                rat = d["diag_ratio"][b]
                inside = abs(rat - 1) <= 3 / math.sqrt(d["N"])
                vm[f"diag_ratio_beta{b}_N{d['N']}"] = {"value": rat, "within_3_over_sqrtN": inside}
                ok = ok and inside
        verdict[str(m)] = vm
    _write_json(out / "universality.json", verdict)
    return {"pass": ok, "outputs": ["universality_errors.csv", "universality_gaps.csv", "universality.json"],
            "cache_keys": sorted({d["cache_key"] for d in res})}


_RUNNERS = {
    "recurrence": _suite_recurrence,
    "kernel": _suite_kernel,
    "limits": _suite_limits,
    "dets": _suite_dets,
    "riccati": _suite_riccati,
    "appendix": _suite_appendix,
    "universality": _suite_universality,
}


def run_suite(config: RunConfig) -> Manifest:
    """Run the selected suites in canonical order and write the manifest."""
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = Manifest(config.config_hash(), __version__)
    keys = set()
    for name in [s for s in SUITES if s in config.suites]:
        t0 = time.perf_counter()
        try:
            r = _RUNNERS[name](config, out)
            man.suites[name] = {"status": "pass" if r["pass"] else "fail", "outputs": r["outputs"]}
            keys.update(r.get("cache_keys", []))
        except ConfigError:
            raise
        except Exception as exc:  # a hard failure is recorded, not swallowed
            man.suites[name] = {"status": "error", "outputs": [], "error": f"{type(exc).__name__}: {exc}"}
        man.timing[name] = round(time.perf_counter() - t0, 3)
    man.cache_keys = sorted(keys)
    _write_json(out / "manifest.json", man.to_dict())
    return man


# ----------------------------------------------------------------------------
# cache maintenance
# ----------------------------------------------------------------------------

def _load_entry(path: Path):
    from .orthopoly import RecurrenceTable
    return RecurrenceTable.from_json(json.loads(path.read_text()))


def cache_ops(command: str, cache_dir=None) -> dict:
    """``list``, ``purge`` or ``verify`` the recurrence-table cache."""
    from .orthopoly import default_cache_dir, recurrence_table
    cdir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    if command == "purge":
        if not cdir.exists():
            return {"command": "purge", "removed": 0}
        files = sorted(cdir.glob("*.json"))
        for f in files:
            f.unlink()
        qdir = cdir / "quarantine"
        if qdir.exists():
            shutil.rmtree(qdir)
        return {"command": "purge", "removed": len(files)}
    if command not in ("list", "verify"):
        raise ConfigError(f"unknown cache command {command!r}")
    if not cdir.is_dir():
        raise ConfigError(f"cache directory {cdir} does not exist")
    entries, corrupt = [], []
    for f in sorted(cdir.glob("*.json")):
        try:
            tab = _load_entry(f)
            if tab.cache_key() != f.stem:
                raise ValueError("key does not match contents")
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            corrupt.append({"file": f.name, "error": str(exc)})
            continue
        entries.append((f, tab))
    if corrupt:
        qdir = cdir / "quarantine"
        qdir.mkdir(exist_ok=True)
        for c in corrupt:
            (cdir / c["file"]).replace(qdir / c["file"])
    if command == "list":
        return {"command": "list", "corrupt": corrupt,
                "entries": [{"key": f.stem, "coeffs": tab.V.spec(), "Jmax": tab.Jmax,
                             "precision_bits": tab.precision_bits} for f, tab in entries]}
    checks = []
    for f, tab in entries:
        rng = random.Random(f.stem)
        js = sorted({0, rng.randrange(tab.Jmax + 1)})
        fresh = recurrence_table(tab.V, max(js[-1], 1), precision_bits=tab.precision_bits, use_cache=False)
        tol = gmpy2.mpfr(2) ** (40 - tab.precision_bits)
        ok = True
        vals = {}
        with gmpy2.context(precision=tab.precision_bits):
            for j in js:
                for name, old, new in (("a", tab.a_str[j], fresh.a_str[j]), ("b", tab.b_str[j], fresh.b_str[j])):
                    o, n = gmpy2.mpfr(old), gmpy2.mpfr(new)
                    dev = abs(o - n) / max(abs(o), gmpy2.mpfr(1))
                    ok = ok and dev <= tol
                    vals[f"{name}_{j}"] = {"stored": old, "rederived": new, "rel_dev": float(dev)}
        checks.append({"key": f.stem, "coeffs": tab.V.spec(), "indices": js, "ok": bool(ok), "values": vals})
    return {"command": "verify", "corrupt": corrupt, "checks": checks,
            "ok": all(c["ok"] for c in checks) and not corrupt}


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------

def _int_list(s: str) -> list:
    try:
        return [int(t) for t in s.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of integers, got {s!r}") from None


def _float_list(s: str) -> list:
    try:
        return [float(t) for t in s.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {s!r}") from None


def _int_range(s: str) -> list:
    """'2..14' or '2-14' (inclusive), or a plain list."""
    for sep in ("..", "-", ":"):
        if sep in s:
            lo, hi = s.split(sep, 1)
            try:
                return list(range(int(lo), int(hi) + 1))
            except ValueError:
                break
    return _int_list(s)


def _mesh_item(s: str):
    k, sep, v = s.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"mesh override must be KEY=VALUE, got {s!r}")
    try:
        return k.strip(), int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mesh value must be an integer, got {v!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bulkuniv", description="Bulk-universality verification suites.")
    p.add_argument("--version", action="version", version=f"bulkuniv {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; flags given explicitly override it")
        sp.add_argument("--potential", help="potential spec, e.g. 'k4=1,k2=-0.5'")
        sp.add_argument("--N-list", "--N", dest="N_list", type=_int_list, help="even N values, e.g. 20,40")
        sp.add_argument("--m", "--m-range", dest="m_list", type=_int_range, help="m values: 2,3 or 2..14")
        sp.add_argument("--beta", dest="betas", type=_int_list, help="kernel suite: beta values among 1,4")
        sp.add_argument("--grid", type=_float_list, help="kernel suite: evaluation points, e.g. -1,0,1")
        sp.add_argument("--q-range", dest="q_max", type=int, help="limits suite: largest odd |q|")
        sp.add_argument("--precision-bits", dest="precision_bits", type=int)
        sp.add_argument("--jmax", type=int)
        sp.add_argument("--mesh", type=_mesh_item, action="append", help="mesh override KEY=VALUE")
        sp.add_argument("--out", dest="out_dir", help="output directory")
        sp.add_argument("--r", type=float, help="scaling center")
        sp.add_argument("--theta", type=float, help="gap half-width in scaled units")
        sp.add_argument("--jobs", type=int, help="parallel workers over (m, N)")
        sp.add_argument("--cache-dir", dest="cache_dir")

    for name in SUITES:
        common(sub.add_parser(name, help=f"run the {name} suite"))
    common(sub.add_parser("run", help="run the suites listed in the config"))
    cp = sub.add_parser("cache", help="list, purge or verify cached recurrence tables")
    cp.add_argument("action", choices=("list", "purge", "verify"))
    cp.add_argument("--cache-dir", dest="cache_dir")
    return p


def _config_from_args(ns) -> RunConfig:
    d = {}
    if ns.config:
        try:
            d = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a JSON object")
    for k in ("potential", "N_list", "m_list", "precision_bits", "jmax", "out_dir", "r", "theta", "jobs",
              "cache_dir", "betas", "grid", "q_max"):
        v = getattr(ns, k, None)
        if v is not None:
            d[k] = v
    if ns.mesh:
        d["mesh"] = dict(d.get("mesh", {}), **dict(ns.mesh))
    if ns.command != "run":
        d["suites"] = [ns.command]
    return RunConfig.from_dict(d)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.command == "cache":
            rep = cache_ops(ns.action, ns.cache_dir)
            print(json.dumps(_jsonable(rep), indent=1, sort_keys=True))
            return 0 if rep.get("ok", True) and not rep.get("corrupt") else 1
        cfg = _config_from_args(ns)
        man = run_suite(cfg)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for name, s in man.suites.items():
        line = f"{name}: {s['status']}"
        if "error" in s:
            line += f" ({s['error']})"
        print(line)
    if not man.passed:
        print(f"failed suite(s): {', '.join(man.failed)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
