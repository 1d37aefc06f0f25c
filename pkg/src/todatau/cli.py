"""Command line front end: ``todatau {tau,evolve,verify,weyl} --config run.json``.

Exit codes: 0 ok, 2 bad configuration, 3 numerical failure, 4 failed verdict.
Errors are printed to stderr as one JSON line.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contour import build_domain
from .errors import ConfigError, DomainError, NumericalError, TodaError, VerificationFailure
from .flow import FlowEngine, FlowSpec, toda_trajectory
from .jacobi import JacobiCoefficients, m_from_q, validate_M, weyl_minus, weyl_plus
from .oracle import LatticeState, integrate, oracle_drift
from .symbol import GroupElement
from .tau import tau_det, tau_q2, tau_qzeta

DEFAULT_TOLERANCES = {"flow_oracle": 1e-6, "isospectral": 1e-4, "tau_discrepancy": 1e-8}
KNOWN_KEYS = {"lambda0", "radius", "grid_points", "truncation", "q", "q_file", "p", "times", "window",
              "g", "points", "tolerances", "oracle", "fault", "seed", "out"}


@dataclass
class RunConfig:
    lambda0: float = 2.5
    radius: float = 3.0
    grid_points: int = 256
    truncation: int = 64
    q: JacobiCoefficients = field(default_factory=lambda: JacobiCoefficients.free(-1, 1))
    p: list = field(default_factory=lambda: [0.0, 1.0])
    times: list = field(default_factory=lambda: [round(0.05 * k, 10) for k in range(11)])
    window: tuple = (-8, 8)
    g: list = field(default_factory=list)
    points: list = field(default_factory=list)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    oracle_L: int = 200
    oracle_dt: float = 1e-3
    fault: dict | None = None
    raw: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def domain(self):
        return build_domain(self.lambda0, self.radius, self.grid_points, self.truncation)


def _parse_q(obj, base: Path | None) -> JacobiCoefficients:
    if isinstance(obj, str):
        path = Path(obj) if base is None else base / obj
        obj = json.loads(path.read_text())
    if not isinstance(obj, dict):
        raise ConfigError("q must be an object")
    if "n_min" in obj:
        return JacobiCoefficients.from_json(obj)
    tail = obj.get("tail", {})
    return JacobiCoefficients.from_dict({int(k): float(v) for k, v in obj.get("a", {}).items()},
                                        {int(k): float(v) for k, v in obj.get("b", {}).items()},
                                        float(tail.get("a", 1.0)), float(tail.get("b", 0.0)))


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]) if len(v) > 1 else 0.0)
    return complex(v)


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Read and validate a JSON config; every problem becomes :class:`ConfigError`."""
    raw: dict = {}
    base = None
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        base = Path(path).parent
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    raw.update(overrides or {})
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(raw=raw)
    try:
        for key in ("lambda0", "radius"):
            if key in raw:
                setattr(cfg, key, float(raw[key]))
        for key in ("grid_points", "truncation"):
            if key in raw:
                setattr(cfg, key, int(raw[key]))
        if "q" in raw:
            cfg.q = _parse_q(raw["q"], base)
        elif "q_file" in raw:
            cfg.q = _parse_q(str(raw["q_file"]), base)
        if "p" in raw:
            cfg.p = [float(c) for c in raw["p"]]
        if "times" in raw:
            cfg.times = [float(t) for t in raw["times"]]
        if "window" in raw:
            lo, hi = raw["window"]
            cfg.window = (int(lo), int(hi))
        cfg.g = [GroupElement.from_json(obj) for obj in raw.get("g", [])]
        cfg.points = [_complex(z) for z in raw.get("points", [])]
        cfg.tolerances.update({k: float(v) for k, v in raw.get("tolerances", {}).items()})
        oracle = raw.get("oracle", {})
        cfg.oracle_L = int(oracle.get("L", cfg.oracle_L))
        cfg.oracle_dt = float(oracle.get("dt", cfg.oracle_dt))
        cfg.fault = raw.get("fault")
        dom = cfg.domain()
        FlowSpec(cfg.p, cfg.times, cfg.window)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc
    lo, hi = cfg.window
    if lo > hi or max(abs(lo - 1), abs(hi)) > dom.N:
        raise ConfigError(f"window {cfg.window} exceeds the truncation support |n| <= {dom.N}")
    if cfg.oracle_L < max(abs(lo), abs(hi)) + 50:
        raise ConfigError("oracle lattice too short for the window")
    return cfg


# ---------------------------------------------------------------- commands

def _closed_form(frame, g: GroupElement):
    if g.zeros or g.exponent:
        return None
    if len(g.poles) == 1:
        return tau_qzeta(frame, g.poles[0])
    if len(g.poles) == 2:
        return tau_q2(frame, g.poles[0], g.poles[1])
    return None


def cmd_tau(cfg: RunConfig) -> dict:
    engine = FlowEngine(cfg.q, cfg.domain())
    frame = engine.frame(0)
    records, worst = [], 0.0
    for g in cfg.g:
        det = tau_det(frame, g)
        rec = det.to_json(g)
        closed = _closed_form(frame, g)
        if closed is not None:
            gap = abs(det.value - closed.value) / max(abs(det.value), 1e-300)
            worst = max(worst, gap)
            rec.update(closed_re=float(closed.value.real), closed_im=float(closed.value.imag), discrepancy=gap)
        records.append(rec)
    report = {"records": records, "max_discrepancy": worst,
              "pass": worst <= cfg.tolerances["tau_discrepancy"]}
    if not report["pass"]:
        raise VerificationFailure(f"closed form and determinant differ by {worst:.3e}", report)
    return report


def _trajectory(cfg: RunConfig):
    spec = FlowSpec(cfg.p, cfg.times, cfg.window)
    return toda_trajectory(cfg.q, spec, cfg.domain())


def write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "n", "a_n", "b_n"])
        for t, n, a, b in rows:
            w.writerow([f"{t:.17g}", n, f"{a:.17g}", f"{b:.17g}"])


def cmd_evolve(cfg: RunConfig, out: Path) -> dict:
    traj = _trajectory(cfg)
    write_csv(out / "trajectory.csv", traj.rows())
    return {"rows": sum(1 for _ in traj.rows()), "min_tau_zpow": traj.min_tau(),
            "diagnostics": [dg.to_json() for dg in traj.diagnostics]}


def _oracle_states(cfg: RunConfig):
    s0 = LatticeState.from_jacobi(cfg.q, cfg.oracle_L)
    nonzero = [t for t in cfg.times if t != 0.0]
    states = integrate(s0, times=sorted(nonzero), dt=cfg.oracle_dt) if nonzero else []
    by_t = {s.t: s for s in states}
    by_t[0.0] = s0
    return [by_t[t] for t in cfg.times]


def cmd_verify(cfg: RunConfig) -> dict:
    traj = _trajectory(cfg)
    if cfg.fault:
        # test hook: corrupt one flow coefficient
        t_bad, n_bad, delta = float(cfg.fault["t"]), int(cfg.fault["n"]), float(cfg.fault.get("delta", 1e-3))
        i = cfg.times.index(t_bad)
        q = traj.states[i]
        a = q.a.copy()
        a[n_bad - q.n_min] += delta
        traj.states[i] = JacobiCoefficients(q.n_min, q.n_max, a, q.b, q.a_tail, q.b_tail)
    by_time = _oracle_states(cfg)
    lo, hi = cfg.window
    n = np.arange(lo, hi + 1)
    per_t, worst = [], {"discrepancy": 0.0, "t": None, "n": None}
    for t, fq, s in zip(cfg.times, traj.states, by_time):
        oq = s.to_jacobi(cfg.window)
        gap = np.abs(fq.a_at(n) - oq.a_at(n)) + np.abs(fq.b_at(n) - oq.b_at(n))
        k = int(np.argmax(gap))
        per_t.append({"t": t, "discrepancy": float(gap[k]), "worst_n": int(n[k])})
        if gap[k] > worst["discrepancy"]:
            worst = {"discrepancy": float(gap[k]), "t": t, "n": int(n[k])}
    drift = oracle_drift(cfg.q, cfg.times, cfg.oracle_L, cfg.oracle_dt)
    min_tau = traj.min_tau()
    ok = (worst["discrepancy"] <= cfg.tolerances["flow_oracle"] and drift <= cfg.tolerances["isospectral"]
          and min_tau > 0)
    report = {"pass": bool(ok), "per_t": per_t, "worst": worst, "isospectral_drift": drift,
              "min_tau_zpow": min_tau, "tolerances": cfg.tolerances}
    if not ok:
        raise VerificationFailure("flow and oracle disagree", report)
    return report


def cmd_weyl(cfg: RunConfig) -> dict:
    m = m_from_q(cfg.q, cfg.lambda0)
    cert = validate_M(m, lambda0=cfg.lambda0, raise_on_fail=False)
    rows = []
    for z in cfg.points:
        w = z + 1 / z if z != 0 else None
        row = {"z": [z.real, z.imag], "m": _pair(m(z))}
        if w is not None and abs(abs(z) - 1) > 1e-12:
            try:
                row["m_plus"] = _pair(complex(weyl_plus(cfg.q, w, lambda0=cfg.lambda0)))
                row["m_minus"] = _pair(complex(weyl_minus(cfg.q, w, lambda0=cfg.lambda0)))
            except NumericalError as exc:
                row["weyl_error"] = str(exc)
        rows.append(row)
    return {"points": rows, "certificate": {"passed": cert.passed, "violations": cert.violations,
                                            "non_rational_assumed": cert.non_rational_assumed}}


def _pair(v) -> list:
    v = complex(v)
    return [v.real, v.imag]


# ---------------------------------------------------------------- entry point

def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc.args[0]) if exc.args else ""}),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="todatau", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=["tau", "evolve", "verify", "weyl"])
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, {"seed": args.seed} if args.seed is not None else None)
    except ConfigError as exc:
        return _fail(2, exc)
    except TodaError as exc:
        return _fail(2, ConfigError(str(exc)))
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    meta = {"command": args.command, "config_sha256": cfg.digest, "tolerances": cfg.tolerances}
    try:
        if args.command == "tau":
            result = cmd_tau(cfg)
        elif args.command == "evolve":
            result = cmd_evolve(cfg, out)
        elif args.command == "verify":
            result = cmd_verify(cfg)
        else:
            result = cmd_weyl(cfg)
    except VerificationFailure as exc:
        report = exc.args[1] if len(exc.args) > 1 else {}
        _write_json(out / f"{args.command}.json", report)
        _write_json(out / f"{args.command}.meta.json", meta)
        return _fail(4, exc)
    except NumericalError as exc:
        return _fail(3, exc)
    _write_json(out / f"{args.command}.json", result)
    _write_json(out / f"{args.command}.meta.json", meta)
    if args.command == "evolve":
        _write_json(out / "trajectory.meta.json", meta)
    print(json.dumps({"command": args.command, "ok": True, "out": str(out)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
