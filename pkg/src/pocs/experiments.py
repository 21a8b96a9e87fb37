"""Monte-Carlo harness: noiseless phase transitions and noisy SNR sweeps.

Every trial owns a random stream keyed by ``(master_seed, trial, m)``, so the
outcome of a trial does not depend on how many trials run, in which order, or
in how many processes. Aggregation always follows grid order.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bpdn import SolverConfig, Status, bpdn, lift_complex
from .linalg import RngStream, sample_sparse_signal
from .linearization import build_Az, e1, epsilon_bound, normalize_signal
from .sensing import Scaling, SensingEnsemble, measure_linear, measure_phase_only, sample_disk_noise

__all__ = [
    "PO_CS",
    "CS",
    "EpsilonPolicy",
    "ExperimentConfig",
    "TrialOutcome",
    "ResultRow",
    "ExperimentResult",
    "CSV_COLUMNS",
    "run_phase_transition",
    "run_noise_sweep",
    "emit_results",
    "write_csv",
    "read_csv",
    "write_svg",
    "transition_point",
    "snr_slope",
    "snr_db",
]

logger = logging.getLogger(__name__)

PO_CS = "po-cs"
CS = "cs"

CSV_COLUMNS = (
    "m", "m_over_s", "tau", "arm", "success_rate", "mean_snr_db", "std_snr_db", "trials", "seed", "iteration_caps",
)


@dataclass(frozen=True)
class EpsilonPolicy:
    """How the fidelity radius handed to the solver is chosen.

    ``theoretical`` uses ``sqrt(2) tau (1 + delta) / (1 - delta)`` with
    ``value = delta``; ``oracle`` uses the true defect ``||A_z x* - e1||``
    (simulation only); ``fixed`` uses ``value`` directly.
    """

    kind: str = "theoretical"
    value: float = 0.2

    def __post_init__(self):
        if self.kind not in ("theoretical", "oracle", "fixed"):
            raise ValueError(f"unknown epsilon policy {self.kind!r}")
        if self.kind == "theoretical" and not 0 <= self.value < 1:
            raise ValueError(f"theoretical policy needs delta in [0, 1), got {self.value}")
        if self.kind == "fixed" and not self.value >= 0:
            raise ValueError(f"fixed epsilon must be non-negative, got {self.value}")

    @classmethod
    def parse(cls, text: str) -> "EpsilonPolicy":
        """Parse ``theoretical[:delta]``, ``oracle`` or ``fixed:value``."""
        kind, _, arg = text.strip().lower().partition(":")
        if kind == "oracle":
            if arg:
                raise ValueError("oracle policy takes no argument")
            return cls("oracle", 0.0)
        if kind == "theoretical":
            return cls("theoretical", float(arg) if arg else 0.2)
        if kind == "fixed":
            if not arg:
                raise ValueError("fixed policy needs a value, e.g. fixed:0.1")
            return cls("fixed", float(arg))
        raise ValueError(f"unknown epsilon policy {text!r}")

    def __str__(self) -> str:
        return "oracle" if self.kind == "oracle" else f"{self.kind}:{self.value!r}"

    def radius(self, tau: float, defect: float | None = None) -> float:
        if self.kind == "theoretical":
            return epsilon_bound(tau, self.value)
        if self.kind == "fixed":
            return self.value
        if defect is None:
            raise ValueError("oracle policy needs the true defect ||A_z x* - e1||")
        return defect


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 100
    s: int = 10
    m_grid: tuple[int, ...] = tuple(range(5, 71, 5))
    tau_grid: tuple[float, ...] = ()
    trials: int = 100
    master_seed: int = 0
    success_threshold: float = 1e-3
    epsilon_policy: EpsilonPolicy = EpsilonPolicy()
    po_solver: SolverConfig = SolverConfig()
    cs_solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.success_threshold > 0:
            raise ValueError(f"success threshold must be positive, got {self.success_threshold}")
        if not self.m_grid:
            raise ValueError("m_grid must be nonempty")
        if any(m < 1 for m in self.m_grid):
            raise ValueError(f"measurement counts must be positive, got {self.m_grid}")
        if not 1 <= self.s <= self.n:
            raise ValueError(f"need 1 <= s <= n, got n={self.n}, s={self.s}")
        if any(not t >= 0 for t in self.tau_grid):
            raise ValueError(f"noise levels must be non-negative, got {self.tau_grid}")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["m_grid"] = list(self.m_grid)
        d["tau_grid"] = list(self.tau_grid)
        d["epsilon_policy"] = str(self.epsilon_policy)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class TrialOutcome:
    m: int
    tau: float
    arm: str
    trial: int
    rel_error: float
    snr_db: float
    status: Status
    solve_time: float


@dataclass(frozen=True)
class ResultRow:
    m: int
    m_over_s: float
    tau: float
    arm: str
    success_rate: float
    mean_snr_db: float
    std_snr_db: float
    trials: int
    seed: int
    iteration_caps: int = 0
    mean_solve_time: float = 0.0

    def csv_record(self) -> list[str]:
        return [
            str(self.m), repr(self.m_over_s), repr(self.tau), self.arm, repr(self.success_rate),
            repr(self.mean_snr_db), repr(self.std_snr_db), str(self.trials), str(self.seed), str(self.iteration_caps),
        ]


@dataclass
class ExperimentResult:
    kind: str
    config: ExperimentConfig
    rows: list[ResultRow]
    outcomes: list[TrialOutcome] = field(default_factory=list, repr=False)

    @property
    def provenance(self) -> dict:
        return {"kind": self.kind, "config_hash": self.config.digest(), "master_seed": self.config.master_seed}

    def rows_for(self, arm: str | None = None, tau: float | None = None) -> list[ResultRow]:
        return [r for r in self.rows if (arm is None or r.arm == arm) and (tau is None or r.tau == tau)]


def snr_db(x, x_hat) -> float:
    """``20 log10(||x|| / ||x - x_hat||)``; the error is floored at machine precision."""
    x = np.asarray(x, dtype=float)
    xn = np.linalg.norm(x)
    err = max(np.linalg.norm(x - np.asarray(x_hat, dtype=float)), np.finfo(float).eps * xn)
    return float(20 * np.log10(xn / err))


def _outcome(m, tau, arm, trial, x, report, elapsed) -> TrialOutcome:
    rel = float(np.linalg.norm(x - report.estimate) / np.linalg.norm(x))
    return TrialOutcome(m, tau, arm, trial, rel, snr_db(x, report.estimate), report.status, elapsed)


def _draw_instance(cfg: ExperimentConfig, m: int, trial: int):
    rng = RngStream(cfg.master_seed, trial, (m,))
    ens = SensingEnsemble.sample(rng, m, cfg.n, Scaling.OVER_SQRT_M)
    x = sample_sparse_signal(rng, cfg.n, cfg.s)
    xstar = normalize_signal(ens, x).xstar
    return rng, ens, xstar


def _phase_transition_trial(cfg: ExperimentConfig, m: int, trial: int) -> tuple[TrialOutcome, TrialOutcome]:
    _, ens, xstar = _draw_instance(cfg, m, trial)

    z = measure_phase_only(ens, xstar)
    t0 = time.perf_counter()
    rep = bpdn(build_Az(ens, z).matrix, e1(m), cfg.po_solver)
    po = _outcome(m, 0.0, PO_CS, trial, xstar, rep, time.perf_counter() - t0)

    lin = ens.with_scaling(Scaling.OVER_SQRT_2M)
    B, y = lift_complex(lin.matrix, measure_linear(lin, xstar))
    t0 = time.perf_counter()
    rep = bpdn(B, y, cfg.cs_solver)
    cs = _outcome(m, 0.0, CS, trial, xstar, rep, time.perf_counter() - t0)
    return po, cs


def _noise_trial(cfg: ExperimentConfig, m: int, trial: int) -> list[TrialOutcome]:
    rng, ens, xstar = _draw_instance(cfg, m, trial)
    clean = measure_phase_only(ens, xstar)
    out = []
    for k, tau in enumerate(cfg.tau_grid):
        z = clean + sample_disk_noise(rng.child(k), m, tau)
        Az = build_Az(ens, z).matrix
        target = e1(m)
        defect = float(np.linalg.norm(Az @ xstar - target))
        solver = dataclasses.replace(cfg.po_solver, epsilon=cfg.epsilon_policy.radius(tau, defect))
        t0 = time.perf_counter()
        rep = bpdn(Az, target, solver)
        out.append(_outcome(m, tau, PO_CS, trial, xstar, rep, time.perf_counter() - t0))
    return out


def _run_trial(task):
    kind, cfg, m, trial = task
    if kind == "phase-transition":
        return list(_phase_transition_trial(cfg, m, trial))
    return _noise_trial(cfg, m, trial)


def _execute(kind: str, cfg: ExperimentConfig, jobs: int | None) -> list[TrialOutcome]:
    tasks = [(kind, cfg, m, t) for m in cfg.m_grid for t in range(cfg.trials)]
    jobs = (os.cpu_count() or 1) if jobs is None else jobs
    if jobs <= 1:
        results = map(_run_trial, tasks)
        return [o for group in results for o in group]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = pool.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (8 * jobs)))
        return [o for group in results for o in group]


def _aggregate(cfg: ExperimentConfig, outcomes: list[TrialOutcome], keys) -> list[ResultRow]:
    cells: dict[tuple, list[TrialOutcome]] = {key: [] for key in keys}
    for o in outcomes:
        cells[(o.m, o.tau, o.arm)].append(o)
    rows = []
    for (m, tau, arm), group in cells.items():
        group.sort(key=lambda o: o.trial)
        ok = sum(o.rel_error <= cfg.success_threshold and o.status is not Status.ITERATION_CAP for o in group)
        snrs = np.array([o.snr_db for o in group])
        row = ResultRow(
            m=m,
            m_over_s=m / cfg.s,
            tau=tau,
            arm=arm,
            success_rate=ok / len(group),
            mean_snr_db=float(np.mean(snrs)),
            std_snr_db=float(np.std(snrs)),
            trials=len(group),
            seed=cfg.master_seed,
            iteration_caps=sum(o.status is Status.ITERATION_CAP for o in group),
            mean_solve_time=float(np.mean([o.solve_time for o in group])),
        )
        logger.info(
            "m=%d tau=%.3g arm=%s success=%.2f snr=%.1f dB caps=%d",
            m, tau, arm, row.success_rate, row.mean_snr_db, row.iteration_caps,
        )
        rows.append(row)
    return rows


def run_phase_transition(cfg: ExperimentConfig, jobs: int | None = 1) -> ExperimentResult:
    """Noiseless success rates of phase-only and linear CS over ``cfg.m_grid``.

    Each trial draws ``Phi`` and an ``s``-sparse ``x`` normalised to ``x*``;
    the phase-only arm solves ``A_z u = e1`` by basis pursuit and the linear
    arm solves the lifted ``A u = A x``. A trial succeeds when the relative
    error is at most ``cfg.success_threshold``; solver iteration caps count as
    failures.
    """
    if cfg.tau_grid:
        raise ValueError("the phase transition is noiseless; tau_grid must be empty")
    logger.info("phase transition config %s", json.dumps(cfg.to_dict(), sort_keys=True))
    outcomes = _execute("phase-transition", cfg, jobs)
    keys = [(m, 0.0, arm) for m in cfg.m_grid for arm in (PO_CS, CS)]
    return ExperimentResult("phase-transition", cfg, _aggregate(cfg, outcomes, keys), outcomes)


def run_noise_sweep(cfg: ExperimentConfig, jobs: int | None = 1) -> ExperimentResult:
    """Mean and spread of the SNR of phase-only recovery under disk noise.

    For each ``(m, tau)`` cell the phases are perturbed by noise uniform on the
    disk of radius ``tau`` and ``A_z u ~ e1`` is solved with the fidelity
    radius given by ``cfg.epsilon_policy``.
    """
    if not cfg.tau_grid:
        raise ValueError("noise sweep needs a nonempty tau_grid")
    if any(t >= np.pi for t in cfg.tau_grid):
        raise ValueError("direction recovery is hopeless for tau >= pi")
    logger.info("noise sweep config %s", json.dumps(cfg.to_dict(), sort_keys=True))
    outcomes = _execute("noise-sweep", cfg, jobs)
    keys = [(m, tau, PO_CS) for m in cfg.m_grid for tau in cfg.tau_grid]
    return ExperimentResult("noise-sweep", cfg, _aggregate(cfg, outcomes, keys), outcomes)


def transition_point(result: ExperimentResult, arm: str, level: float = 0.5) -> float:
    """Linearly interpolated ``m`` at which the success rate first reaches ``level``.

    Returns ``nan`` if the curve never reaches it.
    """
    rows = sorted(result.rows_for(arm=arm), key=lambda r: r.m)
    prev = None
    for r in rows:
        if r.success_rate >= level:
            if prev is None or r.success_rate == prev.success_rate:
                return float(r.m)
            frac = (level - prev.success_rate) / (r.success_rate - prev.success_rate)
            return float(prev.m + frac * (r.m - prev.m))
        prev = r
    return math.nan


def snr_slope(result: ExperimentResult, m: int) -> float:
    """Least-squares slope of mean SNR against ``-log10(tau / pi)`` at fixed ``m``, in dB/decade."""
    rows = [r for r in result.rows if r.m == m and r.tau > 0]
    if len(rows) < 2:
        raise ValueError(f"need at least two noise levels at m={m}")
    xs = np.array([-np.log10(r.tau / np.pi) for r in rows])
    ys = np.array([r.mean_snr_db for r in rows])
    return float(np.polyfit(xs, ys, 1)[0])


# ---------------------------------------------------------------------------
# output


def _header_lines(result: ExperimentResult) -> list[str]:
    return [
        f"pocs {result.kind}",
        "config: " + json.dumps(result.config.to_dict(), sort_keys=True),
        "provenance: " + json.dumps(result.provenance, sort_keys=True),
    ]


def write_csv(result: ExperimentResult, path) -> Path:
    """Write the result table with ``#``-prefixed provenance lines before the header."""
    if not result.rows:
        raise ValueError("refusing to write an empty result table")
    path = Path(path)
    buf = io.StringIO()
    for line in _header_lines(result):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in result.rows:
        w.writerow(row.csv_record())
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path) -> tuple[dict, list[ResultRow]]:
    """Parse a file written by :func:`write_csv`; returns ``(config_dict, rows)``."""
    path = Path(path)
    config = {}
    body = []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            text = line[1:].strip()
            if text.startswith("config: "):
                config = json.loads(text[len("config: "):])
            continue
        body.append(line)
    reader = csv.DictReader(body)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
    rows = [
        ResultRow(
            m=int(rec["m"]),
            m_over_s=float(rec["m_over_s"]),
            tau=float(rec["tau"]),
            arm=rec["arm"],
            success_rate=float(rec["success_rate"]),
            mean_snr_db=float(rec["mean_snr_db"]),
            std_snr_db=float(rec["std_snr_db"]),
            trials=int(rec["trials"]),
            seed=int(rec["seed"]),
            iteration_caps=int(rec["iteration_caps"]),
        )
        for rec in reader
    ]
    return config, rows


def write_svg(result: ExperimentResult, path) -> Path:
    """Render the result as a standalone SVG figure.

    Phase-transition results plot success rate against ``m/s`` (phase-only
    solid red, linear CS dashed blue); noise sweeps plot mean SNR against
    ``m/s`` with one curve per noise level, coloured by ``-log10(tau/pi)``.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib import cm, colors

    if not result.rows:
        raise ValueError("refusing to plot an empty result table")
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "pocs", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        if result.kind == "phase-transition":
            for arm, style in ((PO_CS, dict(color="red", ls="-", label="PO-CS", gid="curve-po-cs")),
                               (CS, dict(color="blue", ls="--", label="CS", gid="curve-cs"))):
                rows = sorted(result.rows_for(arm=arm), key=lambda r: r.m)
                ax.plot([r.m_over_s for r in rows], [r.success_rate for r in rows], marker=".", **style)
            ax.set_ylabel("success rate")
            ax.set_ylim(-0.02, 1.02)
            ax.legend(loc="lower right")
        else:
            taus = sorted({r.tau for r in result.rows})
            levels = [-np.log10(t / np.pi) for t in taus if t > 0]
            norm = colors.Normalize(min(levels, default=0), max(levels, default=1))
            cmap = matplotlib.colormaps["viridis"]
            for i, tau in enumerate(taus):
                rows = sorted(result.rows_for(tau=tau), key=lambda r: r.m)
                level = -np.log10(tau / np.pi) if tau > 0 else max(levels, default=1)
                ax.plot([r.m_over_s for r in rows], [r.mean_snr_db for r in rows], color=cmap(norm(level)),
                        gid=f"curve-tau-{i}")
            fig.colorbar(cm.ScalarMappable(norm=norm, cmap=cmap), ax=ax, label=r"$-\log_{10}(\tau/\pi)$")
            ax.set_ylabel("mean SNR (dB)")
        ax.set_xlabel("m/s")
        ax.grid(alpha=0.3)
        fig.tight_layout()
        meta = {"Date": None, "Description": "\n".join(_header_lines(result))}
        try:
            fig.savefig(path, format="svg", metadata=meta)
        except OSError as exc:
            raise OSError(f"cannot write figure to {path}: {exc.strerror or exc}") from exc
        finally:
            plt.close(fig)
    return path


def emit_results(result: ExperimentResult, out_dir, formats=("csv", "svg"), stem: str | None = None) -> list[Path]:
    """Write the requested formats into ``out_dir`` and return the paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc.strerror or exc}") from exc
    stem = stem or result.kind
    paths = []
    for fmt in formats:
        if fmt == "csv":
            paths.append(write_csv(result, out_dir / f"{stem}.csv"))
        elif fmt == "svg":
            paths.append(write_svg(result, out_dir / f"{stem}.svg"))
        else:
            raise ValueError(f"unknown output format {fmt!r}")
    return paths
