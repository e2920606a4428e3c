"""Replicated simulation/estimation experiments and MSE tables.

Replication ``b`` at sample size ``n`` always uses the 64-bit stream
``replication_seed(base_seed, n, b)``, and rows are reduced in replication
order, so tables do not depend on how the work is split across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analytic import k_of_d
from .estimators import BandwidthPlan, default_bandwidths, estimate_d_gph, k_hat
from .process import InnovationSpec, LinearProcessSpec, expand_ma
from .simulate import default_truncation, replication_seed, simulate_path

SCHEMA_VERSION = 1
DEFAULT_REPLICATIONS = 2000
CI_REPLICATIONS = 200
DEFAULT_SEED = 20240601
COLUMNS = ("n", "mse", "mean_k_hat", "k_true", "excluded", "mc_std_error")
PLUGIN_COLUMNS = ("mean_d_hat", "mean_plugin_gap")


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo study: a model, a grid of sample sizes and a seed.

    ``bandwidths`` maps sample sizes to explicit plans; when empty the default
    rule of :func:`lpskew.estimators.default_bandwidths` is used.  With
    ``d_mode="estimated"`` each replication plugs in a GPH estimate of d.
    """

    spec: LinearProcessSpec
    sizes: tuple
    replications: int = DEFAULT_REPLICATIONS
    base_seed: int = DEFAULT_SEED
    bandwidths: dict = field(default_factory=dict)
    d_mode: str = "known"
    gph_frac: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.sizes or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be nonempty and strictly increasing")
        if self.d_mode not in ("known", "estimated"):
            raise ValueError("d_mode must be 'known' or 'estimated'")
        plans = {int(n): p if isinstance(p, BandwidthPlan) else BandwidthPlan(**p)
                 for n, p in self.bandwidths.items()}
        object.__setattr__(self, "bandwidths", plans)

    @property
    def bandwidth_rule(self) -> str:
        return "explicit" if self.bandwidths else "default"

    def plan_for(self, n: int) -> BandwidthPlan:
        if self.bandwidths:
            try:
                return self.bandwidths[n]
            except KeyError:
                raise ValueError(f"no explicit bandwidth plan for n={n}") from None
        return default_bandwidths(n, self.spec.d)

    def to_dict(self) -> dict:
        rule = ({"explicit": {str(n): p.to_dict() for n, p in self.bandwidths.items()}}
                if self.bandwidths else "default")
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec.to_dict(),
            "sizes": list(self.sizes),
            "replications": self.replications,
            "base_seed": self.base_seed,
            "bandwidth_rule": rule,
            "d_mode": self.d_mode,
            "gph_frac": self.gph_frac,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        version = doc.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported experiment schema_version {version}")
        known = {"schema_version", "spec", "sizes", "replications", "base_seed",
                 "bandwidth_rule", "d_mode", "gph_frac"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        rule = doc.get("bandwidth_rule", "default")
        if rule == "default":
            plans = {}
        elif isinstance(rule, dict) and set(rule) == {"explicit"}:
            plans = {int(n): BandwidthPlan(**p) for n, p in rule["explicit"].items()}
        else:
            raise ValueError("bandwidth_rule must be 'default' or {'explicit': {...}}")
        return cls(
            spec=LinearProcessSpec.from_dict(doc["spec"]),
            sizes=doc["sizes"],
            replications=doc.get("replications", DEFAULT_REPLICATIONS),
            base_seed=doc.get("base_seed", DEFAULT_SEED),
            bandwidths=plans,
            d_mode=doc.get("d_mode", "known"),
            gph_frac=doc.get("gph_frac", 0.5),
        )


@dataclass(frozen=True)
class MseRow:
    n: int
    mse: float
    mean_k_hat: float
    k_true: float
    excluded: int
    mc_std_error: float
    mean_d_hat: Optional[float] = None
    mean_plugin_gap: Optional[float] = None

    def to_dict(self) -> dict:
        doc = asdict(self)
        if self.mean_d_hat is None:
            for key in PLUGIN_COLUMNS:
                doc.pop(key)
        return doc


# Reference studies 1-4: ARMA(1,1) with phi = theta = +-0.5 and
# FARIMA(0, d, 0) with d = 0.2, 0.4, all driven by centered Exp(1)
# innovations.  REFERENCE_MSE holds the published MSE values for them.
def reference_spec(table: int) -> LinearProcessSpec:
    exp1 = InnovationSpec.exponential(1.0)
    specs = {
        1: LinearProcessSpec(ar=(0.5,), ma=(0.5,), innovation=exp1),
        2: LinearProcessSpec(ar=(-0.5,), ma=(-0.5,), innovation=exp1),
        3: LinearProcessSpec(d=0.2, innovation=exp1),
        4: LinearProcessSpec(d=0.4, innovation=exp1),
    }
    try:
        return specs[table]
    except KeyError:
        raise ValueError(f"no reference study {table}") from None


REFERENCE_MSE = {
    1: {200: 1.075, 1000: 0.575, 5000: 0.298},
    2: {200: 1.800, 1000: 0.586, 5000: 0.171},
    3: {200: 0.374, 1000: 0.113, 5000: 0.048},
    4: {200: 0.121, 1000: 0.027, 5000: 0.023},
}


def reference_config(table: int, replications: int = DEFAULT_REPLICATIONS,
                     base_seed: int = DEFAULT_SEED) -> ExperimentConfig:
    return ExperimentConfig(reference_spec(table), (200, 1000, 5000),
                            replications=replications, base_seed=base_seed)


def _replicate(task) -> list[tuple]:
    """Worker: run replications ``bs`` at size ``n``.

    Returns one ``(k_hat, d_hat, k_hat_at_true_d)`` tuple per replication;
    flagged estimates come back as nan.
    """
    config, n, bs = task
    spec = config.spec
    coeffs = expand_ma(spec, default_truncation(spec, n))
    known_plan = config.plan_for(n)
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for b in bs:
            path = simulate_path(spec, n, replication_seed(config.base_seed, n, b),
                                 coeffs=coeffs)
            est_true = k_hat(path.x, spec.d, known_plan)
            if config.d_mode == "known":
                out.append((est_true.k_hat, math.nan, est_true.k_hat))
                continue
            d_hat = estimate_d_gph(path.x, config.gph_frac)
            plan = known_plan if config.bandwidths else default_bandwidths(n, d_hat)
            out.append((k_hat(path.x, d_hat, plan).k_hat, d_hat, est_true.k_hat))
    return out


def worker_count(workers: Optional[int] = None) -> int:
    """Explicit argument, else ``LPSKEW_WORKERS``, else the CPU count."""
    if workers is None:
        env = os.environ.get("LPSKEW_WORKERS")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValueError("LPSKEW_WORKERS must be a positive integer") from None
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ValueError("worker count must be a positive integer")
    return workers


def _chunks(seq: Sequence[int], parts: int) -> list:
    size = max(1, math.ceil(len(seq) / parts))
    return [seq[i: i + size] for i in range(0, len(seq), size)]


def replicate_estimates(config: ExperimentConfig, n: int, replications: Sequence[int],
                        workers: int = 1) -> list[tuple]:
    """Per-replication results for the given replication indices, in order."""
    bs = list(replications)
    if workers == 1 or len(bs) < 2:
        return _replicate((config, n, bs))
    tasks = [(config, n, chunk) for chunk in _chunks(bs, 4 * workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_replicate, tasks))
    return [r for part in parts for r in part]


def summarize(n: int, results: Sequence[tuple], k_true: float, estimated_d: bool = False) -> MseRow:
    """Reduce per-replication results (in replication order) to an MSE row."""
    ks = np.array([r[0] for r in results], dtype=float)
    valid = ks[np.isfinite(ks)]
    excluded = ks.size - valid.size
    if valid.size == 0:
        raise ExperimentError(f"every replication at n={n} was flagged")
    sq = ((valid - k_true) ** 2).tolist()
    B = valid.size
    mse = math.fsum(sq) / B
    if B > 1:
        var = math.fsum([(s - mse) ** 2 for s in sq]) / (B - 1)
        se = math.sqrt(var / B)
    else:
        se = 0.0
    row = dict(n=n, mse=mse, mean_k_hat=math.fsum(valid.tolist()) / B, k_true=k_true,
               excluded=int(excluded), mc_std_error=se)
    if estimated_d:
        d_hats = [r[1] for r in results]
        gaps = [abs(r[0] - r[2]) for r in results if math.isfinite(r[0]) and math.isfinite(r[2])]
        row["mean_d_hat"] = math.fsum(d_hats) / len(d_hats)
        row["mean_plugin_gap"] = math.fsum(gaps) / len(gaps) if gaps else math.nan
    return MseRow(**row)


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> list[MseRow]:
    """Empirical MSE of k_hat against k(d) for every sample size in ``config``.

    The MSE averages (k_hat_b - k(d))^2 over the replications whose long-run
    variance estimate was positive; the rest are counted in ``excluded``.
    """
    workers = worker_count(workers)
    innov = config.spec.innovation
    k_true = k_of_d(config.spec.d, innov.eta, innov.sigma2)
    rows = []
    for n in config.sizes:
        config.plan_for(n).validate(n)
        results = replicate_estimates(config, n, range(config.replications), workers)
        rows.append(summarize(n, results, k_true, config.d_mode == "estimated"))
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_table(rows: Sequence[MseRow], fmt: str = "csv") -> str:
    """Render rows as ``csv``, ``json`` or a two-column ``markdown`` table."""
    if not rows:
        raise ValueError("no rows to emit")
    columns = list(COLUMNS)
    if rows[0].mean_d_hat is not None:
        columns += PLUGIN_COLUMNS
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            doc = row.to_dict()
            writer.writerow([_fmt(doc[c]) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION,
               "columns": columns,
               "rows": [{c: row.to_dict()[c] for c in columns} for row in rows]}
        return json.dumps(doc, indent=2, allow_nan=True) + "\n"
    if fmt == "markdown":
        lines = ["| n | MSE(k_hat) |", "|---:|---:|"]
        lines += [f"| {row.n} | {row.mse:.3f} |" for row in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def rows_from_json(text: str) -> list[MseRow]:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("unsupported table schema_version")
    return [MseRow(**r) for r in doc["rows"]]


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"experiment config is not valid JSON: {exc}") from None
    try:
        return ExperimentConfig.from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed experiment config: {exc}") from None


__all__ = [
    "ExperimentConfig", "ExperimentError", "MseRow", "REFERENCE_MSE",
    "emit_table", "load_config", "reference_config", "reference_spec",
    "rows_from_json", "run_experiment", "summarize", "worker_count",
]
