"""Monte Carlo and exact tail-frequency experiments against the closed-form bounds.

Replicas are generated in fixed-size chunks; chunk ``c`` draws from its own
Philox stream seeded by ``SeedSequence(seed, spawn_key=(c,))``, so the output
depends only on the seed and replica count, never on the number of workers.
The first half of the replicas (rounded up) is a pilot run that estimates the
centre (mean or median); deviations are measured on the second half.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import norm as normal

from . import bounds
from .bounds import BoundSpec
from .convexdist import convex_distance_experiment, ordered_sample_space
from .dobrushin import (exact_matrix, uniform_swr_inhomogeneity, weighted_swr_rho_bound)
from .errors import DomainError, HypothesisViolation
from .geometry import CostFunction, PointSet, exact_tsp, heuristic_tsp, mst, EXACT_TSP_MAX
from .models.coupling import curie_weiss_coupled_runs, disagreement_bound
from .models.curie_weiss import cw_exact_magnetization_law, cw_glauber_chains
from .models.ergm import ergm_conditional_model, ergm_glauber_chains, triangle_counts
from .models.sampling import uniform_swr_batch, weighted_swr_batch
from .selfbounding import ProductSpace

KINDS = ("CW", "ERGM", "TSP", "STEINER", "SWR", "CONVEX", "COUPLING")
CHUNK = 250
CSV_COLUMNS = ("t", "bound_name", "tail", "empirical_upper_freq", "empirical_lower_freq",
               "freq", "ci_low", "ci_high", "bound_value", "satisfied")


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple:
    if trials < 1:
        raise DomainError("need at least one trial")
    if not 0 <= successes <= trials:
        raise DomainError("successes must lie in [0, trials]")
    if not 0 < confidence < 1:
        raise DomainError("confidence must lie in (0, 1)")
    z = float(normal.ppf(0.5 + confidence / 2))
    p = successes / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


@dataclass
class ExperimentConfig:
    kind: str
    params: dict = field(default_factory=dict)
    thresholds: list = field(default_factory=list)
    replicas: int = 1000
    seed: int = 0
    burn_in: int | None = None
    thin: int | None = None
    confidence: float = 0.99

    def __post_init__(self):
        self.kind = self.kind.upper()
        if self.kind not in KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise DomainError("replicas must be at least 1")
        t = np.asarray(self.thresholds, dtype=float)
        if np.any(t < 0) or np.any(np.diff(t) < 0):
            raise DomainError("thresholds must be nonnegative and ascending")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        self.thresholds = [float(x) for x in t]

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


class ReportRow(NamedTuple):
    t: float
    bound_name: str
    tail: str
    empirical_upper_freq: float
    empirical_lower_freq: float
    freq: float
    ci_low: float
    ci_high: float
    bound_value: float
    satisfied: bool


@dataclass
class ExperimentReport:
    rows: list
    meta: dict
    runtime: float = 0.0

    @property
    def all_satisfied(self) -> bool:
        return all(r.satisfied for r in self.rows)

    @property
    def hypothesis_violated(self) -> bool:
        return bool(self.meta.get("hypothesis_violations"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([repr(float(r.t)), r.bound_name, r.tail, repr(float(r.empirical_upper_freq)),
                        repr(float(r.empirical_lower_freq)), repr(float(r.freq)),
                        repr(float(r.ci_low)), repr(float(r.ci_high)), repr(float(r.bound_value)),
                        int(r.satisfied)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, meta: dict | None = None) -> "ExperimentReport":
        rows = []
        for rec in csv.DictReader(io.StringIO(text)):
            rows.append(ReportRow(float(rec["t"]), rec["bound_name"], rec["tail"],
                                  float(rec["empirical_upper_freq"]), float(rec["empirical_lower_freq"]),
                                  float(rec["freq"]), float(rec["ci_low"]), float(rec["ci_high"]),
                                  float(rec["bound_value"]), rec["satisfied"] == "1"))
        return cls(rows, meta or {})

    def plot_data(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "series", "empirical", "ci_low", "ci_high", "bound"])
        for r in self.rows:
            w.writerow([repr(float(r.t)), f"{r.bound_name}:{r.tail}", repr(float(r.freq)),
                        repr(float(r.ci_low)), repr(float(r.ci_high)), repr(float(r.bound_value))])
        return buf.getvalue()

    def meta_json(self) -> str:
        return json.dumps(self.meta, sort_keys=True, indent=2, default=_json_default)

    def runtime_json(self) -> str:
        return json.dumps({"runtime_seconds": self.runtime})

    def render(self) -> str:
        lines = [f"{self.meta.get('kind', '?')} experiment, seed {self.meta.get('seed')}, "
                 f"{self.meta.get('measured', '?')} measured replicas"]
        if self.hypothesis_violated:
            lines.append("hypothesis violated (informational run): "
                         + "; ".join(self.meta["hypothesis_violations"]))
        lines.append(f"{'t':>10} {'bound':>14} {'tail':>9} {'freq':>10} {'ci_low':>10} "
                     f"{'ci_high':>10} {'bound_val':>10}  ok")
        for r in self.rows:
            lines.append(f"{r.t:10.4g} {r.bound_name:>14} {r.tail:>9} {r.freq:10.4g} "
                         f"{r.ci_low:10.4g} {r.ci_high:10.4g} {r.bound_value:10.4g}  "
                         f"{'yes' if r.satisfied else 'NO'}")
        return "\n".join(lines)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def replicate(seed: int, replicas: int, fn: Callable, workers: int = 1, chunk: int = CHUNK) -> np.ndarray:
    """Run ``fn(rng, size)`` over fixed chunks and concatenate in chunk order."""
    sizes = [min(chunk, replicas - s) for s in range(0, replicas, chunk)]

    def run(c):
        return np.asarray(fn(chunk_rng(seed, c), sizes[c]))

    if workers <= 1:
        parts = [run(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    return np.concatenate(parts)


def split_pilot(values: np.ndarray) -> tuple:
    r = len(values)
    pilot = (r + 1) // 2
    return values[:pilot], values[pilot:]


# --- row construction -------------------------------------------------------

def _rows_from_samples(meas: np.ndarray, centre: float, thresholds, curves: list,
                       confidence: float) -> list:
    rows = []
    m = len(meas)
    for t in thresholds:
        up = int(np.count_nonzero(meas >= centre + t)) if m else 0
        lo = int(np.count_nonzero(meas <= centre - t)) if m else 0
        two = int(np.count_nonzero(np.abs(meas - centre) >= t)) if m else 0
        fu, fl = (up / m, lo / m) if m else (0.0, 0.0)
        for name, tail, fn in curves:
            k = {"upper": up, "lower": lo, "two_sided": two}[tail]
            freq = k / m if m else 0.0
            ci = wilson_interval(k, m, confidence) if m else (0.0, 1.0)
            b = float(fn(t))
            rows.append(ReportRow(t, name, tail, fu, fl, freq, ci[0], ci[1], b, ci[0] <= b))
    return rows


def _bound_or_flag(violations: list, fn: Callable) -> Callable:
    """Wrap a bound; outside its hypotheses it reports the vacuous value 1."""
    try:
        fn(0.0)
        return fn
    except DomainError as e:
        violations.append(str(e))
        return lambda t: 1.0


# --- experiment kinds ---------------------------------------------------------------

def _run_cw(cfg, workers, meta, violations):
    p = cfg.params
    n, beta, h = int(p["n"]), float(p["beta"]), float(p.get("h", 0.0))
    method = p.get("method", "sample")
    law = cw_exact_magnetization_law(n, beta, h)
    curves = [
        ("CW_UP", "upper", _bound_or_flag(violations, lambda t: bounds.application_values(
            "CW_UP", t, beta=beta, h=h, n=n)[0])),
        ("CW_LOW", "lower", _bound_or_flag(violations, lambda t: bounds.application_values(
            "CW_LOW", t, beta=beta, h=h, n=n)[0])),
    ]
    if method == "exact":
        meta.update(centre_kind="mean", centre=law.mean_m, centre_source="exact", measured="exact")
        rows = []
        for t in cfg.thresholds:
            fu = float(law.upper_tail(t)[0])
            fl = float(law.lower_tail(t)[0])
            for name, tail, fn in curves:
                f = fu if tail == "upper" else fl
                b = float(fn(t))
                rows.append(ReportRow(t, name, tail, fu, fl, f, f, f, b, f <= b))
        return rows
    if method == "sample":
        vals = replicate(cfg.seed, cfg.replicas, lambda rng, k: law.sample_sums(rng, k) / n, workers)
    elif method == "glauber":
        vals = replicate(cfg.seed, cfg.replicas, lambda rng, k: cw_glauber_chains(
            n, beta, h, k, 1, rng, burn_in=cfg.burn_in, thin=cfg.thin)[:, 0] / n, workers)
    else:
        raise DomainError(f"unknown Curie-Weiss method {method!r}")
    pilot, meas = split_pilot(vals)
    centre = float(pilot.mean())
    meta.update(centre_kind="mean", centre=centre, centre_source="pilot", measured=len(meas))
    return _rows_from_samples(meas, centre, cfg.thresholds, curves, cfg.confidence)


def ergm_certified_norm(n: int, beta1: float, beta2: float) -> float:
    return exact_matrix(ergm_conditional_model(n, beta1, beta2)).norm_1


def _run_ergm(cfg, workers, meta, violations):
    p = cfg.params
    n, b1, b2 = int(p["n"]), float(p["beta1"]), float(p["beta2"])
    if p.get("motif", "triangle") != "triangle":
        raise DomainError("the experiment supports the triangle motif")
    if "norm1" in p:
        norm1, source = float(p["norm1"]), "asserted"
    elif n <= 8:
        norm1, source = ergm_certified_norm(n, b1, b2), "exact_matrix"
    else:
        raise DomainError("give params.norm1 for n > 8")
    per_chain = int(p.get("samples_per_chain", 1))
    m = n * (n - 1) // 2
    thin = cfg.thin if cfg.thin is not None else m

    def draw(rng, k):
        chains = -(-k // per_chain)
        adj = ergm_glauber_chains(n, b1, b2, chains, per_chain, rng, cfg.burn_in, thin)
        return triangle_counts(adj).reshape(-1)[:k].astype(float)

    vals = replicate(cfg.seed, cfg.replicas, draw, workers)
    pilot, meas = split_pilot(vals)
    centre = float(pilot.mean())
    meta.update(centre_kind="mean", centre=centre, centre_source="pilot", measured=len(meas),
                norm1=norm1, norm1_source=source)
    common = dict(n=n, n_S=3, e_S=3, norm1=norm1, mean_N=centre)
    curves = [
        ("SUBGRAPH_UP", "upper", _bound_or_flag(violations, lambda t: bounds.application_values(
            "SUBGRAPH_UP", t, **common)[0])),
        ("SUBGRAPH_LOW", "lower", _bound_or_flag(violations, lambda t: bounds.application_values(
            "SUBGRAPH_LOW", t, **common)[0])),
    ]
    return _rows_from_samples(meas, centre, cfg.thresholds, curves, cfg.confidence)


def _ground_set(p) -> PointSet:
    if "points" in p:
        return PointSet(np.asarray(p["points"], dtype=float))
    rows, cols = p.get("grid", (5, 8))
    return PointSet.grid(int(rows), int(cols))


def _subset_sampler(p, N, n):
    weights = p.get("weights")
    if weights is None:
        return (lambda rng, k: uniform_swr_batch(N, n, k, rng)), float(uniform_swr_inhomogeneity(N, n).rho)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    return (lambda rng, k: weighted_swr_batch(w, n, k, rng)), weighted_swr_rho_bound(w.max(), w.min(), n, N)


def _run_geometric(cfg, workers, meta, violations):
    p = cfg.params
    ground = _ground_set(p)
    N, n = ground.n, int(p["n"])
    sampler, rho = _subset_sampler(p, N, n)
    C = float(p.get("C_cost", 1.0))
    L = CostFunction.with_ratio(C)
    solver = p.get("solver", "auto")
    if cfg.kind == "TSP":
        use_exact = solver == "exact" or (solver == "auto" and n <= EXACT_TSP_MAX)
        tour = exact_tsp if use_exact else heuristic_tsp
        functional = lambda ps: tour(ps, L).cost
        meta["functional"] = "exact_tsp" if use_exact else "heuristic_tsp"
    else:
        functional = steiner_functional
        meta["functional"] = "mst_length"

    def draw(rng, k):
        idx = sampler(rng, k)
        return np.array([functional(ground.subset(row)) for row in idx])

    vals = replicate(cfg.seed, cfg.replicas, draw, workers)
    pilot, meas = split_pilot(vals)
    centre = float(np.median(pilot))
    meta.update(centre_kind="median", centre=centre, centre_source="pilot", measured=len(meas), rho=rho,
                N=N)
    if cfg.kind == "TSP":
        curves = [("TSP", "two_sided", _bound_or_flag(violations, lambda t: bounds.application_values(
            "TSP", t, rho=rho, C_cost=C)[0]))]
        if p.get("weights") is None:
            curves.append(("SWR_TSP", "two_sided", lambda t: bounds.application_values(
                "SWR_TSP", t, C_cost=C)[0]))
    else:
        curves = [("STEINER", "two_sided", _bound_or_flag(violations, lambda t: bounds.application_values(
            "STEINER", t, rho=rho)[0]))]
    return _rows_from_samples(meas, centre, cfg.thresholds, curves, cfg.confidence)


def steiner_functional(ps: PointSet) -> float:
    return mst(ps).total_length


def _run_swr(cfg, workers, meta, violations):
    """Marked-element count of a subset sample; a (1, 0)-* function of the coordinates."""
    p = cfg.params
    N, n = int(p["N"]), int(p["n"])
    marked = int(p.get("marked", N // 2))
    sampler, rho = _subset_sampler(p, N, n)
    vals = replicate(cfg.seed, cfg.replicas,
                     lambda rng, k: (sampler(rng, k) < marked).sum(axis=1).astype(float), workers)
    pilot, meas = split_pilot(vals)
    centre = float(pilot.mean())
    meta.update(centre_kind="mean", centre=centre, centre_source="pilot", measured=len(meas), rho=rho)
    try:
        spec = BoundSpec(1.0, 0.0, centre, rho)
        curves = [("STAR_UPPER", "upper", lambda t: bounds.tail_upper_star(t, spec)),
                  ("LOWER", "lower", lambda t: bounds.tail_lower(t, spec))]
    except DomainError as e:
        violations.append(str(e))
        curves = [("STAR_UPPER", "upper", lambda t: 1.0), ("LOWER", "lower", lambda t: 1.0)]
    return _rows_from_samples(meas, centre, cfg.thresholds, curves, cfg.confidence)


def _run_convex(cfg, workers, meta, violations):
    p = cfg.params
    model = p.get("model", "bits")
    if model == "bits":
        n = int(p["n"])
        radius = int(p.get("radius", 1))
        space = ProductSpace.cube(n).points()
        S = space[space.sum(axis=1) <= radius]
        rate = float(p.get("rate", 1.0 / bounds.CONVEX_DISTANCE_DIVISOR))
        draw = lambda rng, k: rng.integers(0, 2, size=(k, n))
    elif model == "swr":
        N, n = int(p["N"]), int(p["n"])
        space = ordered_sample_space(N, n)
        S = space[(space == int(p.get("element", 0))).any(axis=1)]
        rate = float(p.get("rate", 1.0 / bounds.SWR_CONVEX_DIVISOR))
        draw = lambda rng, k: uniform_swr_batch(N, n, k, rng)
    else:
        raise DomainError(f"unknown convex-distance model {model!r}")
    if p.get("exact", False):
        rep = convex_distance_experiment(space, S, rate, probs=np.full(len(space), 1.0 / len(space)))
    else:
        pts = replicate(cfg.seed, cfg.replicas, draw, workers)
        rep = convex_distance_experiment(pts, S, rate, confidence=cfg.confidence)
    meta.update(centre_kind="none", measured="exact" if rep.exact else cfg.replicas, mu_S=rep.mu_S,
                rate=rate)
    return [ReportRow(rate, "CONVEX", "mgf", rep.lhs, rep.lhs, rep.lhs, rep.ci_low, rep.ci_high,
                      rep.rhs, rep.satisfied)]


def _run_coupling(cfg, workers, meta, violations):
    p = cfg.params
    n, beta, h = int(p.get("n", 10)), float(p.get("beta", 0.5)), float(p.get("h", 0.0))
    norm1 = beta * (1 - 1 / n)
    if norm1 >= 1:
        violations.append(f"|A|_1 = {norm1} >= 1")
    steps = [int(round(t)) for t in cfg.thresholds]
    horizon = max(steps) if steps else 0
    dist = replicate(cfg.seed, cfg.replicas,
                     lambda rng, k: curie_weiss_coupled_runs(n, beta, h, k, horizon, rng), workers)
    meta.update(centre_kind="none", measured=cfg.replicas, norm1=norm1)
    rows = []
    z = 3.0
    for k in steps:
        col = dist[:, k] / n
        mean = float(col.mean())
        se = float(col.std(ddof=1) / math.sqrt(len(col))) if len(col) > 1 else 1.0
        b = float(disagreement_bound(1.0, norm1, n, k))
        lo, hi = max(0.0, mean - z * se), min(1.0, mean + z * se)
        rows.append(ReportRow(float(k), "CONTRACTION", "mean", mean, mean, mean, lo, hi, b, lo <= b))
    return rows


_RUNNERS = {"CW": _run_cw, "ERGM": _run_ergm, "TSP": _run_geometric, "STEINER": _run_geometric,
            "SWR": _run_swr, "CONVEX": _run_convex, "COUPLING": _run_coupling}


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    start = time.perf_counter()
    violations: list = []
    meta = {"kind": cfg.kind, "seed": cfg.seed, "replicas": cfg.replicas, "params": cfg.params}
    rows = _RUNNERS[cfg.kind](cfg, workers, meta, violations)
    meta["hypothesis_violations"] = violations
    if violations:
        warnings.warn("; ".join(violations), HypothesisViolation, stacklevel=2)
    return ExperimentReport(rows, meta, time.perf_counter() - start)
