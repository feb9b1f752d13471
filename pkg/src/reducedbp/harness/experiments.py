"""Named experiments: specs, dispatch, verdicts and reports."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..analytic import AnalyticModel, limit_cdfs
from ..coalescent import link_discrepancy, link_table_csv
from ..errors import NumericalError, ParameterError
from ..limit_process import LimitConfig, sample_marginal
from ..offspring import binary_law, build_heavy_tail, sibuya_pmf
from ..rng import DEFAULT_SEED, stream, substream_seed
from ..simulator import SimConfig
from . import stats
from .runner import collect_survivors, collect_trees, executor

SCHEMA_VERSION = 1

EXPERIMENTS = (
    "theorem1",
    "zubkov_mrca",
    "theorem2_marginals",
    "figure1_trajectories",
    "coalescent_link",
    "oracle_consistency",
)

DEFAULT_X_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))

# per-experiment defaults layered over the ExperimentSpec field defaults
EXPERIMENT_DEFAULTS = {
    "theorem1": dict(beta=(1.0,), t_grid=(15.0, 30.0), ks_max=0.15),
    "zubkov_mrca": dict(beta=(1.0,), t_grid=(10.0, 20.0, 40.0)),
    "theorem2_marginals": dict(beta=(1.0,), t_grid=(15.0,), u_grid=(3.0, 7.5, 12.0)),
    "figure1_trajectories": dict(alpha=(1.0, 0.3, 0.1), beta=(5.0, 1.0, 0.2), trees=200, node_cap=200_000),
    "coalescent_link": dict(alpha=tuple(round(0.1 * i, 1) for i in range(10)), n_max=50),
    "oracle_consistency": dict(beta=(1.0,)),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that determines a report.  Worker count is deliberately absent."""

    experiment: str
    law: str = "heavy_tail"  # heavy_tail | binary
    beta: tuple = (0.2, 1.0, 5.0)
    alpha: tuple = (0.1, 0.3, 1.0)
    t_grid: tuple = (10.0, 15.0, 20.0, 30.0, 40.0)
    x_grid: tuple = DEFAULT_X_GRID
    u_grid: tuple = ()
    s_grid: tuple = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99)
    survivors: int = 2000
    budget: int = 5_000_000
    trees: int = 100_000
    limit_x: float = 0.5
    coupling: tuple = (0.2, 0.6)
    x_final: float = 0.99
    plot_trees: int = 10
    resolution: float = 1e-3
    node_cap: int = 1_000_000
    n_max: int = 50
    ks_max: float = 0.05
    exponent_t: float = 0.0
    q_t_max: float = 100.0
    max_events: int = 100_000_000
    max_population: int = 10_000_000
    block: int = 4096
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ParameterError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.law not in ("heavy_tail", "binary"):
            raise ParameterError(f"law must be 'heavy_tail' or 'binary', got {self.law!r}")
        for name in ("beta", "alpha", "t_grid", "x_grid", "u_grid", "s_grid", "coupling"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        for name in ("beta", "t_grid", "x_grid"):
            if not getattr(self, name):
                raise ParameterError(f"{name} must be nonempty")
        for name in ("survivors", "budget", "trees", "plot_trees", "node_cap", "n_max", "block"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")
        if self.budget == 0 or self.block == 0 or self.node_cap == 0:
            raise ParameterError("budget, block and node_cap must be positive")
        if any(b <= 0 for b in self.beta):
            raise ParameterError("beta values must be positive")
        if any(t <= 0 for t in self.t_grid):
            raise ParameterError("t_grid values must be positive")
        if any(not 0 <= x < 1 for x in self.x_grid):
            raise ParameterError("x_grid values must lie in [0, 1)")

    @classmethod
    def for_experiment(cls, experiment: str, **overrides) -> "ExperimentSpec":
        base = dict(EXPERIMENT_DEFAULTS.get(experiment, {}))
        base.update(overrides)
        return cls(experiment=experiment, **base)

    @classmethod
    def field_names(cls) -> tuple:
        return tuple(f.name for f in fields(cls))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        unknown = set(d) - set(cls.field_names())
        if unknown:
            raise ParameterError(f"unknown spec keys: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass
class Verdict:
    criterion: str
    description: str
    value: float
    threshold: float
    passed: bool
    hard: bool = True


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    statistics: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)  # file name -> CSV text
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures and all(v.passed for v in self.verdicts if v.hard)

    def add(self, criterion, description, value, threshold, passed, hard=True):
        self.verdicts.append(Verdict(criterion, description, _num(value), _num(threshold), bool(passed), hard))

    def to_dict(self) -> dict:
        """Everything except the wall-clock time, which is reported separately."""
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec.to_dict(),
            "seeds": self.seeds,
            "statistics": self.statistics,
            "counts": self.counts,
            "verdicts": [asdict(v) for v in self.verdicts],
            "failures": self.failures,
            "artifacts": sorted(self.artifacts),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def write(self, out_dir) -> Path:
        """Write report.json, timing.json and CSV artifacts; returns the report path."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.spec.experiment}_report.json"
        path.write_text(self.to_json())
        (out / f"{self.spec.experiment}_timing.json").write_text(
            json.dumps({"wall_clock_s": round(self.wall_clock, 3)}) + "\n"
        )
        for name, text in self.artifacts.items():
            (out / name).write_text(text)
        return path


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    return f"{v:g}"


def _law(spec: ExperimentSpec, beta: float):
    return binary_law() if spec.law == "binary" else build_heavy_tail(beta)


def _law_tag(spec: ExperimentSpec, beta: float) -> str:
    return "binary" if spec.law == "binary" else f"beta={_fmt(beta)}"


def _betas(spec: ExperimentSpec):
    # binary runs ignore beta
    return (1.0,) if spec.law == "binary" else spec.beta


def _sim_config(spec: ExperimentSpec, t: float, seed: int) -> SimConfig:
    return SimConfig(horizon=t, max_events=spec.max_events, max_population=spec.max_population, seed=seed)


def _survivors(report, spec, label, law, t, query_us, pool, workers):
    seed = substream_seed(spec.seed, label)
    report.seeds[label] = seed
    sample = collect_survivors(
        law, _sim_config(spec, t, seed), spec.survivors, spec.budget, query_us, workers, spec.block, pool
    )
    report.counts[label] = {
        "attempts": sample.attempts,
        "accepted": sample.accepted,
        "censored": sample.censored,
        "events_mean": sample.events_mean,
    }
    frac = sample.censored / max(sample.attempts, 1)
    report.add(
        "censoring", f"{label}: censored fraction below 0.1%", frac, 1e-3, frac < 1e-3
    )
    if sample.exhausted:
        report.failures.append(
            {
                "label": label,
                "reason": "survival budget exhausted",
                "attempts": sample.attempts,
                "accepted": sample.accepted,
                "target": spec.survivors,
            }
        )
    return sample


def _strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# experiments


def _theorem1(spec, report, pool, workers):
    for beta in spec.beta:
        law = build_heavy_tail(beta)
        model = AnalyticModel(law)
        limit = limit_cdfs(beta)
        ks_vals = []
        for t in spec.t_grid:
            label = f"theorem1/beta={_fmt(beta)}/t={_fmt(t)}"
            sample = _survivors(report, spec, label, law, t, (), pool, workers)
            c = model.c_of_t(t)
            if sample.accepted == 0:
                ks_vals.append(math.nan)
                continue
            y = np.log(sample.z.astype(float)) / c
            ks = stats.ks_distance(y, limit.size_cdf)
            ks_vals.append(ks)
            report.statistics.append(
                {"label": label, "beta": beta, "t": t, "c_t": c, "n": sample.accepted, "ks": ks}
            )
            # exact finite-t check: E[(1 - e^{-x c})^Z | survival] = 1 - exp(-(q(rho(x c) + t) - q(t)))
            qt = model.q_of_t(t)
            zmax = 0.0
            for x in (0.25, 0.5, 1.0, 1.5):
                w = (-np.expm1(-x * c)) ** sample.z.astype(float)
                exact = -math.expm1(-(model.q_of_t(model.rho(x * c) + t) - qt))
                se = float(w.std(ddof=1) / math.sqrt(w.size)) if w.size > 1 else math.inf
                z = (float(w.mean()) - exact) / se if se > 0 else 0.0
                zmax = max(zmax, abs(z))
                report.statistics.append(
                    {"label": label, "x": x, "functional_empirical": float(w.mean()), "functional_exact": exact,
                     "z": z, "limit": float(limit.size_cdf(x))}
                )
            report.add("C6.functional", f"{label}: size functional within 3.5 standard errors of exact", zmax, 3.5,
                       zmax <= 3.5, hard=False)
            vals, f = stats.ecdf(y)
            report.artifacts[f"theorem1_beta{_fmt(beta)}_t{_fmt(t)}_ecdf.csv"] = _csv(
                ["log_size_over_c", "ecdf", "limit_cdf"],
                [(repr(float(v)), repr(float(e)), repr(float(g))) for v, e, g in zip(vals, f, limit.size_cdf(vals))],
            )
        tag = f"beta={_fmt(beta)}"
        if len(ks_vals) > 1:
            report.add(
                "C6.trend",
                f"{tag}: KS of ln Z/c(t) vs 1-exp(-x^(1+beta)) strictly decreasing in t",
                ks_vals[-1] - ks_vals[0],
                0.0,
                _strictly_decreasing(ks_vals),
            )
        report.add("C6.final", f"{tag}: KS at t={_fmt(spec.t_grid[-1])}", ks_vals[-1], spec.ks_max,
                   ks_vals[-1] < spec.ks_max)


def _zubkov(spec, report, pool, workers):
    for beta in _betas(spec):
        law = _law(spec, beta)
        tag = _law_tag(spec, beta)
        cdf = (lambda x: np.asarray(x, dtype=float)) if spec.law == "binary" else limit_cdfs(beta).mrca_cdf
        ks_vals = []
        for t in spec.t_grid:
            label = f"zubkov_mrca/{tag}/t={_fmt(t)}"
            sample = _survivors(report, spec, label, law, t, (), pool, workers)
            if sample.accepted == 0:
                ks_vals.append(math.nan)
                continue
            x = np.clip(sample.tau / t, 0.0, 1.0)
            ks = stats.ks_distance(x, cdf)
            ks_vals.append(ks)
            report.statistics.append({"label": label, "t": t, "n": sample.accepted, "ks": ks})
            vals, f = stats.ecdf(x)
            report.artifacts[f"zubkov_{tag.replace('=', '')}_t{_fmt(t)}_ecdf.csv"] = _csv(
                ["tau_over_t", "ecdf", "limit_cdf"],
                [(repr(float(v)), repr(float(e)), repr(float(g))) for v, e, g in zip(vals, f, cdf(vals))],
            )
        if len(ks_vals) > 1:
            report.add(
                "C5.trend",
                f"{tag}: KS of tau/t vs limit MRCA law strictly decreasing in t",
                ks_vals[-1] - ks_vals[0],
                0.0,
                _strictly_decreasing(ks_vals),
            )
        if spec.law == "binary":
            report.add("C5.binary", f"binary: KS vs uniform at t={_fmt(spec.t_grid[-1])}", ks_vals[-1],
                       spec.ks_max, ks_vals[-1] < spec.ks_max)


def _theorem2(spec, report, pool, workers):
    if spec.survivors > 0:
        for beta in _betas(spec):
            law = _law(spec, beta)
            model = AnalyticModel(law)
            tag = _law_tag(spec, beta)
            expo = 1.0 if spec.law == "binary" else beta / (1.0 + beta)
            for t in spec.t_grid:
                us = tuple(u for u in spec.u_grid if 0 <= u <= t) or tuple(x * t for x in spec.x_grid)
                label = f"theorem2_marginals/{tag}/t={_fmt(t)}"
                sample = _survivors(report, spec, label, law, t, us, pool, workers)
                n = sample.accepted
                if n == 0:
                    continue
                for j, u in enumerate(us):
                    k = int(np.sum(sample.zq[:, j] == 1))
                    try:
                        exact = model.single_ancestor_prob(u, t)
                    except NumericalError as exc:
                        report.failures.append({"label": label, "reason": str(exc)})
                        continue
                    z = stats.binomial_z(k, n, exact)
                    lo, hi = stats.binomial_ci(k, n)
                    limit = (1.0 - u / t) ** expo
                    report.statistics.append(
                        {
                            "label": label,
                            "u": u,
                            "n": n,
                            "ones": k,
                            "empirical": k / n,
                            "ci95": [lo, hi],
                            "exact": exact,
                            "z_exact": z,
                            "limit": limit,
                            "limit_gap": k / n - limit,
                        }
                    )
                    report.add(
                        "C4.exact",
                        f"{tag}, t={_fmt(t)}, u={_fmt(u)}: P(Z(u,t)=1|survival) within 3 sigma of exact",
                        abs(z),
                        3.0,
                        abs(z) <= 3.0,
                    )
    if spec.trees > 0 and spec.law == "heavy_tail":
        x0 = spec.limit_x
        xa, xb = spec.coupling
        xs = np.unique(np.array([x0, xa, xb]))
        for beta in spec.beta:
            cfg = LimitConfig("zero", beta=beta, resolution=spec.resolution, node_cap=spec.node_cap)
            label = f"theorem2_limit/beta={_fmt(beta)}"
            seed = substream_seed(spec.seed, label)
            report.seeds[label] = seed
            block = collect_trees(cfg, seed, spec.trees, xs, workers, spec.block, pool)
            # truncated trees keep their lower-bound values; dropping them would bias downwards
            exact = block.exact(xs)
            report.counts[label] = {
                "trees": spec.trees,
                "truncated": int(block.truncated.sum()),
                "inexact_at_x": [int(v) for v in (~exact).sum(axis=0)],
            }
            expo = cfg.exponent
            col = {float(x): j for j, x in enumerate(xs)}
            # marginal at x0 against the Sibuya law
            j0 = col[float(x0)]
            r0 = block.values[:, j0]
            gamma = (1.0 - x0) ** expo
            chi = stats.discrete_chi_square(r0, lambda k: sibuya_pmf(gamma, k))
            report.statistics.append(
                {"label": label, "x": x0, "n": int(r0.size), "chi2": chi.statistic, "dof": chi.dof, "p": chi.pvalue}
            )
            report.add("C8.sibuya", f"beta={_fmt(beta)}: R({_fmt(x0)}) vs Sibuya({gamma:.4g})", chi.pvalue, 0.01,
                       chi.pvalue > 0.01)
            # conditional single-ancestor probability
            ja, jb = col[float(xa)], col[float(xb)]
            ones_a = block.values[:, ja] == 1
            n_a = int(ones_a.sum())
            k_b = int(np.sum(ones_a & (block.values[:, jb] == 1)))
            p0 = float(limit_cdfs(beta).marginal_one(xa, xb))
            z = stats.binomial_z(k_b, n_a, p0)
            report.statistics.append(
                {"label": label, "x": xa, "y": xb, "n": n_a, "ones": k_b, "empirical": k_b / n_a, "exact": p0,
                 "z": z}
            )
            report.add("C8.coupling", f"beta={_fmt(beta)}: P(R({_fmt(xb)})=1|R({_fmt(xa)})=1) within 3 sigma",
                       abs(z), 3.0, abs(z) <= 3.0)
            # self-consistency with the direct marginal sampler
            direct = sample_marginal(cfg, x0, stream(substream_seed(seed, "direct"), 0), size=r0.size)
            two = stats.chi_square_two_sample(r0, direct)
            report.statistics.append({"label": label, "x": x0, "two_sample_chi2": two.statistic, "p": two.pvalue})
            report.add("C8.self", f"beta={_fmt(beta)}: tree marginal vs direct sampler at x={_fmt(x0)}",
                       two.pvalue, 0.01, two.pvalue > 0.01)


def _figure1_grid(x_final: float) -> np.ndarray:
    # evenly spaced in log(1 - x), ending at x_final
    top = -math.log10(1.0 - x_final)
    return np.concatenate(([0.0], 1.0 - 10.0 ** (-np.linspace(top / 40, top, 40))))


def _figure1(spec, report, pool, workers):
    xs = _figure1_grid(spec.x_final)
    medians = {}
    blocks = [("alpha", a) for a in spec.alpha] + [("zero", b) for b in spec.beta]
    for mode, p in blocks:
        kw = {"alpha": p} if mode == "alpha" else {"beta": p}
        cfg = LimitConfig(mode, resolution=spec.resolution, node_cap=spec.node_cap, **kw)
        name = f"{'alpha' if mode == 'alpha' else 'beta'}={_fmt(p)}"
        label = f"figure1/{name}"
        seed = substream_seed(spec.seed, label)
        report.seeds[label] = seed
        block = collect_trees(cfg, seed, spec.trees, xs, workers, spec.block, pool)
        final = np.log(block.values[:, -1].astype(float))
        med = float(np.median(final))
        medians[name] = med
        exact = block.exact(xs)
        report.counts[label] = {"trees": spec.trees, "truncated": int(block.truncated.sum())}
        report.statistics.append(
            {
                "label": label,
                "x": spec.x_final,
                "median_log_R": med,
                "truncated_fraction": float(block.truncated.mean()),
                "exact_fraction_at_x": float(exact[:, -1].mean()),
            }
        )
        rows = []
        for i in range(min(spec.plot_trees, spec.trees)):
            for j, x in enumerate(xs):
                rows.append((i, repr(float(x)), int(block.values[i, j]), int(exact[i, j])))
        report.artifacts[f"figure1_{name.replace('=', '')}.csv"] = _csv(["replicate_id", "x", "R", "exact"], rows)
    a = [medians[f"alpha={_fmt(p)}"] for p in sorted(spec.alpha, reverse=True)]
    if len(a) > 1:
        report.add("C10.alpha", "median log R(x) nondecreasing as alpha decreases", a[-1] - a[0], 0.0,
                   all(y >= x for x, y in zip(a, a[1:])))
    names = {b: f"beta={_fmt(b)}" for b in spec.beta}
    if 1.0 in names and len(names) > 1:
        peak = medians[names[1.0]]
        others = [medians[n] for b, n in names.items() if b != 1.0]
        report.add("C10.beta_peak", "median log R(x) at beta=1 >= every other beta block",
                   peak - max(others), 0.0, all(peak >= o for o in others))
    bs = [medians[names[b]] for b in sorted(spec.beta)]
    if len(bs) > 1:
        report.add("figure1.beta_monotone", "median log R(x) nondecreasing in beta (closed-form ordering)",
                   bs[-1] - bs[0], 0.0, all(y >= x for x, y in zip(bs, bs[1:])), hard=False)


def _coalescent(spec, report, pool, workers):
    worst = 0.0
    for a in spec.alpha:
        if not 0.0 <= a < 1.0:
            report.failures.append({"label": f"coalescent/alpha={_fmt(a)}", "reason": "alpha must lie in [0, 1)"})
            continue
        d = float(link_discrepancy(a, spec.n_max).max())
        worst = max(worst, d)
        report.statistics.append({"label": f"coalescent/alpha={_fmt(a)}", "n_max": spec.n_max, "max_discrepancy": d})
    report.add("C9.link", f"max |P(Y_n=k) - P(nu=k|nu<=n)| over n<={spec.n_max}", worst, 1e-12, worst < 1e-12)
    report.artifacts["coalescent_link.csv"] = link_table_csv([a for a in spec.alpha if 0 <= a < 1], spec.n_max)


def _oracle(spec, report, pool, workers):
    oracle_t = spec.t_grid
    for beta in _betas(spec):
        law = _law(spec, beta)
        tag = _law_tag(spec, beta)
        model = AnalyticModel(law)
        raz = f_q = 0.0
        for s in spec.s_grid:
            pi_s = model.pi_eval(s)
            for t in oracle_t:
                f = model.solve_F(s, t)
                raz = max(raz, abs(model.pi_eval(f) - pi_s - t))
                f_q = max(f_q, abs((1.0 - f) - model.Q(pi_s + t)))
        report.statistics.append({"label": f"oracle/{tag}", "raz_residual": raz, "f_q_residual": f_q})
        report.add("C1.raz", f"{tag}: max |pi(F(s,t)) - pi(s) - t|", raz, 1e-6, raz < 1e-6)
        report.add("C1.f_q", f"{tag}: max |1 - F(s,t) - Q(pi(s)+t)|", f_q, 1e-6, f_q < 1e-6)
        if spec.law == "binary":
            ts = np.linspace(0.0, spec.q_t_max, 201)
            err = max(abs(model.Q(t) - 2.0 / (t + 2.0)) for t in ts)
            report.statistics.append({"label": "oracle/binary_Q", "t_max": spec.q_t_max, "max_error": err})
            report.add("C2.binary_q", f"binary: max |Q(t) - 2/(t+2)| for t<={_fmt(spec.q_t_max)}", err, 1e-6,
                       err < 1e-6)
        elif spec.exponent_t > 0:
            t = spec.exponent_t
            ec = (math.log(model.c_of_t(2 * t)) - math.log(model.c_of_t(t))) / math.log(2.0)
            eq = (math.log(model.q_of_t(2 * t)) - math.log(model.q_of_t(t))) / math.log(2.0)
            tc, tq = beta / (1.0 + beta) ** 2, 1.0 / (1.0 + beta)
            report.statistics.append(
                {"label": f"oracle/{tag}/exponents", "t": t, "c_exponent": ec, "c_target": tc, "q_exponent": eq,
                 "q_target": tq}
            )
            report.add("C7.c", f"{tag}: local exponent of c(t) at t={_fmt(t)} within 10%", abs(ec / tc - 1), 0.1,
                       abs(ec / tc - 1) < 0.1)
            report.add("C7.q", f"{tag}: local exponent of q(t) at t={_fmt(t)} within 10%", abs(eq / tq - 1), 0.1,
                       abs(eq / tq - 1) < 0.1)


_DISPATCH = {
    "theorem1": _theorem1,
    "zubkov_mrca": _zubkov,
    "theorem2_marginals": _theorem2,
    "figure1_trajectories": _figure1,
    "coalescent_link": _coalescent,
    "oracle_consistency": _oracle,
}


def run(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Run one experiment.  The report does not depend on ``workers``."""
    report = ExperimentReport(spec=spec)
    report.seeds["master"] = spec.seed
    start = time.perf_counter()
    with executor(workers) as pool:
        _DISPATCH[spec.experiment](spec, report, pool, workers)
    report.wall_clock = time.perf_counter() - start
    return report


def rerun(report_dict: dict, workers: int = 1) -> ExperimentReport:
    """Re-run the spec echoed in a report."""
    return run(ExperimentSpec.from_dict(report_dict["spec"]), workers)


__all__ = [
    "EXPERIMENTS",
    "ExperimentReport",
    "ExperimentSpec",
    "Verdict",
    "rerun",
    "run",
]
