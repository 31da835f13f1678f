"""End-to-end pipeline: IC -> forward solve -> library -> preconditioning ->
sparse regression sweep -> BIC selection -> accuracy metrics.

The default setting is FoBa with spline-optimized initial conditions and
without the puffer transformation.  The test simulation used for BIC
scoring shares the training run's grid and time step (the identified
equation depends on both), but starts from an independently optimized
initial condition with fewer spline knots.
"""

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import oracle, regress, solvers
from .grid import Grid1D
from .library import LibrarySpec, build_library, describe_term
from .precondition import library_rms_vif, puffer_transform, scale_columns
from .selection import bic_score, optimal_choice, select_best
from .splines import PeriodicSpline, SwarmConfig, gauss_ic, optimize_ic

ALGORITHMS = ("foba", "stridge", "lasso", "sr3")
IC_MODES = ("spline", "gauss", "provided")


@dataclass(frozen=True)
class CaseInfo:
    scheme: str
    oracle_case: str
    default_nx: int
    default_nt: int
    default_cfl: float
    default_library: LibrarySpec
    ic_library: LibrarySpec | None = None  # IC optimization target, if different
    # Lower bound of the relative FoBa stopping grid.  The smallest gains
    # worth keeping differ by case: the highest-order advection term only
    # lowers the training RSS by ~1e-18 relative, while thresholds much
    # below 1e-16 let FoBa absorb next-order truncation structure into
    # spurious terms that the BIC then prefers on the test set.
    epsilon_floor: float = 1e-16


ADVECTION_SMALL_SPEC = LibrarySpec(
    max_single_derivative_order=6, max_cumulative_product_order=0,
    max_u_power=6, pad_t=6,
)
ADVECTION_LARGE_SPEC = LibrarySpec(
    max_single_derivative_order=6, max_cumulative_product_order=6,
    max_u_power=6, pad_t=6,
)

CASES = {
    # regression on the large library; the IC is optimized against the small one
    "advection": CaseInfo(
        scheme=solvers.FTBS,
        oracle_case=oracle.ADVECTION_FTBS,
        default_nx=300,
        default_nt=17,
        default_cfl=0.01,
        default_library=ADVECTION_LARGE_SPEC,
        ic_library=ADVECTION_SMALL_SPEC,
        epsilon_floor=1e-20,
    ),
    "burgers": CaseInfo(
        scheme=solvers.MACCORMACK,
        oracle_case=oracle.BURGERS_MACCORMACK,
        default_nx=10000,
        default_nt=17,
        default_cfl=0.5,
        default_library=LibrarySpec(
            max_single_derivative_order=3, max_cumulative_product_order=3,
            max_u_power=3, pad_t=6,
        ),
    ),
    "kdv": CaseInfo(
        scheme=solvers.ZABUSKY_KRUSKAL,
        oracle_case=oracle.KDV_ZABUSKY_KRUSKAL,
        default_nx=100,
        default_nt=19,
        default_cfl=1e-6,
        default_library=LibrarySpec(
            max_single_derivative_order=7, max_cumulative_product_order=3,
            max_u_power=3, include_time_derivatives=(2, 3), pad_t=7,
        ),
    ),
}


def default_grids(epsilon_floor: float = 1e-16):
    return {
        "lambda": list(np.logspace(-10, 0, 30)),
        "tol": list(np.logspace(-12, 0, 30)),
        "gamma": [1e-4, 1e-2, 1.0, 1e2],
        "epsilon_rel": list(np.logspace(math.log10(epsilon_floor), -2, 40)),
    }


@dataclass
class PipelineConfig:
    case: str
    nx: int | None = None
    nt: int | None = None
    cfl: float | None = None
    a: float = 1.0
    library: LibrarySpec | None = None
    ic_library: LibrarySpec | None = None
    ic_mode: str = "spline"
    provided_u0: np.ndarray | None = None
    ic_artifact: dict | None = None  # serialized PeriodicSpline (training IC)
    test_ic_artifact: dict | None = None
    use_puffer: bool = False
    algorithm: str = "foba"
    grids: dict | None = None
    n_eff: int | None = None
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    train_seed: int = 0
    test_seed: int = 1
    train_knots: int = 15
    test_knots: int = 11
    spline_degree: int = 8
    order_sequence: tuple = ()

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {list(CASES)}")
        info = CASES[self.case]
        if self.nx is None:
            self.nx = info.default_nx
        if self.nt is None:
            self.nt = info.default_nt
        if self.cfl is None:
            self.cfl = info.default_cfl
        if self.library is None:
            self.library = info.default_library
        if self.ic_library is None:
            self.ic_library = info.ic_library or self.library
        if self.grids is None:
            self.grids = default_grids(info.epsilon_floor)
        if self.ic_mode not in IC_MODES:
            raise ValueError(f"unknown ic_mode {self.ic_mode!r}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        self.order_sequence = tuple(self.order_sequence)

    @property
    def info(self) -> CaseInfo:
        return CASES[self.case]

    def effective_n_eff(self) -> int:
        return self.n_eff if self.n_eff is not None else self.nx

    def provenance(self) -> dict:
        data = {
            "case": self.case, "nx": self.nx, "nt": self.nt, "cfl": self.cfl,
            "a": self.a, "library": asdict(self.library),
            "ic_library": asdict(self.ic_library),
            "ic_mode": self.ic_mode, "use_puffer": self.use_puffer,
            "algorithm": self.algorithm,
            "grids": {k: list(map(float, v)) for k, v in self.grids.items()},
            "n_eff": self.effective_n_eff(), "swarm": asdict(self.swarm),
            "train_seed": self.train_seed, "test_seed": self.test_seed,
            "train_knots": self.train_knots, "test_knots": self.test_knots,
            "spline_degree": self.spline_degree,
            "order_sequence": list(self.order_sequence),
        }
        return data

    def config_hash(self) -> str:
        blob = json.dumps(self.provenance(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class PreparedICs:
    """Resolution-independent initial conditions for train and test runs."""

    train: object  # callable x -> u0
    test: object
    train_trace: list = field(default_factory=list)
    test_trace: list = field(default_factory=list)
    train_spline: PeriodicSpline | None = None
    test_spline: PeriodicSpline | None = None


def prepare_ics(config: PipelineConfig) -> PreparedICs:
    """Resolve train/test initial conditions, optimizing splines if needed."""
    info = config.info
    train_trace, test_trace = [], []
    train_spline = test_spline = None

    if config.ic_mode == "provided":
        if config.provided_u0 is None:
            raise ValueError("ic_mode 'provided' requires provided_u0")
        u0 = np.asarray(config.provided_u0, dtype=float)

        def train_fn(x, _u0=u0):
            if len(x) != len(_u0):
                raise ValueError("provided IC does not match grid resolution")
            return _u0

    elif config.ic_mode == "gauss":
        train_fn = gauss_ic
    else:
        if config.ic_artifact is not None:
            train_spline = PeriodicSpline.from_artifact(config.ic_artifact)
        else:
            swarm = SwarmConfig(**{**asdict(config.swarm), "seed": config.train_seed})
            train_spline, _, train_trace = optimize_ic(
                info.scheme, config.nx, config.nt, config.cfl,
                config.ic_library, swarm, knots=config.train_knots,
                degree=config.spline_degree, a=config.a,
            )
        train_fn = train_spline

    # The test IC is always a spline with fewer knots and an independent seed.
    if config.test_ic_artifact is not None:
        test_spline = PeriodicSpline.from_artifact(config.test_ic_artifact)
    else:
        swarm = SwarmConfig(**{**asdict(config.swarm), "seed": config.test_seed})
        test_spline, _, test_trace = optimize_ic(
            info.scheme, config.nx, config.nt, config.cfl,
            config.ic_library, swarm, knots=config.test_knots,
            degree=config.spline_degree, a=config.a,
        )
    return PreparedICs(
        train=train_fn, test=test_spline,
        train_trace=list(train_trace), test_trace=list(test_trace),
        train_spline=train_spline, test_spline=test_spline,
    )


def sweep_models(system, algorithm, grids):
    """Run the chosen algorithm's hyperparameter sweep on a system."""
    theta, target = system.theta, system.target
    if algorithm == "foba":
        eps_grid = np.asarray(grids["epsilon_rel"]) * float(target @ target)
        return regress.foba_sweep(theta, target, eps_grid)
    if algorithm == "stridge":
        return regress.stridge_sweep(theta, target, grids["lambda"], grids["tol"])
    if algorithm == "lasso":
        return regress.lasso_sweep(theta, target, grids["lambda"])
    if algorithm == "sr3":
        return regress.sr3_sweep(theta, target, grids["lambda"], grids["gamma"])
    raise ValueError(f"unknown algorithm {algorithm!r}")


@dataclass
class Candidate:
    model: regress.SparseModel  # OLS refit on the scaled (never puffered) system
    physical: np.ndarray  # unscaled coefficients
    score: object = None


@dataclass
class CoreResult:
    config: PipelineConfig
    train_field: object
    test_field: object
    train_library: object
    test_library: object
    scaled: object
    sweep: object
    candidates: list
    selected: Candidate
    optimal: Candidate | None
    truth: oracle.AnalyticMDE
    rms_vif_train: float
    timings: dict

    @property
    def terms(self):
        return self.train_library.terms


def run_core(config: PipelineConfig, ics: PreparedICs, nx=None, nt=None) -> CoreResult:
    """Single pipeline execution at a given resolution (default config.nx)."""
    info = config.info
    nx = config.nx if nx is None else nx
    nt = config.nt if nt is None else nt
    timings = {}
    t0 = time.perf_counter()

    x = np.arange(nx) / nx
    u0_train = np.asarray(ics.train(x), dtype=float)
    u0_test = np.asarray(ics.test(x), dtype=float)
    dt = solvers.dt_from_cfl(info.scheme, config.cfl, 1.0 / nx, u0=u0_train, a=config.a)
    grid = Grid1D(nx=nx, nt=nt, dt=dt)
    train_field = solvers.run_simulation(info.scheme, u0_train, grid, a=config.a)
    # same grid and dt: the identified equation depends on (dx, dt)
    test_field = solvers.run_simulation(info.scheme, u0_test, grid, a=config.a)
    timings["simulate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    train_library = build_library(train_field, config.library)
    test_library = build_library(test_field, config.library)
    timings["library"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    scaled = scale_columns(train_library)
    system = puffer_transform(scaled) if config.use_puffer else scaled
    rms_vif_train = library_rms_vif(train_library)
    timings["precondition"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sweep = sweep_models(system, config.algorithm, config.grids)
    timings["regression"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    # BIC needs coefficients refit without the puffer transformation
    supports = sorted({m.support for m in sweep.models})
    n_eff = config.effective_n_eff()
    candidates = []
    for support in supports:
        refit = regress.refit_on_support(scaled.theta, scaled.target, support)
        physical = scaled.unscale(refit.coefficients)
        cand = Candidate(model=refit, physical=physical)
        cand.score = bic_score(refit, test_library, n_eff,
                               physical_coefficients=physical)
        candidates.append(cand)
    best_score = select_best([c.score for c in candidates])
    selected = next(c for c in candidates if c.score is best_score)
    timings["selection"] = time.perf_counter() - t0

    truth = oracle.analytic_coefficients(
        info.oracle_case, grid.dx, grid.h, a=config.a
    )
    opt_model, _ = optimal_choice(
        [c.model for c in candidates], truth, train_library.terms
    )
    optimal = None
    if opt_model is not None:
        optimal = next(c for c in candidates if c.model is opt_model)

    return CoreResult(
        config=config, train_field=train_field, test_field=test_field,
        train_library=train_library, test_library=test_library,
        scaled=scaled, sweep=sweep, candidates=candidates,
        selected=selected, optimal=optimal, truth=truth,
        rms_vif_train=rms_vif_train, timings=timings,
    )


def _coefficient_table(result: CoreResult, orders=None):
    """Per-term rows of the selected model: analytic vs predicted."""
    rows = []
    terms = result.terms
    cand = result.selected
    for idx in cand.model.support:
        term = terms[idx]
        name = describe_term(term)
        analytic = result.truth.coefficients.get(term)
        predicted = float(cand.physical[idx])
        row = {
            "term": name,
            "analytic": analytic,
            "predicted": predicted,
            "abs_error": abs(predicted - analytic) if analytic is not None else None,
            "rel_error": (
                abs(predicted - analytic) / abs(analytic)
                if analytic not in (None, 0) else None
            ),
            "correct": analytic is not None,
            "empirical_order": (orders or {}).get(name),
        }
        rows.append(row)
    return rows


def empirical_orders(config: PipelineConfig, ics: PreparedICs, nx_sequence):
    """Recovered-coefficient orders across a resolution sweep.

    The optimized initial conditions are reused across resolutions (the
    spline defines a grid-independent function).  Orders are computed for
    every term selected at all resolutions; terms with excluded pairs or
    missing entries map to NaN.
    """
    per_nx = {}
    for nx in nx_sequence:
        result = run_core(config, ics, nx=nx)
        coeffs = {}
        for idx in result.selected.model.support:
            coeffs[describe_term(result.terms[idx])] = float(
                result.selected.physical[idx]
            )
        per_nx[nx] = coeffs
    names = sorted(set().union(*per_nx.values()))
    orders = {}
    for name in names:
        series = [
            (1.0 / nx, per_nx[nx][name]) for nx in nx_sequence if name in per_nx[nx]
        ]
        if len(series) < 2:
            orders[name] = math.nan
            continue
        try:
            orders[name] = oracle.empirical_order(series)
        except ValueError:
            orders[name] = math.nan
    return orders, per_nx


@dataclass
class ExperimentReport:
    config: dict
    config_hash: str
    case: str
    dx: float
    dt: float
    h: float
    cfl: float
    rms_vif_train: float
    selected_terms: list  # coefficient table rows
    selected_metrics: oracle.MetricRecord
    selected_bic: float
    optimal_terms: list | None
    optimal_metrics: oracle.MetricRecord | None
    bic_matches_optimal: bool
    models: list  # per-candidate summary rows
    pso_traces: dict
    timings: dict

    def to_dict(self):
        data = asdict(self)
        return data


def run_site(config: PipelineConfig, ics: PreparedICs | None = None) -> ExperimentReport:
    """Full pipeline run producing the tabular experiment report."""
    if ics is None:
        ics = prepare_ics(config)
    result = run_core(config, ics)
    terms = result.terms

    orders = None
    if config.order_sequence:
        orders, _ = empirical_orders(config, ics, config.order_sequence)

    sel = result.selected
    sel_metrics = oracle.mae_mre(sel.model, result.truth, terms, sel.physical)
    opt = result.optimal
    opt_metrics = (
        oracle.mae_mre(opt.model, result.truth, terms, opt.physical)
        if opt is not None else None
    )

    model_rows = []
    for cand in result.candidates:
        correct, incorrect = oracle.classify_terms(cand.model, result.truth, terms)
        model_rows.append({
            "support": [describe_term(terms[i]) for i in cand.model.support],
            "k": cand.model.k,
            "bic": cand.score.bic,
            "test_residual_sq": cand.score.test_residual_sq,
            "train_residual": cand.model.residual_norm,
            "n_correct": len(correct),
            "n_incorrect": len(incorrect),
            "selected": cand is sel,
        })

    grid = result.train_field.grid
    return ExperimentReport(
        config=config.provenance(),
        config_hash=config.config_hash(),
        case=config.case,
        dx=grid.dx, dt=grid.dt, h=grid.h, cfl=result.train_field.cfl,
        rms_vif_train=result.rms_vif_train,
        selected_terms=_coefficient_table(result, orders),
        selected_metrics=sel_metrics,
        selected_bic=sel.score.bic,
        optimal_terms=(
            _coefficient_table_for(result, opt, orders) if opt is not None else None
        ),
        optimal_metrics=opt_metrics,
        bic_matches_optimal=(
            opt is not None and opt.model.support == sel.model.support
        ),
        models=model_rows,
        pso_traces={"train": ics.train_trace, "test": ics.test_trace},
        timings=result.timings,
    )


def _coefficient_table_for(result: CoreResult, cand: Candidate, orders=None):
    saved = result.selected
    result.selected = cand
    try:
        return _coefficient_table(result, orders)
    finally:
        result.selected = saved


def _train_ic(config: PipelineConfig):
    """Training IC alone (no test spline optimization), for comparisons."""
    if config.ic_mode == "provided":
        if config.provided_u0 is None:
            raise ValueError("ic_mode 'provided' requires provided_u0")
        u0 = np.asarray(config.provided_u0, dtype=float)

        def fn(x, _u0=u0):
            if len(x) != len(_u0):
                raise ValueError("provided IC does not match grid resolution")
            return _u0

        return fn
    if config.ic_mode == "gauss":
        return gauss_ic
    if config.ic_artifact is not None:
        return PeriodicSpline.from_artifact(config.ic_artifact)
    swarm = SwarmConfig(**{**asdict(config.swarm), "seed": config.train_seed})
    spline, _, _ = optimize_ic(
        config.info.scheme, config.nx, config.nt, config.cfl,
        config.ic_library, swarm, knots=config.train_knots,
        degree=config.spline_degree, a=config.a,
    )
    return spline


def algorithm_comparison(
    config: PipelineConfig,
    algorithms=ALGORITHMS,
    ic_modes=("spline", "gauss"),
    puffer_modes=(True, False),
):
    """MRE vs term count for every model of every (algorithm, setup) sweep.

    All algorithms within one setup share the same simulation data.
    Models containing incorrect terms carry valid=False and NaN MRE.
    """
    records = []
    info = config.info
    for ic_mode in ic_modes:
        cfg = clone_config(config, ic_mode=ic_mode)
        x = np.arange(cfg.nx) / cfg.nx
        u0 = np.asarray(_train_ic(cfg)(x), dtype=float)
        dt = solvers.dt_from_cfl(info.scheme, cfg.cfl, 1.0 / cfg.nx, u0=u0, a=cfg.a)
        grid = Grid1D(nx=cfg.nx, nt=cfg.nt, dt=dt)
        fld = solvers.run_simulation(info.scheme, u0, grid, a=cfg.a)
        library = build_library(fld, cfg.library)
        scaled = scale_columns(library)
        truth = oracle.analytic_coefficients(
            info.oracle_case, grid.dx, grid.h, a=cfg.a
        )
        for use_puffer in puffer_modes:
            system = puffer_transform(scaled) if use_puffer else scaled
            for algorithm in algorithms:
                sweep = sweep_models(system, algorithm, cfg.grids)
                for model in sweep.models:
                    physical = system.unscale(model.coefficients)
                    metrics = oracle.mae_mre(model, truth, library.terms, physical)
                    records.append({
                        "case": cfg.case, "ic_mode": ic_mode,
                        "puffer": use_puffer, "algorithm": algorithm,
                        "refit_ols": model.refit_ols,
                        "term_count": model.k,
                        "n_correct": metrics.n_correct,
                        "n_incorrect": metrics.n_incorrect,
                        "valid": metrics.valid,
                        "mre": metrics.mre, "mae": metrics.mae,
                    })
    return records


def resolution_study(
    config: PipelineConfig, nx_list, nt_choices=None, ics: PreparedICs | None = None
):
    """BIC-selected vs optimal-choice models across spatial resolutions.

    Initial conditions are optimized once at the base resolution and
    reused; unstable resolutions are recorded as failures.  `nt_choices`
    runs the whole nx sweep for several time-level counts (default: the
    config's nt).
    """
    if ics is None:
        ics = prepare_ics(config)
    records = []
    for nt in (nt_choices or [config.nt]):
        for nx in nx_list:
            records.append(_resolution_record(config, ics, nx, nt))
    return records


def _resolution_record(config, ics, nx, nt):
    row = {"nx": nx, "nt": nt, "failed": False, "error": ""}
    try:
        result = run_core(config, ics, nx=nx, nt=nt)
    except Exception as exc:  # blow-up or rank failure at extreme grids
        row.update({"failed": True, "error": str(exc)})
        return row
    terms = result.terms
    sel = result.selected
    sel_c, sel_i = oracle.classify_terms(sel.model, result.truth, terms)
    row.update({
        "bic_k": sel.model.k,
        "bic_n_correct": len(sel_c),
        "bic_n_incorrect": len(sel_i),
    })
    opt = result.optimal
    if opt is not None:
        opt_metrics = oracle.mae_mre(opt.model, result.truth, terms, opt.physical)
        row.update({
            "optimal_k": opt.model.k,
            "optimal_mre": opt_metrics.mre,
            "optimal_mae": opt_metrics.mae,
            "bic_matches_optimal": sel.model.support == opt.model.support,
        })
    else:
        row.update({
            "optimal_k": 0, "optimal_mre": math.nan,
            "optimal_mae": math.nan, "bic_matches_optimal": False,
        })
    return row


def clone_config(config: PipelineConfig, **overrides) -> PipelineConfig:
    fields = {
        "case": config.case, "nx": config.nx, "nt": config.nt, "cfl": config.cfl,
        "a": config.a, "library": config.library,
        "ic_library": config.ic_library, "ic_mode": config.ic_mode,
        "provided_u0": config.provided_u0, "ic_artifact": config.ic_artifact,
        "test_ic_artifact": config.test_ic_artifact,
        "use_puffer": config.use_puffer, "algorithm": config.algorithm,
        "grids": config.grids, "n_eff": config.n_eff, "swarm": config.swarm,
        "train_seed": config.train_seed, "test_seed": config.test_seed,
        "train_knots": config.train_knots, "test_knots": config.test_knots,
        "spline_degree": config.spline_degree,
        "order_sequence": config.order_sequence,
    }
    fields.update(overrides)
    return PipelineConfig(**fields)
