"""Subcommand implementations and the full replication run.

Every command returns a :class:`RunReport`.  Single commands check the claimed
bound itself (a violation at or above the claimed onset fails); ``replicate``
checks the reproduced values exactly as stated.
"""
from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass, field

from . import analytic, chebyshev, gaps, pinteger, ramanujan
from .analytic import NAMED_CONSTANTS, BoundSpec
from .checkpoints import CheckpointStore
from .declarations import Declarations, load_declarations
from .report import CheckResult, RunReport, skipped
from .sieve import DEFAULT_SEGMENT_SIZE, MAX_LIMIT, PrimeCheckpoint, scan, small_primes, validate_segment_size

THETA_ONSET = 149
PSI_ONSET = 23
PI_LI_ONSET = 229
PI_LI_SCAN_LIMIT = 10**6
PI2_X0 = 10**8
PI2_CONSTANT_CLAIM = 1.151
GAP_CLAIMS = {30_600_000: 210, 5_700_000: 159, 4_000_000: 148}
SHORT_INTERVAL_C = 111.0
SHORT_INTERVAL_LIMIT = 3_800_000
SHORT_INTERVAL_ONSET = 2_898_239
CASCADE_ONSETS = (30_500_000, 5_630_000, 3_800_000)
P_INTEGERS = (2, 4, 6, 12, 18, 30)
POMERANCE_LOG10K, POMERANCE_LMIN, POMERANCE_LMAX = 1805, 273, 3800
RAMANUJAN_LIMIT = 10**7
RAMANUJAN_ORACLE_LIMIT = 10**5
EPS0_FLOOR = 0.075
R_INTERVAL = (6.4543, 6.4550)
TABLE_ROW_BOUND = 0.0042
TABLE_ROW_RANGE = (0.0040, 0.0042)
CHAIN_CLAIMS = ((25, 45, 0.003), (45, 1162, 0.006))

# constant name -> descriptive anchor for the constants table
CONSTANT_ANCHORS = {
    "R0": "zero-free-constant-original",
    "R": "zero-free-constant-R",
    "B": "zero-free-shift-B",
    "R_kadiri": "zero-free-constant-kadiri",
    "H": "rh-verification-height",
    "theorem2_coefficient": "pi-li-bound-coefficient",
    "dusart_coefficient": "pi-li-dusart-coefficient",
    "dusart_R": "pi-li-dusart-exponent",
    "lemma1_coefficient": "theta-log-square-coefficient",
    "pi2_constant": "pi-li-eps0-constant",
    "interval_coefficient": "prime-interval-coefficient",
    "ford_coefficient": "prime-interval-ford-coefficient",
    "ford_rate": "prime-interval-ford-rate",
    "pomerance_f_coefficient": "pomerance-f-coefficient",
    "h_coefficient": "pomerance-h-function",
    "h_offset": "pomerance-h-function",
    "delta_ramare_saouter": "short-interval-fixed-delta",
    "short_interval_c": "short-interval-threshold",
    "alpha": "smoothing-exponent",
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    checkpoint_dir: str | None = None
    segment_size: int = DEFAULT_SEGMENT_SIZE
    workers: int = 1
    report_format: str = "text"
    declarations: str | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        validate_segment_size(self.segment_size)
        if self.report_format not in ("text", "structured"):
            raise ValueError(f"unknown report format {self.report_format!r}")

    def scan_kwargs(self) -> dict:
        return {"segment_size": self.segment_size, "workers": self.workers}

    def store(self) -> CheckpointStore | None:
        return CheckpointStore.in_dir(self.checkpoint_dir) if self.checkpoint_dir else None

    def echo(self) -> dict:
        return {
            "command": self.command,
            "options": dict(sorted(self.options.items())),
            "segment_size": self.segment_size,
            "workers": self.workers,
        }

    def load_declarations(self) -> Declarations:
        return load_declarations(self.declarations)


def _report(cfg: RunConfig) -> RunReport:
    return RunReport(cfg.command, cfg.echo())


def _violation_rows(rep: chebyshev.VerificationReport, cap: int = 20) -> list[dict]:
    return [
        {"x": v.x, "side": v.side, "left_limit": v.left_limit, "value": v.value, "bound": v.bound, "clear_from": v.clear_from}
        for v in rep.violations[-cap:]
    ]


# --- single commands --------------------------------------------------------------


def cmd_constants(cfg: RunConfig) -> RunReport:
    rep = _report(cfg)
    rep.data["constants"] = [
        {"name": name, "value": value, "anchor": CONSTANT_ANCHORS.get(name, name), "description": desc}
        for name, value, desc in NAMED_CONSTANTS
    ]
    R = analytic.solve_zero_free_R()
    rep.add(CheckResult("zero-free-R", "zero-free-constant-R", analytic.R_DEFAULT, R, None, R <= analytic.R_DEFAULT,
                        note="solved R must not exceed the constant used"))
    return rep


def cmd_scan(cfg: RunConfig) -> RunReport:
    limit = cfg.options["limit"]
    rep = _report(cfg)
    store = cfg.store()
    cp = scan(limit, store=store, **cfg.scan_kwargs())
    rep.data.update(x=cp.x, pi_x=cp.pi_x, theta_x=cp.theta_x, psi_x=cp.psi_x, theta_err=cp.theta_err,
                    max_gap=cp.max_gap, last_prime=cp.last_prime, checkpoints=len(store) if store else 0)
    return rep


def _bound_spec(kind: str, coefficient: float | None, R: float, onset: float | None) -> BoundSpec:
    if kind == "epsilon0":
        return BoundSpec.epsilon0(R)
    if kind == "lemma1":
        return BoundSpec.lemma1(coefficient or analytic.LEMMA1_COEFF)
    if kind == "ratio":
        if coefficient is None:
            raise ValueError("--bound ratio needs --coefficient")
        return BoundSpec.constant_ratio(coefficient, onset or 2.0)
    raise ValueError(f"unknown bound {kind!r}")


def cmd_verify(cfg: RunConfig) -> RunReport:
    o = cfg.options
    which, limit = o["target"], o["limit"]
    rep = _report(cfg)
    if which == "theorem2":
        res = chebyshev.theorem2_scan(limit, BoundSpec.theorem2(o.get("R") or analytic.R_DEFAULT), **cfg.scan_kwargs())
        rep.data.update(res.details)
        rep.data["worst_margin"] = res.worst_margin
        onset = o.get("claimed_from") or PI_LI_ONSET
        if limit >= onset:
            rep.add(CheckResult("pi-li-threshold", "pi-li-threshold", onset, res.min_threshold, 0,
                                res.min_threshold <= onset, note="no failing gap at or above the claimed onset"))
        rep.add(CheckResult("pi-below-li", "pi-li-sign", True, res.details["sign_assumption_holds"], None,
                            res.details["sign_assumption_holds"], provenance="external"))
        return rep

    kind = o.get("bound", "epsilon0")
    spec = _bound_spec(kind, o.get("coefficient"), o.get("R") or analytic.R_DEFAULT, o.get("claimed_from"))
    res = chebyshev.verify_bound(limit, spec, which, **cfg.scan_kwargs())
    default_onset = {"theta": THETA_ONSET, "psi": PSI_ONSET}[which] if kind == "epsilon0" else spec.validity_threshold
    onset = o.get("claimed_from") or default_onset
    rep.data.update(applicable=res.applicable, violation_count=res.violation_count, min_threshold=res.min_threshold,
                    worst_margin=res.worst_margin, violations=_violation_rows(res), **res.details)
    if not res.applicable:
        rep.add(skipped(f"{which}-{kind}-threshold", f"{which}-{kind}-threshold", onset, "bound not in force below the limit"))
    else:
        rep.add(CheckResult(f"{which}-{kind}-threshold", f"{which}-{kind}-threshold", onset, res.min_threshold, 0,
                            res.min_threshold <= onset, note="least x from which the bound holds up to the limit"))
    return rep


def cmd_certify_pi2(cfg: RunConfig) -> RunReport:
    x0 = cfg.options["x0"]
    rep = _report(cfg)
    store = cfg.store()
    cp = scan(x0, store=store, **cfg.scan_kwargs())
    cert = chebyshev.pi2_certificate(x0, cp)
    rep.data.update(bracket=cert.bracket, error_budget=cert.error_budget, pi_x0=cert.pi_x0, theta_x0=cert.theta_x0)
    rep.add(CheckResult("pi-li-bracket", "pi-li-certificate", -cert.error_budget, cert.bracket, cert.error_budget,
                        cert.certified, provenance="derived", note="bracket must not exceed minus the error budget"))
    rep.data["constant"] = cert.constant
    if x0 == PI2_X0:
        rep.add(CheckResult("pi-li-constant", "pi-li-eps0-constant", PI2_CONSTANT_CLAIM, cert.constant, None,
                            cert.constant <= PI2_CONSTANT_CLAIM))
    return rep


def cmd_gaps(cfg: RunConfig) -> RunReport:
    limit = cfg.options["limit"]
    rep = _report(cfg)
    table = gaps.GapTable.scan(limit, **cfg.scan_kwargs())
    gap, rec = table.max_gap(limit)
    rep.data.update(max_gap=gap, at=[rec.p, rec.q],
                    records=[{"p": r.p, "q": r.q, "gap": r.gap} for r in table.records])
    claimed = cfg.options.get("expect") or GAP_CLAIMS.get(limit)
    if claimed is not None:
        rep.add(CheckResult(f"max-gap-{limit}", f"max-gap-{limit}", claimed, gap, 0, gap <= claimed,
                            note="claimed value is used as an upper bound on gaps"))
    return rep


def cmd_short_intervals(cfg: RunConfig) -> RunReport:
    limit, c = cfg.options["limit"], cfg.options["c"]
    rep = _report(cfg)
    res = gaps.verify_short_interval(limit, c, **cfg.scan_kwargs())
    rep.data.update(threshold=res.threshold, largest_failing_x=res.largest_failing_x, failing_gaps=res.failing_gaps,
                    last_failing_gap=[res.last_failing_gap.p, res.last_failing_gap.q] if res.last_failing_gap else None)
    claimed = cfg.options.get("expect") or (SHORT_INTERVAL_ONSET if c == SHORT_INTERVAL_C else None)
    if claimed is not None and limit > claimed:
        rep.add(CheckResult(f"short-interval-c{c:g}", "short-interval-threshold", claimed, res.threshold, 0,
                            res.threshold <= claimed, note="every x in [threshold, limit) has a prime in its interval"))
    return rep


def _cascade(x1: int, gap1: int, c: float, scan_kwargs: dict) -> tuple[gaps.CascadeState, gaps.GapTable]:
    y1 = gaps.cascade_step(gap1, c)
    if y1 > MAX_LIMIT:
        raise ValueError(f"first frontier {y1} lies beyond the sieve capacity")
    table = gaps.GapTable.scan(min(y1, x1) + 1, **scan_kwargs)
    state = gaps.run_cascade((x1, gap1), c, lambda x: table(x + 1))
    return state, table


def cmd_cascade(cfg: RunConfig) -> RunReport:
    o = cfg.options
    decl = cfg.load_declarations()
    base = decl["max_gap_nyman_nicely"]
    x1 = o.get("x1") or base["x_upper"]
    gap1 = o.get("gap1") or base["gap"]
    c = o["c"]
    rep = _report(cfg)
    state, _ = _cascade(x1, gap1, c, cfg.scan_kwargs())
    rep.data["stages"] = [{"x_upper": s.x_upper, "gap_bound": s.gap_bound, "onset": s.y_lower, "source": s.source}
                          for s in state.stages]
    rep.data["initial_citation"] = base["citation"] if (x1, gap1) == (base["x_upper"], base["gap"]) else "command line"
    if c == SHORT_INTERVAL_C and (x1, gap1) == (base["x_upper"], base["gap"]):
        _cascade_checks(rep, state)
    return rep


def _cascade_checks(rep: RunReport, state: gaps.CascadeState) -> None:
    """First and second onsets against the stated ones, and the final frontier against the last."""
    picks = [(0, "cascade-stage-1"), (1, "cascade-stage-2"), (len(state.stages) - 1, "cascade-final-frontier")]
    for (i, anchor), claim in zip(picks, CASCADE_ONSETS):
        if not 0 <= i < len(state.stages):
            rep.add(CheckResult(anchor, anchor, claim, None, None, False, note="cascade stopped early"))
            continue
        y = state.stages[i].y_lower
        rep.add(CheckResult(anchor, anchor, claim, y, None, y <= claim, note="exact onset must not exceed the stated one"))


def cmd_pinteger(cfg: RunConfig) -> RunReport:
    o = cfg.options
    rep = _report(cfg)
    if o.get("k") is not None:
        res = pinteger.is_p_integer(o["k"])
        rep.data.update(k=res.k, p_integer=res.answer, phi=res.phi, repeated_residue=res.repeated_residue,
                        repeat_pair=res.repeat_pair, system=res.system if res.system and len(res.system) <= 64 else None)
    else:
        upto = o["enumerate_upto"]
        found = pinteger.enumerate_p_integers(upto)
        rep.data["p_integers"] = found
        expected = [k for k in P_INTEGERS if k <= upto]
        rep.add(CheckResult("p-integer-list", "p-integer-list", expected, found, 0, found == expected))
    return rep


def cmd_pomerance(cfg: RunConfig) -> RunReport:
    o = cfg.options
    rep = _report(cfg)
    log_k = o["log10k"] * math.log(10)
    h, L_min = pinteger.h_and_L(log_k)
    lo = o.get("Lmin") or L_min
    sweep = pinteger.exclusion_sweep(o["log10k"], lo, o["Lmax"])
    rep.data.update(h=h, least_admissible_L=L_min, min_value=sweep.min_value, argmin_L=sweep.argmin_L,
                    omitted_log_magnitude=sweep.omitted_log_magnitude)
    rep.add(CheckResult("pomerance-sweep", "pomerance-exclusion-sweep", True, sweep.all_positive, None, sweep.all_positive,
                        note=f"exclusion sum positive for every L in [{lo}, {o['Lmax']}]"))
    if lo < L_min:
        rep.add(CheckResult("pomerance-L-min", "pomerance-least-L", L_min, lo, 0, False, note="sweep starts below the admissible L"))
    return rep


def cmd_ramanujan(cfg: RunConfig) -> RunReport:
    o = cfg.options
    rep = _report(cfg)
    max_limit = ramanujan.LONG_RUN_LIMIT if o.get("long_run") else MAX_LIMIT
    res = ramanujan.scan_ramanujan(o["limit"], max_limit=max_limit, segment_size=cfg.segment_size)
    if o.get("emit_violations"):
        ramanujan.write_violations(res, o["emit_violations"])
    ctx = ramanujan.context_thresholds(res)
    rep.data.update(ctx)
    rep.data.update(violation_intervals=len(res.violations), violating_integers=res.violation_count)
    rep.add(CheckResult("ramanujan-largest-violation", "ramanujan-rh-threshold", ramanujan.RH_THRESHOLD,
                        res.largest_violation, None, ctx["consistent"], provenance="external"))
    return rep


# --- replication -------------------------------------------------------------------


def _ramanujan_oracle(limit: int) -> list[tuple[int, int]]:
    """Violating runs on [3, limit] from one stored prime list and binary search."""
    primes = small_primes(limit).tolist()
    runs: list[list[int]] = []
    for x in range(3, limit + 1):
        a = bisect.bisect_right(primes, x)
        b = bisect.bisect_right(primes, ramanujan.floor_over_e(x))
        if not a * a < math.e * x / math.log(x) * b:
            if runs and runs[-1][1] + 1 == x:
                runs[-1][1] = x
            else:
                runs.append([x, x])
    return [tuple(r) for r in runs]


def replicate(cfg: RunConfig) -> RunReport:
    """Every acceptance check in dependency order, sharing one sieve pass up to ``limit``."""
    limit = cfg.options.get("limit") or PI2_X0
    if limit < 1000:
        raise ValueError("replicate needs limit >= 1000")
    rep = _report(cfg)
    decl = cfg.load_declarations()

    # analytic checks
    R = analytic.solve_zero_free_R()
    rep.add(CheckResult("zero-free-R", "zero-free-constant-R", list(R_INTERVAL), R, None,
                        R_INTERVAL[0] < R <= R_INTERVAL[1] and R <= analytic.R_DEFAULT))
    floor = analytic.epsilon0_min_on(2.0, math.exp(25))
    rep.add(CheckResult("eps0-floor", "eps0-floor", EPS0_FLOOR, floor, None, floor >= EPS0_FLOOR))
    row = decl.table_rows[0]
    b = row.evaluate()
    rep.add(CheckResult("table-row-e35-e75", "theta-table-first-row", row.claimed, b, None,
                        b <= TABLE_ROW_BOUND and TABLE_ROW_RANGE[0] <= b <= TABLE_ROW_RANGE[1]))
    for a, bb, claim in CHAIN_CLAIMS:
        key = "faber_kadiri_additive_e25" if a == 25 else "faber_kadiri_additive_e45"
        f = analytic.chain_factor(a, bb, decl[key]["eps"])
        rep.add(CheckResult(f"chain-factor-e{a}-e{bb}", f"chain-factor-e{a}", claim, f, None, f <= claim))

    # one sieve pass
    spec = BoundSpec.epsilon0()
    theta_chk = chebyshev.bound_checker(spec, "theta", limit)
    psi_chk = chebyshev.bound_checker(spec, "psi", limit)
    classical = chebyshev.classical_checkers(limit)
    t2 = chebyshev.PiLiScanner(min(limit, PI_LI_SCAN_LIMIT))
    gap_top = min(limit, max(GAP_CLAIMS))
    tracker = gaps.GapTracker(below=gap_top)
    si_limit = min(limit, SHORT_INTERVAL_LIMIT)
    short = gaps.ShortIntervalScanner(si_limit, SHORT_INTERVAL_C)
    store = cfg.store()
    final = scan(limit, [theta_chk, psi_chk, *classical, t2, tracker, short],
                 start=PrimeCheckpoint.origin(), store=store, **cfg.scan_kwargs())
    tracker.close()

    th, ps = theta_chk.finish(), psi_chk.finish()
    rep.add(CheckResult("theta-eps0-threshold", "theta-eps0-threshold", THETA_ONSET, th.min_threshold, 0,
                        th.min_threshold == THETA_ONSET, note=f"scan of [2, {limit}]"))
    rep.add(CheckResult("psi-eps0-threshold", "psi-eps0-threshold", PSI_ONSET, ps.min_threshold, 0,
                        ps.min_threshold == PSI_ONSET, note=f"scan of [2, {limit}]"))
    for chk in classical:
        r = chk.finish()
        rep.add(CheckResult(f"classical-{chk.check}", f"classical-{chk.check}", 0, r.violation_count, 0, r.clean,
                            provenance="external"))

    if limit >= PI_LI_SCAN_LIMIT:
        r2 = t2.finish()
        rep.add(CheckResult("pi-li-threshold", "pi-li-threshold", PI_LI_ONSET, r2.min_threshold, 0,
                            r2.min_threshold == PI_LI_ONSET and r2.details["sign_assumption_holds"],
                            note=f"threshold prime index {r2.details.get('threshold_prime_index')} (1-based)"))
    else:
        rep.add(skipped("pi-li-threshold", "pi-li-threshold", PI_LI_ONSET, f"limit below {PI_LI_SCAN_LIMIT}"))

    x0 = min(limit, PI2_X0)
    cert = chebyshev.pi2_certificate(x0, final)
    rep.add(CheckResult("pi-li-certificate", "pi-li-certificate", -cert.error_budget, cert.bracket, cert.error_budget,
                        cert.certified and (x0 < PI2_X0 or cert.constant <= PI2_CONSTANT_CLAIM), provenance="derived",
                        note=f"x0 = {x0}, constant {cert.constant:.6f} <= {PI2_CONSTANT_CLAIM}"))

    table = gaps.GapTable(tracker.records, gap_top)
    for x, claim in sorted(GAP_CLAIMS.items(), reverse=True):
        if x <= gap_top:
            g = table(x)
            rep.add(CheckResult(f"max-gap-{x}", f"max-gap-{x}", claim, g, 0, g == claim))
        else:
            rep.add(skipped(f"max-gap-{x}", f"max-gap-{x}", claim, f"limit below {x}"))

    if si_limit == SHORT_INTERVAL_LIMIT:
        si = short.finish()
        rep.add(CheckResult("short-interval-c111", "short-interval-threshold", SHORT_INTERVAL_ONSET, si.threshold, 0,
                            si.threshold == SHORT_INTERVAL_ONSET, note=f"largest failing x {si.largest_failing_x}"))
    else:
        rep.add(skipped("short-interval-c111", "short-interval-threshold", SHORT_INTERVAL_ONSET, "limit below 3.8e6"))

    base = decl["max_gap_nyman_nicely"]
    y1 = gaps.cascade_step(base["gap"], SHORT_INTERVAL_C)
    if y1 + 1 <= gap_top:
        state = gaps.run_cascade((base["x_upper"], base["gap"]), SHORT_INTERVAL_C, lambda x: table(x + 1))
        _cascade_checks(rep, state)
    else:
        for anchor, claim in zip(("cascade-stage-1", "cascade-stage-2", "cascade-final-frontier"), CASCADE_ONSETS):
            rep.add(skipped(anchor, anchor, claim, f"limit below {y1 + 1}"))

    found = pinteger.enumerate_p_integers(1000)
    rep.add(CheckResult("p-integer-examples", "p-integer-examples", [True, False],
                        [pinteger.is_p_integer(12).answer, pinteger.is_p_integer(10).answer], None,
                        pinteger.is_p_integer(12).answer and not pinteger.is_p_integer(10).answer))
    rep.add(CheckResult("p-integer-list", "p-integer-list", list(P_INTEGERS), found, 0, found == list(P_INTEGERS),
                        provenance="derived"))
    h, L_min = pinteger.h_and_L(POMERANCE_LOG10K * math.log(10))
    sweep = pinteger.exclusion_sweep(POMERANCE_LOG10K, POMERANCE_LMIN, POMERANCE_LMAX)
    rep.add(CheckResult("pomerance-L-min", "pomerance-least-L", POMERANCE_LMIN, L_min, 0, L_min == POMERANCE_LMIN))
    rep.add(CheckResult("pomerance-sweep", "pomerance-exclusion-sweep", True, sweep.all_positive, None, sweep.all_positive,
                        note=f"min {sweep.min_value:.3e} at L = {sweep.argmin_L}"))

    r_limit = min(limit, RAMANUJAN_LIMIT)
    ram = ramanujan.scan_ramanujan(r_limit, segment_size=cfg.segment_size)
    o_limit = min(r_limit, RAMANUJAN_ORACLE_LIMIT)
    oracle = _ramanujan_oracle(o_limit)
    below = [(a, min(bb, o_limit)) for a, bb in ram.violations if a <= o_limit]
    rep.add(CheckResult("ramanujan-oracle", "ramanujan-violations", len(oracle), len(below), 0, below == oracle,
                        provenance="derived", note=f"violating runs on [3, {o_limit}]"))
    ctx = ramanujan.context_thresholds(ram)
    rep.add(CheckResult("ramanujan-largest-violation", "ramanujan-rh-threshold", ramanujan.RH_THRESHOLD,
                        ram.largest_violation, None, ctx["consistent"], provenance="external"))
    rep.data["limit"] = limit
    return rep


COMMANDS = {
    "constants": cmd_constants,
    "scan": cmd_scan,
    "verify": cmd_verify,
    "certify": cmd_certify_pi2,
    "gaps": cmd_gaps,
    "short-intervals": cmd_short_intervals,
    "cascade": cmd_cascade,
    "pinteger": cmd_pinteger,
    "pomerance": cmd_pomerance,
    "ramanujan": cmd_ramanujan,
    "replicate": replicate,
}


def run(cfg: RunConfig) -> RunReport:
    t0 = time.perf_counter()
    rep = COMMANDS[cfg.command](cfg)
    rep.wall_time_s = time.perf_counter() - t0
    return rep
