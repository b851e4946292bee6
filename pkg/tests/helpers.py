"""Shared builders for the test suite: small grids, day inputs, bundles."""

from __future__ import annotations

import numpy as np

from fcrsched import (
    BatterySpec,
    DataBundle,
    DayInputs,
    PriceSeries,
    RunConfig,
    TimeGrid,
    battery_npv,
    energy_content,
    linearize_calendar,
    linearize_cycle,
    synth_frequency,
    synth_prices,
)


def toy_config(outdir, **overrides) -> RunConfig:
    """Small, fast run configuration rooted at `outdir`."""
    base = dict(
        case_id="MULTI",
        degradation_in_objective=False,
        days=(0,),
        steps_per_hour=4,
        hours_per_day=4,
        solver="scipy",
        mip_gap=1e-9,
        relax_step_binaries=True,
        outdir=str(outdir),
    )
    base.update(overrides)
    return RunConfig(**base)


def toy_bundle(config: RunConfig, seed: int = 7) -> DataBundle:
    """Synthetic bundle sized for `config` (frequency seed, prices seed+1)."""
    grid = config.grid_for(0)
    n_days = max(config.days) + 1
    freq = synth_frequency(seed, grid, days=n_days)
    prices = synth_prices(seed + 1, n_days * config.hours_per_day,
                          grid_tariff=config.grid_tariff, tax=config.tax)
    return DataBundle(frequency=freq, prices=prices, config=config)


def day_inputs(seed: int = 7, case: str = "MULTI", hours: int = 4,
               steps_per_hour: int = 4, deg: bool = False,
               s0: float | None = None, relax: bool = True,
               spec: BatterySpec | None = None, age_days: float = 30.0,
               prices: PriceSeries | None = None, **extra) -> DayInputs:
    """One-day model inputs on synthetic data, compact by default."""
    spec = spec or BatterySpec()
    grid = TimeGrid(0, steps_per_hour, hours)
    trace = synth_frequency(seed, grid)
    if prices is None:
        prices = synth_prices(seed + 1, hours)
    cal = cyc = None
    if deg:
        npv = battery_npv(spec)
        cal = linearize_calendar(spec, spec.temperature, age_days,
                                 grid.step_seconds, npv)
        cyc = linearize_cycle(spec, spec.temperature, npv)
    return DayInputs(
        grid=grid,
        prices=prices,
        contents=energy_content(trace, grid),
        spec=spec,
        s0=0.5 * spec.capacity if s0 is None else s0,
        case_id=case,
        degradation_in_objective=deg,
        cal_lin=cal,
        cyc_lin=cyc,
        relax_step_binaries=relax,
        **extra,
    )


def flat_prices(hours: int, spot: float = 40.0, fcr_n: float = 20.0,
                fcr_du: float = 10.0, fcr_dd: float = 8.0,
                up_reg: float = 45.0, down_reg: float = 30.0,
                grid_tariff: float = 0.0, tax: float = 0.0) -> PriceSeries:
    """Constant prices, handy when a test needs a hand-checkable objective."""
    ones = np.ones(hours)
    return PriceSeries(spot=spot * ones, fcr_n=fcr_n * ones,
                       fcr_du=fcr_du * ones, fcr_dd=fcr_dd * ones,
                       up_reg=up_reg * ones, down_reg=down_reg * ones,
                       grid_tariff=grid_tariff, tax=tax)


def audit_solution(inputs: DayInputs, sol) -> dict[str, float]:
    """Re-audit a day solution from first principles.

    Recomputes every physical requirement directly from the extracted arrays
    and the raw inputs (never through the model rows) and returns the worst
    violation magnitude per family; all zeros (up to float noise) means the
    schedule is physically consistent.
    """
    spec, grid, cont = inputs.spec, inputs.grid, inputs.contents
    sph, dt = grid.steps_per_hour, grid.dt_hours
    viol: dict[str, float] = {}

    def note(family: str, amount: float) -> None:
        viol[family] = max(viol.get(family, 0.0), float(amount))

    ch, ds = sol.ch_bl, sol.ds_bl
    bid = {"N": sol.bid_n, "DU": sol.bid_du, "DD": sol.bid_dd}
    caps = {"N": spec.p_max, "DU": 2.0 * spec.p_max, "DD": 2.0 * spec.p_max}
    from fcrsched.ingest import CASE_MARKETS
    allowed = CASE_MARKETS[inputs.case_id]

    for h in range(grid.hours):
        note("baseline_bounds", max(-ch[h], ch[h] - spec.p_max,
                                    -ds[h], ds[h] - spec.p_max))
        note("baseline_excl", min(ch[h], ds[h]))
        if inputs.force_zero_baseline:
            note("baseline_zero", max(ch[h], ds[h]))
        if spec.p_min > 0.0:
            for v in (ch[h], ds[h]):
                if v > 1e-9:
                    note("baseline_min", spec.p_min - v)
        for mkt in ("N", "DU", "DD"):
            b = bid[mkt][h]
            if mkt not in allowed:
                note("bid_disallowed", b)
                continue
            note("bid_bounds", max(-b, b - caps[mkt]))
            if b > 1e-9:
                note("bid_min", spec.min_bid(mkt) - b)
        net = ch[h] - ds[h]
        note("req_up", 1.34 * bid["N"][h] + bid["DU"][h]
             + 0.2 * bid["DD"][h] - net - spec.p_max)
        note("req_dn", 1.34 * bid["N"][h] + bid["DD"][h]
             + 0.2 * bid["DU"][h] + net - spec.p_max)
        start = inputs.s0 if h == 0 else sol.soe[h * sph - 1]
        for off in (net,
                    (net + bid["N"][h] + bid["DD"][h]) / 3.0,
                    (net - bid["N"][h] - bid["DU"][h]) / 3.0,
                    net + bid["N"][h] + bid["DD"][h] / 3.0,
                    net - bid["N"][h] - bid["DU"][h] / 3.0):
            note("endurance", max(spec.soe_min - (start + off),
                                  (start + off) - spec.soe_max))

    prev = inputs.s0
    for t in range(grid.n_steps):
        h = t // sph
        note("step_bounds", max(-sol.p_ch[t], sol.p_ch[t] - spec.p_max,
                                -sol.p_ds[t], sol.p_ds[t] - spec.p_max))
        note("step_excl", min(sol.p_ch[t], sol.p_ds[t]))
        pin = (sol.p_ch[t] - sol.p_ds[t]
               - (ch[h] - ds[h])
               - (cont.frac_nd[t] - cont.frac_nu[t]) * bid["N"][h]
               - cont.frac_dd[t] * bid["DD"][h]
               + cont.frac_du[t] * bid["DU"][h])
        note("activation_pin", abs(pin))
        flow = (spec.eta_ch * ch[h] - ds[h] / spec.eta_ds) * dt \
            + (cont.e_dr_n[t] - cont.e_ur_n[t]) * bid["N"][h] \
            + cont.e_dr_dd[t] * bid["DD"][h] \
            - cont.e_ur_du[t] * bid["DU"][h]
        note("soe_recursion", abs(sol.soe[t] - prev - flow))
        note("soe_window", max(spec.soe_min - sol.soe[t],
                               sol.soe[t] - spec.soe_max))
        prev = sol.soe[t]
    return viol


def solve_day(inputs: DayInputs, backend=None):
    """Build, solve with scipy (tight gap), validate, and extract."""
    from fcrsched import build_day_model, extract_day_solution, solve_scipy
    from fcrsched.milp import validate_solution

    model = build_day_model(inputs)
    res = (backend or (lambda m: solve_scipy(m, mip_gap=1e-9)))(model)
    assert res.ok, res.status
    report = validate_solution(model, res.x)
    assert report.ok, report.worst_by_family()
    sol = extract_day_solution(model, res.x, inputs, res.status, res.gap,
                               res.wall_time)
    return model, res, sol
