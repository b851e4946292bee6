"""
One optimized day
=================

Build the day model for a small battery, solve it, and read the schedule:
baseline power, stacked reserve bids, and the state-of-energy path.
"""

from __future__ import annotations

import numpy as np

from fcrsched import (
    BatterySpec,
    DayInputs,
    TimeGrid,
    build_day_model,
    energy_content,
    extract_day_solution,
    model_size,
    solve_scipy,
    synth_frequency,
    synth_prices,
)

# Inputs: a 24-hour day at 15-minute resolution, synthetic frequency and
# prices, all three reserve markets allowed ("MULTI"), degradation charged
# after the fact rather than inside the objective.
grid = TimeGrid(day_index=0, steps_per_hour=4, hours=24)
spec = BatterySpec()
trace = synth_frequency(seed=11, grid=grid)
prices = synth_prices(seed=12, hours=grid.hours)

inputs = DayInputs(
    grid=grid,
    prices=prices,
    contents=energy_content(trace, grid),
    spec=spec,
    s0=0.5 * spec.capacity,
    case_id="MULTI",
    degradation_in_objective=False,
    relax_step_binaries=True,
)

size = model_size(inputs)
print(f"model: {size['n_vars']} variables "
      f"({size['n_binaries']} binary), {size['n_rows']} rows")

model = build_day_model(inputs)
result = solve_scipy(model, mip_gap=1e-6)
assert result.ok, result.status
sol = extract_day_solution(model, result.x, inputs,
                           result.status, result.gap, result.wall_time)
print(f"solved in {result.wall_time:.2f} s, objective "
      f"{sol.objective:,.2f} EUR\n")

# The hourly plan: negative baseline = discharging into the spot market.
print("hour  baseline[MW]  bid N  bid DU  bid DD   SoE end[MWh]")
sph = grid.steps_per_hour
for h in range(grid.hours):
    net = sol.ch_bl[h] - sol.ds_bl[h]
    print(f"{h:4d}  {net:+12.2f}  {sol.bid_n[h]:5.2f}  {sol.bid_du[h]:6.2f}"
          f"  {sol.bid_dd[h]:6.2f}  {sol.soe[(h + 1) * sph - 1]:13.3f}")

print(f"\nrevenue: spot {sol.r_da:,.2f}  FCR-N {sol.r_n:,.2f}  "
      f"FCR-D up {sol.r_du:,.2f}  FCR-D down {sol.r_dd:,.2f} EUR")
print(f"cost: charged energy {sol.c_da:,.2f} EUR")

# The state of energy always stays inside the usable window, including
# under the worst-case activation scenarios the constraints guard against.
assert np.all(sol.soe >= spec.soe_min - 1e-9)
assert np.all(sol.soe <= spec.soe_max + 1e-9)
print(f"SoE window respected: "
      f"{sol.soe.min():.3f}..{sol.soe.max():.3f} MWh inside "
      f"[{spec.soe_min:.1f}, {spec.soe_max:.1f}]")
