"""
Power scaling with the number of elements
=========================================

Coherent strategies grow the received power like M^2, random phases only
like M.  The coupled-phase DP strategy pays a constant 10 log10(4/pi^2) dB
against unconstrained phases at full amplitude.
"""

import math

import numpy as np

from starris.config import ScenarioConfig, load_config
from starris.montecarlo import estimate_power, fit_exponent
from starris.psc import StrategySpec

cfg = ScenarioConfig(load_config())
m_grid = [16, 32, 64, 128, 256]
scn = cfg.scenario(16)
trials = 20_000

curves = {}
for kind in ("ps", "dp", "random"):
    curves[kind] = estimate_power(scn, cfg.strategy_spec(kind), m_grid, trials, cfg.seed, workers=4)
curves["independent"] = estimate_power(
    scn, StrategySpec("independent", full_amplitude=True), m_grid, trials, cfg.seed, workers=4
)

print("   M " + "".join(f"{k + '/' + u:>16}" for k in curves for u in "TR"))
for i, m in enumerate(m_grid):
    row = "".join(f"{10 * np.log10(curves[k][u].estimate[i]):16.2f}" for k in curves for u in "TR")
    print(f"{m:4d} {row}")

for kind, res in curves.items():
    slopes = ", ".join(f"{u} {fit_exponent(res[u])[0]:.3f}" for u in "TR")
    print(f"{kind:>12}: log-log slope {slopes}")

gap = 10 * math.log10(curves["dp"]["R"].estimate[-1] / curves["independent"]["R"].estimate[-1])
print(f"DP vs unconstrained at M=256: {gap:.2f} dB (4/pi^2 is {10 * math.log10(4 / math.pi**2):.2f} dB)")
ratio = curves["ps"]["T"].estimate[-1] / curves["ps"]["R"].estimate[-1]
print(f"PS secondary/primary at M=256: {ratio:.3f} ((2/pi)^2 = {(2 / math.pi) ** 2:.3f})")
