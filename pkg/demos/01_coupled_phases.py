"""
Coupled transmission/reflection phases
======================================

A passive lossless element cannot pick its two phases freely: the amplitudes
satisfy beta_t^2 + beta_r^2 = 1 and the phases differ by pi/2 or 3pi/2.  This
walk-through configures a small surface with each strategy and looks at what
the coupling costs the user that is not cophased.
"""

import numpy as np

from starris.channel import RicianParams, db_to_linear
from starris.link import end_to_end
from starris.montecarlo import Scenario, draw_realizations
from starris.psc import StrategySpec, configure, phase_error
from starris.surface import validate

rng = np.random.default_rng(2021)
p = RicianParams(float(db_to_linear(1.3)))
scn = Scenario(8, p, p, p, p, p)
ch = draw_realizations(scn, rng, 1)

# %% every strategy produces coefficients that satisfy the coupling law
for kind in ("ps", "dp", "tr", "random"):
    c = configure(ch, StrategySpec(kind), rng)
    rep = validate(c)
    h_t = abs(end_to_end(ch, c, "T")[0])
    h_r = abs(end_to_end(ch, c, "R")[0])
    print(f"{kind:>6}: valid={rep.ok}  |H_T|={h_t:6.3f}  |H_R|={h_r:6.3f}")

# %% PS-PSC cophases user R exactly; user T only gets to pick the better of
# two phases per element, so its residual errors spread over [-pi/2, pi/2]
c = configure(ch, StrategySpec("ps"))
print("PS residual phase errors, R:", np.round(phase_error(ch, c, "R")[0], 3))
print("PS residual phase errors, T:", np.round(phase_error(ch, c, "T")[0], 3))

# %% DP-PSC splits the damage evenly: delta_R = -delta_T and |delta| <= pi/4
c = configure(ch, StrategySpec("dp"))
d_t, d_r = phase_error(ch, c, "T")[0], phase_error(ch, c, "R")[0]
print("DP errors T:", np.round(d_t, 3))
print("DP errors R:", np.round(d_r, 3))
print("max |delta| / (pi/4) =", np.max(np.abs(d_t)) / (np.pi / 4))

# %% a larger batch: the mean gain each user gets under each strategy
batch = draw_realizations(Scenario(64, p, p, p, p, p), rng, 2000)
for kind in ("ps", "dp", "tr", "random"):
    c = configure(batch, StrategySpec(kind), rng)
    g_t = np.mean(np.abs(end_to_end(batch, c, "T")) ** 2)
    g_r = np.mean(np.abs(end_to_end(batch, c, "R")) ** 2)
    print(f"M=64 {kind:>6}: E|H_T|^2 = {10 * np.log10(g_t):5.1f} dB, E|H_R|^2 = {10 * np.log10(g_r):5.1f} dB")
