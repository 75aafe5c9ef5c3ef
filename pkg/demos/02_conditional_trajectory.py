"""One conditional quantum trajectory next to its classical counterpart.

A single measurement record is integrated for a few drive periods; we watch
<p>, the conditional spread of J = -cos x, and the Wigner function at the end.
"""

import numpy as np

from cavity_sse import Grid, SimParams, SplitStepPropagator, WaveFunction, gaussian_state, wigner_transform
from cavity_sse.noise import NoiseStream
from cavity_sse.wigner import marginals

prm = SimParams(D=0.01, grid_size=128)
grid = Grid.from_params(prm)
prop = SplitStepPropagator(grid, prm)
noise = NoiseStream(prm.seed, trajectory=0)

psi = gaussian_state(grid, 0.0, 1.0, 0.3906)
print(f"t=0: <x>={psi.mean_x():+.4f} <p>={psi.expect_p():+.4f} Var x={psi.var_x():.4f} Var p={psi.var_p():.4f}")

amps = psi.amps
for k in range(10):
    # one period of Wiener increments, addressed by (seed, trajectory, period)
    dW = noise.increments(k, prm.steps_per_period, prm.dt)
    amps = prop.evolve(amps, 2 * np.pi * k, dW)
    wf = WaveFunction(grid, amps, 2 * np.pi * (k + 1))
    J = -np.cos(grid.x)
    varJ = wf.expect_x(J**2) - wf.expect_x(J) ** 2
    print(f"strobe {k + 1:2d}: <p>={wf.expect_p():+.3f}  Var J={varJ:.3f}  E={wf.energy(prm, 0.0):+.3f}")

w = wigner_transform(wf)
px, pp = marginals(w)
print("Wigner total", round(w.total(), 12), "min value", w.values.min().round(4))
print("x-marginal matches |psi|^2:", np.allclose(px, wf.density(), atol=1e-10))
