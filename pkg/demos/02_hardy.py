"""
The odd Hardy inequality
========================

For odd u, int |u/r|^p dr <= (p/(p-1))^p int |u'|^p dr on the half
line.  We test it on a batch of random symmetrised packets and on
r exp(-r), where both sides are known in closed form.
"""
import numpy as np

from oddinls import make_grid, sample_initial
from oddinls.analysis import hardy_ratio
from oddinls.experiments.drivers import random_odd_packets

exact = hardy_ratio(lambda r: r * np.exp(-r), 2.0, derivative=lambda r: (1 - r) * np.exp(-r))
print("r e^-r, p=2:", exact.to_dict())

grid = make_grid(40.0, 4096)
packets = [sample_initial(spec, grid) for spec in random_odd_packets(50, seed=1)]
for p in (1.5, 2.0, 3.0):
    ratios = np.array([hardy_ratio(u, p).ratio for u in packets])
    print(f"p={p:g}: sharp constant {(p / (p - 1)) ** p:.4f}, largest ratio {ratios.max():.4f}")
