"""
Recovering a known warp from noisy observations
===============================================

The seesaw pair has a known ground-truth warp. We add noise, register with
each of the four mismatch terms and measure how far the recovered warp is
from the truth in CLR space.
"""

from clrwarp import ALL_METHODS, RegistrationConfig, noisy_pair, recovery_report, register
from clrwarp.optimizer import cached_basis

sigma, d = 0.04, 40
basis = cached_basis(d, 1000)
config = RegistrationConfig(basis_dim=d, lam=1e-5, step_size=0.05, max_iters=4000)

f, g, truth = noisy_pair("inverse_seesaw", sigma, seed=0)
print(f"noise sd {sigma}, basis dimension {d}")

for m in ALL_METHODS:
    r = register(f, g, config.with_(method=m), basis=basis)
    rep = recovery_report(r, truth, basis)
    print(f"{m.label:>11}: clr distance {rep.clr_l2:.3f}  H-norm {rep.hnorm:7.2f}  "
          f"sup|gamma - truth| {rep.sup_warp_error:.4f}")

# Fixed-step descent at alpha=0.05 is slow on a 40-dimensional basis and the
# objective is still falling after 4000 steps. A larger step and budget move
# the Standard fit closer, but only part of the way.
long = config.with_(method=1, step_size=0.3, max_iters=20000)
rep = recovery_report(register(f, g, long, basis=basis), truth, basis)
print(f"Standard, alpha=0.3, 20000 steps: clr distance {rep.clr_l2:.3f}")
