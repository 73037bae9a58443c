"""
Checking the adjoint gradient
=============================

The coefficient gradient is assembled from an adjoint kernel. Here it is
compared with central differences of the objective, and then the same check
is run with a deliberately wrong kernel to show the test has teeth.
"""

from clrwarp.verification import corrupted_kernel, gradient_check

for label, kernel in (("exact kernel", None), ("kernel x 1.5", corrupted_kernel)):
    checks = gradient_check(trials=5, kernel=kernel)
    worst = max(checks, key=lambda c: c.max_rel_error)
    print(f"{label}: worst relative error {worst.max_rel_error:.2e} "
          f"({worst.method.label}, trial {worst.trial}); all passed: {all(c.passed for c in checks)}")
