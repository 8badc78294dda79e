#!/usr/bin/env python3
"""
Sample problem loader for the FvK plate toolkit
Provides ready-to-run problem files for the CLI (--sample NAME)
"""

from typing import List


class SampleLoader:
    """Built-in problem files"""

    def __init__(self):
        """Initialize sample loader"""
        self.samples = {
            'zero': self._get_zero_sample(),
            'pure-bending': self._get_pure_bending_sample(),
            'variable-thickness': self._get_variable_thickness_sample(),
            'compatible-prestrain': self._get_compatible_prestrain_sample(),
            'curved-growth': self._get_curved_growth_sample(),
        }

    def get_sample(self, name: str) -> str:
        """Get the problem file text of a sample ('' if unknown)"""
        return self.samples.get(name, "")

    def names(self) -> List[str]:
        return list(self.samples)

    def _get_zero_sample(self) -> str:
        """Unit square, mu = lambda = 1, g1 = g2 = 0.5 and no growth"""
        return """# Unstressed plate: every energy and residual vanishes
[grid]
nx = 17
ny = 17

[material]
mu = 1
lambda = 1

[thickness]
g1 = 0.5
g2 = 0.5

[solver]
init = zero
"""

    def _get_pure_bending_sample(self) -> str:
        """Unit bending growth; I_g(0, 0) = 5/18"""
        return """# Pure bending prestrain kappa_g = diag(1, 1, 0)
[grid]
nx = 17
ny = 17

[growth]
kappa_11 = 1
kappa_22 = 1

[displacement]
w1 = 0
w2 = 0
v = 0

[gamma]
h_list = 0.08, 0.04, 0.02, 0.01
n_thickness = 4
"""

    def _get_variable_thickness_sample(self) -> str:
        """Asymmetric thickness profile with bending growth"""
        return """# Thickness grows along x1 on the upper side only
[grid]
nx = 21
ny = 21

[thickness]
g1 = 0.5
g2 = 0.4 + 0.2*x1

[growth]
kappa_11 = 1
kappa_22 = 0.5

[solver]
max_iters = 400
seed = 1
"""

    def _get_compatible_prestrain_sample(self) -> str:
        """Stretching growth equal to sym grad of (0.1 x1 x2, 0.05 x1^2)"""
        return """# Compatible in-plane growth: the displacement below has zero energy
[grid]
nx = 17
ny = 17

[growth]
eps_11 = 0.1*x2
eps_12 = 0.1*x1
eps_21 = 0.1*x1

[displacement]
w1 = 0.1*x1*x2
w2 = 0.05*x1^2
v = 0
"""

    def _get_curved_growth_sample(self) -> str:
        """Smooth non-polynomial growth with transverse shear terms"""
        return """# Growth varying in space, with eps_13 and kappa_13 terms
[grid]
nx = 17
ny = 17

[thickness]
g1 = 0.5
g2 = 0.5 + 0.1*x2

[growth]
eps_11 = 0.1*sin(x2)
eps_13 = 0.05*x1
kappa_11 = 0.5*cos(x1)
kappa_13 = 0.2*x1
kappa_22 = 0.3

[displacement]
w1 = 0.01*x1*x2
w2 = 0
v = 0.1*x1^2 - 0.05*x2^2

[gamma]
h_list = 0.08, 0.04, 0.02
n_thickness = 5
"""
