"""
bogofluct
Gaussian fluctuation statistics of a Bose gas with singular scaled interaction.

This package provides:
- Neumann scattering problem and the limiting correlation profile
- Condensate evolution by the cubic NLS and the modified Hartree equation
- Correlation kernels with their hyperbolic Bogoliubov series
- Quadratic fluctuation generators and symplectic Bogoliubov propagation
- Exact truncated Fock space oracle for every second-quantized identity
- Covariance of fluctuation observables and Gaussian-side statistics
- Reproducible CLI runs with INI configuration, CSV tables and a JSON manifest
"""

__version__ = "1.0.0"
__description__ = "Central limit fluctuations of Bose gases on a periodic lattice"
