"""Reconstruction of uniformly discretized signals from off-the-grid samples.

The package is organised by stage:

* :mod:`offgrid_cs.model` -- Fourier-series signals, uniform discretization, aliasing.
* :mod:`offgrid_cs.sampling` -- deviation laws, torus-wrapped grids, the bias parameter theta.
* :mod:`offgrid_cs.operators` -- matrix-free operators (centered DFT, NDFT, Dirichlet kernel).
* :mod:`offgrid_cs.transforms` -- sparsifying transforms and their DFT-incoherence.
* :mod:`offgrid_cs.solve` -- basis pursuit denoise and least squares solvers.
* :mod:`offgrid_cs.analysis` -- interpolation-error oracle, RIC estimates, error bounds.
* :mod:`offgrid_cs.reconstruct` -- end-to-end acquisition and reconstruction pipelines.
"""

__version__ = "0.1.0"
