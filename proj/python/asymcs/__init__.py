"""Compressed sensing with asymptotic sparsity, asymptotic incoherence and
multilevel sampling: transforms, coherence and sparsity analysis, sampling
maps, l1/TV recovery, flip tests, a fluorescence-microscopy simulator and
infinite-dimensional (generalized) sampling."""

from ._core import *  # noqa: F401,F403
from ._core import Error, __doc__  # noqa: F401
