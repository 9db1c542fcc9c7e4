"""Wind-load fatigue damage prognosis for composite turbine blades.

Modules: ``specfun`` (gamma functions, variates), ``windload`` (wind records
to load spectra), ``fatigue`` (S-N life and nonlinear damage accumulation),
``gproc`` (gamma-process failure probability, estimation, simulation) and
``cli``.
"""
from .errors import (BladeProgError, CSVFormatError, DegenerateDataError, DomainError,
                     InputError, NonConvergenceError)

__version__ = "0.1.0"
