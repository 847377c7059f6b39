"""Finite-volume Euler solver for Van der Waals gases that advances a
thermodynamic variable (T, P, e, h or s) instead of total energy while
keeping total energy conserved to round-off."""
from .cases import BUILTIN, CaseDefinition, CaseError, initialize, load_case
from .eos import EosDomainError, VariableSet, VdwParameters, state_from
from .solver import RunResult, run
from .temporal import Mode, PositivityError, RhoBar, SecantConvergenceError
from .verification import MmsConfig, exact_riemann_ideal, run_mms_convergence

__version__ = "0.1.0"
