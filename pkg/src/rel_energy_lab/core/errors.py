#%% Exceptions raised across the lab

from typing import Optional


class LabError(Exception):
    ''' Base class of every error raised by rel_energy_lab '''


class DomainError(LabError, ValueError):
    ''' Negative density or non-finite state '''


class HypothesisError(LabError, ValueError):
    ''' A hypothesis of the checked result does not hold '''


class UnsupportedRegimeError(HypothesisError):
    ''' The analytic route is not available for the requested box '''


class UndefinedDirectionError(LabError, ValueError):
    ''' Radial direction undefined at (or too close to) the cutoff centre '''


class DomainCoverageError(LabError, ValueError):
    ''' Cutoff support or wave front leaves the computational grid '''


class InsufficientDataError(LabError, ValueError):
    ''' Not enough usable snapshots for a fit '''


class ConfigError(LabError, ValueError):
    ''' Unreadable, malformed or invalid configuration '''


class NotSmoothError(LabError, RuntimeError):
    ''' Reference run breached its gradient monitor '''


class NumericalBlowupError(LabError, RuntimeError):
    '''
    Non-finite or negative-density state produced by the finite-volume update

    Parameters
    ----------
    cell : int
        Index of the first offending cell.
    time : float
        Time reached by the failing step.
    '''

    def __init__(self, cell: int, time: float, message: Optional[str] = None):
        self.cell = int(cell)
        self.time = float(time)
        if message is None:
            message = f"Non-finite state in cell {self.cell} at t={self.time:.6g}."
        super().__init__(message)
