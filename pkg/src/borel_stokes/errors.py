"""Exception and warning types.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its documented status codes without a lookup table.
"""

from __future__ import annotations

__all__ = [
    "BorelStokesError",
    "SeriesNotConverged",
    "NoMinimum",
    "TailBoundFails",
    "QuadratureNotConverged",
    "SingularDirection",
    "RayHitsPole",
    "PoleOnBoundaryRay",
    "PoleOfGamma",
    "AtPole",
    "OutsideSector",
    "OutsideJumpSector",
    "OutsideDisc",
    "StencilOutOfDomain",
    "GrowthOrderViolation",
    "EpsilonTooLarge",
    "NoPoles",
    "NoStokesLines",
    "LowConfidence",
]


class BorelStokesError(Exception):
    exit_code = 1


# -- numeric non-convergence (exit 2) ---------------------------------------

class SeriesNotConverged(BorelStokesError):
    exit_code = 2


class NoMinimum(BorelStokesError):
    """Terms of the formal series grow from the start; nothing to truncate."""
    exit_code = 2


class TailBoundFails(BorelStokesError):
    exit_code = 2


class QuadratureNotConverged(BorelStokesError):
    exit_code = 2


# -- singular direction (exit 3) --------------------------------------------

class SingularDirection(BorelStokesError):
    exit_code = 3


class RayHitsPole(BorelStokesError):
    exit_code = 3


class PoleOnBoundaryRay(BorelStokesError):
    exit_code = 3


# -- domain guards (exit 4) -------------------------------------------------

class PoleOfGamma(BorelStokesError):
    exit_code = 4


class AtPole(BorelStokesError):
    exit_code = 4


class OutsideSector(BorelStokesError):
    exit_code = 4


class OutsideJumpSector(OutsideSector):
    pass


class OutsideDisc(BorelStokesError):
    exit_code = 4


class StencilOutOfDomain(BorelStokesError):
    exit_code = 4


class GrowthOrderViolation(BorelStokesError):
    exit_code = 4


class EpsilonTooLarge(BorelStokesError):
    exit_code = 4


# -- not applicable (exit 5) ------------------------------------------------

class NoPoles(BorelStokesError):
    exit_code = 5


class NoStokesLines(NoPoles):
    pass


class LowConfidence(RuntimeWarning):
    """Kernel value computed where double precision cannot be trusted."""
