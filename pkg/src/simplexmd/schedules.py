"""Step-size schedules for the iterative solvers."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

HARMONIC = "harmonic"
SQRT_DECAY = "sqrt"
CUSTOM = "custom"


@dataclass(frozen=True)
class StepSchedule:
    """A nonincreasing positive step-size sequence alpha_k.

    ``harmonic(a)`` gives a/(k+1): square-summable but not summable, the
    regime under which the solvers' iterates converge. ``sqrt_decay(a)``
    gives a/sqrt(k+1) (not square-summable; provided for benchmarking only).
    ``custom`` sequences are validated positive and nonincreasing; their
    summability properties are the caller's responsibility.
    """

    kind: str
    a: float = 1.0
    values: tuple = ()

    @classmethod
    def harmonic(cls, a: float) -> "StepSchedule":
        if not a > 0:
            raise ValueError(f"schedule parameter must be positive, got {a}")
        return cls(HARMONIC, a)

    @classmethod
    def sqrt_decay(cls, a: float) -> "StepSchedule":
        if not a > 0:
            raise ValueError(f"schedule parameter must be positive, got {a}")
        return cls(SQRT_DECAY, a)

    @classmethod
    def custom(cls, values) -> "StepSchedule":
        values = tuple(float(v) for v in values)
        if not values:
            raise ValueError("custom schedule needs at least one step size")
        if any(not v > 0 for v in values):
            raise ValueError("custom schedule entries must be positive")
        if any(b > a for a, b in zip(values, values[1:])):
            raise ValueError("custom schedule must be nonincreasing")
        warnings.warn(
            "custom schedule: square-summability (needed for iterate "
            "convergence) is not checked and rests with the caller",
            RuntimeWarning,
            stacklevel=2,
        )
        return cls(CUSTOM, values=values)

    def alpha(self, k: int) -> float:
        """Step size at iteration k (0-based)."""
        if k < 0:
            raise ValueError(f"iteration index must be nonnegative, got {k}")
        if self.kind == HARMONIC:
            return self.a / (k + 1)
        if self.kind == SQRT_DECAY:
            return self.a / math.sqrt(k + 1)
        if k >= len(self.values):
            raise ValueError(
                f"custom schedule of length {len(self.values)} exhausted at k={k}"
            )
        return self.values[k]
