"""The two-band Zener system reduced to its single dimensionless parameter."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ZenerSystem:
    """Inter-band tunneling in a static field.

    Lengths are measured in the half tunneling length ``a = eps_g / (2 E0)``,
    times in ``t0 = a / c``, and everything else collapses into
    ``g = eps_g * t0 / hbar``.  A static exponent is ``pi * g / 2``.
    """

    g: float
    eps_g: float | None = None
    velocity: float | None = None
    field: float | None = None
    hbar: float | None = None

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")

    @classmethod
    def from_physical(cls, eps_g: float, velocity: float, field: float, hbar: float = 1.0) -> "ZenerSystem":
        a = eps_g / (2.0 * field)
        t0 = a / velocity
        return cls(g=eps_g * t0 / hbar, eps_g=eps_g, velocity=velocity, field=field, hbar=hbar)

    @property
    def length_unit(self) -> float | None:
        if self.eps_g is None or self.field is None:
            return None
        return self.eps_g / (2.0 * self.field)

    @property
    def time_unit(self) -> float | None:
        a = self.length_unit
        if a is None or self.velocity is None:
            return None
        return a / self.velocity

    @property
    def semiclassical(self) -> bool:
        # "g >> 1" read with a factor-10 margin
        return self.g >= 10.0
