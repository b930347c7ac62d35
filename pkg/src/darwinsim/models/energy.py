"""Chip power as idle + baseline + per-neuron + per-synaptic-event terms."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_SOP_ENERGY = 5.47  # pJ per synaptic operation at 0.8 V


@dataclass(frozen=True)
class EnergyCoefficients:
    P_I: float = 0.0
    P_B: float = 0.0
    P_N: float = 0.0
    P_S: float = DEFAULT_SOP_ENERGY
    unit: str = "pJ"

    def __post_init__(self):
        for name in ("P_I", "P_B", "P_N", "P_S"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "EnergyCoefficients":
        """From ``"PI,PB,PN,PS"``."""
        parts = [p for p in text.replace(" ", "").split(",")]
        if len(parts) != 4:
            raise ValueError("energy coefficients must be four comma-separated numbers PI,PB,PN,PS")
        return cls(*(float(p) for p in parts))


@dataclass(frozen=True)
class EnergyReport:
    total: float
    static: float
    neuron: float
    synaptic: float
    neurons: int
    sops: int
    duration: float
    per_sop: float
    unit: str

    @property
    def power(self) -> float:
        return self.total / self.duration if self.duration else 0.0

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "static": self.static,
            "neuron": self.neuron,
            "synaptic": self.synaptic,
            "neurons": self.neurons,
            "sops": self.sops,
            "duration": self.duration,
            "per_sop": self.per_sop,
            "power": self.power,
            "unit": self.unit,
        }


def estimate_energy(coeffs: EnergyCoefficients, n: int, s: int, duration: float = 1.0) -> EnergyReport:
    """Energy over ``duration`` time units with ``n`` active neurons and ``s`` synaptic events.

    The idle, baseline and neuron terms are rates integrated over the
    duration; the synaptic term is per event.  With ``duration == 1`` the
    total is ``P_I + P_B + P_N*n + P_S*s``.
    """
    if n < 0 or s < 0 or duration < 0:
        raise ValueError("neuron count, event count and duration must be non-negative")
    static = (coeffs.P_I + coeffs.P_B) * duration
    neuron = coeffs.P_N * n * duration
    synaptic = coeffs.P_S * s
    return EnergyReport(static + neuron + synaptic, static, neuron, synaptic, n, s, duration,
                        coeffs.P_S, coeffs.unit)


def marginal_energy_per_sop(coeffs: EnergyCoefficients, n: int = 0, s: int = 0, duration: float = 1.0) -> float:
    """Extra energy of one more synaptic event, measured through :func:`estimate_energy`."""
    return estimate_energy(coeffs, n, s + 1, duration).total - estimate_energy(coeffs, n, s, duration).total
