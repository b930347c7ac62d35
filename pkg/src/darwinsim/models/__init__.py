"""Model programs, reference equations and the energy estimate."""

from .energy import EnergyCoefficients, EnergyReport, estimate_energy
from .templates import GOLDEN_COUNTS, TEMPLATES, ModelTemplate, ParamSpec, TemplateError, get_template

__all__ = [
    "EnergyCoefficients",
    "EnergyReport",
    "GOLDEN_COUNTS",
    "ModelTemplate",
    "ParamSpec",
    "TEMPLATES",
    "TemplateError",
    "estimate_energy",
    "get_template",
]
