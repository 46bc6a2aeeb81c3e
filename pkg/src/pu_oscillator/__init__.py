"""Pais-Uhlenbeck oscillator: classical dynamics, both quantizations and the equal-frequency limit."""
from .core import (FrequencyPair, OscillatorParams, Regime, RegimeError, classify_regime, degenerate_params,
                   frequencies, params_from_epsilon)

__all__ = ["FrequencyPair", "OscillatorParams", "Regime", "RegimeError", "classify_regime", "degenerate_params",
           "frequencies", "params_from_epsilon"]
__version__ = "0.1.0"
