"""Stabilizing and estimating an unstable linear plant through a timing channel.

Information about the plant state travels only in the spacing of symbols sent
through a queue with random service delays. The modules follow the signal
path: ``plant`` (dynamics), ``channel`` (the timing channel), ``capacity``
(what the channel can carry), ``quantizer`` and ``codec`` (how ``X(0)`` is
turned into waiting times and back), ``control`` (estimation and
certainty-equivalent control) and ``harness`` (experiments).
"""
from .capacity import (CapacityResult, DiscretizedDist, capacity_exponential, capacity_numeric,
                       mutual_information)
from .channel import ChannelTrace, DelayModel, transmit
from .codec import Codebook, DecodeSchedule, ResourceError, build_codebook, ml_decode
from .control import ErrorBehavior, control_input
from .quantizer import BitPath, dequantize, quantize

__version__ = "0.1.0"

__all__ = [
    "CapacityResult", "DiscretizedDist", "capacity_exponential", "capacity_numeric",
    "mutual_information", "ChannelTrace", "DelayModel", "transmit", "Codebook",
    "DecodeSchedule", "ResourceError", "build_codebook", "ml_decode", "ErrorBehavior",
    "control_input", "BitPath", "dequantize", "quantize",
]
