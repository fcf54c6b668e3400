"""Schmidt-decomposition quantum data compression."""
from .compressor import (
    CompressorModel,
    ReferencePolicy,
    RoundtripResult,
    build_compressor,
    build_state_preparation,
    compress,
    load_model,
    roundtrip,
    save_model,
    tomography_trash,
)
from .costmodel import CostReport, cnot_count, cost_of_model
from .schmidt import Bipartition, SchmidtForm, schmidt_decompose, search_min_bond, truncate

__version__ = "0.1.0"
