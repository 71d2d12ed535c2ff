"""Entanglement of projection, formation and assistance, and disentanglement-eraser circuits."""

from .circuits import (
    BasisParams,
    Gate,
    MeasurementResult,
    MeasurementSpec,
    TaggantBasis,
    apply_gate,
    measure,
    taggant_basis,
    tagger,
    untagger,
)
from .measures import (
    EntanglementReport,
    binary_entropy,
    concurrence_ef_oracle,
    entanglement_of_assistance,
    entanglement_of_formation,
    entanglement_of_projection,
    entanglement_pf,
    entanglement_pure,
    ep_closed_form,
)
from .state import (
    DensityMatrix,
    PartitionSpec,
    SchmidtDecomposition,
    StateVector,
    density_matrix,
    eigensolve_hermitian,
    partial_trace,
    schmidt_decompose,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "BasisParams",
    "DensityMatrix",
    "EntanglementReport",
    "Gate",
    "MeasurementResult",
    "MeasurementSpec",
    "PartitionSpec",
    "SchmidtDecomposition",
    "StateVector",
    "TaggantBasis",
    "apply_gate",
    "binary_entropy",
    "concurrence_ef_oracle",
    "density_matrix",
    "eigensolve_hermitian",
    "entanglement_of_assistance",
    "entanglement_of_formation",
    "entanglement_of_projection",
    "entanglement_pf",
    "entanglement_pure",
    "ep_closed_form",
    "measure",
    "partial_trace",
    "schmidt_decompose",
    "taggant_basis",
    "tagger",
    "tensor",
    "untagger",
]
