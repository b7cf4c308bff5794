"""Linear-optical KCBS contextuality simulator.

Single photons and coherent states are sent through five two-beam-splitter
networks with an on-off detector on mode 1; no-click events give the
sequential joint probabilities from which the KCBS quantities are built.
"""

from kcbs_optics.kcbs import KcbsResult, consistency_check, evaluate, kappa_from_correlators, s_from_tables
from kcbs_optics.measurement import (
    JointProbTable,
    MeasurementContext,
    Outcome,
    measure_observable,
    no_signaling_check,
    sequential_context,
)
from kcbs_optics.optics import (
    KcbsMeasurementFamily,
    TransferMatrix,
    apply_coherent,
    apply_single_photon,
    beam_splitter,
    bench_compile,
    hwp_pair,
    kcbs_unitary,
    optimal_family,
)
from kcbs_optics.states import (
    PhotonNumberMixture,
    SinglePhotonState,
    UnnormalizedCoherent,
    make_coherent,
    make_single_photon,
    norm_squared,
)

__all__ = [
    "JointProbTable",
    "KcbsMeasurementFamily",
    "KcbsResult",
    "MeasurementContext",
    "Outcome",
    "PhotonNumberMixture",
    "SinglePhotonState",
    "TransferMatrix",
    "UnnormalizedCoherent",
    "apply_coherent",
    "apply_single_photon",
    "beam_splitter",
    "bench_compile",
    "consistency_check",
    "evaluate",
    "hwp_pair",
    "kappa_from_correlators",
    "kcbs_unitary",
    "make_coherent",
    "make_single_photon",
    "measure_observable",
    "no_signaling_check",
    "norm_squared",
    "optimal_family",
    "s_from_tables",
    "sequential_context",
]
