"""Packet decomposition of Jaynes-Cummings inversion traces and photon-number retrieval."""

from .charfn import KGrid, chi_eval, chi_invert
from .inversion import (
    ComplexTrace,
    FrequencyMap,
    InversionTrace,
    TimeGrid,
    aligned_dt,
    auto_dt,
    complex_trace,
    even_extend,
    inversion_trace,
)
from .overlap import SolverOptions, build_fredholm_system, solve_w0, windowed_spectrum
from .packets import (
    PacketSet,
    Spectrum,
    auto_window,
    decompose,
    extract_packet_zero,
    ideal_packet_spectrum,
    packet_time_domain,
    propagate_packet,
    spectrum_of,
    sum_packets,
)
from .retrieval import RetrievalResult, retrieve_distribution, validate_retrieval
from .states import (
    CatParams,
    PhotonDistribution,
    cat_distribution,
    coherent_distribution,
    custom_distribution,
    fock_distribution,
    thermal_distribution,
)

__version__ = "0.1.0"
