"""Long-range entanglement witnesses for toric-code states under noise and shallow circuits."""

from .errors import (
    CapacityError,
    CircuitParseError,
    FrustratedError,
    InputError,
    LocalityError,
    PreconditionError,
    SizingError,
    TwistbenchError,
)
from .lattice import Boundary, Lattice, Region, Site, cover_with_disks, disk, distance, interior, thicken
from .pauli import Bipartition, PauliOp, commutes, pauli_mul, restrict, symplectic, twist_product, twist_sign
from .stabilizer import (
    Circuit,
    Gate,
    NoiseModel,
    StabilizerState,
    TrajectoryEnsemble,
    apply_circuit,
    ensemble_expectation,
    expectation,
    init_zero,
    random_local_circuit,
    sample_trajectory,
)
from .toric import (
    LoopPair,
    RestrictedCode,
    ToricCode,
    build_loop_pair,
    build_toric,
    energy,
    energy_density,
    ground_state,
    logical_z_operators,
    restricted,
)
from .witness import (
    BoundReport,
    GoodSubsystemReport,
    SandwichReport,
    WitnessReport,
    bound_report,
    covering_numbers,
    delta_bound,
    depth_lower_bound,
    printed_upper_bound,
    recommended_region_size,
    scan_good_subsystem,
    theorem2_bound,
    twist_pairing,
    verify_main_inequality,
    witness_lower_bound,
)

__version__ = "0.1.0"
