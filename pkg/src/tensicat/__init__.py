"""Stable equilibria and catastrophe sets of elastic tensegrity frameworks.

The toolkit computes all critical points of the constrained Hooke energy by
homotopy continuation, certifies stability through projected Hessians, and
encodes the catastrophe discriminant with pseudo-witness sets so that its
real, physically meaningful part can be sampled, intersected with control
paths, and explored interactively.
"""

from .expressions import (
    ExpressionSystem,
    VariableId,
    differentiate,
    hessian_of_scalar,
    jacobian,
)
from .frameworks import (
    ControlSlice,
    ElasticFramework,
    FrameworkModel,
    ParameterPartition,
    bundled_path,
    load_framework,
    load_framework_file,
)
from .tracking import (
    Homotopy,
    TrackerConfig,
    TrackedSolution,
    monodromy_solve,
    parameter_homotopy,
    solve_total_degree,
    total_degree_start,
    track_path,
)
from .stability import (
    SeedCache,
    StabilityReport,
    certify_stability,
    chamber_scan,
    equilibrium_degree,
    stability_set,
)
from .catastrophe import (
    PseudoWitnessSet,
    catastrophe_degree,
    intersect_slice,
    sample_catastrophe,
    witness_on_generic_line,
)
from .lifting import ControlPath, LiftResult, hysteresis_probe, lift_path, post_jump
from .oracles import make_oracle

__version__ = "0.1.0"
