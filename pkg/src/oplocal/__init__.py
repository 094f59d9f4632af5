"""oplocal: exact finite-model checks for agents, secrecy and signalling.

Build agents as (indistinguishability partition, action monoid) pairs over
finite state spaces, decide secrecy and commutation properties exactly,
instantiate the probabilistic (channel/box) picture, and recover agent
geometry from first-signalling times.
"""

from .errors import (
    CapExceeded,
    DegenerateMatrix,
    IndexOutOfRange,
    InvariantViolation,
    LayoutError,
    NotCommuting,
    NotRefinement,
    PreconditionFailed,
    SizeMismatch,
    SpecError,
    WorkbenchError,
)
from .statespace import (
    DEFAULT_CAP,
    GeneratedMonoid,
    StateSpace,
    Transform,
    check_commute,
    closure,
    compose,
    generated,
    identity,
    orbit,
    power,
)
from .partitions import (
    Partition,
    UnionFind,
    discrete,
    factor,
    join,
    meet,
    reduce,
    refines,
    trivial,
)
from .secrecy import (
    Agent,
    SecrecyVerdict,
    Witness,
    check_extended_secrecy,
    check_restricted_inheritance,
    check_robustness_chain,
    check_secrecy,
    check_secrecy_commuting,
    check_secrecy_depth_limited,
    check_terminality,
    is_congruence,
)
from .derivation import (
    InducedPerspective,
    check_minimality,
    check_operationality,
    derive_secret_agents,
    derive_secret_general,
    induced_perspective,
    perceived_commutation,
)
from .gpt import (
    Channel,
    Dist,
    apply,
    channel_from_json,
    channel_to_json,
    check_gpt_extended_secrecy,
    check_ns_equivalence,
    check_traditional_ns,
    coarse_grain,
    named_box,
    tv_distance,
)
from .geometry import (
    DistanceMatrix,
    DynamicsFamily,
    Embedding,
    distance_matrix,
    embed,
    first_signalling_time,
    hop_distances,
    procrustes_rmse,
)
from .theoryspec import TheorySpec, load_theory, parse_theory

__version__ = "0.1.0"
