"""Path counting, residual matrices and limit distributions on weighted digraphs."""
from .errors import (
    CapExceededError,
    ConvergenceError,
    DegenerateError,
    InputError,
    InvalidPathError,
    NoPathError,
    NotUmbrellaError,
    NumericError,
    ParseError,
    PathlimError,
    PreconditionError,
    RangeError,
    UnknownVertexError,
)
from .fixtures import all_fixtures, fixture
from .graph import (
    WeightedDigraph,
    ZTable,
    matrix_power_apply,
    parse_digraph,
    path_weight,
    read_digraph,
    serialize_digraph,
    z_table,
)
from .limits import (
    CocycleKernel,
    ConvergenceReport,
    boltzmann_cylinder,
    boltzmann_limit_cylinder,
    cocycle_from_alpha,
    limit_kernel,
    uniform_convergence,
    uniform_cylinder,
    validate_cocycle_measure,
)
from .residual import (
    ResidualResult,
    SpectralDecomposition,
    block_extension,
    eigenvector_bases,
    growth_eval,
    periodic_decomposition,
    residual_matrix,
    residual_strongly_connected,
    residual_umbrella,
    umbrella_decomposition,
)
from .sampling import (
    SamplerConfig,
    SplitMix64,
    dump_paths,
    empirical_cylinder,
    sample_boltzmann,
    sample_limit_walk,
    sample_uniform,
)
from .spectral import perron_pair, period_class, transported_pairs
from .structure import (
    ClassDecomposition,
    HeightReport,
    access_classes,
    classify,
    decompose,
    height,
    is_augmented_umbrella,
    is_umbrella,
    reachable,
    spectral_radius,
    theta_support_predicate,
    umbrella_spanned,
)

__version__ = "0.1.0"
