"""bdmc: compile backdoor decomposable monotone circuits into CNF encodings
with selectable propagation strength, and certify the result by brute force."""

from .core import (
    BdmcGraph,
    CnfFormula,
    LeafEncoding,
    Node,
    ValidationReport,
    VarScopeMap,
    build_graph,
    compute_scopes,
    enumerate_models,
    evaluate,
    leaf_spec,
    make_clause,
    minimal_subtrees,
    validate,
)
from .dualrail import MetaVarSpace, dual_rail, extended_dual_rail
from .encoder import (
    EncodingOutput,
    SizeStats,
    cardinality,
    circuit_clauses,
    compile_graph,
    leaf_clauses,
    separator_clauses,
    size_report,
)
from .engine import UpResult, brute_sat, unit_closure, unit_propagate
from .errors import (
    BdmcError,
    BudgetExceededError,
    InputError,
    ParseError,
    PreconditionError,
    StructureError,
)
from .formats import emit_dimacs, parse_bdmc, parse_dimacs, serialize_bdmc
from .propcheck import (
    LeafCertificate,
    StrengthVerdict,
    certify_formula,
    certify_leaf,
    check_encoding,
    check_strength,
    gen_random,
)
from .transform import (
    SeparatorCover,
    check_separator_cover,
    is_strictly_leveled,
    level,
    separator_cover,
    smooth,
)

__version__ = "0.1.0"
