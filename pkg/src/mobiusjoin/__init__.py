"""Multi-relational sufficient statistics with negative relationships."""

from .applications import (
    AssociationRule,
    mine_rules,
    mutual_information,
    rank_features,
    score_loglikelihood,
)
from .ct import (
    ContingencyTable,
    CTError,
    add,
    condition,
    cross_product,
    extend_with_constant,
    project,
    read_ct,
    select,
    subtract,
    union_disjoint,
    write_ct,
)
from .database import DatabaseInstance, DataError, load_database, population_size, write_database
from .mobius import (
    ComplexityReport,
    build_ct_star,
    count_ops_bound,
    mobius_join,
    pivot,
)
from .oracle import OracleCapExceeded, compression_ratio, oracle_ct
from .positive import entity_ct, positive_chain_ct
from .schema import (
    NA,
    ChainLattice,
    RandomVariable,
    RelationshipChain,
    Schema,
    SchemaError,
    derive_random_variables,
    enumerate_chain_lattice,
    load_schema,
)

__version__ = "0.1.0"
