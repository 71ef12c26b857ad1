"""blendcube: an in-memory OLAP engine with multigradual BLEND analysis."""

from .algebra import BlendRequest, Partition, blend, check_valid, compute_partition, display, drilldown, rollup, rotate
from .errors import (
    BlendcubeError,
    CommandError,
    ConstraintViolation,
    DataError,
    OperatorError,
    PredicateError,
    SchemaError,
    StrictnessError,
    UnknownValueError,
    ValidationError,
)
from .ingest import (
    build_sample_constellation,
    generate_bench_dataset,
    generate_sample_dataset,
    load_csv,
    load_dataset,
    load_schema,
    load_schema_text,
)
from .model import (
    Attribute,
    Constellation,
    Dimension,
    Fact,
    Hierarchy,
    Measure,
    dom,
    parent_of,
    select_instances,
    validate_constellation,
)
from .mtable import EMPTY, AxisSpec, BlendParameter, Grid, MTable, axis_strictness_report, evaluate, render_text
from .predicate import parse_predicate

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "Attribute",
    "BlendcubeError",
    "BlendParameter",
    "BlendRequest",
    "CommandError",
    "Constellation",
    "ConstraintViolation",
    "DataError",
    "Dimension",
    "EMPTY",
    "Fact",
    "Grid",
    "Hierarchy",
    "MTable",
    "Measure",
    "OperatorError",
    "Partition",
    "PredicateError",
    "SchemaError",
    "StrictnessError",
    "UnknownValueError",
    "ValidationError",
    "axis_strictness_report",
    "blend",
    "build_sample_constellation",
    "check_valid",
    "compute_partition",
    "display",
    "dom",
    "drilldown",
    "evaluate",
    "generate_bench_dataset",
    "generate_sample_dataset",
    "load_csv",
    "load_dataset",
    "load_schema",
    "load_schema_text",
    "parent_of",
    "parse_predicate",
    "render_text",
    "rollup",
    "rotate",
    "select_instances",
    "validate_constellation",
]
