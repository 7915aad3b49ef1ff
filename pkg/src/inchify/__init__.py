"""Chemical-identity-invariant molecular graph features.

Parse SMILES into mutable molecular graphs, normalize them with a
ten-step InChI-style workflow so that equivalent depictions of one
molecule converge to identical node/edge/graph invariants, and derive
sparse count fingerprints from either the standard daylight invariants
or the normalized ones.
"""

from .corpus import (ConfusionMatrix, CorpusRecord, compare_pairs,
                     equivalent_pairs, load_corpus, tanimoto_quantiles)
from .errors import (ChemError, CorpusError, FixpointError, GraphError,
                     KekulizationError, ParseError, PipelineError)
from .fingerprint import morgan_fingerprint, tanimoto
from .graph import Atom, Bond, MolGraph, perceive_rings, smallest_ring_size
from .kekulize import kekulize
from .pipeline import (InvariantSet, StepTrace, inchify, prepare_raw,
                       rule_table_json)
from .smiles import parse_smiles, write_smiles
from .stereo import assign_cip, filter_stereo

__version__ = "0.1.0"

__all__ = [
    "Atom", "Bond", "MolGraph", "InvariantSet", "StepTrace",
    "ConfusionMatrix", "CorpusRecord",
    "parse_smiles", "write_smiles", "kekulize", "perceive_rings",
    "smallest_ring_size", "inchify", "prepare_raw", "assign_cip",
    "filter_stereo", "morgan_fingerprint", "tanimoto",
    "load_corpus", "compare_pairs", "equivalent_pairs", "tanimoto_quantiles",
    "rule_table_json",
    "ChemError", "ParseError", "GraphError", "KekulizationError",
    "FixpointError", "PipelineError", "CorpusError",
]
