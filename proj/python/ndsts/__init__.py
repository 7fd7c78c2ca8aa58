"""Sentence-pair similarity scored by a natural deduction prover.

Pairs of event-semantics logical forms are proved in both directions (with
lexical axiom injection and sub-goal skipping), turned into feature vectors,
and scored by a random-forest regressor.  The file-level functions mirror the
``ndsts`` command line tool and read/write the same formats.
"""

from ._ndsts import (
    CommandError,
    CorpusError,
    FormulaError,
    LexiconError,
    check,
    evaluate,
    explain,
    feature_names,
    features,
    predict,
    prove,
    prove_pair,
    string_similarity,
    train,
)

__all__ = [
    "CommandError",
    "CorpusError",
    "FormulaError",
    "LexiconError",
    "check",
    "evaluate",
    "explain",
    "feature_names",
    "features",
    "predict",
    "prove",
    "prove_pair",
    "string_similarity",
    "train",
]
