"""Python bindings for the fusionrec cross-domain recommender."""

from ._core import (
    CorruptFile,
    Domain,
    Engine,
    Error,
    FileNotFound,
    GenreEmbeddingModel,
    IncompatibleIndex,
    InvalidWeights,
    Item,
    Recommendation,
    TfidfModel,
    UnknownSeedId,
    clean,
    cosine,
    fallback_encode,
    load_catalog,
    tokenize,
)

__all__ = [
    "CorruptFile",
    "Domain",
    "Engine",
    "Error",
    "FileNotFound",
    "GenreEmbeddingModel",
    "IncompatibleIndex",
    "InvalidWeights",
    "Item",
    "Recommendation",
    "TfidfModel",
    "UnknownSeedId",
    "clean",
    "cosine",
    "fallback_encode",
    "load_catalog",
    "tokenize",
]
