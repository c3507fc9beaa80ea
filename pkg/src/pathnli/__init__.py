"""pathnli: answer multi-hop questions over a knowledge graph by textual
entailment over verbalized graph paths.

The pipeline: load a triple store, link question text to entities, enumerate
candidate answers and the paths connecting them to the question entities,
verbalize those paths into premise text and the question into a hypothesis,
then classify each premise-hypothesis pair with a hierarchical recurrent
encoder. A question's answer set is the set of candidates classified as
entailed.
"""

from .errors import (ConfigError, DataError, KGFormatError, ModelError,
                     PathNLIError, PHLFormatError, QAFormatError,
                     TemplateError, UnanswerableQuestionError,
                     UnlinkableQuestionError, UnsupportedQuestionError,
                     WordVectorFormatError)
from .kg import (Direction, KGFormat, KnowledgeGraph, Path, Step,
                 candidate_answers, enumerate_paths, load_triples,
                 load_triples_file, neighbors)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataError", "KGFormatError", "ModelError",
    "PathNLIError", "PHLFormatError", "QAFormatError", "TemplateError",
    "UnanswerableQuestionError", "UnlinkableQuestionError",
    "UnsupportedQuestionError", "WordVectorFormatError",
    "Direction", "KGFormat", "KnowledgeGraph", "Path", "Step",
    "candidate_answers", "enumerate_paths", "load_triples",
    "load_triples_file", "neighbors",
    "__version__",
]
