"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line driver:
1 for bad input, 2 for degenerate data, 3 for an internal invariant breach.
"""


class SirdError(Exception):
    exit_code = 3


class InputError(SirdError, ValueError):
    exit_code = 1


class DegenerateError(SirdError, ValueError):
    exit_code = 2


class InvariantViolation(SirdError, RuntimeError):
    exit_code = 3


# graph construction / queries
class SelfLoop(InputError):
    pass


class DuplicateEdge(InputError):
    pass


class NegativeWeight(InputError):
    pass


class VertexOutOfRange(InputError):
    pass


class OverlappingSets(InputError):
    pass


class ZeroVolume(DegenerateError):
    pass


class ZeroDegreeVertex(DegenerateError):
    pass


# embeddings
class MissingAction(InputError):
    pass


class DimensionTooLarge(InputError):
    pass


class DimensionTooSmall(InputError):
    pass


class PipelineDegenerate(DegenerateError):
    pass


class TooFewActions(PipelineDegenerate):
    pass


# sparsification
class EmptyGraph(DegenerateError):
    pass


class KOutOfRange(InputError):
    pass


class TooFewVertices(DegenerateError):
    pass


# encoding trees
class RootHasNoTerm(InputError):
    pass


class ZeroSubtreeVolume(DegenerateError):
    pass


class InvalidTree(InputError):
    pass


class InvalidNode(InputError):
    pass


class EmptyTree(DegenerateError):
    pass


# optimizer
class NotBrothers(InputError):
    pass


class LeafOperand(InputError):
    pass


class HeightCapExceeded(InputError):
    pass


class InvalidInitialTree(InputError):
    pass


# oracle
class GraphTooLarge(InputError):
    pass
