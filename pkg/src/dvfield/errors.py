"""Exception hierarchy shared by all dvfield modules."""


class DVFError(Exception):
    """Base class for every error raised by dvfield."""


class MeshError(DVFError, ValueError):
    pass


class DegenerateTriangle(MeshError):
    pass


class DanglingVertexIndex(MeshError):
    pass


class NonManifoldEdge(MeshError):
    pass


class DuplicateTriangle(MeshError):
    pass


class InvalidDimensions(MeshError):
    pass


class NoSuchEdge(DVFError, KeyError):
    pass


class NotAFacePair(DVFError, ValueError):
    pass


class MalformedPath(DVFError, ValueError):
    pass


class StalePath(DVFError):
    """The pairing changed since the path was traced."""


class IllegalReversal(DVFError, AssertionError):
    """A reversal would put one simplex into two pairs."""


class FieldError(DVFError, ValueError):
    pass


class UnknownGenerator(DVFError, ValueError):
    pass


class BadDomain(DVFError, ValueError):
    pass


class ParseError(DVFError, ValueError):
    pass


class NonTriangleCells(ParseError):
    pass


class MissingVectors(ParseError):
    pass


class TargetUnreachable(UserWarning):
    """Issued (not raised) when an iterative procedure misses its target."""
