"""Exception hierarchy. CLI exit codes are attached to the classes."""


class OrbitZetaError(Exception):
    exit_code = 1


class InvalidAlgebra(OrbitZetaError):
    exit_code = 1


class AntisymmetryViolation(InvalidAlgebra):
    def __init__(self, i, j, k):
        super().__init__(f"c[{i}][{j}][{k}] != -c[{j}][{i}][{k}]")
        self.triple = (i, j, k)


class JacobiViolation(InvalidAlgebra):
    def __init__(self, i, j, k):
        super().__init__(f"Jacobi identity fails on basis triple ({i}, {j}, {k})")
        self.triple = (i, j, k)


class SchemaError(InvalidAlgebra):
    def __init__(self, field, msg):
        super().__init__(f"{field}: {msg}")
        self.field = field


class NotPerfect(OrbitZetaError):
    exit_code = 2


class ResourceCapExceeded(OrbitZetaError):
    exit_code = 3


class HypothesisViolation(OrbitZetaError):
    exit_code = 4


class NotUniform(HypothesisViolation):
    pass


class SeriesDegreeExceeded(OrbitZetaError):
    exit_code = 3


class LevelOverflow(OrbitZetaError):
    pass


class NotAutomorphism(OrbitZetaError):
    def __init__(self, t, msg="not a Lie algebra automorphism"):
        super().__init__(f"automorphism {t}: {msg}")
        self.index = t


class NoFit(OrbitZetaError):
    pass


class InternalCheckFailed(OrbitZetaError):
    """Two independent routes disagreed. Always a bug, never a user error."""

    exit_code = 5


class OrbitSizeMismatch(InternalCheckFailed):
    pass


class OddExponent(InternalCheckFailed):
    pass


class IndexFormulaMismatch(InternalCheckFailed):
    pass


class ConeSelectionError(InternalCheckFailed):
    pass


class MismatchWithGaloisRoute(InternalCheckFailed):
    pass


class AlgebraSyntaxError(InvalidAlgebra):
    def __init__(self, msg, line, column):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column
