"""Exceções do pacote mzfaber."""


class MZFaberError(Exception):
    """Erro base de todas as operações numéricas e de configuração."""


class DimensionError(MZFaberError, ValueError):
    pass


class NonFiniteError(MZFaberError, ValueError):
    pass


class MatrixOverflowError(MZFaberError, ArithmeticError):
    pass


class EigenvalueConvergenceError(MZFaberError):
    """O QR não convergiu; `partial` guarda os autovalores obtidos, marcados como inválidos."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EllipseMapError(MZFaberError, ValueError):
    pass


class BoundDomainError(MZFaberError, ValueError):
    pass


class ProjectionError(MZFaberError, ValueError):
    pass


class NearDegenerateSpectrumError(MZFaberError):
    pass


class UnsupportedFamilyError(MZFaberError, ValueError):
    pass


class SolverBlowUpError(MZFaberError):
    def __init__(self, message, last_valid_step):
        super().__init__(message)
        self.last_valid_step = last_valid_step


class InconclusiveOrderError(MZFaberError):
    pass


class IllConditionedBasisError(MZFaberError):
    pass


class ConfigError(MZFaberError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"linha {line}: {message}"
        super().__init__(message)
        self.line = line


class GridMismatchError(MZFaberError, ValueError):
    pass
