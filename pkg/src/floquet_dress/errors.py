"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class DressError(Exception):
    exit_code = 1

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class InvalidArgumentError(DressError, ValueError):
    exit_code = 2


class ConfigError(DressError, ValueError):
    exit_code = 2


class NumericFailureError(DressError, ArithmeticError):
    exit_code = 3

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual

    def to_dict(self):
        d = super().to_dict()
        if self.residual is not None:
            d["residual"] = float(self.residual)
        return d


class SingularityError(NumericFailureError):
    """Field evaluated on a thin-wire axis."""


class DomainError(NumericFailureError):
    """Field evaluated inside a finite-width conductor."""


class DegenerateFrameError(NumericFailureError):
    """Static field vanishes; the dressing axis is undefined."""


class IntegrationFailureError(NumericFailureError):
    pass


class TopologyError(DressError):
    exit_code = 4

    def __init__(self, message, count=None, position=None):
        super().__init__(message)
        self.count = count
        self.position = position

    def to_dict(self):
        d = super().to_dict()
        if self.count is not None:
            d["count"] = int(self.count)
        if self.position is not None:
            d["position"] = [float(x) for x in self.position]
        return d


class TrackingError(TopologyError):
    pass


class LabelingAmbiguityError(DressError):
    exit_code = 4

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = list(pairs)

    def to_dict(self):
        d = super().to_dict()
        d["pairs"] = [list(map(float, p)) for p in self.pairs]
        return d


class DegenerateFitError(DressError):
    exit_code = 5


class FitNonConvergenceError(DressError):
    exit_code = 5
