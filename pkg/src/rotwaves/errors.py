"""Exception hierarchy shared by all solver modules."""


class WaveError(Exception):
    """Base class for every error raised by rotwaves."""


class DegenerateLambda(WaveError):
    """Surface velocity parameter is zero, so the uniform stream is trivial."""


class IntegrationFailure(WaveError):
    def __init__(self, message, y=None):
        super().__init__(message if y is None else f"{message} (at y={y:.6g})")
        self.y = y


class OutOfRange(WaveError):
    pass


class SolverFailure(WaveError):
    pass


class ResonantTau(WaveError):
    """Frequency sits on (or too close to) a resonance of the profile problem."""

    def __init__(self, tau, mu):
        super().__init__(f"tau={tau:.12g} is resonant with eigenvalue mu={mu:.12g}")
        self.tau = tau
        self.mu = mu


class NoBifurcation(WaveError):
    pass


class AmplitudeTooLarge(WaveError):
    pass


class OutOfDomain(WaveError):
    pass


class SurfaceTouchesBed(WaveError):
    pass


class NonzeroMean(WaveError):
    pass


class DegenerateMap(WaveError):
    pass


class DegenerateField(WaveError):
    """The horizontal velocity component vanishes identically."""


class NewtonFailure(WaveError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ConfigError(WaveError):
    pass
