"""Exception hierarchy. Every failure raised by the library derives from DefectForgeError."""


class DefectForgeError(Exception):
    pass


class EmptyRequest(DefectForgeError):
    pass


class InvalidRegion(DefectForgeError):
    pass


class TooFewGenerators(DefectForgeError):
    pass


class NoBoundaryVertex(DefectForgeError):
    pass


class Disconnected(DefectForgeError):
    pass


class InvalidDiscretization(DefectForgeError):
    pass


class InvalidPath(DefectForgeError):
    pass


class InvalidWidths(DefectForgeError):
    pass


class DegenerateCorner(DefectForgeError):
    pass


class DegenerateContour(DefectForgeError):
    pass


class InvalidParams(DefectForgeError):
    """Bad generator parameters. ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class GenerationFailed(DefectForgeError):
    pass


class NotClosed(DefectForgeError):
    pass


class BooleanError(DefectForgeError):
    pass


class OutOfBounds(DefectForgeError):
    pass


class MeshFormatError(DefectForgeError):
    pass


class ConfigError(DefectForgeError):
    pass
