"""Exception hierarchy shared by every stage of the analysis pipeline."""

from __future__ import annotations


class AnalysisError(Exception):
    """Base class for every error the engine raises on bad input."""


class NetlistSyntaxError(AnalysisError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateElementId(AnalysisError):
    def __init__(self, element: str, line: int | None = None):
        self.element = element
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate element id {element!r}{where}")


class UnknownControlElement(AnalysisError):
    def __init__(self, element: str, control: str, reason: str = "no such element"):
        self.element = element
        self.control = control
        super().__init__(f"{element}: controlling element {control!r}: {reason}")


class MissingGroundNode(AnalysisError):
    def __init__(self, ground: str):
        self.ground = ground
        super().__init__(f"ground node {ground!r} is not a terminal of any element")


class DisconnectedCircuit(AnalysisError):
    def __init__(self, components: list[list[str]]):
        self.components = components
        parts = "; ".join("{" + ", ".join(c) + "}" for c in components)
        super().__init__(f"circuit is not connected: {len(components)} components: {parts}")


class UnsupportedNullor(AnalysisError):
    def __init__(self, elements: list[str]):
        self.elements = list(elements)
        super().__init__(
            f"nullor elements {', '.join(self.elements)} are not supported: "
            "there is no supernode notion under which the supernodal fill-in rules "
            "extend to nullators/norators; use supermesh analysis or MNA instead"
        )


class ShortedSource(AnalysisError):
    def __init__(self, element: str):
        self.element = element
        super().__init__(f"voltage branch {element!r} has both terminals on the same node")


class UnboundSymbol(AnalysisError):
    def __init__(self, symbol: str):
        self.symbol = symbol
        super().__init__(f"no binding for symbol {symbol!r}")


class NonpositiveAdmittance(AnalysisError):
    def __init__(self, symbol: str, value=None):
        self.symbol = symbol
        self.value = value
        super().__init__(f"admittance symbol {symbol!r} bound to non-positive value {value}")


class InvalidReferenceOverride(AnalysisError):
    pass


class KVLViolation(AnalysisError):
    def __init__(self, supernode: str, loop: list[str], residual):
        self.supernode = supernode
        self.loop = list(loop)
        self.residual = residual
        super().__init__(
            f"voltage-source loop {' '.join(self.loop)} in supernode {supernode} "
            f"violates KVL: residual {residual}"
        )


class ControlBranchNotTree(AnalysisError):
    def __init__(self, element: str, control: str):
        self.element = element
        self.control = control
        super().__init__(
            f"{element}: controlling branch {control!r} lies on a voltage-source loop; "
            "its current is not determined by the rooted-tree KCL argument"
        )


class CyclicControlDependency(AnalysisError):
    def __init__(self, symbols: list[str]):
        self.symbols = list(symbols)
        super().__init__(
            "cyclic control dependency with symbolic coefficients among "
            f"{', '.join(self.symbols)}; elimination would need rational functions"
        )


class SingularControlSystem(AnalysisError):
    def __init__(self, symbols: list[str]):
        self.symbols = list(symbols)
        super().__init__(
            f"control substitution system for {', '.join(self.symbols)} is singular"
        )


class SingularSystem(AnalysisError):
    def __init__(self, rank: int, size: int, reason: str = ""):
        self.rank = rank
        self.size = size
        extra = f": {reason}" if reason else ""
        super().__init__(f"singular system (rank {rank} of {size}){extra}")
