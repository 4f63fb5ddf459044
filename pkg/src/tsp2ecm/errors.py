"""Exception hierarchy shared by all modules."""


class Tsp2ecmError(Exception):
    pass


class InstanceError(Tsp2ecmError, ValueError):
    """Invalid instance data (costs, dimensions, cuts)."""


class NegativeCost(InstanceError):
    def __init__(self, edge, cost):
        super().__init__(f"negative cost {cost} on edge {edge[0]}-{edge[1]}")
        self.edge = edge
        self.cost = cost


class TriangleViolation(InstanceError):
    def __init__(self, i, j, k, lhs, rhs):
        super().__init__(
            f"triangle inequality violated: c({i},{j}) = {lhs} > c({i},{k}) + c({k},{j}) = {rhs}"
        )
        self.triple = (i, j, k)


class AsymmetricInput(InstanceError):
    def __init__(self, i, j, a, b):
        super().__init__(f"asymmetric costs: c({i},{j}) = {a} but c({j},{i}) = {b}")
        self.edge = (i, j)


class BadDimension(InstanceError):
    pass


class DimensionMismatch(InstanceError):
    pass


class InvalidCut(InstanceError):
    pass


class DisconnectedGraph(InstanceError):
    pass


class InstanceSyntaxError(InstanceError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TooLarge(Tsp2ecmError):
    def __init__(self, n, bound, what="solver"):
        super().__init__(f"n={n} exceeds the {what} bound {bound}")
        self.n = n
        self.bound = bound


class Infeasible(Tsp2ecmError):
    pass


class SupportInsufficient(Tsp2ecmError):
    def __init__(self, dual):
        super().__init__(
            f"restricted dual reaches {dual.value}, below the primal value {dual.primal_value}"
        )
        self.dual = dual


class NoNonTourCrossing(Tsp2ecmError):
    pass


class NotIntervalCut(Tsp2ecmError):
    pass


class TooFewNonTourEdges(Tsp2ecmError):
    pass


class SegmentsOverlap(Tsp2ecmError):
    pass


class SegmentNotContiguous(Tsp2ecmError):
    def __init__(self, index):
        super().__init__(f"segment {index} is not a contiguous run of the tour")
        self.index = index


class ExhaustedResampling(Tsp2ecmError):
    pass


class ZeroLpValue(Tsp2ecmError):
    pass
