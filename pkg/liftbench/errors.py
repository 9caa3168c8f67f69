## TITLE: liftbench error types
## CC: okzyrox
## LICENSE: MIT


class LiftbenchError(Exception):
    pass


## bad input / precondition

class DisconnectedInput(LiftbenchError, ValueError):
    pass

class UnbalancedBipartition(LiftbenchError, ValueError):
    pass

class SizeMismatch(LiftbenchError, ValueError):
    pass

class NotRegular(LiftbenchError, ValueError):
    pass

class ParityViolation(LiftbenchError, ValueError):
    pass

class OddFiberWithLoops(LiftbenchError, ValueError):
    pass

class MissingBase(LiftbenchError, ValueError):
    pass

class NotSymmetric(LiftbenchError, ValueError):
    pass

class Disconnected(LiftbenchError, ValueError):
    pass

class DepthCapExceeded(LiftbenchError, ValueError):
    pass

class SizeCapExceeded(LiftbenchError, ValueError):
    pass

class BaseMismatch(LiftbenchError, ValueError):
    pass

class LayoutMissing(LiftbenchError, ValueError):
    pass

class HardConstraintsViolated(LiftbenchError, ValueError):
    pass

class UnknownRow(LiftbenchError, ValueError):
    pass

class AdversaryViolation(LiftbenchError, ValueError):
    pass


## could not build the thing

class RetryCapExceeded(LiftbenchError, RuntimeError):
    pass

class CompletionFailed(LiftbenchError, RuntimeError):
    pass

class KernelMomentFailure(LiftbenchError, RuntimeError):
    pass

class RepairInfeasible(LiftbenchError, RuntimeError):
    pass

class SCapExceeded(LiftbenchError, RuntimeError):
    pass

class WitnessUnavailable(LiftbenchError, RuntimeError):
    pass
