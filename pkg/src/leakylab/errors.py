"""Exception types shared across the package."""


class ContractError(ValueError):
    """An operation was called with arguments that violate its preconditions."""


class LossOverflowError(OverflowError):
    """The exponential loss exponent left the representable range."""

    def __init__(self, sample: int, exponent: float):
        self.sample = sample
        self.exponent = exponent
        super().__init__(
            f"exponential loss overflow at sample {sample}: exponent {exponent:.6g} > 700"
        )


class DivergenceError(ArithmeticError):
    """Training produced a non-finite or exploding loss."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")


class DataError(ValueError):
    """Malformed or unusable input data."""


class ConvergenceError(RuntimeError):
    """A numerical iteration failed to converge."""
