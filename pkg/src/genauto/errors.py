"""Exception hierarchy shared by all genauto modules."""


class GenautoError(Exception):
    pass


class ShapeError(GenautoError, ValueError):
    """Operand dimensions do not line up."""


class AlgebraError(GenautoError, TypeError):
    """Operands live in different semirings."""


class ParameterError(GenautoError, ValueError):
    pass


class AlphabetError(GenautoError, ValueError):
    """A word uses a symbol outside the automaton's alphabet."""


class ComparabilityError(GenautoError, ValueError):
    """Two automata (or agents) cannot be compared: alphabet, size or semiring differ."""


class ConfigError(GenautoError, ValueError):
    pass
