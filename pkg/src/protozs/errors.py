"""Exception hierarchy; the CLI maps each class to an exit status."""


class ProtoZSError(Exception):
    exit_code = 2


class ConfigError(ProtoZSError):
    exit_code = 1


class DataError(ProtoZSError, ValueError):
    exit_code = 2


class UnknownWordError(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NumericalError(ProtoZSError, ArithmeticError):
    exit_code = 3
