# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Exceptions raised by the library. The CLI maps them to exit codes.


class EKError(Exception):
    """ Base class for all the errors reported by ekwaves """


class ExpressionError(EKError, ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, msg, offset):
        super().__init__(f"{msg} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExpressionError):
    def __init__(self, name, offset):
        super().__init__(f"Unknown identifier `{name}` (at offset {offset})")
        self.name = name
        self.offset = offset


class ModelFileError(EKError, ValueError):
    pass


class ModelDomainError(EKError, ValueError):
    pass


class NoSolitaryWave(EKError):
    pass


class NoSubsonicWindow(NoSolitaryWave):
    pass


class SonicDegenerate(EKError):
    pass


class QuadratureError(EKError, RuntimeError):
    pass


class ConfigError(EKError, ValueError):
    pass


class SeamMismatchError(ConfigError):
    pass


class EvolutionAborted(EKError, RuntimeError):
    def __init__(self, reason, last_good_time):
        super().__init__(f"{reason} (last good time {last_good_time:.6g})")
        self.reason = reason
        self.last_good_time = last_good_time
