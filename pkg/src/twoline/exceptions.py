'''
Error and Exception definitions.
'''

# core libraries
import logging

class TwoLineError(Exception):
    '''
    The parent error for all errors raised in the twoline code base. Also the
    stand-in error in cases for which a concrete, detailed error has not yet
    been defined.
    '''
    def __init__(self, message=None):
        if type(self) is TwoLineError: # pylint: disable=unidiomatic-typecheck
            logging.warning("TwoLineError should not be used long term - it should be a placeholder for an " \
                            "exception yet to be defined")
        super(TwoLineError, self).__init__(message)

class InitializationError(TwoLineError):
    '''
    Exception raised when there is an error in one of the startup processes,
    such as preparing the output directory.
    '''
    pass

class DomainError(TwoLineError):
    '''
    Exception raised when an argument lies outside the domain of an operation
    (negative retention, negative reserve, proportion outside (0, 1), ...).
    '''
    pass

class SingularInputError(DomainError):
    '''
    Exception raised when an operation would divide by a vanishing quantity,
    for example a zero limited mean or a zero aggregate variance.
    '''
    pass

class ModelInconsistencyError(TwoLineError):
    '''
    Exception raised when the model parameters break an assumption the
    closed-form solution relies on. The offending retention is kept on the
    error.
    '''
    def __init__(self, message=None, retention=None):
        super().__init__(message)
        self.retention = retention

class CaseClassificationError(TwoLineError):
    '''
    Exception raised when a bracket that the case analysis promises has no
    sign change, which means the model was routed to the wrong case.
    '''
    def __init__(self, message=None, case_tag=None):
        super().__init__(message)
        self.case_tag = case_tag

class ShootingError(CaseClassificationError):
    '''
    Exception raised when a retention trajectory leaves its admissible range
    before reaching its target, or a shooting map turns out not to be
    monotone.
    '''
    pass

class UnsupportedConfigurationError(TwoLineError):
    '''
    Exception raised when the problem cannot be normalized so that a <= 1/2
    and M2 / M1 >= kappa2 / kappa1 both hold.
    '''
    pass

class ContractViolationError(TwoLineError):
    '''
    Exception raised when a caller hands the strategy module a state that
    does not match the declared trigger.
    '''
    pass

class SimulationError(TwoLineError):
    '''
    Exception raised when a simulated path produces a non-finite value.
    '''
    pass

class ConfigurationError(TwoLineError):
    '''
    Exception raised when there is an error in the configuration process.
    '''
    pass

class ValidationError(ConfigurationError):
    '''
    Exception raised when a problem file or run configuration fails
    validation. The line number of the offending entry is kept when known.
    '''
    def __init__(self, message=None, line_number=None):
        if line_number is not None:
            message = "line {}: {}".format(line_number, message)
        super().__init__(message)
        self.line_number = line_number

class SolverError(TwoLineError):
    '''
    Exception raised when a numerical routine (quadrature, root finding or
    ODE integration) fails on an input it should handle. The original error
    is chained.
    '''
    pass
