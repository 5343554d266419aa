'''
Testing configuration file - provides fixtures, etc.
'''

# testing imports
import pytest

# code under test
from twoline import util
from twoline.claims import ClaimDistribution
from twoline.model import AggregateModel, DividendMode, LineSpec, ProblemSpec
from twoline.solver import normalize, solve

# thresholds read off the reference problems, each good to +/- 0.01
REFERENCE_THRESHOLDS = {
    "case_a": {"w0": 0.19, "u1": 0.24, "u2": 0.87},
    "case_b": {"u1": 0.17, "w0": 0.22, "u2": 0.57},
    "case_c": {"m0": 0.71, "u1": 0.09, "u2": 0.19},
    "uncapped_uniform": {"w0": 0.19, "u1": 0.52},
    "uncapped_exp": {"u1": 1.25},
}

def reference_model(cbar1=3.0, cbar2=2.0, mode=DividendMode.BOUNDED, a=0.3, dist1=None, dist2=None):
    '''
    The reference model: kappa = (4, 2), delta = 0.5, uniform claims on [0, 1]
    and [0, 1.5] unless other distributions are given.
    '''
    dist1 = dist1 or ClaimDistribution.uniform(1.0)
    dist2 = dist2 or ClaimDistribution.uniform(1.5)
    if mode is DividendMode.UNBOUNDED:
        cbar1 = cbar2 = None
    return AggregateModel(4.0, 2.0, 0.5, a, dist1, dist2, cbar1, cbar2, mode)

def reference_problem(cbar1=3.0, cbar2=2.0, a=0.3, mode=DividendMode.BOUNDED):
    '''
    The reference problem as a user states it.
    '''
    if mode is DividendMode.UNBOUNDED:
        cbar1 = cbar2 = None
    return ProblemSpec(LineSpec(4.0, ClaimDistribution.uniform(1.0), cbar1),
                       LineSpec(2.0, ClaimDistribution.uniform(1.5), cbar2), 0.5, a, mode, "reference")

@pytest.fixture(scope="module")
def problems():
    '''
    The five packaged problems, keyed by name.
    '''
    return {name: util.load_problem(util.packaged_problem(name)) for name in util.PACKAGED_PROBLEMS}

@pytest.fixture(scope="module")
def policies(problems): # pylint: disable=redefined-outer-name
    '''
    The solved policies of the five packaged problems, keyed by name.
    '''
    return {name: solve(normalize(problem)[0]) for name, problem in problems.items()}

@pytest.fixture(scope="module")
def case_a_policy(policies): # pylint: disable=redefined-outer-name
    '''
    Capped dividends with a reinsurance threshold below both dividend levels.
    '''
    return policies["case_a"]

@pytest.fixture(scope="module")
def case_b_policy(policies): # pylint: disable=redefined-outer-name
    '''
    Capped dividends with Line 2 paying before the reinsurance threshold.
    '''
    return policies["case_b"]

@pytest.fixture(scope="module")
def case_c_policy(policies): # pylint: disable=redefined-outer-name
    '''
    Capped dividends without a reinsurance threshold.
    '''
    return policies["case_c"]

@pytest.fixture(scope="module")
def uncapped_uniform_policy(policies): # pylint: disable=redefined-outer-name
    '''
    Unrestricted dividends with bounded claims.
    '''
    return policies["uncapped_uniform"]

@pytest.fixture(scope="module")
def uncapped_exp_policy(policies): # pylint: disable=redefined-outer-name
    '''
    Unrestricted dividends with exponential claims.
    '''
    return policies["uncapped_exp"]

@pytest.fixture
def model_factory():
    '''
    Provides reference_model for tests that vary the reference model.
    '''
    return reference_model

@pytest.fixture
def problem_factory():
    '''
    Provides reference_problem for tests that vary the reference problem.
    '''
    return reference_problem

@pytest.fixture
def reference_thresholds():
    '''
    Provides the thresholds read off the reference problems.
    '''
    return REFERENCE_THRESHOLDS
